use crate::wire::{DnsMessage, Rcode, RecordType, ResourceRecord};
use crate::zone::{SignedRrset, SignedZone, ZoneTree};

fn push_rrset(out: &mut Vec<ResourceRecord>, set: &SignedRrset, dnssec_ok: bool) {
    out.extend(set.records.iter().cloned());
    if dnssec_ok {
        out.extend(set.rrsigs.iter().cloned());
    }
}

fn negative(resp: &mut DnsMessage, zone: &SignedZone, dnssec_ok: bool) {
    if let Some(soa) = zone.rrset(zone.apex(), RecordType::SOA) {
        push_rrset(&mut resp.authority, soa, dnssec_ok);
    }
}

/// Answers one query from the tree. Never fails: malformed queries get
/// FORMERR, names outside every zone get REFUSED, missing names NXDOMAIN
/// and missing types an empty NOERROR. No denial-of-existence records are
/// produced.
pub fn answer_query(tree: &ZoneTree, query: &DnsMessage) -> DnsMessage {
    let mut resp = DnsMessage::response_to(query);
    if query.flags.qr {
        resp.rcode = Rcode::FORMERR;
        return resp;
    }
    if query.opcode != 0 {
        resp.rcode = Rcode(4); // NOTIMP
        return resp;
    }
    let [question] = query.questions.as_slice() else {
        resp.rcode = Rcode::FORMERR;
        return resp;
    };
    let (qname, qtype) = (&question.name, question.rtype);
    let dnssec_ok = query.dnssec_ok();

    let Some(zone) = tree.authoritative_zone(qname, qtype) else {
        resp.rcode = Rcode::REFUSED;
        return resp;
    };

    // Below a cut whose child zone is not in the tree: refer.
    if let Some(cut) = zone.delegation_for(qname) {
        let at_parent_side = qtype == RecordType::DS && qname == cut;
        if !at_parent_side {
            if let Some(ns) = zone.rrset(cut, RecordType::NS) {
                resp.authority.extend(ns.records.iter().cloned());
            }
            if let Some(ds) = zone.rrset(cut, RecordType::DS).filter(|_| dnssec_ok) {
                push_rrset(&mut resp.authority, ds, true);
            }
            return resp;
        }
    }

    resp.flags.aa = true;
    if let Some(set) = zone.rrset(qname, qtype) {
        push_rrset(&mut resp.answers, set, dnssec_ok);
        return resp;
    }
    let name_exists = zone.rrsets.keys().any(|(owner, _)| owner.is_subdomain_of(qname));
    if !name_exists {
        resp.rcode = Rcode::NXDOMAIN;
    }
    negative(&mut resp, zone, dnssec_ok);
    resp
}
