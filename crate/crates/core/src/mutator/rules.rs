use serde::{Deserialize, Serialize};

use crate::dnssec::{sign_rrset_with, AlgorithmNumber, KeyPair};
use crate::mutator::MutationError;
use crate::wire::{DnsMessage, DnsName, Dnskey, Rdata, RecordType, ResourceRecord, Section};

const ALL_SECTIONS: [Section; 3] = [Section::Answer, Section::Authority, Section::Additional];

/// Which responses a rule applies to, and which records in them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleMatch {
    /// The question name must be at or below this name; targeted records
    /// must be owned at or below it too.
    pub qname_suffix: DnsName,
    /// The question type must equal this. Also restricts which RRSIGs and
    /// RRsets are touched to those covering this type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrtype: Option<RecordType>,
    /// Section to act on; every section when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
    /// Only touch records whose algorithm field currently has this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmNumber>,
}

impl RuleMatch {
    pub fn new(qname_suffix: DnsName, rrtype: RecordType, section: Section) -> Self {
        RuleMatch { qname_suffix, rrtype: Some(rrtype), section: Some(section), algorithm: None }
    }

    pub fn with_algorithm(mut self, alg: AlgorithmNumber) -> Self {
        self.algorithm = Some(alg);
        self
    }

    pub fn matches_message(&self, msg: &DnsMessage) -> bool {
        msg.question()
            .is_some_and(|q| q.name.is_subdomain_of(&self.qname_suffix) && self.rrtype.is_none_or(|t| t == q.rtype))
    }

    pub fn sections(&self) -> Vec<Section> {
        self.section.map_or_else(|| ALL_SECTIONS.to_vec(), |s| vec![s])
    }

    fn owner_ok(&self, rr: &ResourceRecord) -> bool {
        rr.name.is_subdomain_of(&self.qname_suffix)
    }

    fn covers(&self, rr: &ResourceRecord) -> bool {
        self.owner_ok(rr) && self.rrtype.is_none_or(|t| rr.covered_type() == t)
    }

    fn alg_ok(&self, alg: AlgorithmNumber) -> bool {
        self.algorithm.is_none_or(|a| a == alg)
    }
}

/// A key an attacker signs with, together with the RRSIG fields it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resigner {
    pub key: KeyPair,
    pub signer: DnsName,
    pub inception: u32,
    pub expiration: u32,
}

impl Resigner {
    fn sign(&self, rrset: &[ResourceRecord]) -> Result<ResourceRecord, MutationError> {
        let sig = sign_rrset_with(rrset, &self.key, &self.signer, self.inception, self.expiration)?;
        Ok(ResourceRecord::new(rrset[0].name.clone(), rrset[0].ttl, Rdata::Rrsig(sig)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    /// Changes the algorithm field only; the signature bytes go stale.
    RewriteRrsigAlg {
        to: AlgorithmNumber,
    },
    RewriteDnskeyAlg {
        to: AlgorithmNumber,
    },
    RewriteDsAlg {
        to: AlgorithmNumber,
    },
    RewriteDsDigestType {
        to: u8,
    },
    RewriteDsKeyTag {
        to: u16,
    },
    InjectRecord {
        record: ResourceRecord,
        #[serde(default)]
        replace_existing: bool,
    },
    ReplaceDnskeyRrset {
        keys: Vec<Dnskey>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resign_with: Option<Resigner>,
    },
    StripRrsigs,
    /// Drops the RRSIGs over each targeted RRset and signs it afresh.
    ResignRrsets {
        resigner: Resigner,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationRule {
    #[serde(rename = "match")]
    pub matcher: RuleMatch,
    pub action: Action,
    /// With this set, a rule that matches the message but finds nothing to
    /// change is an error rather than a no-op.
    #[serde(default)]
    pub required: bool,
}

impl MutationRule {
    pub fn new(matcher: RuleMatch, action: Action) -> Self {
        MutationRule { matcher, action, required: true }
    }
}

/// Rewrites records in place; returns how many were touched.
fn rewrite_each(
    records: &mut [ResourceRecord],
    m: &RuleMatch,
    mut f: impl FnMut(&mut Rdata) -> Option<AlgorithmNumber>,
) -> usize {
    let mut hits = 0;
    for rr in records.iter_mut().filter(|rr| m.owner_ok(rr)) {
        let covered = rr.covered_type();
        let before = rr.rdata.clone();
        match f(&mut rr.rdata) {
            Some(alg) if m.alg_ok(alg) && m.rrtype.is_none_or(|t| covered == t || rr.rtype() != RecordType::RRSIG) => {
                hits += 1
            }
            _ => rr.rdata = before,
        }
    }
    hits
}

fn apply_one(msg: &mut DnsMessage, rule: &MutationRule) -> Result<usize, MutationError> {
    let m = &rule.matcher;
    let mut hits = 0;
    match &rule.action {
        Action::InjectRecord { record, replace_existing } => {
            let section = m.section.unwrap_or(Section::Answer);
            let records = msg.section_mut(section);
            if *replace_existing {
                records.retain(|rr| !(rr.name == record.name && rr.rtype() == record.rtype()));
            }
            records.push(record.clone());
            return Ok(1);
        }
        Action::ReplaceDnskeyRrset { keys, resign_with } => {
            for section in m.sections() {
                let records = msg.section_mut(section);
                let Some(first) = records.iter().find(|rr| rr.rtype() == RecordType::DNSKEY && m.owner_ok(rr)).cloned()
                else {
                    continue;
                };
                records.retain(|rr| !(rr.name == first.name && rr.covered_type() == RecordType::DNSKEY));
                let fresh: Vec<ResourceRecord> = keys
                    .iter()
                    .map(|k| ResourceRecord::new(first.name.clone(), first.ttl, Rdata::Dnskey(k.clone())))
                    .collect();
                if let (Some(resigner), false) = (resign_with, fresh.is_empty()) {
                    let sig = resigner.sign(&fresh)?;
                    records.extend(fresh);
                    records.push(sig);
                } else {
                    records.extend(fresh);
                }
                hits += 1;
            }
        }
        Action::ResignRrsets { resigner } => {
            for section in m.sections() {
                let records = msg.section_mut(section);
                let mut sets: Vec<(DnsName, RecordType)> = Vec::new();
                for rr in records.iter() {
                    let key = (rr.name.clone(), rr.rtype());
                    if rr.rtype() != RecordType::RRSIG && m.covers(rr) && !sets.contains(&key) {
                        sets.push(key);
                    }
                }
                for (owner, rtype) in sets {
                    records.retain(|rr| {
                        !(rr.name == owner && rr.rtype() == RecordType::RRSIG && rr.covered_type() == rtype)
                    });
                    let rrset: Vec<ResourceRecord> =
                        records.iter().filter(|rr| rr.name == owner && rr.rtype() == rtype).cloned().collect();
                    records.push(resigner.sign(&rrset)?);
                    hits += 1;
                }
            }
        }
        Action::StripRrsigs => {
            for section in m.sections() {
                let records = msg.section_mut(section);
                let before = records.len();
                records.retain(|rr| !(rr.as_rrsig().is_some_and(|s| m.alg_ok(s.algorithm)) && m.covers(rr)));
                hits += before - records.len();
            }
        }
        action => {
            for section in m.sections() {
                let records = msg.section_mut(section);
                hits += match action {
                    Action::RewriteRrsigAlg { to } => rewrite_each(records, m, |rd| match rd {
                        Rdata::Rrsig(s) => Some(std::mem::replace(&mut s.algorithm, *to)),
                        _ => None,
                    }),
                    Action::RewriteDnskeyAlg { to } => rewrite_each(records, m, |rd| match rd {
                        Rdata::Dnskey(k) => Some(std::mem::replace(&mut k.algorithm, *to)),
                        _ => None,
                    }),
                    Action::RewriteDsAlg { to } => rewrite_each(records, m, |rd| match rd {
                        Rdata::Ds(d) => Some(std::mem::replace(&mut d.algorithm, *to)),
                        _ => None,
                    }),
                    Action::RewriteDsDigestType { to } => rewrite_each(records, m, |rd| match rd {
                        Rdata::Ds(d) => {
                            d.digest_type = *to;
                            Some(d.algorithm)
                        }
                        _ => None,
                    }),
                    Action::RewriteDsKeyTag { to } => rewrite_each(records, m, |rd| match rd {
                        Rdata::Ds(d) => {
                            d.key_tag = *to;
                            Some(d.algorithm)
                        }
                        _ => None,
                    }),
                    _ => unreachable!("handled above"),
                };
            }
        }
    }
    Ok(hits)
}

/// Applies `rules` in order. Rules whose match does not fit the message's
/// question are skipped. Header counts follow from the section vectors, so
/// the result always encodes consistently.
pub fn apply_rules(msg: &DnsMessage, rules: &[MutationRule]) -> Result<DnsMessage, MutationError> {
    let mut out = msg.clone();
    for (index, rule) in rules.iter().enumerate() {
        if !rule.matcher.matches_message(&out) {
            continue;
        }
        let hits = apply_one(&mut out, rule)?;
        if hits == 0 && rule.required {
            return Err(MutationError::RuleTargetAbsent { index });
        }
    }
    Ok(out)
}
