use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dnssec::{key_tag, make_ds, verify_rrsig, AlgorithmClass, AlgorithmNumber, Verification};
use crate::net::Transport;
use crate::validator::{SecurityState, TrustAnchor, ValidatorPolicy};
use crate::wire::{DnsMessage, DnsName, Dnskey, Ds, Question, Rcode, RecordType, ResourceRecord, Rrsig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DsEvaluation {
    SupportedSubset(Vec<Ds>),
    NoneSupported,
    Empty,
}

/// Splits a DS RRset by whether the policy can use each record's algorithm
/// and digest type.
pub fn evaluate_ds_set(ds_rrset: &[Ds], policy: &ValidatorPolicy) -> DsEvaluation {
    if ds_rrset.is_empty() {
        return DsEvaluation::Empty;
    }
    let supported: Vec<Ds> = ds_rrset.iter().filter(|d| policy.ds_supported(d)).cloned().collect();
    if supported.is_empty() {
        DsEvaluation::NoneSupported
    } else {
        DsEvaluation::SupportedSubset(supported)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BogusReason {
    NoMatchingKey,
    NoValidSignature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkOutcome {
    /// The whole DNSKEY RRset, now trusted.
    Secure(Vec<Dnskey>),
    Bogus(BogusReason),
}

/// Checks that some key in `dnskey_rrset` hashes to `ds` and signs the
/// RRset.
pub fn validate_dnskey_link(
    ds: &Ds,
    dnskey_rrset: &[ResourceRecord],
    rrsigs: &[Rrsig],
    now: u64,
    policy: &ValidatorPolicy,
) -> LinkOutcome {
    let Some(owner) = dnskey_rrset.first().map(|r| &r.name) else {
        return LinkOutcome::Bogus(BogusReason::NoMatchingKey);
    };
    let matching: Vec<&Dnskey> = dnskey_rrset
        .iter()
        .filter_map(|r| r.as_dnskey())
        .filter(|k| make_ds(owner, k, ds.digest_type).is_ok_and(|d| &d == ds))
        .collect();
    if matching.is_empty() {
        return LinkOutcome::Bogus(BogusReason::NoMatchingKey);
    }
    let signed = matching.iter().any(|k| {
        rrsigs.iter().any(|s| verify_rrsig(dnskey_rrset, s, k, now, &policy.supported) == Verification::Valid)
    });
    if signed {
        LinkOutcome::Secure(dnskey_rrset.iter().filter_map(|r| r.as_dnskey().cloned()).collect())
    } else {
        LinkOutcome::Bogus(BogusReason::NoValidSignature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Fetch,
    TrustAnchor,
    DsSet,
    DsSignature,
    DnskeyLink,
    PolicyOverride,
    Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub zone: DnsName,
    pub step: StepKind,
    pub outcome: String,
}

impl std::fmt::Display for TraceStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let step = serde_json::to_value(self.step).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        write!(f, "{} {} {}", self.zone, step, self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Disposition {
    Answer { rcode: Rcode, records: Vec<ResourceRecord>, authenticated: bool },
    ServFail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub question: Question,
    pub state: SecurityState,
    pub disposition: Disposition,
    pub trace: Vec<TraceStep>,
    /// Set when the answer went unvalidated because the DS RRset named
    /// only algorithms the resolver lacks, which the standard permits.
    pub downgraded_by_spec: bool,
}

struct Cut {
    apex: DnsName,
    ds: DnsMessage,
    keys: DnsMessage,
}

struct Fetched {
    anchor_keys: DnsMessage,
    cuts: Vec<Cut>,
    target: DnsMessage,
}

fn ask(transport: &dyn Transport, name: &DnsName, rtype: RecordType) -> Result<DnsMessage, String> {
    let query = DnsMessage::query(rand::random(), name.clone(), rtype, true);
    let resp = transport.exchange(&query).map_err(|e| format!("{} {}: {}", name, rtype, e))?;
    if resp.id != query.id || resp.questions != query.questions {
        return Err(format!("{} {}: response does not match query", name, rtype));
    }
    Ok(resp)
}

/// Issues every query the walk needs before looking at any of the answers,
/// so the queries do not depend on the policy.
fn fetch(transport: &dyn Transport, question: &Question, anchor: &TrustAnchor) -> Result<Fetched, String> {
    let anchor_keys = ask(transport, &anchor.zone, RecordType::DNSKEY)?;
    let mut cuts = Vec::new();
    for name in question.name.descendants_from(&anchor.zone) {
        let ns = ask(transport, &name, RecordType::NS)?;
        let is_cut = ns.answers.iter().chain(&ns.authority).any(|r| r.rtype() == RecordType::NS && r.name == name);
        if is_cut {
            let ds = ask(transport, &name, RecordType::DS)?;
            let keys = ask(transport, &name, RecordType::DNSKEY)?;
            cuts.push(Cut { apex: name, ds, keys });
        }
    }
    let target = ask(transport, &question.name, question.rtype)?;
    Ok(Fetched { anchor_keys, cuts, target })
}

/// The records of one RRset in the answer section and the RRSIGs over it.
fn rrset(msg: &DnsMessage, owner: &DnsName, rtype: RecordType) -> (Vec<ResourceRecord>, Vec<Rrsig>) {
    let records = msg.answers.iter().filter(|r| &r.name == owner && r.rtype() == rtype).cloned().collect();
    let sigs = msg
        .answers
        .iter()
        .filter(|r| &r.name == owner)
        .filter_map(|r| r.as_rrsig())
        .filter(|s| s.type_covered == rtype)
        .cloned()
        .collect();
    (records, sigs)
}

fn alg_set<'a>(algs: impl Iterator<Item = &'a AlgorithmNumber>) -> BTreeSet<AlgorithmNumber> {
    algs.copied().collect()
}

fn fmt_algs(set: &BTreeSet<AlgorithmNumber>) -> String {
    let v: Vec<String> = set.iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

enum ZoneState {
    Secure { apex: DnsName, keys: Vec<Dnskey>, ds_algs: BTreeSet<AlgorithmNumber> },
    Insecure,
    Bogus,
}

enum SigCheck {
    Valid,
    Unverifiable,
    Invalid,
}

struct Walk<'a> {
    policy: &'a ValidatorPolicy,
    now: u64,
    trace: Vec<TraceStep>,
    downgraded: bool,
}

impl Walk<'_> {
    fn note(&mut self, zone: &DnsName, step: StepKind, outcome: impl Into<String>) {
        self.trace.push(TraceStep { zone: zone.clone(), step, outcome: outcome.into() });
    }

    fn has_unverifiable(&self, sigs: &[Rrsig]) -> bool {
        sigs.iter().any(|s| !self.policy.supported.is_implemented(s.algorithm))
    }

    fn verify_with(&self, records: &[ResourceRecord], sig: &Rrsig, keys: &[Dnskey]) -> Verification {
        match self.policy.supported.classify(sig.algorithm) {
            AlgorithmClass::Unknown => return Verification::AlgorithmUnknown,
            AlgorithmClass::KnownUnimplemented => return Verification::AlgorithmUnsupported,
            AlgorithmClass::Implemented => {}
        }
        let mut best = Verification::KeyMismatch;
        for k in keys.iter().filter(|k| key_tag(k) == sig.key_tag) {
            match verify_rrsig(records, sig, k, self.now, &self.policy.supported) {
                Verification::Valid => return Verification::Valid,
                Verification::KeyMismatch => {}
                other => best = other,
            }
        }
        best
    }

    /// Every RRSIG this resolver can check against the signer's keys must
    /// be valid, and there must be at least one.
    fn check_all(
        &self,
        records: &[ResourceRecord],
        sigs: &[Rrsig],
        keys: &[Dnskey],
        signer: &DnsName,
    ) -> (SigCheck, String) {
        let relevant: Vec<&Rrsig> = sigs
            .iter()
            .filter(|s| self.policy.supported.is_implemented(s.algorithm) && &s.signer_name == signer)
            .filter(|s| keys.iter().any(|k| key_tag(k) == s.key_tag && k.algorithm == s.algorithm))
            .collect();
        if relevant.is_empty() {
            return (SigCheck::Invalid, format!("no verifiable RRSIG among {}", sigs.len()));
        }
        for s in &relevant {
            let v = self.verify_with(records, s, keys);
            if v != Verification::Valid {
                return (SigCheck::Invalid, format!("RRSIG alg {} tag {}: {:?}", s.algorithm, s.key_tag, v));
            }
        }
        (SigCheck::Valid, format!("{} RRSIG(s) valid", relevant.len()))
    }

    /// At least one RRSIG must verify with the zone's keys.
    fn check_any(
        &self,
        records: &[ResourceRecord],
        sigs: &[Rrsig],
        keys: &[Dnskey],
        signer: &DnsName,
    ) -> (SigCheck, String) {
        let mut seen = Vec::new();
        for s in sigs {
            if &s.signer_name != signer {
                seen.push(format!("alg {} foreign signer", s.algorithm));
                continue;
            }
            let v = self.verify_with(records, s, keys);
            if v == Verification::Valid {
                return (SigCheck::Valid, format!("RRSIG alg {} tag {} valid", s.algorithm, s.key_tag));
            }
            seen.push(format!("alg {} tag {}: {:?}", s.algorithm, s.key_tag, v));
        }
        if sigs.is_empty() {
            return (SigCheck::Invalid, "no RRSIG".into());
        }
        let all_unverifiable = sigs.iter().all(|s| !self.policy.supported.is_implemented(s.algorithm));
        let state = if all_unverifiable { SigCheck::Unverifiable } else { SigCheck::Invalid };
        (state, seen.join("; "))
    }

    fn anchor(&mut self, anchor: &TrustAnchor, resp: &DnsMessage) -> ZoneState {
        let (keys, sigs) = rrset(resp, &anchor.zone, RecordType::DNSKEY);
        let ds_algs = alg_set(anchor.ds.iter().map(|d| &d.algorithm));
        let usable: Vec<&Ds> = anchor.ds.iter().filter(|d| self.policy.ds_supported(d)).collect();
        if usable.is_empty() {
            self.note(&anchor.zone, StepKind::TrustAnchor, "no usable anchor DS");
            return ZoneState::Bogus;
        }
        for ds in usable {
            if let LinkOutcome::Secure(keys) = validate_dnskey_link(ds, &keys, &sigs, self.now, self.policy) {
                self.note(
                    &anchor.zone,
                    StepKind::TrustAnchor,
                    format!("DNSKEY RRset matches anchor tag {}", ds.key_tag),
                );
                return ZoneState::Secure { apex: anchor.zone.clone(), keys, ds_algs };
            }
        }
        self.note(&anchor.zone, StepKind::TrustAnchor, "DNSKEY RRset does not match the anchor");
        ZoneState::Bogus
    }

    fn descend(&mut self, parent_apex: &DnsName, parent_keys: &[Dnskey], cut: &Cut) -> ZoneState {
        let apex = &cut.apex;
        let (ds_records, ds_sigs) = rrset(&cut.ds, apex, RecordType::DS);
        let ds: Vec<Ds> = ds_records.iter().filter_map(|r| r.as_ds().cloned()).collect();
        let ds_algs = alg_set(ds.iter().map(|d| &d.algorithm));
        let (key_records, key_sigs) = rrset(&cut.keys, apex, RecordType::DNSKEY);

        let supported = match evaluate_ds_set(&ds, self.policy) {
            DsEvaluation::Empty => {
                self.note(apex, StepKind::DsSet, "no DS, zone insecure");
                return ZoneState::Insecure;
            }
            DsEvaluation::NoneSupported => {
                self.note(
                    apex,
                    StepKind::DsSet,
                    format!("DS algorithms {} none supported, zone insecure", fmt_algs(&ds_algs)),
                );
                let (_, detail) = self.check_all(&ds_records, &ds_sigs, parent_keys, parent_apex);
                self.note(apex, StepKind::DsSignature, format!("not enforced: {}", detail));
                self.downgraded = true;
                return ZoneState::Insecure;
            }
            DsEvaluation::SupportedSubset(s) => s,
        };
        self.note(apex, StepKind::DsSet, format!("DS algorithms {}, {} usable", fmt_algs(&ds_algs), supported.len()));

        if self.policy.unknown_ds_is_insecure() && supported.len() < ds.len() {
            self.note(apex, StepKind::PolicyOverride, "unsupported DS present, zone treated as insecure");
            return ZoneState::Insecure;
        }
        if self.policy.skips_on_algorithm_mismatch() {
            let sig_algs = alg_set(key_sigs.iter().map(|s| &s.algorithm));
            if sig_algs != ds_algs {
                self.note(
                    apex,
                    StepKind::PolicyOverride,
                    format!(
                        "DNSKEY RRSIG algorithms {} differ from DS {}, validation skipped",
                        fmt_algs(&sig_algs),
                        fmt_algs(&ds_algs)
                    ),
                );
                return ZoneState::Insecure;
            }
        }
        if self.policy.unknown_rrsig_is_insecure() && self.has_unverifiable(&ds_sigs) {
            self.note(apex, StepKind::PolicyOverride, "unverifiable RRSIG over DS, treated as insecure");
            return ZoneState::Insecure;
        }
        let (check, detail) = self.check_all(&ds_records, &ds_sigs, parent_keys, parent_apex);
        self.note(apex, StepKind::DsSignature, detail);
        if !matches!(check, SigCheck::Valid) {
            return ZoneState::Bogus;
        }
        if self.policy.unknown_rrsig_is_insecure() && self.has_unverifiable(&key_sigs) {
            self.note(apex, StepKind::PolicyOverride, "unverifiable RRSIG over DNSKEY, treated as insecure");
            return ZoneState::Insecure;
        }

        let mut reason = BogusReason::NoMatchingKey;
        for d in &supported {
            match validate_dnskey_link(d, &key_records, &key_sigs, self.now, self.policy) {
                LinkOutcome::Secure(keys) => {
                    self.note(apex, StepKind::DnskeyLink, format!("DS tag {} alg {} secure", d.key_tag, d.algorithm));
                    return ZoneState::Secure { apex: apex.clone(), keys, ds_algs };
                }
                LinkOutcome::Bogus(r) => {
                    self.note(apex, StepKind::DnskeyLink, format!("DS tag {} alg {}: {:?}", d.key_tag, d.algorithm, r));
                    if r == BogusReason::NoValidSignature {
                        reason = r;
                    }
                }
            }
        }
        self.note(apex, StepKind::DnskeyLink, format!("bogus: {:?}", reason));
        ZoneState::Bogus
    }

    fn target(
        &mut self,
        zone: &ZoneState,
        question: &Question,
        resp: &DnsMessage,
    ) -> (SecurityState, Vec<ResourceRecord>) {
        let (records, sigs) = rrset(resp, &question.name, question.rtype);
        match zone {
            ZoneState::Bogus => (SecurityState::Bogus, records),
            _ if records.is_empty() => {
                self.note(&question.name, StepKind::Answer, format!("{} with no data, not validated", resp.rcode));
                (SecurityState::Insecure, records)
            }
            ZoneState::Insecure => {
                self.note(&question.name, StepKind::Answer, "insecure zone, not validated");
                (SecurityState::Insecure, records)
            }
            ZoneState::Secure { apex, keys, ds_algs } => {
                if self.policy.unknown_rrsig_is_insecure() && self.has_unverifiable(&sigs) {
                    self.note(
                        &question.name,
                        StepKind::PolicyOverride,
                        "unverifiable RRSIG, answer treated as insecure",
                    );
                    return (SecurityState::Insecure, records);
                }
                if self.policy.skips_on_algorithm_mismatch() {
                    let sig_algs = alg_set(sigs.iter().map(|s| &s.algorithm));
                    if &sig_algs != ds_algs {
                        self.note(
                            &question.name,
                            StepKind::PolicyOverride,
                            format!(
                                "RRSIG algorithms {} differ from DS {}, validation skipped",
                                fmt_algs(&sig_algs),
                                fmt_algs(ds_algs)
                            ),
                        );
                        return (SecurityState::Insecure, records);
                    }
                }
                let (check, detail) = self.check_any(&records, &sigs, keys, apex);
                self.note(&question.name, StepKind::Answer, detail);
                match check {
                    SigCheck::Valid => (SecurityState::Secure, records),
                    SigCheck::Unverifiable | SigCheck::Invalid => (SecurityState::Bogus, records),
                }
            }
        }
    }
}

/// Decides what the client gets for a final state.
pub fn dispose(
    state: SecurityState,
    rcode: Rcode,
    records: Vec<ResourceRecord>,
    policy: &ValidatorPolicy,
) -> Disposition {
    match state {
        SecurityState::Secure => Disposition::Answer { rcode, records, authenticated: true },
        SecurityState::Insecure => Disposition::Answer { rcode, records, authenticated: false },
        SecurityState::Bogus if policy.passes_bogus_through() => {
            Disposition::Answer { rcode: Rcode::NOERROR, records, authenticated: false }
        }
        SecurityState::Bogus | SecurityState::Indeterminate => Disposition::ServFail,
    }
}

/// Walks the chain of trust from `anchor` down to `question` and decides
/// what to answer under `policy`.
pub fn validate_name(
    question: &Question,
    transport: &dyn Transport,
    anchor: &TrustAnchor,
    policy: &ValidatorPolicy,
    now: u64,
) -> ValidationResult {
    let mut walk = Walk { policy, now, trace: Vec::new(), downgraded: false };
    let indeterminate = |mut walk: Walk, why: String| {
        walk.note(&question.name, StepKind::Fetch, why);
        ValidationResult {
            question: question.clone(),
            state: SecurityState::Indeterminate,
            disposition: Disposition::ServFail,
            trace: walk.trace,
            downgraded_by_spec: false,
        }
    };
    if !question.name.is_subdomain_of(&anchor.zone) {
        return indeterminate(walk, format!("outside trust anchor {}", anchor.zone));
    }
    let fetched = match fetch(transport, question, anchor) {
        Ok(f) => f,
        Err(e) => return indeterminate(walk, e),
    };

    let mut zone = walk.anchor(anchor, &fetched.anchor_keys);
    for cut in &fetched.cuts {
        zone = match &zone {
            ZoneState::Secure { apex, keys, .. } => walk.descend(&apex.clone(), &keys.clone(), cut),
            ZoneState::Insecure => {
                walk.note(&cut.apex, StepKind::DsSet, "below an insecure zone");
                ZoneState::Insecure
            }
            ZoneState::Bogus => break,
        };
    }
    let (state, records) = walk.target(&zone, question, &fetched.target);
    let rcode = fetched.target.rcode;
    ValidationResult {
        question: question.clone(),
        state,
        disposition: dispose(state, rcode, records, policy),
        downgraded_by_spec: walk.downgraded && state == SecurityState::Insecure,
        trace: walk.trace,
    }
}
