mod common;

use std::net::{SocketAddr, UdpSocket};
use std::time::Duration;

use common::{n, small_fixture, NOW};
use dnssec_downgrade::dnssec::{make_ds, AlgorithmNumber, AlgorithmSupport};
use dnssec_downgrade::harness::Fixture;
use dnssec_downgrade::mutator::{apply_rules, proxy, MutationRule, ScenarioId, DEFAULT_ATTACKER_ADDRESS};
use dnssec_downgrade::net::{InProcessTransport, RecordingTransport, Transport, UdpTcpTransport};
use dnssec_downgrade::validator::{
    dispose, evaluate_ds_set, render_response, serve_resolver, validate_dnskey_link, validate_name, BogusReason, Clock,
    Disposition, DsEvaluation, LinkOutcome, PolicyName, SecurityState, StepKind, ValidationResult, ValidatorPolicy,
};
use dnssec_downgrade::wire::{DnsMessage, Ds, Question, Rcode, Rdata, RecordType, ResourceRecord};
use dnssec_downgrade::zone::fixture::{UNSIGNED_ADDRESS, VICTIM_APEX, VICTIM_TARGET};
use dnssec_downgrade::zone::{answer_query, serve};

fn attacked(f: &Fixture, rules: Vec<MutationRule>) -> impl Transport + '_ {
    InProcessTransport(move |q: &DnsMessage| {
        let resp = answer_query(&f.tree, q);
        apply_rules(&resp, &rules).unwrap_or(resp)
    })
}

fn policy(name: PolicyName) -> ValidatorPolicy {
    // the default command-line profile: no EdDSA
    ValidatorPolicy::new(name, AlgorithmSupport::without_eddsa())
}

fn run(f: &Fixture, rules: Vec<MutationRule>, name: &str, p: &ValidatorPolicy) -> ValidationResult {
    validate_name(&Question::new(n(name), RecordType::A), &attacked(f, rules), &f.anchor, p, NOW)
}

fn addresses(d: &Disposition) -> Vec<String> {
    match d {
        Disposition::Answer { records, .. } => records
            .iter()
            .filter_map(|r| match &r.rdata {
                Rdata::A { address } => Some(address.to_string()),
                _ => None,
            })
            .collect(),
        Disposition::ServFail => vec![],
    }
}

#[test]
fn intact_chain_is_secure_under_every_policy() {
    let f = small_fixture();
    for name in PolicyName::ALL {
        let r = run(f, vec![], VICTIM_TARGET, &policy(name));
        assert_eq!(r.state, SecurityState::Secure, "{}: {:#?}", name.as_str(), r.trace);
        assert!(matches!(r.disposition, Disposition::Answer { authenticated: true, .. }));
        assert_eq!(addresses(&r.disposition), vec!["192.0.2.1"]);
        assert!(!r.downgraded_by_spec);
    }
}

#[test]
fn unsigned_delegation_is_insecure() {
    let f = small_fixture();
    let r = run(f, vec![], "www.unsigned.test.", &policy(PolicyName::Strict));
    assert_eq!(r.state, SecurityState::Insecure);
    assert_eq!(addresses(&r.disposition), vec![UNSIGNED_ADDRESS.to_string()]);
    assert!(matches!(r.disposition, Disposition::Answer { authenticated: false, .. }));
    assert!(!r.downgraded_by_spec, "no DS at all is not an algorithm downgrade");
}

#[test]
fn expired_signatures_fail_closed() {
    let f = small_fixture();
    let q = Question::new(n(VICTIM_TARGET), RecordType::A);
    let later = NOW + 60 * 86_400;
    let r = validate_name(&q, &attacked(f, vec![]), &f.anchor, &policy(PolicyName::Strict), later);
    assert_eq!(r.state, SecurityState::Bogus);
    assert_eq!(r.disposition, Disposition::ServFail);
}

#[test]
fn s1_strict_fails_v1_accepts_forgery() {
    let f = small_fixture();
    let rules = f.scenario(ScenarioId::S1).unwrap().rules;
    let strict = run(f, rules.clone(), VICTIM_TARGET, &policy(PolicyName::Strict));
    assert_eq!(strict.state, SecurityState::Bogus);
    assert_eq!(strict.disposition, Disposition::ServFail);

    let v1 = run(f, rules, VICTIM_TARGET, &policy(PolicyName::V1UnknownRrsig));
    assert_eq!(v1.state, SecurityState::Insecure);
    assert_eq!(addresses(&v1.disposition), vec![DEFAULT_ATTACKER_ADDRESS.to_string()]);
    assert!(matches!(v1.disposition, Disposition::Answer { rcode: Rcode::NOERROR, authenticated: false, .. }));
    assert!(v1.trace.iter().any(|s| s.step == StepKind::PolicyOverride));
}

#[test]
fn ds_set_evaluation() {
    let p = policy(PolicyName::Strict);
    let ds =
        |alg: u8, digest_type: u8| Ds { key_tag: 1, algorithm: AlgorithmNumber(alg), digest_type, digest: vec![0; 32] };
    assert_eq!(evaluate_ds_set(&[], &p), DsEvaluation::Empty);
    assert_eq!(evaluate_ds_set(&[ds(100, 2), ds(16, 2)], &p), DsEvaluation::NoneSupported);
    // digest type 1 is not implemented here
    assert_eq!(evaluate_ds_set(&[ds(8, 1)], &p), DsEvaluation::NoneSupported);
    assert_eq!(evaluate_ds_set(&[ds(15, 2)], &p), DsEvaluation::NoneSupported);
    assert_eq!(
        evaluate_ds_set(&[ds(15, 2)], &ValidatorPolicy::new(PolicyName::Strict, AlgorithmSupport::full())),
        DsEvaluation::SupportedSubset(vec![ds(15, 2)])
    );
    assert_eq!(evaluate_ds_set(&[ds(13, 2), ds(100, 2), ds(8, 1)], &p), DsEvaluation::SupportedSubset(vec![ds(13, 2)]));
}

#[test]
fn dnskey_link_outcomes() {
    let f = small_fixture();
    let p = policy(PolicyName::Strict);
    let victim = f.tree.zone(&n(VICTIM_APEX)).unwrap();
    let set = victim.rrset(&n(VICTIM_APEX), RecordType::DNSKEY).unwrap();
    let sigs: Vec<_> = set.rrsigs.iter().filter_map(|r| r.as_rrsig().cloned()).collect();
    let ds = victim.ds_published[0].clone();

    match validate_dnskey_link(&ds, &set.records, &sigs, NOW, &p) {
        LinkOutcome::Secure(keys) => assert_eq!(keys.len(), set.records.len()),
        other => panic!("{:?}", other),
    }
    let mut wrong = ds.clone();
    wrong.digest[0] ^= 0xff;
    assert_eq!(
        validate_dnskey_link(&wrong, &set.records, &sigs, NOW, &p),
        LinkOutcome::Bogus(BogusReason::NoMatchingKey)
    );
    assert_eq!(
        validate_dnskey_link(&ds, &set.records, &[], NOW, &p),
        LinkOutcome::Bogus(BogusReason::NoValidSignature)
    );
    assert_eq!(validate_dnskey_link(&ds, &[], &sigs, NOW, &p), LinkOutcome::Bogus(BogusReason::NoMatchingKey));

    // a DS for a ZSK matches, but the ZSK never signs the DNSKEY RRset
    let zsk = set.records.iter().filter_map(|r| r.as_dnskey()).find(|k| !k.is_sep()).unwrap();
    let zsk_ds = make_ds(&n(VICTIM_APEX), zsk, 2).unwrap();
    assert_eq!(
        validate_dnskey_link(&zsk_ds, &set.records, &sigs, NOW, &p),
        LinkOutcome::Bogus(BogusReason::NoValidSignature)
    );
}

#[test]
fn dispose_and_render() {
    let strict = policy(PolicyName::Strict);
    let v3 = policy(PolicyName::V3BogusPassthrough);
    let rec = vec![ResourceRecord::new(n("a.test."), 60, Rdata::A { address: "192.0.2.9".parse().unwrap() })];
    assert_eq!(dispose(SecurityState::Bogus, Rcode::NOERROR, rec.clone(), &strict), Disposition::ServFail);
    assert_eq!(
        dispose(SecurityState::Bogus, Rcode::NOERROR, rec.clone(), &v3),
        Disposition::Answer { rcode: Rcode::NOERROR, records: rec.clone(), authenticated: false }
    );
    assert_eq!(dispose(SecurityState::Indeterminate, Rcode::NOERROR, rec.clone(), &v3), Disposition::ServFail);
    assert_eq!(
        dispose(SecurityState::Secure, Rcode::NXDOMAIN, vec![], &strict),
        Disposition::Answer { rcode: Rcode::NXDOMAIN, records: vec![], authenticated: true }
    );

    let query = DnsMessage::query(77, n("a.test."), RecordType::A, true);
    let mut result = ValidationResult {
        question: query.questions[0].clone(),
        state: SecurityState::Secure,
        disposition: Disposition::Answer { rcode: Rcode::NOERROR, records: rec.clone(), authenticated: true },
        trace: vec![],
        downgraded_by_spec: false,
    };
    let ok = render_response(&result, &query);
    assert_eq!((ok.id, ok.flags.qr, ok.flags.ra, ok.flags.ad, ok.rcode), (77, true, true, true, Rcode::NOERROR));
    assert_eq!(ok.answers, rec);
    result.disposition = Disposition::ServFail;
    let fail = render_response(&result, &query);
    assert_eq!((fail.rcode, fail.flags.ad, fail.answers.len()), (Rcode::SERVFAIL, false, 0));
}

#[test]
fn eddsa_capable_profile_changes_s2() {
    let f = small_fixture();
    let rules = f.scenario(ScenarioId::S2).unwrap().rules;
    let full = |name| ValidatorPolicy::new(name, AlgorithmSupport::full());

    // without Ed25519 both DS records are unusable, the standard's insecure path
    let narrow = run(f, rules.clone(), VICTIM_TARGET, &policy(PolicyName::Strict));
    assert_eq!(narrow.state, SecurityState::Insecure);
    assert!(narrow.downgraded_by_spec);

    let strict = run(f, rules.clone(), VICTIM_TARGET, &full(PolicyName::Strict));
    assert_eq!(strict.disposition, Disposition::ServFail);
    assert!(!strict.downgraded_by_spec);

    let v2 = run(f, rules, VICTIM_TARGET, &full(PolicyName::V2UnknownDs));
    assert_eq!(addresses(&v2.disposition), vec![DEFAULT_ATTACKER_ADDRESS.to_string()]);
}

#[test]
fn policies_issue_identical_queries() {
    let f = small_fixture();
    for id in [ScenarioId::S1, ScenarioId::S3, ScenarioId::S5] {
        let rules = f.scenario(id).unwrap().rules;
        let mut logs = Vec::new();
        for name in PolicyName::ALL {
            let t = RecordingTransport::new(attacked(f, rules.clone()));
            validate_name(&Question::new(n(VICTIM_TARGET), RecordType::A), &t, &f.anchor, &policy(name), NOW);
            logs.push(t.questions());
        }
        assert!(logs.windows(2).all(|w| w[0] == w[1]), "{}: {:?}", id, logs);
        let types: Vec<RecordType> = logs[0].iter().map(|q| q.rtype).collect();
        assert_eq!(
            types,
            vec![RecordType::DNSKEY, RecordType::NS, RecordType::DS, RecordType::DNSKEY, RecordType::NS, RecordType::A]
        );
    }
}

#[test]
fn unreachable_upstream_is_indeterminate() {
    let f = small_fixture();
    let dead = UdpSocket::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let t = UdpTcpTransport { server: dead, timeout: Duration::from_millis(200) };
    let q = Question::new(n(VICTIM_TARGET), RecordType::A);
    let r = validate_name(&q, &t, &f.anchor, &policy(PolicyName::V3BogusPassthrough), NOW);
    assert_eq!(r.state, SecurityState::Indeterminate);
    assert_eq!(r.disposition, Disposition::ServFail);

    let outside = Question::new(n("example.org."), RecordType::A);
    let r = validate_name(&outside, &attacked(f, vec![]), &f.anchor, &policy(PolicyName::Strict), NOW);
    assert_eq!(r.state, SecurityState::Indeterminate);
}

#[test]
fn resolver_service_end_to_end() {
    let f = small_fixture();
    let any: SocketAddr = "127.0.0.1:0".parse().unwrap();
    let authority = serve(any, f.tree.clone()).unwrap();
    let mitm = proxy(any, authority.local_addr(), f.scenario(ScenarioId::S1).unwrap().rules).unwrap();
    let clock = Clock::Fixed(NOW);
    let honest =
        serve_resolver(any, authority.local_addr(), f.anchor.clone(), policy(PolicyName::Strict), clock).unwrap();
    let strict = serve_resolver(any, mitm.local_addr(), f.anchor.clone(), policy(PolicyName::Strict), clock).unwrap();
    let weak =
        serve_resolver(any, mitm.local_addr(), f.anchor.clone(), policy(PolicyName::V1UnknownRrsig), clock).unwrap();

    let q = DnsMessage::query(5, n(VICTIM_TARGET), RecordType::A, true);
    let ask = |addr| UdpTcpTransport::new(addr).exchange(&q).unwrap();

    let r = ask(honest.local_addr());
    assert_eq!((r.rcode, r.flags.ad, r.flags.ra), (Rcode::NOERROR, true, true));
    let r = ask(strict.local_addr());
    assert_eq!((r.rcode, r.flags.ad, r.answers.len()), (Rcode::SERVFAIL, false, 0));
    let r = ask(weak.local_addr());
    assert_eq!((r.rcode, r.flags.ad), (Rcode::NOERROR, false));
    assert!(r.answers.iter().any(|rr| rr.rdata == Rdata::A { address: DEFAULT_ATTACKER_ADDRESS }));
}
