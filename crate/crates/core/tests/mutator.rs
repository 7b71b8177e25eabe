mod common;

use std::collections::BTreeSet;
use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use common::{n, small_fixture, NOW};
use dnssec_downgrade::dnssec::{verify_rrsig, AlgorithmNumber, AlgorithmSupport, KeyRole, Verification};
use dnssec_downgrade::harness::Fixture;
use dnssec_downgrade::mutator::{
    apply_rules, load_scenarios, proxy, proxy_with, save_scenarios, scenario, Action, MutationError, MutationRule,
    ProxyConfig, RuleMatch, ScenarioFixture, ScenarioId, UpstreamFailure, DEFAULT_ATTACKER_ADDRESS,
};
use dnssec_downgrade::net::{NetError, Transport, UdpTcpTransport};
use dnssec_downgrade::wire::{DnsMessage, Rcode, Rdata, RecordType, ResourceRecord, Section};
use dnssec_downgrade::zone::fixture::{default_zone_configs, UNSIGNED_APEX, VICTIM_APEX, VICTIM_TARGET};
use dnssec_downgrade::zone::{answer_query, serve, KeySpec};

const LOOPBACK: &str = "127.0.0.1:0";

fn authentic(f: &Fixture, name: &str, rtype: RecordType) -> DnsMessage {
    answer_query(&f.tree, &DnsMessage::query(42, n(name), rtype, true))
}

fn rrsig_algs(records: &[ResourceRecord], covered: RecordType) -> Vec<u8> {
    let mut algs: Vec<u8> = records
        .iter()
        .filter_map(|r| r.as_rrsig())
        .filter(|s| s.type_covered == covered)
        .map(|s| s.algorithm.0)
        .collect();
    algs.sort();
    algs
}

fn ds_algs(records: &[ResourceRecord]) -> BTreeSet<u8> {
    records.iter().filter_map(|r| r.as_ds()).map(|d| d.algorithm.0).collect()
}

fn addresses(records: &[ResourceRecord]) -> Vec<String> {
    records
        .iter()
        .filter_map(|r| match &r.rdata {
            Rdata::A { address } => Some(address.to_string()),
            _ => None,
        })
        .collect()
}

#[test]
fn no_rules_is_identity() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_TARGET, RecordType::A);
    assert_eq!(apply_rules(&msg, &[]).unwrap(), msg);
}

#[test]
fn s1_relabels_signatures_and_swaps_the_address() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_TARGET, RecordType::A);
    assert_eq!(rrsig_algs(&msg.answers, RecordType::A), vec![8, 13]);
    let s1 = f.scenario(ScenarioId::S1).unwrap();
    let out = apply_rules(&msg, &s1.rules).unwrap();
    assert_eq!(rrsig_algs(&out.answers, RecordType::A), vec![100, 100]);
    assert_eq!(addresses(&out.answers), vec![DEFAULT_ATTACKER_ADDRESS.to_string()]);
    assert_eq!(out.authority, msg.authority);
    assert_eq!((out.id, out.rcode, out.flags), (msg.id, msg.rcode, msg.flags));
}

#[test]
fn rules_leave_other_questions_alone() {
    let f = small_fixture();
    let s1 = f.scenario(ScenarioId::S1).unwrap();
    for (name, rtype) in
        [("victim.test.", RecordType::DNSKEY), (VICTIM_APEX, RecordType::DS), ("www.unsigned.test.", RecordType::A)]
    {
        let msg = authentic(f, name, rtype);
        assert_eq!(apply_rules(&msg, &s1.rules).unwrap(), msg, "{} {}", name, rtype);
    }
}

#[test]
fn s2_maps_ds_algorithms_to_unimplemented_ones() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_APEX, RecordType::DS);
    assert_eq!(ds_algs(&msg.answers), BTreeSet::from([8, 13]));
    let out = apply_rules(&msg, &f.scenario(ScenarioId::S2).unwrap().rules).unwrap();
    assert_eq!(ds_algs(&out.answers), BTreeSet::from([15, 16]));
    // key tags and digests survive untouched
    let tags = |m: &DnsMessage| {
        m.answers.iter().filter_map(|r| r.as_ds()).map(|d| (d.key_tag, d.digest.clone())).collect::<BTreeSet<_>>()
    };
    assert_eq!(tags(&out), tags(&msg));
}

#[test]
fn s2_splits_a_lone_ds_in_two() {
    let mut configs = default_zone_configs();
    let victim = configs.iter_mut().find(|c| c.apex == n(VICTIM_APEX)).unwrap();
    victim.keys = vec![
        KeySpec { algorithm: AlgorithmNumber(13), role: KeyRole::Ksk },
        KeySpec { algorithm: AlgorithmNumber(13), role: KeyRole::Zsk },
    ];
    let f = Fixture::from_configs(&configs, 3, NOW, 1024).unwrap();
    let msg = authentic(&f, VICTIM_APEX, RecordType::DS);
    assert_eq!(ds_algs(&msg.answers), BTreeSet::from([13]));
    let out = apply_rules(&msg, &f.scenario(ScenarioId::S2).unwrap().rules).unwrap();
    assert_eq!(ds_algs(&out.answers), BTreeSet::from([15, 16]));

    // single-algorithm zones cannot host S4; S3 swaps to the other implemented algorithm
    assert!(matches!(
        f.scenario(ScenarioId::S4),
        Err(dnssec_downgrade::harness::HarnessError::Mutation(MutationError::FixtureMismatch(_)))
    ));
    let out = apply_rules(&msg, &f.scenario(ScenarioId::S3).unwrap().rules).unwrap();
    assert_eq!(ds_algs(&out.answers), BTreeSet::from([8]));
}

#[test]
fn s3_leaves_no_ds_matching_its_key() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_APEX, RecordType::DS);
    let out = apply_rules(&msg, &f.scenario(ScenarioId::S3).unwrap().rules).unwrap();
    let before: Vec<_> = msg.answers.iter().filter_map(|r| r.as_ds()).map(|d| (d.key_tag, d.algorithm.0)).collect();
    let after: Vec<_> = out.answers.iter().filter_map(|r| r.as_ds()).map(|d| (d.key_tag, d.algorithm.0)).collect();
    assert_eq!(before.len(), after.len());
    for ((tag_a, alg_a), (tag_b, alg_b)) in before.iter().zip(&after) {
        assert_eq!(tag_a, tag_b);
        assert_ne!(alg_a, alg_b);
    }
    assert_eq!(ds_algs(&out.answers), BTreeSet::from([13, 16]));
}

#[test]
fn s4_strips_one_algorithm_and_relabels_the_other() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_TARGET, RecordType::A);
    let out = apply_rules(&msg, &f.scenario(ScenarioId::S4).unwrap().rules).unwrap();
    assert_eq!(rrsig_algs(&out.answers, RecordType::A), vec![100]);
}

#[test]
fn unsigned_victim_is_a_fixture_mismatch() {
    let f = small_fixture();
    let err = ScenarioFixture::from_tree(&f.tree, &n(UNSIGNED_APEX), &n("www.unsigned.test."), 1, NOW).unwrap_err();
    assert!(matches!(err, MutationError::FixtureMismatch(_)), "{:?}", err);
    let mut sf = f.scenario_fixture.clone();
    sf.ds.clear();
    for id in [ScenarioId::S2, ScenarioId::S3, ScenarioId::S5] {
        assert!(matches!(scenario(id, &sf), Err(MutationError::FixtureMismatch(_))), "{}", id);
    }
}

#[test]
fn required_rule_without_target_fails() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_TARGET, RecordType::A);
    let matcher = RuleMatch::new(n(VICTIM_APEX), RecordType::A, Section::Answer);
    let mut rule = MutationRule::new(matcher, Action::RewriteDsAlg { to: AlgorithmNumber(100) });
    let rules = vec![
        MutationRule::new(RuleMatch::new(n(VICTIM_APEX), RecordType::A, Section::Answer), Action::StripRrsigs),
        rule.clone(),
    ];
    assert!(matches!(apply_rules(&msg, &rules), Err(MutationError::RuleTargetAbsent { index: 1 })));
    rule.required = false;
    assert_eq!(apply_rules(&msg, &[rule]).unwrap(), msg);
}

#[test]
fn rewrite_respects_algorithm_filter() {
    let f = small_fixture();
    let msg = authentic(f, VICTIM_TARGET, RecordType::A);
    let rule = MutationRule::new(
        RuleMatch::new(n(VICTIM_APEX), RecordType::A, Section::Answer).with_algorithm(AlgorithmNumber(13)),
        Action::RewriteRrsigAlg { to: AlgorithmNumber(99) },
    );
    let out = apply_rules(&msg, &[rule]).unwrap();
    assert_eq!(rrsig_algs(&out.answers, RecordType::A), vec![8, 99]);
}

#[test]
fn scenario_file_round_trips() {
    let f = small_fixture();
    let all = f.scenarios().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenarios.json");
    save_scenarios(&path, &all).unwrap();
    assert_eq!(load_scenarios(&path).unwrap(), all);
    std::fs::write(&path, "{\"scenarios\": [{\"id\": 3}]}").unwrap();
    assert!(matches!(load_scenarios(&path), Err(MutationError::ScenarioFile(_))));
}

#[test]
fn s5_forgery_is_internally_consistent() {
    let f = small_fixture();
    let scn = f.scenario(ScenarioId::S5).unwrap();
    let attacker = f.scenario_fixture.attacker_key().unwrap();
    let support = AlgorithmSupport::full();
    let verify_all = |msg: &DnsMessage, rtype: RecordType| {
        let set: Vec<_> = msg.answers.iter().filter(|r| r.rtype() == rtype).cloned().collect();
        let sigs: Vec<_> =
            msg.answers.iter().filter_map(|r| r.as_rrsig()).filter(|s| s.type_covered == rtype).cloned().collect();
        assert_eq!(sigs.len(), 1, "{}", rtype);
        verify_rrsig(&set, &sigs[0], attacker.dnskey(), NOW, &support)
    };

    let keys = apply_rules(&authentic(f, VICTIM_APEX, RecordType::DNSKEY), &scn.rules).unwrap();
    let published: Vec<_> = keys.answers.iter().filter_map(|r| r.as_dnskey()).collect();
    assert_eq!(published, vec![attacker.dnskey()]);
    assert_eq!(verify_all(&keys, RecordType::DNSKEY), Verification::Valid);

    let a = apply_rules(&authentic(f, VICTIM_TARGET, RecordType::A), &scn.rules).unwrap();
    assert_eq!(addresses(&a.answers), vec![DEFAULT_ATTACKER_ADDRESS.to_string()]);
    assert_eq!(verify_all(&a, RecordType::A), Verification::Valid);

    let ds = apply_rules(&authentic(f, VICTIM_APEX, RecordType::DS), &scn.rules).unwrap();
    assert_eq!(ds_algs(&ds.answers), BTreeSet::from([100]));
}

fn loopback() -> SocketAddr {
    LOOPBACK.parse().unwrap()
}

#[test]
fn empty_proxy_relays_verbatim_and_s1_proxy_forges() {
    let f = small_fixture();
    let authority = serve(loopback(), f.tree.clone()).unwrap();
    let plain = proxy(loopback(), authority.local_addr(), vec![]).unwrap();
    let forging = proxy(loopback(), authority.local_addr(), f.scenario(ScenarioId::S1).unwrap().rules).unwrap();

    let direct = UdpTcpTransport::new(authority.local_addr());
    let via = UdpTcpTransport::new(plain.local_addr());
    for (name, rtype) in
        [(VICTIM_TARGET, RecordType::A), (VICTIM_APEX, RecordType::DNSKEY), ("test.", RecordType::DNSKEY)]
    {
        let q = DnsMessage::query(9, n(name), rtype, true);
        assert_eq!(via.exchange(&q).unwrap(), direct.exchange(&q).unwrap());
    }

    let q = DnsMessage::query(10, n(VICTIM_TARGET), RecordType::A, true);
    let forged = UdpTcpTransport::new(forging.local_addr()).exchange(&q).unwrap();
    assert_eq!(addresses(&forged.answers), vec![DEFAULT_ATTACKER_ADDRESS.to_string()]);
    assert_eq!(rrsig_algs(&forged.answers, RecordType::A), vec![100, 100]);
}

#[test]
fn dead_upstream_drops_or_servfails() {
    // reserve a port and free it so nothing answers there
    let dead = UdpSocket::bind(LOOPBACK).unwrap().local_addr().unwrap();
    let mut config = ProxyConfig::new(dead, vec![]);
    config.upstream_timeout = Duration::from_millis(200);
    let dropping = proxy_with(loopback(), config.clone()).unwrap();
    config.on_upstream_failure = UpstreamFailure::ServFail;
    let failing = proxy_with(loopback(), config).unwrap();

    let q = DnsMessage::query(11, n(VICTIM_TARGET), RecordType::A, true);
    let client = |addr| UdpTcpTransport { server: addr, timeout: Duration::from_millis(800) };
    let started = Instant::now();
    assert!(matches!(client(dropping.local_addr()).exchange(&q), Err(NetError::Timeout(_))));
    assert!(started.elapsed() >= Duration::from_millis(700));
    let resp = client(failing.local_addr()).exchange(&q).unwrap();
    assert_eq!(resp.rcode, Rcode::SERVFAIL);
    assert_eq!(resp.id, 11);
}
