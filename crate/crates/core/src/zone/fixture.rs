use crate::dnssec::{AlgorithmNumber, KeyRole};
use crate::wire::{DnsName, RecordType};
use crate::zone::{ChildSpec, DsPolicy, KeySpec, RecordSpec, ZoneConfig};

pub const DEFAULT_PORT: u16 = 5300;

pub const ROOT_APEX: &str = "test.";
pub const VICTIM_APEX: &str = "victim.test.";
pub const UNSIGNED_APEX: &str = "unsigned.test.";
pub const VICTIM_TARGET: &str = "www.victim.test.";
pub const UNSIGNED_TARGET: &str = "www.unsigned.test.";
pub const VICTIM_ADDRESS: &str = "192.0.2.1";
pub const UNSIGNED_ADDRESS: &str = "192.0.2.2";

fn name(s: &str) -> DnsName {
    s.parse().expect("fixture names are valid")
}

fn rec(owner: &str, rtype: RecordType, data: &[&str]) -> RecordSpec {
    RecordSpec { owner: name(owner), rtype, ttl: 300, data: data.iter().map(|d| d.to_string()).collect() }
}

fn apex_records(apex: &str) -> Vec<RecordSpec> {
    let ns = format!("ns.{}", apex);
    vec![
        rec(apex, RecordType::SOA, &[&format!("{} hostmaster.{} 2024010101 7200 3600 1209600 300", ns, apex)]),
        rec(apex, RecordType::NS, &[&ns]),
    ]
}

fn keys(algs: &[u8]) -> Vec<KeySpec> {
    algs.iter()
        .flat_map(|&a| [KeyRole::Ksk, KeyRole::Zsk].map(|role| KeySpec { algorithm: AlgorithmNumber(a), role }))
        .collect()
}

/// The three-zone testbed: `test.` is the trust anchor (RSA/SHA-256),
/// `victim.test.` is signed with both RSA/SHA-256 and ECDSA P-256 and has
/// DS records for both, and `unsigned.test.` has no keys and no DS.
pub fn default_zone_configs() -> Vec<ZoneConfig> {
    let mut root_records = apex_records(ROOT_APEX);
    root_records.push(rec("ns.test.", RecordType::A, &["192.0.2.53"]));
    let root = ZoneConfig {
        apex: name(ROOT_APEX),
        keys: keys(&[8]),
        records: root_records,
        children: vec![
            ChildSpec { apex: name(VICTIM_APEX), ds: DsPolicy::FromChildKeys },
            ChildSpec { apex: name(UNSIGNED_APEX), ds: DsPolicy::Absent },
        ],
    };

    let mut victim_records = apex_records(VICTIM_APEX);
    victim_records.push(rec(VICTIM_TARGET, RecordType::A, &[VICTIM_ADDRESS]));
    let victim =
        ZoneConfig { apex: name(VICTIM_APEX), keys: keys(&[8, 13]), records: victim_records, children: vec![] };

    let mut unsigned_records = apex_records(UNSIGNED_APEX);
    unsigned_records.push(rec(UNSIGNED_TARGET, RecordType::A, &[UNSIGNED_ADDRESS]));
    let unsigned = ZoneConfig { apex: name(UNSIGNED_APEX), keys: vec![], records: unsigned_records, children: vec![] };

    vec![root, victim, unsigned]
}
