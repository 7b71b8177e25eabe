#![allow(dead_code)]

pub mod wire_gen;

use std::sync::OnceLock;

use dnssec_downgrade::harness::Fixture;
use dnssec_downgrade::wire::DnsName;
use dnssec_downgrade::zone::fixture::default_zone_configs;

pub const NOW: u64 = 1_700_000_000;

pub fn n(s: &str) -> DnsName {
    s.parse().unwrap()
}

/// The default zone tree with 1024-bit RSA so test binaries start quickly.
pub fn small_fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| Fixture::from_configs(&default_zone_configs(), 11, NOW, 1024).unwrap())
}

use dnssec_downgrade::harness::MatrixReport;
use dnssec_downgrade::validator::PolicyName;

/// Expected classification per policy (rows) and scenario S1..S5 (columns)
/// when validators implement algorithms 8 and 13 only.
pub const GOLDEN: [(PolicyName, [&str; 5]); 5] = [
    (PolicyName::Strict, ["Compliant", "DowngradedBySpec", "Compliant", "Compliant", "DowngradedBySpec"]),
    (PolicyName::V1UnknownRrsig, ["Vulnerable", "DowngradedBySpec", "Compliant", "Vulnerable", "DowngradedBySpec"]),
    (PolicyName::V2UnknownDs, ["Compliant", "DowngradedBySpec", "Vulnerable", "Compliant", "DowngradedBySpec"]),
    (
        PolicyName::V3BogusPassthrough,
        ["Vulnerable", "DowngradedBySpec", "Vulnerable", "Vulnerable", "DowngradedBySpec"],
    ),
    (PolicyName::V4AlgMismatch, ["Vulnerable", "DowngradedBySpec", "Vulnerable", "Vulnerable", "DowngradedBySpec"]),
];

/// Cells that differ from the golden grid, as "policy/scenario: got X".
pub fn golden_mismatches(report: &MatrixReport) -> Vec<String> {
    let mut bad = Vec::new();
    for (policy, row) in GOLDEN {
        for (i, want) in row.iter().enumerate() {
            let scenario = format!("S{}", i + 1);
            let got = report.cell(&scenario, &policy.to_string()).map(|c| c.classification.label());
            if got != Some(*want) {
                bad.push(format!("{}/{}: want {} got {:?}", policy, scenario, want, got));
            }
        }
    }
    bad
}
