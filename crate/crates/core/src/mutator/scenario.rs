use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dnssec::{AlgorithmNumber, KeyPair, KeyRole};
use crate::harness::Classification;
use crate::mutator::{Action, MutationError, MutationRule, Resigner, RuleMatch};
use crate::validator::PolicyName;
use crate::wire::{DnsName, Ds, Rdata, RecordType, ResourceRecord, Section};
use crate::zone::{zone_rng, ZoneTree, INCEPTION_SKEW, SIGNATURE_LIFETIME};

pub const DEFAULT_ATTACKER_ADDRESS: Ipv4Addr = Ipv4Addr::new(192, 0, 2, 66);
const FAKE_TTL: u32 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4, ScenarioId::S5];
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl std::str::FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown scenario {:?} (expected S1..S5)", s))
    }
}

/// A named rule list plus what it is expected to do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub id: String,
    pub description: String,
    /// Name and type the probe asks for.
    pub target: DnsName,
    #[serde(default = "default_target_type")]
    pub target_type: RecordType,
    /// Answer records that count as forged when accepted.
    pub forged: Vec<ResourceRecord>,
    pub rules: Vec<MutationRule>,
    pub expected_strict: Classification,
    /// The vulnerable policies this scenario is designed to defeat.
    #[serde(default)]
    pub defeats: Vec<PolicyName>,
}

fn default_target_type() -> RecordType {
    RecordType::A
}

/// What a scenario needs to know about the zones under attack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioFixture {
    pub victim_apex: DnsName,
    pub target: DnsName,
    pub zsk_algorithms: Vec<AlgorithmNumber>,
    pub ds: Vec<Ds>,
    pub attacker_address: Ipv4Addr,
    pub attacker_algorithm: AlgorithmNumber,
    /// Seeds the attacker key.
    pub seed: u64,
    pub now: u64,
}

impl ScenarioFixture {
    /// Reads the victim's keys and published DS from a built tree. Fails if
    /// the victim zone is missing, unsigned, or lacks an A RRset at
    /// `target`.
    pub fn from_tree(
        tree: &ZoneTree,
        victim_apex: &DnsName,
        target: &DnsName,
        seed: u64,
        now: u64,
    ) -> Result<Self, MutationError> {
        let mismatch = |why: String| MutationError::FixtureMismatch(why);
        let zone = tree.zone(victim_apex).ok_or_else(|| mismatch(format!("no zone {}", victim_apex)))?;
        if !zone.is_signed() {
            return Err(mismatch(format!("{} is not signed", victim_apex)));
        }
        if zone.rrset(target, RecordType::A).is_none() {
            return Err(mismatch(format!("{} has no A RRset at {}", victim_apex, target)));
        }
        let mut zsk_algorithms: Vec<AlgorithmNumber> =
            zone.keys.iter().filter(|k| k.role() == KeyRole::Zsk).map(|k| k.algorithm()).collect();
        zsk_algorithms.sort();
        zsk_algorithms.dedup();
        Ok(ScenarioFixture {
            victim_apex: victim_apex.clone(),
            target: target.clone(),
            zsk_algorithms,
            ds: zone.ds_published.clone(),
            attacker_address: DEFAULT_ATTACKER_ADDRESS,
            attacker_algorithm: AlgorithmNumber::ECDSAP256SHA256,
            seed,
            now,
        })
    }

    fn ds_algorithms(&self) -> Vec<AlgorithmNumber> {
        let mut algs: Vec<_> = self.ds.iter().map(|d| d.algorithm).collect();
        algs.sort();
        algs.dedup();
        algs
    }

    fn fake_a(&self) -> ResourceRecord {
        ResourceRecord::new(self.target.clone(), FAKE_TTL, Rdata::A { address: self.attacker_address })
    }

    fn on_target(&self) -> RuleMatch {
        RuleMatch::new(self.target.clone(), RecordType::A, Section::Answer)
    }

    fn on_ds(&self) -> RuleMatch {
        RuleMatch::new(self.victim_apex.clone(), RecordType::DS, Section::Answer)
    }

    fn inject(&self) -> MutationRule {
        MutationRule::new(self.on_target(), Action::InjectRecord { record: self.fake_a(), replace_existing: true })
    }

    pub fn attacker_key(&self) -> Result<KeyPair, MutationError> {
        let mut rng = zone_rng(self.seed, b"attacker");
        Ok(KeyPair::generate(self.attacker_algorithm, KeyRole::Ksk, &mut rng)?)
    }

    fn require_ds(&self) -> Result<(), MutationError> {
        if self.ds.is_empty() {
            return Err(MutationError::FixtureMismatch(format!("no DS published for {}", self.victim_apex)));
        }
        Ok(())
    }
}

fn other_implemented(alg: AlgorithmNumber) -> AlgorithmNumber {
    if alg == AlgorithmNumber::RSASHA256 {
        AlgorithmNumber::ECDSAP256SHA256
    } else {
        AlgorithmNumber::RSASHA256
    }
}

/// Instantiates one of the built-in scenarios against `fixture`.
pub fn scenario(id: ScenarioId, fixture: &ScenarioFixture) -> Result<AttackScenario, MutationError> {
    use PolicyName::*;
    let unknown = AlgorithmNumber::DEFAULT_UNKNOWN;
    let (description, rules, expected_strict, defeats) = match id {
        ScenarioId::S1 => (
            "RRSIG algorithm over the answer rewritten to an unknown number, forged A injected",
            vec![MutationRule::new(fixture.on_target(), Action::RewriteRrsigAlg { to: unknown }), fixture.inject()],
            Classification::Compliant,
            vec![V1UnknownRrsig, V3BogusPassthrough, V4AlgMismatch],
        ),
        ScenarioId::S2 => {
            fixture.require_ds()?;
            let algs = fixture.ds_algorithms();
            let mut rules = Vec::new();
            if fixture.ds.len() == 1 {
                // a lone DS becomes two: the original relabelled 15 and a 16 copy
                let mut copy = fixture.ds[0].clone();
                copy.algorithm = AlgorithmNumber::ED448;
                rules.push(MutationRule::new(fixture.on_ds(), Action::RewriteDsAlg { to: AlgorithmNumber::ED25519 }));
                rules.push(MutationRule::new(
                    fixture.on_ds(),
                    Action::InjectRecord {
                        record: ResourceRecord::new(fixture.victim_apex.clone(), crate::zone::DS_TTL, Rdata::Ds(copy)),
                        replace_existing: false,
                    },
                ));
            } else {
                for (i, alg) in algs.iter().enumerate() {
                    let to = if i == 0 { AlgorithmNumber::ED25519 } else { AlgorithmNumber::ED448 };
                    rules.push(MutationRule::new(fixture.on_ds().with_algorithm(*alg), Action::RewriteDsAlg { to }));
                }
            }
            rules.push(fixture.inject());
            (
                "DS algorithms rewritten to Ed25519 and Ed448, key tags kept, forged A injected",
                rules,
                Classification::DowngradedBySpec,
                vec![],
            )
        }
        ScenarioId::S3 => {
            fixture.require_ds()?;
            let algs = fixture.ds_algorithms();
            let mut rules = Vec::new();
            if let [only] = algs.as_slice() {
                rules.push(MutationRule::new(
                    fixture.on_ds().with_algorithm(*only),
                    Action::RewriteDsAlg { to: other_implemented(*only) },
                ));
            } else {
                // shift every algorithm one place up, the last one to Ed448,
                // rewriting from the top so no record is moved twice
                let last = algs.len() - 1;
                rules.push(MutationRule::new(
                    fixture.on_ds().with_algorithm(algs[last]),
                    Action::RewriteDsAlg { to: AlgorithmNumber::ED448 },
                ));
                for i in (0..last).rev() {
                    rules.push(MutationRule::new(
                        fixture.on_ds().with_algorithm(algs[i]),
                        Action::RewriteDsAlg { to: algs[i + 1] },
                    ));
                }
            }
            rules.push(fixture.inject());
            (
                "DS algorithms shifted so no DS matches a child DNSKEY, forged A injected",
                rules,
                Classification::Compliant,
                vec![V2UnknownDs, V3BogusPassthrough, V4AlgMismatch],
            )
        }
        ScenarioId::S4 => {
            let [stripped, rest @ ..] = fixture.zsk_algorithms.as_slice() else {
                return Err(MutationError::FixtureMismatch("victim has no zone signing keys".into()));
            };
            if rest.is_empty() {
                return Err(MutationError::FixtureMismatch("S4 needs a zone signed with two algorithms".into()));
            }
            let mut rules = vec![MutationRule::new(fixture.on_target().with_algorithm(*stripped), Action::StripRrsigs)];
            for alg in rest {
                rules.push(MutationRule::new(
                    fixture.on_target().with_algorithm(*alg),
                    Action::RewriteRrsigAlg { to: unknown },
                ));
            }
            rules.push(fixture.inject());
            (
                "in a two-algorithm zone, one algorithm's RRSIGs stripped and the rest relabelled unknown, forged A injected",
                rules,
                Classification::Compliant,
                vec![V1UnknownRrsig, V3BogusPassthrough, V4AlgMismatch],
            )
        }
        ScenarioId::S5 => {
            fixture.require_ds()?;
            let key = fixture.attacker_key()?;
            let inception = fixture.now.saturating_sub(INCEPTION_SKEW) as u32;
            let expiration = (fixture.now + SIGNATURE_LIFETIME).min(u32::MAX as u64) as u32;
            let resigner = Resigner { key: key.clone(), signer: fixture.victim_apex.clone(), inception, expiration };
            let rules = vec![
                MutationRule::new(
                    RuleMatch::new(fixture.victim_apex.clone(), RecordType::DNSKEY, Section::Answer),
                    Action::ReplaceDnskeyRrset {
                        keys: vec![key.dnskey().clone()],
                        resign_with: Some(resigner.clone()),
                    },
                ),
                MutationRule::new(fixture.on_ds(), Action::RewriteDsAlg { to: unknown }),
                fixture.inject(),
                MutationRule::new(fixture.on_target(), Action::ResignRrsets { resigner }),
            ];
            (
                "DNSKEY RRset replaced by an attacker key that re-signs it and the forged A, DS algorithms rewritten to unknown",
                rules,
                Classification::DowngradedBySpec,
                vec![],
            )
        }
    };
    Ok(AttackScenario {
        id: id.to_string(),
        description: description.to_string(),
        target: fixture.target.clone(),
        target_type: RecordType::A,
        forged: vec![fixture.fake_a()],
        rules,
        expected_strict,
        defeats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub scenarios: Vec<AttackScenario>,
}

pub fn load_scenarios(path: &Path) -> Result<Vec<AttackScenario>, MutationError> {
    let text =
        fs::read_to_string(path).map_err(|e| MutationError::ScenarioFile(format!("{}: {}", path.display(), e)))?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| MutationError::ScenarioFile(format!("{}: {}", path.display(), e)))?;
    Ok(file.scenarios)
}

pub fn save_scenarios(path: &Path, scenarios: &[AttackScenario]) -> Result<(), MutationError> {
    let file = ScenarioFile { scenarios: scenarios.to_vec() };
    let text = serde_json::to_string_pretty(&file).expect("scenarios serialize");
    fs::write(path, text).map_err(|e| MutationError::ScenarioFile(format!("{}: {}", path.display(), e)))
}
