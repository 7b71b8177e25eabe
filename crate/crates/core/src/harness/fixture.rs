use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::dnssec::DEFAULT_RSA_BITS;
use crate::harness::HarnessError;
use crate::mutator::{scenario, AttackScenario, ScenarioFixture, ScenarioId};
use crate::validator::TrustAnchor;
use crate::wire::{DnsName, RecordType, ResourceRecord};
use crate::zone::fixture::{default_zone_configs, VICTIM_APEX, VICTIM_TARGET};
use crate::zone::{KeySource, ZoneConfig, ZoneTree};

pub const SEED_ENV: &str = "DOWNGRADE_TESTBED_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// The fixture seed from the environment, or the built-in default.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// A built zone tree plus everything needed to attack and validate it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub seed: u64,
    pub now: u64,
    pub tree: Arc<ZoneTree>,
    pub anchor: TrustAnchor,
    pub scenario_fixture: ScenarioFixture,
    hash: String,
}

impl Fixture {
    /// The default three-zone tree with keys drawn from `seed`.
    pub fn build(seed: u64, now: u64) -> Result<Self, HarnessError> {
        Self::from_configs(&default_zone_configs(), seed, now, DEFAULT_RSA_BITS)
    }

    pub fn from_configs(configs: &[ZoneConfig], seed: u64, now: u64, rsa_bits: usize) -> Result<Self, HarnessError> {
        let tree = ZoneTree::build(configs, &KeySource::Seeded { seed, rsa_bits }, now)?;
        let top = tree.top().ok_or_else(|| HarnessError::Fixture("no zones".into()))?;
        let anchor = TrustAnchor::from_dnskeys(top.apex().clone(), &top.dnskeys())
            .map_err(|e| HarnessError::Fixture(e.to_string()))?;
        let victim: DnsName = VICTIM_APEX.parse().expect("constant");
        let target: DnsName = VICTIM_TARGET.parse().expect("constant");
        let scenario_fixture = ScenarioFixture::from_tree(&tree, &victim, &target, seed, now)?;
        let json = serde_json::to_vec(&tree).expect("tree serializes");
        let hash = hex::encode(Sha256::digest(json));
        Ok(Fixture { seed, now, tree: Arc::new(tree), anchor, scenario_fixture, hash })
    }

    /// SHA-256 over the public contents of every zone.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn scenario(&self, id: ScenarioId) -> Result<AttackScenario, HarnessError> {
        Ok(scenario(id, &self.scenario_fixture)?)
    }

    pub fn scenarios(&self) -> Result<Vec<AttackScenario>, HarnessError> {
        ScenarioId::ALL.into_iter().map(|id| self.scenario(id)).collect()
    }

    /// The zone data actually published at `name`/`rtype`.
    pub fn authentic(&self, name: &DnsName, rtype: RecordType) -> Vec<ResourceRecord> {
        self.tree
            .authoritative_zone(name, rtype)
            .and_then(|z| z.rrset(name, rtype))
            .map(|s| s.records.clone())
            .unwrap_or_default()
    }
}
