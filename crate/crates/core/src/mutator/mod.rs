//! The man-in-the-middle: response rewriting rules, the built-in attack
//! scenarios, and a forwarding proxy that applies them.

mod proxy;
mod rules;
mod scenario;

use thiserror::Error;

use crate::dnssec::DnssecError;

pub use proxy::{proxy, proxy_with, ProxyConfig, UpstreamFailure};
pub use rules::{apply_rules, Action, MutationRule, Resigner, RuleMatch};
pub use scenario::{
    load_scenarios, save_scenarios, scenario, AttackScenario, ScenarioFile, ScenarioFixture, ScenarioId,
    DEFAULT_ATTACKER_ADDRESS,
};

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("required rule #{index} matched the message but found nothing to change")]
    RuleTargetAbsent { index: usize },
    #[error("fixture does not fit the scenario: {0}")]
    FixtureMismatch(String),
    #[error("re-signing failed: {0}")]
    Sign(#[from] DnssecError),
    #[error("scenario file: {0}")]
    ScenarioFile(String),
}
