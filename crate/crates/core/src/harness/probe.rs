use std::net::SocketAddr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dnssec::AlgorithmSupport;
use crate::harness::{Fixture, HarnessError};
use crate::mutator::{proxy, AttackScenario};
use crate::net::{Transport, UdpTcpTransport};
use crate::validator::{render_response, validate_name, PolicyName, SecurityState, ValidatorPolicy};
use crate::wire::{DnsMessage, Question, Rcode, ResourceRecord};
use crate::zone::serve;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Vulnerable,
    Compliant,
    DowngradedBySpec,
    Error(String),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Vulnerable => "Vulnerable",
            Classification::Compliant => "Compliant",
            Classification::DowngradedBySpec => "DowngradedBySpec",
            Classification::Error(_) => "Error",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Error(e) => write!(f, "Error({})", e),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeTarget {
    InProcess {
        policy: ValidatorPolicy,
    },
    /// A resolver someone else runs. The harness only starts the zone
    /// server and the proxy; the resolver must already forward to the
    /// proxy address.
    External {
        resolver: SocketAddr,
    },
}

impl ProbeTarget {
    pub fn in_process(name: PolicyName, supported: AlgorithmSupport) -> Self {
        ProbeTarget::InProcess { policy: ValidatorPolicy::new(name, supported) }
    }

    pub fn label(&self) -> String {
        match self {
            ProbeTarget::InProcess { policy } => policy.name.to_string(),
            ProbeTarget::External { resolver } => format!("resolver {}", resolver),
        }
    }
}

/// Runtime settings for probing, including the guard on external targets.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    /// External resolvers that may be probed.
    pub allow_list: Vec<SocketAddr>,
    /// The operator has stated they control every allow-listed resolver.
    pub control_attested: bool,
    /// Where the proxy listens; an ephemeral loopback port by default.
    pub proxy_listen: SocketAddr,
    pub timeout: Duration,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            allow_list: Vec::new(),
            control_attested: false,
            proxy_listen: "127.0.0.1:0".parse().expect("literal"),
            timeout: Duration::from_secs(2),
        }
    }
}

impl ProbeOptions {
    pub fn check_target(&self, target: &ProbeTarget) -> Result<(), HarnessError> {
        let ProbeTarget::External { resolver } = target else {
            return Ok(());
        };
        if !self.control_attested {
            return Err(HarnessError::EthicsGate(format!(
                "refusing to probe {}: only resolvers you operate may be probed, and that must be stated explicitly",
                resolver
            )));
        }
        if !self.allow_list.contains(resolver) {
            return Err(HarnessError::EthicsGate(format!("{} is not on the allow-list", resolver)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub rcode: Rcode,
    pub ad: bool,
    pub answer: Vec<ResourceRecord>,
    pub forged: Vec<ResourceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<SecurityState>,
    pub downgraded_by_spec: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub scenario: String,
    pub target: String,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
}

/// Applies the outcome rules to the response a client received.
pub fn classify(
    resp: &DnsMessage,
    downgraded_by_spec: bool,
    scn: &AttackScenario,
    fixture: &Fixture,
) -> (Classification, Evidence) {
    let answer: Vec<ResourceRecord> =
        resp.answers.iter().filter(|r| r.name == scn.target && r.rtype() == scn.target_type).cloned().collect();
    let authentic = fixture.authentic(&scn.target, scn.target_type);
    let forged: Vec<ResourceRecord> =
        answer.iter().filter(|r| !authentic.iter().any(|a| a.rdata == r.rdata)).cloned().collect();
    let ad = resp.flags.ad;
    let class = if resp.rcode == Rcode::SERVFAIL {
        Classification::Compliant
    } else if !forged.is_empty() {
        if downgraded_by_spec && !ad {
            Classification::DowngradedBySpec
        } else {
            Classification::Vulnerable
        }
    } else if answer.is_empty() {
        Classification::Error(format!("no answer records, rcode {}", resp.rcode))
    } else if ad {
        Classification::Compliant
    } else {
        Classification::DowngradedBySpec
    };
    let evidence =
        Evidence { rcode: resp.rcode, ad, answer, forged, state: None, downgraded_by_spec, trace: Vec::new() };
    (class, evidence)
}

fn error_outcome(scn: &AttackScenario, target: &ProbeTarget, e: impl std::fmt::Display) -> ProbeOutcome {
    ProbeOutcome {
        scenario: scn.id.clone(),
        target: target.label(),
        classification: Classification::Error(e.to_string()),
        evidence: None,
    }
}

/// Starts a zone server and a proxy carrying the scenario's rules on
/// loopback, sends the probe query through the target, classifies the
/// response and shuts everything down again.
pub fn run_scenario(
    scn: &AttackScenario,
    target: &ProbeTarget,
    fixture: &Fixture,
    options: &ProbeOptions,
) -> ProbeOutcome {
    if let Err(e) = options.check_target(target) {
        return error_outcome(scn, target, e);
    }
    let loopback: SocketAddr = "127.0.0.1:0".parse().expect("literal");
    let authority = match serve(loopback, fixture.tree.clone()) {
        Ok(h) => h,
        Err(e) => return error_outcome(scn, target, e),
    };
    let mitm = match proxy(options.proxy_listen, authority.local_addr(), scn.rules.clone()) {
        Ok(h) => h,
        Err(e) => return error_outcome(scn, target, e),
    };
    let question = Question::new(scn.target.clone(), scn.target_type);
    let mut query = DnsMessage::query(rand::random(), question.name.clone(), question.rtype, true);
    query.flags.rd = true;

    let outcome = match target {
        ProbeTarget::InProcess { policy } => {
            let transport = UdpTcpTransport { server: mitm.local_addr(), timeout: options.timeout };
            let result = validate_name(&question, &transport, &fixture.anchor, policy, fixture.now);
            let resp = render_response(&result, &query);
            let (classification, mut evidence) = classify(&resp, result.downgraded_by_spec, scn, fixture);
            evidence.state = Some(result.state);
            evidence.trace = result.trace.iter().map(ToString::to_string).collect();
            ProbeOutcome { scenario: scn.id.clone(), target: target.label(), classification, evidence: Some(evidence) }
        }
        ProbeTarget::External { resolver } => {
            let transport = UdpTcpTransport { server: *resolver, timeout: options.timeout };
            match transport.exchange(&query) {
                Ok(resp) => {
                    let (classification, evidence) = classify(&resp, false, scn, fixture);
                    ProbeOutcome {
                        scenario: scn.id.clone(),
                        target: target.label(),
                        classification,
                        evidence: Some(evidence),
                    }
                }
                Err(e) => error_outcome(scn, target, e),
            }
        }
    };
    mitm.stop();
    authority.stop();
    outcome
}
