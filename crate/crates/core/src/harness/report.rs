use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::dnssec::{AlgorithmNumber, AlgorithmSupport};
use crate::harness::{run_scenario, Fixture, HarnessError, ProbeOptions, ProbeOutcome, ProbeTarget};
use crate::mutator::AttackScenario;
use crate::validator::PolicyName;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub fixture_hash: String,
    pub seed: u64,
    pub clock: u64,
    /// Algorithms the in-process validators were given.
    pub supported_algorithms: Vec<AlgorithmNumber>,
    /// Wall-clock time the report was produced. Not covered by the
    /// determinism guarantee.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    pub scenarios: Vec<String>,
    pub targets: Vec<String>,
    /// Row-major: every scenario for the first target, then the next.
    pub cells: Vec<ProbeOutcome>,
    pub summary: BTreeMap<String, usize>,
}

impl MatrixReport {
    pub fn cell(&self, scenario: &str, target: &str) -> Option<&ProbeOutcome> {
        self.cells.iter().find(|c| c.scenario == scenario && c.target == target)
    }

    pub fn is_complete(&self) -> bool {
        self.cells.len() == self.scenarios.len() * self.targets.len()
            && self.targets.iter().all(|t| self.scenarios.iter().all(|s| self.cell(s, t).is_some()))
    }

    /// The report with the wall-clock field cleared, for comparisons.
    pub fn without_timestamp(&self) -> MatrixReport {
        let mut r = self.clone();
        r.metadata.generated_at = None;
        r
    }
}

/// One in-process target per policy, all with the same algorithm support.
pub fn policy_targets(supported: &AlgorithmSupport) -> Vec<ProbeTarget> {
    PolicyName::ALL.into_iter().map(|p| ProbeTarget::in_process(p, supported.clone())).collect()
}

/// Runs every scenario against every target, cells in parallel.
pub fn run_matrix(
    scenarios: &[AttackScenario],
    targets: &[ProbeTarget],
    fixture: &Fixture,
    options: &ProbeOptions,
) -> Result<MatrixReport, HarnessError> {
    if scenarios.is_empty() || targets.is_empty() {
        return Err(HarnessError::EmptyMatrix);
    }
    for t in targets {
        options.check_target(t)?;
    }
    let external = targets.iter().any(|t| matches!(t, ProbeTarget::External { .. }));
    let cells: Vec<ProbeOutcome> = if external {
        // external resolvers forward to one fixed proxy address, so cells
        // cannot overlap
        targets.iter().flat_map(|t| scenarios.iter().map(move |s| run_scenario(s, t, fixture, options))).collect()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = targets
                .iter()
                .flat_map(|t| scenarios.iter().map(move |s| (s, t)))
                .map(|(s, t)| scope.spawn(move || run_scenario(s, t, fixture, options)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("probe thread panicked")).collect()
        })
    };

    let mut summary = BTreeMap::new();
    for c in &cells {
        *summary.entry(c.classification.label().to_string()).or_insert(0) += 1;
    }
    let supported_algorithms = targets
        .iter()
        .find_map(|t| match t {
            ProbeTarget::InProcess { policy } => Some(policy.supported.algorithms().collect()),
            ProbeTarget::External { .. } => None,
        })
        .unwrap_or_default();
    let generated_at = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
    Ok(MatrixReport {
        schema_version: SCHEMA_VERSION,
        metadata: ReportMetadata {
            fixture_hash: fixture.hash().to_string(),
            seed: fixture.seed,
            clock: fixture.now,
            supported_algorithms,
            generated_at,
        },
        scenarios: scenarios.iter().map(|s| s.id.clone()).collect(),
        targets: targets.iter().map(|t| t.label()).collect(),
        cells,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown format {:?} (table or json)", s)),
        }
    }
}

pub fn render_report(report: &MatrixReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Table => render_table(report),
    }
}

pub fn parse_report(text: &str) -> Result<MatrixReport, HarnessError> {
    let report: MatrixReport = serde_json::from_str(text).map_err(|e| HarnessError::Report(e.to_string()))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::Report(format!("unsupported schema version {}", report.schema_version)));
    }
    Ok(report)
}

fn short(c: &ProbeOutcome) -> &'static str {
    match c.classification.label() {
        "Vulnerable" => "VULN",
        "Compliant" => "ok",
        "DowngradedBySpec" => "spec",
        _ => "ERR",
    }
}

fn render_table(report: &MatrixReport) -> String {
    let first = report.targets.iter().map(|t| t.len()).max().unwrap_or(0).max("policy".len());
    let col = report.scenarios.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let algs: Vec<String> = report.metadata.supported_algorithms.iter().map(|a| a.to_string()).collect();
    let _ = writeln!(
        out,
        "fixture {}  seed {}  clock {}  algorithms {{{}}}",
        &report.metadata.fixture_hash[..report.metadata.fixture_hash.len().min(16)],
        report.metadata.seed,
        report.metadata.clock,
        algs.join(",")
    );
    let _ = write!(out, "{:<first$}", "policy");
    for s in &report.scenarios {
        let _ = write!(out, "  {:<col$}", s);
    }
    out.push('\n');
    for t in &report.targets {
        let _ = write!(out, "{:<first$}", t);
        for s in &report.scenarios {
            let cell = report.cell(s, t).map_or("-", short);
            let _ = write!(out, "  {:<col$}", cell);
        }
        out.push('\n');
    }
    out.push_str("\nVULN = Vulnerable (forged record accepted)\n");
    out.push_str("ok   = Compliant (SERVFAIL, or authentic data with AD)\n");
    out.push_str("spec = DowngradedBySpec (unvalidated answer the standard allows)\n");
    out.push_str("ERR  = Error\n");
    let counts: Vec<String> = report.summary.iter().map(|(k, v)| format!("{} {}", k, v)).collect();
    let _ = writeln!(out, "\n{}", counts.join(", "));
    out
}
