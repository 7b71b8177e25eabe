use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dnssec_downgrade::dnssec::AlgorithmSupport;
use dnssec_downgrade::harness::{
    default_seed, policy_targets, render_report, run_matrix, run_scenario, Classification, Fixture, HarnessError,
    ProbeOptions, ProbeTarget, ReportFormat, SEED_ENV,
};
use dnssec_downgrade::mutator::{load_scenarios, proxy, AttackScenario, ScenarioId};
use dnssec_downgrade::validator::{serve_resolver, Clock, PolicyName, ValidatorPolicy};
use dnssec_downgrade::zone::fixture::DEFAULT_PORT;
use dnssec_downgrade::zone::serve;

const EXIT_VULNERABLE: u8 = 1;
const EXIT_ETHICS_GATE: u8 = 3;

/// DNSSEC algorithm-downgrade testbed.
#[derive(Parser)]
#[command(name = "downgrade-testbed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FixtureArgs {
    /// Seed for all generated key material.
    #[arg(long, env = SEED_ENV, default_value_t = default_seed())]
    seed: u64,
    /// Validation clock and signing time, seconds since the epoch
    /// (defaults to now).
    #[arg(long)]
    now: Option<u64>,
}

impl FixtureArgs {
    fn now(&self) -> u64 {
        self.now.unwrap_or_else(|| Clock::System.now())
    }

    fn build(&self) -> Result<Fixture> {
        Fixture::build(self.seed, self.now()).context("building fixture")
    }
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Built-in scenario S1..S5, or an id from --scenario-file.
    #[arg(long)]
    scenario: String,
    /// JSON scenario file to look the id up in.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
}

impl ScenarioArgs {
    fn resolve(&self, fixture: &Fixture) -> Result<AttackScenario> {
        if let Some(path) = &self.scenario_file {
            let all = load_scenarios(path)?;
            return all
                .into_iter()
                .find(|s| s.id == self.scenario)
                .with_context(|| format!("no scenario {:?} in {}", self.scenario, path.display()));
        }
        let id: ScenarioId = self.scenario.parse().map_err(anyhow::Error::msg)?;
        Ok(fixture.scenario(id)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fixture operations.
    Fixture {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Attack one in-process validator.
    Attack {
        #[command(subcommand)]
        action: AttackAction,
    },
    /// Run every scenario against every policy.
    Matrix {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// What to print on stdout: table or json.
        #[arg(long, default_value = "table")]
        format: ReportFormat,
        /// Algorithms the validators implement, e.g. 8,13.
        #[arg(long, default_value = "8,13")]
        supported: AlgorithmSupport,
        /// Run the scenarios in this file instead of the built-in ones.
        #[arg(long)]
        scenario_file: Option<PathBuf>,
        /// Exit nonzero if any cell is Vulnerable.
        #[arg(long)]
        expect_compliant: bool,
    },
    /// Probe a resolver you operate. It must forward to the proxy address.
    Probe {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        resolver: SocketAddr,
        /// Address the mutating proxy listens on.
        #[arg(long, default_value = "127.0.0.1:5301")]
        proxy_listen: SocketAddr,
        /// Confirms you operate the resolver being probed.
        #[arg(long)]
        i_control_this_resolver: bool,
        #[arg(long)]
        expect_compliant: bool,
    },
    /// Serve the fixture zones.
    Serve {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long, default_value_t = SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)))]
        listen: SocketAddr,
    },
    /// Run the mutating proxy in front of a nameserver.
    Proxy {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "127.0.0.1:5301")]
        listen: SocketAddr,
        #[arg(long, default_value_t = SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)))]
        upstream: SocketAddr,
    },
    /// Run a validating resolver anchored at the fixture root.
    Resolver {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long, default_value = "127.0.0.1:5302")]
        listen: SocketAddr,
        #[arg(long, default_value_t = SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)))]
        upstream: SocketAddr,
        #[arg(long, default_value = "strict")]
        policy: PolicyName,
        #[arg(long, default_value = "8,13")]
        supported: AlgorithmSupport,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// Build the default signed tree and print it as JSON.
    Build {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AttackAction {
    Run {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        policy: PolicyName,
        #[arg(long, default_value = "8,13")]
        supported: AlgorithmSupport,
        /// Print the full outcome as JSON.
        #[arg(long)]
        json: bool,
        /// Exit nonzero if the outcome is Vulnerable.
        #[arg(long)]
        expect_compliant: bool,
    },
}

fn verdict(vulnerable: bool, expect_compliant: bool) -> ExitCode {
    if vulnerable && expect_compliant {
        ExitCode::from(EXIT_VULNERABLE)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_forever() -> ! {
    loop {
        thread::park();
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Fixture { action: FixtureAction::Build { fixture, out } } => {
            let f = fixture.build()?;
            let doc = serde_json::json!({
                "seed": f.seed,
                "now": f.now,
                "fixture_hash": f.hash(),
                "trust_anchor": f.anchor,
                "tree": &*f.tree,
            });
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", text),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Attack {
            action: AttackAction::Run { fixture, scenario, policy, supported, json, expect_compliant },
        } => {
            let f = fixture.build()?;
            let scn = scenario.resolve(&f)?;
            let target = ProbeTarget::InProcess { policy: ValidatorPolicy::new(policy, supported) };
            let outcome = run_scenario(&scn, &target, &f, &ProbeOptions::default());
            if json {
                println!("{}", serde_json::to_string_pretty(&outcome)?);
            } else {
                println!("{}", outcome.classification);
            }
            if let Classification::Error(e) = &outcome.classification {
                bail!("probe failed: {}", e);
            }
            Ok(verdict(outcome.classification == Classification::Vulnerable, expect_compliant))
        }
        Command::Matrix { fixture, out, format, supported, scenario_file, expect_compliant } => {
            let f = fixture.build()?;
            let scenarios = match scenario_file {
                Some(path) => load_scenarios(&path)?,
                None => f.scenarios()?,
            };
            let report = run_matrix(&scenarios, &policy_targets(&supported), &f, &ProbeOptions::default())?;
            if let Some(path) = out {
                fs::write(&path, render_report(&report, ReportFormat::Json))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print!("{}", render_report(&report, format));
            let vulnerable = report.cells.iter().any(|c| c.classification == Classification::Vulnerable);
            Ok(verdict(vulnerable, expect_compliant))
        }
        Command::Probe { fixture, scenario, resolver, proxy_listen, i_control_this_resolver, expect_compliant } => {
            let options = ProbeOptions {
                allow_list: vec![resolver],
                control_attested: i_control_this_resolver,
                proxy_listen,
                ..ProbeOptions::default()
            };
            let target = ProbeTarget::External { resolver };
            if let Err(e) = options.check_target(&target) {
                eprintln!("error: {}", e);
                eprintln!("pass --i-control-this-resolver if you operate {} yourself", resolver);
                return Ok(ExitCode::from(EXIT_ETHICS_GATE));
            }
            let f = fixture.build()?;
            let scn = scenario.resolve(&f)?;
            eprintln!("proxy on {}; {} must forward queries for {} there", proxy_listen, resolver, f.anchor.zone);
            let outcome = run_scenario(&scn, &target, &f, &options);
            println!("{}", outcome.classification);
            if let Classification::Error(e) = &outcome.classification {
                bail!("probe failed: {}", e);
            }
            Ok(verdict(outcome.classification == Classification::Vulnerable, expect_compliant))
        }
        Command::Serve { fixture, listen } => {
            let f = fixture.build()?;
            let handle = serve(listen, f.tree.clone())?;
            eprintln!("serving {} zones on {} (udp+tcp)", f.tree.zones().len(), handle.local_addr());
            run_forever()
        }
        Command::Proxy { fixture, scenario, listen, upstream } => {
            let f = fixture.build()?;
            let scn = scenario.resolve(&f)?;
            let handle = proxy(listen, upstream, scn.rules)?;
            eprintln!("proxy {} -> {} applying {}", handle.local_addr(), upstream, scn.id);
            run_forever()
        }
        Command::Resolver { fixture, listen, upstream, policy, supported } => {
            let f = fixture.build()?;
            let clock = fixture.now.map_or(Clock::System, Clock::Fixed);
            let handle =
                serve_resolver(listen, upstream, f.anchor.clone(), ValidatorPolicy::new(policy, supported), clock)?;
            eprintln!("resolver ({}) on {} using {}", policy, handle.local_addr(), upstream);
            run_forever()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if let Some(HarnessError::EthicsGate(msg)) = e.downcast_ref::<HarnessError>() {
                eprintln!("error: {}", msg);
                return ExitCode::from(EXIT_ETHICS_GATE);
            }
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
