use std::process::{Command, Output};

const NOW: &str = "1700000000";

fn testbed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_downgrade-testbed"))
        .args(args)
        .env_remove("DOWNGRADE_TESTBED_SEED")
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn attack_verdicts_and_exit_codes() {
    let strict =
        testbed(&["attack", "run", "--scenario", "S1", "--policy", "strict", "--now", NOW, "--expect-compliant"]);
    assert_eq!(strict.status.code(), Some(0), "{:?}", strict);
    assert_eq!(stdout(&strict).trim(), "Compliant");

    let weak = testbed(&["attack", "run", "--scenario", "s1", "--policy", "v1", "--now", NOW, "--expect-compliant"]);
    assert_eq!(weak.status.code(), Some(1));
    assert_eq!(stdout(&weak).trim(), "Vulnerable");

    // without --expect-compliant a vulnerable verdict is still a successful run
    let json = testbed(&["attack", "run", "--scenario", "S1", "--policy", "v1-unknown-rrsig", "--now", NOW, "--json"]);
    assert_eq!(json.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["classification"], "Vulnerable");
    assert_eq!(v["scenario"], "S1");
}

#[test]
fn usage_errors() {
    assert_eq!(testbed(&["attack", "run", "--policy", "strict"]).status.code(), Some(2));
    assert_eq!(testbed(&["attack", "run", "--scenario", "S1", "--policy", "lenient"]).status.code(), Some(2));
    assert_eq!(testbed(&["matrix", "--supported", "8,banana"]).status.code(), Some(2));
    let missing = testbed(&["matrix", "--now", NOW, "--scenario-file", "/nonexistent/scenarios.json"]);
    assert_eq!(missing.status.code(), Some(1));
    // ids may come from a scenario file, so an unknown one is a runtime failure
    let unknown = testbed(&["attack", "run", "--scenario", "S9", "--policy", "strict", "--now", NOW]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("S9"));
}

#[test]
fn probe_refuses_without_attestation() {
    let out = testbed(&["probe", "--resolver", "127.0.0.1:53", "--scenario", "S1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--i-control-this-resolver"));
}

#[test]
fn matrix_json_and_fixture_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let table = testbed(&["matrix", "--now", NOW, "--seed", "5", "--out", report.to_str().unwrap()]);
    assert_eq!(table.status.code(), Some(0));
    let text = stdout(&table);
    assert!(text.contains("VULN") && text.contains("DowngradedBySpec 10"), "{}", text);

    let gated = testbed(&["matrix", "--now", NOW, "--seed", "5", "--expect-compliant", "--format", "json"]);
    assert_eq!(gated.status.code(), Some(1));
    let mut a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let mut b: serde_json::Value = serde_json::from_str(&stdout(&gated)).unwrap();
    a["metadata"].as_object_mut().unwrap().remove("generated_at");
    b["metadata"].as_object_mut().unwrap().remove("generated_at");
    assert_eq!(a, b);
    assert_eq!(a["metadata"]["seed"], 5);
    assert_eq!(a["summary"]["Vulnerable"], 9);

    let fixture = |seed: &str| {
        let o = testbed(&["fixture", "build", "--now", NOW, "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()
    };
    let f5 = fixture("5");
    assert_eq!(f5["fixture_hash"], a["metadata"]["fixture_hash"]);
    assert_eq!(f5, fixture("5"));
    assert_ne!(f5["fixture_hash"], fixture("6")["fixture_hash"]);
    // private keys stay out of the published fixture
    assert!(!f5.to_string().contains("private"));
}
