use std::path::Path;
use std::process::{Command, Output};

use bccr_core::channel::ChannelSpec;
use bccr_core::dist::FactoredDistribution;
use bccr_core::io::{channel_to_json, distribution_to_json};
use bccr_core::region::{compute_profile, membership, RatePoint, Variant};

fn bccr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bccr"))
        .args(args)
        .output()
        .expect("spawn bccr")
}

fn write_degenerate_inputs(dir: &Path) -> (String, String) {
    let chan = ChannelSpec::<f64>::noiseless_broadcast_binary();
    let dist = FactoredDistribution::<f64>::uniform_inputs(2, 2, 2).unwrap();
    let cp = dir.join("channel.json");
    let dp = dir.join("dist.json");
    std::fs::write(&cp, channel_to_json(&chan)).unwrap();
    std::fs::write(&dp, distribution_to_json(&dist)).unwrap();
    (
        cp.to_str().unwrap().to_string(),
        dp.to_str().unwrap().to_string(),
    )
}

#[test]
fn missing_input_fails_with_path() {
    let out = bccr(&[
        "region",
        "--channel",
        "/nonexistent/chan.json",
        "--dist",
        "/nonexistent/dist.json",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/chan.json"));
}

#[test]
fn region_is_deterministic_and_origin_only_for_degenerate_dist() {
    let dir = tempfile::tempdir().unwrap();
    let (cp, dp) = write_degenerate_inputs(dir.path());
    let csv = dir.path().join("out.csv");
    let csv_s = csv.to_str().unwrap();
    let args = [
        "region", "--channel", &cp, "--dist", &dp, "--variant", "nocm", "--out", csv_s,
    ];
    let a = bccr(&args);
    assert!(a.status.success());
    let csv_a = std::fs::read(&csv).unwrap();
    let b = bccr(&args);
    assert_eq!(a.stdout, b.stdout, "stdout must be byte-identical");
    assert_eq!(csv_a, std::fs::read(&csv).unwrap());

    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["command"], "region");
    assert!(doc["inputs"]["channel"]["sha256"].as_str().unwrap().len() == 64);
    // Degenerate distribution: every upper bound collapses to zero.
    let text = doc["constraints_csv"].as_str().unwrap();
    for line in text.lines().skip(1) {
        let constant: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(constant.abs() <= 1e-12, "row {line}");
    }
}

#[test]
fn check_matches_membership() {
    let dir = tempfile::tempdir().unwrap();
    let chan = ChannelSpec::<f64>::noiseless_broadcast_binary();
    let mut sizes = bccr_core::dist::AuxSizes::degenerate(2, 2, 2);
    sizes.wb = 2;
    let dist = FactoredDistribution::<f64>::from_fns(
        sizes,
        |_| 1.0,
        |_, _| 0.5,
        |_, _| 0.5,
        |_, _| 0.5,
        |c, t| if t[0] == c[7] { 1.0 } else { 0.0 },
    )
    .unwrap();
    let cp = dir.path().join("channel.json");
    let dp = dir.path().join("dist.json");
    std::fs::write(&cp, channel_to_json(&chan)).unwrap();
    std::fs::write(&dp, distribution_to_json(&dist)).unwrap();
    let profile = compute_profile(&dist, &chan).unwrap();

    for (pt, arg) in [([0.5, 0.25], "0.5,0.25"), ([0.9, 0.9], "0.9,0.9")] {
        let out = bccr(&[
            "check",
            "--channel",
            cp.to_str().unwrap(),
            "--dist",
            dp.to_str().unwrap(),
            "--variant",
            "nocm",
            "--point",
            arg,
        ]);
        assert!(out.status.success(), "verdicts are data, not exit codes");
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let want = membership(&RatePoint::nocm(pt[0], pt[1]), &profile, Variant::NoCm).unwrap();
        assert_eq!(doc["inside"].as_bool().unwrap(), want, "at {pt:?}");
        if !want {
            assert!(!doc["binding_constraints"].as_array().unwrap().is_empty());
        }
    }
}

#[test]
fn compare_reports_inclusions_for_degenerate_dist() {
    let dir = tempfile::tempdir().unwrap();
    let (cp, dp) = write_degenerate_inputs(dir.path());
    let out = bccr(&["compare", "--channel", &cp, "--dist", &dp]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["hk", "jiang", "marton"] {
        assert_eq!(doc["inclusion_in_full"][key]["violations"], 0, "{key}");
    }
    assert!(doc["regions_csv"]["full_cm"]
        .as_str()
        .unwrap()
        .starts_with("R0,R1,R2,relation,constant"));
}

#[test]
fn simulate_runs_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (cp, dp) = write_degenerate_inputs(dir.path());
    let sp = dir.path().join("sim.json");
    std::fs::write(
        &sp,
        serde_json::json!({
            "n": 4,
            "rates": {"r0": 0.0, "r10": 0.0, "r11": 0.0, "r20": 0.0, "r22": 0.0},
            "bin_rates": {"b0": 0.0, "b1": 0.0, "b2": 0.0},
            "epsilon": 2.0,
            "trials": 1,
            "seed": 1
        })
        .to_string(),
    )
    .unwrap();
    let out = bccr(&[
        "simulate",
        "--channel",
        &cp,
        "--dist",
        &dp,
        "--sim",
        sp.to_str().unwrap(),
        "--trials",
        "20",
        "--seed",
        "42",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["config"]["trials"], 20);
    assert_eq!(doc["report"]["trials_run"], 20);
}

#[test]
fn maccm_emits_plan_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let np = dir.path().join("network.json");
    std::fs::write(
        &np,
        serde_json::json!({
            "k1": 2,
            "k2": 1,
            "messages": [
                {"delta": [1], "nabla": [1]},
                {"delta": [2], "nabla": [1]},
                {"delta": [1, 2], "nabla": [1]}
            ]
        })
        .to_string(),
    )
    .unwrap();
    let dot = dir.path().join("plan.dot");
    let out = bccr(&[
        "maccm",
        "--network",
        np.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["graph"]["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(doc["graph"]["edges"].as_array().unwrap().len(), 2);
    assert_eq!(doc["acyclic"], true);
    let dot_text = std::fs::read_to_string(&dot).unwrap();
    assert!(dot_text.contains("digraph"));
}

#[test]
fn shipped_sample_matches_recomputation() {
    let out = bccr(&[
        "region",
        "--channel",
        "../../data/channel.json",
        "--dist",
        "../../data/dist.json",
        "--variant",
        "nocm",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let chan = bccr_core::io::channel_from_json(
        &std::fs::read_to_string("../../data/channel.json").unwrap(),
    )
    .unwrap();
    let dist = bccr_core::io::distribution_from_json(
        &std::fs::read_to_string("../../data/dist.json").unwrap(),
    )
    .unwrap();
    let profile = compute_profile(&dist, &chan).unwrap();
    let region = bccr_core::region::rate_region(&profile, Variant::NoCm).unwrap();
    assert_eq!(
        doc["constraints_csv"].as_str().unwrap(),
        bccr_core::io::constraints_to_csv(&region)
    );
    assert_eq!(
        doc["profile"],
        serde_json::to_value(&profile).unwrap()
    );
}
