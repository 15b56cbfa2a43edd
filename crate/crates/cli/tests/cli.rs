use std::process::Command;

use specgraph::generators::{FamilySpec, OffspringSequence, PathParams};
use specgraph::suites::SuiteConfig;
use specgraph::{Graph, GraphDescription};
use specgraph_cli::{main_with, ExperimentConfig, Format, EXIT_CONFIG, EXIT_FAIL, EXIT_MODULE, EXIT_USAGE};

fn run(args: &[&str]) -> (u8, String) {
    let mut out = Vec::new();
    let code = main_with(std::iter::once("specgraph").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn bin(args: &[&str], threads: &str) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_specgraph")).args(args).env("SPECGRAPH_THREADS", threads).output().unwrap();
    (out.status.code().unwrap(), out.stdout)
}

#[test]
fn config_round_trips_bit_identically() {
    let cfg = ExperimentConfig {
        suites: vec!["majo".into(), "hardy".into()],
        families: vec![
            FamilySpec::Path(PathParams { edge_scale: 0.1, edge_ratio: 1.0 / 3.0, mass_sq_prefix: vec![std::f64::consts::PI], ..Default::default() }),
            FamilySpec::Offspring(OffspringSequence::linear(1, 2)),
            FamilySpec::StarChain,
        ],
        radius: Some(7),
        seeds: vec![3, u64::MAX],
        trials: 9,
        tol: 1.0e-10 / 3.0,
        out: Some("results/run 1".into()),
        format: Format::Csv,
        ..Default::default()
    };
    let text = cfg.to_json();
    let back = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_json(), text);
    assert_eq!(back.tol.to_bits(), cfg.tol.to_bits());
}

#[test]
fn empty_config_matches_suite_defaults() {
    let cfg = ExperimentConfig::from_json("{}").unwrap();
    assert_eq!(cfg.suite_config(), SuiteConfig::default());
    assert_eq!(cfg.schema, 1);
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"seeds\": [1,").unwrap();
    assert_eq!(run(&["verify", "negans", "--config", bad.to_str().unwrap()]).0, EXIT_CONFIG);
    std::fs::write(&bad, "{\"typo\": 1}").unwrap();
    assert_eq!(run(&["verify", "negans", "--config", bad.to_str().unwrap()]).0, EXIT_CONFIG);
    std::fs::write(&bad, "{\"schema\": 2}").unwrap();
    assert_eq!(run(&["verify", "negans", "--config", bad.to_str().unwrap()]).0, EXIT_CONFIG);
    assert_eq!(run(&["verify", "negans", "--config", "/nonexistent/cfg.json"]).0, EXIT_CONFIG);
}

#[test]
fn usage_and_unknown_suite_exit_2() {
    assert_eq!(run(&["verify", "no-such-suite"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["generate", "--family", "moebius"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn module_errors_exit_4() {
    assert_eq!(run(&["spectrum", "--family", "offspring", "--radius", "40"]).0, EXIT_MODULE);
    assert_eq!(run(&["iso", "--mode", "exhaustive", "--family", "offspring", "--radius", "6"]).0, EXIT_MODULE);
}

#[test]
fn verify_exit_status_follows_the_suites() {
    let (code, out) = run(&["verify", "bipart-counterexample", "negans"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    // star chain: |Delta f_n|^2 is 6, not 4
    assert_eq!(run(&["verify", "star-chain-identities"]).0, EXIT_FAIL);
}

#[test]
fn verify_output_sorted_and_deterministic() {
    let args = ["verify", "treedom-counterexample", "bipart-counterexample", "negans", "--format", "json"];
    let (c1, a) = bin(&args, "1");
    let (c2, b) = bin(&args, "3");
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let names: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(names, ["bipart-counterexample", "negans", "treedom-counterexample"]);
    let (_, csv1) = bin(&["verify", "negans", "--format", "csv"], "2");
    let (_, csv2) = bin(&["verify", "negans", "--format", "csv"], "1");
    assert_eq!(csv1, csv2);
    assert!(String::from_utf8(csv1).unwrap().starts_with("suite,report,input,lhs,rhs,margin,passed\n"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    assert_eq!(bin(&["verify", "negans"], "zero").0, i32::from(EXIT_USAGE));
}

#[test]
fn out_dir_receives_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, stdout) = run(&["spectrum", "--family", "star-chain", "--radius", "3", "--format", "csv", "--out", d]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("index,eigenvalue,residual\n"));
}

#[test]
fn generated_section_loads_back() {
    let (code, out) = run(&["generate", "--family", "offspring", "--radius", "3", "--seed", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 15);
    let desc: GraphDescription = serde_json::from_value(v["graph"].clone()).unwrap();
    let g = Graph::from_description(&desc).unwrap();
    assert_eq!(g.vertices().unwrap().len(), 15);
}

#[test]
fn family_accepts_json() {
    let spec = serde_json::to_string(&FamilySpec::Offspring(OffspringSequence::constant(3))).unwrap();
    let (code, out) = run(&["ratio", "--family", &spec, "--radius", "3", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("N,lambda_H,lambda_D,ratio\n"));
    assert!(specgraph_cli::parse_family("{\"family\": \"star-chain\"").is_err());
}

#[test]
fn lanczos_and_dense_spectra_agree() {
    let (_, dense) = run(&["spectrum", "--family", "bipartite-chain", "--radius", "12", "--seed", "2", "--k", "5"]);
    let (_, lz) = run(&["spectrum", "--family", "bipartite-chain", "--radius", "12", "--seed", "2", "--k", "5", "--method", "lanczos"]);
    let ev = |s: &str| -> Vec<f64> {
        let v: serde_json::Value = serde_json::from_str(s).unwrap();
        v["spectrum"]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    for (a, b) in ev(&dense).iter().zip(ev(&lz)) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn essaa_and_hs_demo_emit_tables() {
    let (code, out) = run(&["essaa", "--family", "star-chain", "--horizon", "150", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 152);
    let (code, out) = run(&["hs-demo", "--quad-tol", "1e-3", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("case,nodes,error,seconds\n"));
    assert!(out.lines().count() >= 5);
}
