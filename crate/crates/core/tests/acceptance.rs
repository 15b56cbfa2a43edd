//! One PASS/FAIL line per acceptance criterion, runtime budget included.
//!
//! Run with `cargo test -p specgraph --test acceptance -- --nocapture`.

use std::collections::HashMap;
use std::time::Instant;

use specgraph::generators::{
    bipartite_chain, chained_ary_tree, offspring_tree, randomize, star_chain, OffspringSequence, RandomizeSpec, WeightLaw,
};
use specgraph::operators::laplacian_matrix;
use specgraph::spectral::{eigh_dense, lanczos_lowest};
use specgraph::suites::{run_suite, SuiteConfig, SuiteReport};
use specgraph::verify::VerificationReport;
use specgraph::{ball_section, block_section, FiniteSection, Graph, Vertex};

struct Outcome {
    passed: bool,
    detail: String,
}

/// Suites are shared between criteria; each runs once and keeps its time.
struct Runner {
    cfg: SuiteConfig,
    cache: HashMap<&'static str, (SuiteReport, f64)>,
}

impl Runner {
    fn suite(&mut self, name: &'static str) -> (&SuiteReport, f64) {
        if !self.cache.contains_key(name) {
            let t = Instant::now();
            let rep = run_suite(name, &self.cfg).unwrap_or_else(|e| panic!("suite {name}: {e}"));
            self.cache.insert(name, (rep, t.elapsed().as_secs_f64()));
        }
        let (rep, secs) = &self.cache[name];
        (rep, *secs)
    }

    /// Outcome over the named reports of one suite.
    fn reports(&mut self, suite: &'static str, names: &[&str]) -> (Outcome, f64) {
        let (rep, secs) = self.suite(suite);
        let picked: Vec<&VerificationReport> = names
            .iter()
            .map(|n| rep.reports.iter().find(|r| r.name == *n).unwrap_or_else(|| panic!("{suite} has no report {n}")))
            .collect();
        (summarize(&picked), secs)
    }
}

fn summarize(reports: &[&VerificationReport]) -> Outcome {
    let passed = reports.iter().all(|r| r.passed);
    let checks: usize = reports.iter().map(|r| r.witnesses.len()).sum();
    let mut detail = format!("{checks} checks");
    for r in reports.iter().filter(|r| !r.passed) {
        let bad: Vec<_> = r.witnesses.iter().filter(|w| w.margin < -r.tolerance).collect();
        detail.push_str(&format!("; {}: {} violations", r.name, bad.len()));
        if let Some(w) = bad.first() {
            detail.push_str(&format!(", first `{}` lhs {} rhs {}", w.input, w.lhs, w.rhs));
        }
    }
    Outcome { passed, detail }
}

fn randomized(g: &Graph, seed: u64) -> Graph {
    randomize(g, &RandomizeSpec { phase_seed: Some(seed), weight_law: WeightLaw::LogUniform { spread: 0.5 }, weight_seed: seed })
}

/// Lowest ten eigenvalues by Lanczos against the dense solver.
fn lanczos_vs_dense() -> Outcome {
    let sections: Vec<(&str, FiniteSection)> = vec![
        ("binary tree depth 7", ball_section(&randomized(&offspring_tree(OffspringSequence::constant(2)).unwrap(), 1), Vertex::id(0), 7).unwrap()),
        ("chained-ary blocks 6", block_section(&randomized(&chained_ary_tree(), 2), Vertex::new(1, 0, 0), 6).unwrap()),
        ("star-chain blocks 24", block_section(&randomized(&star_chain(), 3), Vertex::new(1, 0, 0), 24).unwrap()),
        ("bipartite-chain blocks 36", block_section(&randomized(&bipartite_chain(), 4), Vertex::new(1, 1, 1), 36).unwrap()),
    ];
    let mut rep = VerificationReport::new("lanczos-vs-dense", 1e-8, serde_json::json!({ "k": 10 }));
    for (name, s) in &sections {
        rep.check_eq(format!("{name} size in [200, 500]"), if (200..=500).contains(&s.len()) { 1.0 } else { 0.0 }, 1.0, 1.0);
        let h = laplacian_matrix(s, None).unwrap();
        let dense = eigh_dense(&h, false).unwrap();
        let low = lanczos_lowest(&h, 10, 1e-10, 7).unwrap();
        for i in 0..10 {
            rep.check_eq(format!("{name} ({} vertices) lambda_{}", s.len(), i + 1), low.eigenvalues[i], dense.eigenvalues[i], 1.0);
        }
    }
    summarize(&[&rep])
}

#[test]
fn acceptance() {
    let mut run = Runner { cfg: SuiteConfig::default(), cache: HashMap::new() };
    type Criterion = (u32, &'static str, f64, Box<dyn FnMut(&mut Runner) -> (Outcome, f64)>);
    let timed = |f: fn() -> Outcome| {
        Box::new(move |_: &mut Runner| {
            let t = Instant::now();
            let o = f();
            (o, t.elapsed().as_secs_f64())
        }) as Box<dyn FnMut(&mut Runner) -> (Outcome, f64)>
    };
    let criteria: Vec<Criterion> = vec![
        (1, "star-chain identities", 1.0, Box::new(|r| r.reports("star-chain-identities", &["star-chain"]))),
        (2, "bipartite-chain identities", 1.0, Box::new(|r| r.reports("bipart-counterexample", &["chain-blocks", "isolated-K_nn"]))),
        (3, "form bound <f,Delta f> <= 2<f,d f>", 10.0, Box::new(|r| r.reports("majo", &["majo-form"]))),
        (4, "Hardy inequality", 10.0, Box::new(|r| r.reports("hardy", &["hardy-lower", "hardy-identity-weight"]))),
        (5, "tree pointwise bound and sandwich", 30.0, Box::new(|r| r.reports("key2", &["key2-scan", "key2-pointwise", "hardy-cross-route", "key2-sandwich"]))),
        (6, "eigenvalue ratio trend", 300.0, Box::new(|r| r.reports("asymp", &["asymp-trend", "radial-vs-dense", "radial-vs-lanczos"]))),
        (7, "gauge invariance on trees", 30.0, Box::new(|r| r.reports("gauge", &["tree-phase-invariance"]))),
        (8, "unitary weight transform", 10.0, Box::new(|r| r.reports("gauge", &["weight-transform"]))),
        (9, "isoperimetric constant", 60.0, Box::new(|r| r.reports("iso", &["exhaustive-vs-brute-force", "chained-ary-nested"]))),
        (10, "commutator condition", 10.0, Box::new(|r| r.reports("invdom", &["invdom-chained-ary-bounded", "invdom-star-chain-grows"]))),
        (11, "essential self-adjointness diagnostic", 1.0, Box::new(|r| r.reports("essaa", &["simple-diverges", "weighted-line-converges"]))),
        (12, "Helffer-Sjostrand formula", 60.0, Box::new(|r| r.reports("hs", &["hs-vs-oracle"]))),
        (13, "Lanczos vs dense", 30.0, timed(lanczos_vs_dense)),
        (14, "counting functions N(Delta) >= N(2d)", 10.0, Box::new(|r| r.reports("majo", &["counting"]))),
    ];
    let mut failed = Vec::new();
    println!();
    for (id, name, budget, mut check) in criteria {
        let (o, secs) = check(&mut run);
        let ok = o.passed && secs < budget;
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2} {name} ({secs:.2} s, budget {budget} s): {}", o.detail);
        if !ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
