//! Batch front end for `specgraph`: graph generation, spectra and the named
//! verification suites, emitted as JSON or CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use specgraph::funcalc::{build_extension, hs_matrix_function, random_hermitian, spectral_function_oracle, Lorentzian, QuadratureParams};
use specgraph::generators::{family_graph, randomize, star, FamilySpec, RandomizeSpec, WeightLaw};
use specgraph::operators::{degree_matrix, laplacian_matrix, HermitianOperator};
use specgraph::spectral::{eigh_dense, lanczos_lowest, ratio_series};
use specgraph::suites::{default_radius, hs_level_errors, run_suite, SuiteConfig, SuiteReport, SCHEMA_VERSION, SUITE_NAMES};
use specgraph::verify::{ess_sa_diagnostic, isoperimetric_constant, PathChoice, SearchMode, EXHAUSTIVE_CAP};
use specgraph::{ball_section, block_section, EdgeRecord, FiniteSection, GraphDescription, Vertex};

pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_MODULE: u8 = 4;

const EXIT_CODES: &str = "\
Exit codes:
  0  every check passed (or the command produced its output)
  1  a verification suite failed
  2  usage error or unknown suite name
  3  the --config file could not be read or parsed
  4  a library error (bad parameters, no convergence, I/O)

SPECGRAPH_THREADS caps the worker pool used by `verify`.";

#[derive(Parser, Debug)]
#[command(name = "specgraph", version, about = "Magnetic graph Laplacians: sections, spectra and verification suites", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Family name or a JSON family object `{"family": ..., "params": ...}`.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Section radius (horizon for `verify` suites that walk).
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    /// Seed; on single-graph commands it also randomizes phases and weights.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance for verification checks and Lanczos residuals.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Materialize a finite section as an explicit graph description.
    Generate,
    /// Eigenvalues of the Laplacian or degree operator on a section.
    Spectrum {
        #[arg(long, value_enum, default_value = "laplacian")]
        operator: OperatorChoice,
        #[arg(long, value_enum, default_value = "dense")]
        method: MethodChoice,
        /// Number of lowest eigenvalues (Lanczos default 10; dense default all).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run named suites (all when none are given).
    Verify {
        suites: Vec<String>,
        /// Print the suite names and exit.
        #[arg(long)]
        list: bool,
    },
    /// λ_N(Δ)/λ_N(d) on a section.
    Ratio {
        /// Largest N (default a quarter of the section).
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Isoperimetric constant of a section.
    Iso {
        /// Default: exhaustive up to the size cap, greedy beyond.
        #[arg(long, value_enum)]
        mode: Option<IsoMode>,
    },
    /// Essential self-adjointness diagnostic along a greedy path.
    Essaa {
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        lookahead: usize,
    },
    /// Helffer-Sjöstrand error per refinement level for 1/(1+x²).
    HsDemo {
        /// Order of the almost analytic extension.
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Refinement stops when successive levels agree to this.
        #[arg(long, default_value_t = 1e-6)]
        quad_tol: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperatorChoice {
    Laplacian,
    Degree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IsoMode {
    Exhaustive,
    Nested,
    Greedy,
}

// ---------------------------------------------------------------- config

fn schema() -> u32 {
    SCHEMA_VERSION
}
fn default_families() -> Vec<FamilySpec> {
    SuiteConfig::default().families
}
fn default_seeds() -> Vec<u64> {
    SuiteConfig::default().seeds
}
fn default_trials() -> usize {
    SuiteConfig::default().trials
}
fn default_tol() -> f64 {
    SuiteConfig::default().tol
}

/// Everything a run depends on. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema: u32,
    /// Suites for `verify`; empty means all.
    #[serde(default)]
    pub suites: Vec<String>,
    /// Single-graph commands use the first entry.
    #[serde(default = "default_families")]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub radius: Option<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Failure::Config(format!("schema {} is not supported (expected {SCHEMA_VERSION})", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig { families: self.families.clone(), radius: self.radius, seeds: self.seeds.clone(), trials: self.trials, tol: self.tol }
    }

    /// Loads `--config` (if any) and applies the flags on top.
    pub fn resolve(common: &Common) -> Result<Self, Failure> {
        let mut cfg = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                Self::from_json(&text)?
            }
            None => Self::default(),
        };
        if let Some(f) = &common.family {
            cfg.families = vec![parse_family(f)?];
        }
        if let Some(r) = common.radius {
            cfg.radius = Some(r);
        }
        if let Some(s) = common.seed {
            cfg.seeds = vec![s];
        }
        if let Some(t) = common.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Failure::Usage(format!("--tol must be a finite non-negative number, got {t}")));
            }
            cfg.tol = t;
        }
        if let Some(o) = &common.out {
            cfg.out = Some(o.clone());
        }
        if let Some(f) = common.format {
            cfg.format = f;
        }
        Ok(cfg)
    }
}

pub fn parse_family(text: &str) -> Result<FamilySpec, Failure> {
    if let Some(spec) = FamilySpec::by_name(text) {
        return Ok(spec);
    }
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--family: {e}")));
    }
    Err(Failure::Usage(format!("unknown family '{text}' (expected one of {})", specgraph::generators::FAMILY_NAMES.join(", "))))
}

// ---------------------------------------------------------------- errors

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Config(String),
    Module(specgraph::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Module(specgraph::Error::SuiteUnknown(_)) => EXIT_USAGE,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Module(_) => EXIT_MODULE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Module(e) => write!(f, "{e}"),
        }
    }
}

impl From<specgraph::Error> for Failure {
    fn from(e: specgraph::Error) -> Self {
        Failure::Module(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Module(e.into())
    }
}

// ---------------------------------------------------------------- output

/// One artifact in both encodings; only the requested one is written.
struct Artifact {
    name: String,
    json: Value,
    csv: Vec<Vec<String>>,
}

fn csv_text(rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| Failure::Module(specgraph::Error::Io(e.into())))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Module(specgraph::Error::Io(e.into_error())))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

fn render(a: &Artifact, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&a.json).map_err(specgraph::Error::from)? + "\n"),
        Format::Csv => csv_text(&a.csv),
    }
}

fn emit(cfg: &ExperimentConfig, artifacts: &[Artifact], stdout: &mut dyn std::io::Write) -> Result<(), Failure> {
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in artifacts {
                std::fs::write(dir.join(format!("{}.{}", a.name, cfg.format.ext())), render(a, cfg.format)?)?;
            }
        }
        None => {
            for a in artifacts {
                stdout.write_all(render(a, cfg.format)?.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

// ---------------------------------------------------------------- commands

/// Runs one parsed invocation; returns whether every check passed.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<bool, Failure> {
    let cfg = ExperimentConfig::resolve(&cli.common)?;
    let seed = cli.common.seed;
    let (passed, artifacts) = match &cli.command {
        Command::Verify { list: true, .. } => {
            for name in SUITE_NAMES {
                writeln!(stdout, "{name}")?;
            }
            return Ok(true);
        }
        Command::Verify { suites, .. } => verify(&cfg, suites)?,
        Command::Generate => (true, vec![generate(&cfg, seed)?]),
        Command::Spectrum { operator, method, k } => (true, vec![spectrum(&cfg, seed, *operator, *method, *k)?]),
        Command::Ratio { n_max } => (true, vec![ratio(&cfg, seed, *n_max)?]),
        Command::Iso { mode } => (true, vec![iso(&cfg, seed, *mode)?]),
        Command::Essaa { horizon, gamma, lambda, lookahead } => (true, vec![essaa(&cfg, seed, *horizon, *gamma, *lambda, *lookahead)?]),
        Command::HsDemo { order, quad_tol } => (true, vec![hs_demo(seed.unwrap_or(0), *order, *quad_tol)?]),
    };
    emit(&cfg, &artifacts, stdout)?;
    Ok(passed)
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var("SPECGRAPH_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("SPECGRAPH_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn verify(cfg: &ExperimentConfig, requested: &[String]) -> Result<(bool, Vec<Artifact>), Failure> {
    let mut names: Vec<String> = if !requested.is_empty() {
        requested.to_vec()
    } else if !cfg.suites.is_empty() {
        cfg.suites.clone()
    } else {
        SUITE_NAMES.iter().map(|s| s.to_string()).collect()
    };
    names.sort();
    names.dedup();
    if let Some(bad) = names.iter().find(|n| !SUITE_NAMES.contains(&n.as_str())) {
        return Err(specgraph::Error::SuiteUnknown(bad.clone()).into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let suite_cfg = cfg.suite_config();
    let results: Vec<Result<SuiteReport, specgraph::Error>> = pool.install(|| names.par_iter().map(|n| run_suite(n, &suite_cfg)).collect());
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.suite);
    }
    let passed = reports.iter().all(|r| r.passed);

    let mut rows = vec![["suite", "report", "input", "lhs", "rhs", "margin", "passed"].map(String::from).to_vec()];
    for s in &reports {
        for r in &s.reports {
            for w in &r.witnesses {
                rows.push(vec![s.suite.clone(), r.name.clone(), w.input.clone(), num(w.lhs), num(w.rhs), num(w.margin), (w.margin >= -r.tolerance).to_string()]);
            }
        }
    }
    let summary: BTreeMap<&str, bool> = reports.iter().map(|r| (r.suite.as_str(), r.passed)).collect();
    let json = json!({ "schema": SCHEMA_VERSION, "passed": passed, "summary": summary, "config": cfg, "suites": reports });
    Ok((passed, vec![Artifact { name: "verify".into(), json, csv: rows }]))
}

const MAX_SECTION: u64 = 1 << 20;

struct Section {
    spec: FamilySpec,
    radius: usize,
    section: FiniteSection,
}

fn section(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Section, Failure> {
    let spec = cfg.families.first().cloned().ok_or_else(|| Failure::Usage("no family configured".into()))?;
    let mut g = family_graph(&spec)?;
    if let Some(s) = seed {
        g = randomize(&g, &RandomizeSpec { phase_seed: Some(s), weight_law: WeightLaw::LogUniform { spread: 0.5 }, weight_seed: s });
    }
    let radius = cfg.radius.unwrap_or_else(|| default_radius(&spec));
    if let Some(fam) = g.family().filter(|_| matches!(spec, FamilySpec::Offspring(_))) {
        // exponential growth: refuse before materializing
        let mut size: u64 = 0;
        for n in 0..=radius {
            size = size.saturating_add(fam.sphere_size(n)?);
            if size > MAX_SECTION {
                return Err(specgraph::Error::BadParameter(format!("the radius-{radius} ball has more than {MAX_SECTION} vertices")).into());
            }
        }
    }
    let root = g.root().ok_or_else(|| Failure::Usage("family has no root".into()))?;
    let section = block_section(&g, root, radius)?;
    Ok(Section { spec, radius, section })
}

fn header(s: &Section, seed: Option<u64>) -> Value {
    json!({ "schema": SCHEMA_VERSION, "family": s.spec, "radius": s.radius, "seed": seed, "dim": s.section.len() })
}

fn generate(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Artifact, Failure> {
    let s = section(cfg, seed)?;
    let sec = &s.section;
    let mut edges = Vec::new();
    let mut rows = vec![["x", "y", "weight", "phase"].map(String::from).to_vec()];
    for (i, links) in sec.links.iter().enumerate() {
        for l in links {
            if l.local.is_some_and(|j| i < j) {
                edges.push(EdgeRecord(sec.members[i], l.target, l.weight, l.phase));
                rows.push(vec![sec.members[i].to_string(), l.target.to_string(), num(l.weight), num(l.phase)]);
            }
        }
    }
    let vertex_weights = sec.members.iter().copied().zip(sec.mass.iter().copied()).collect();
    let desc = GraphDescription::Explicit { vertices: sec.members.clone(), edges, vertex_weights, root: sec.center };
    let mut json = header(&s, seed);
    json["graph"] = serde_json::to_value(&desc).map_err(specgraph::Error::from)?;
    json["inner_boundary"] = json!(sec.inner_boundary);
    Ok(Artifact { name: "generate".into(), json, csv: rows })
}

fn spectrum(cfg: &ExperimentConfig, seed: Option<u64>, op: OperatorChoice, method: MethodChoice, k: Option<usize>) -> Result<Artifact, Failure> {
    let s = section(cfg, seed)?;
    let h: HermitianOperator = match op {
        OperatorChoice::Laplacian => laplacian_matrix(&s.section, None)?,
        OperatorChoice::Degree => degree_matrix(&s.section),
    };
    let mut sp = match method {
        MethodChoice::Dense => eigh_dense(&h, false)?,
        MethodChoice::Lanczos => lanczos_lowest(&h, k.unwrap_or(10).min(h.dim()), cfg.tol.max(1e-14), seed.unwrap_or(0))?,
    };
    if let Some(k) = k {
        sp.eigenvalues.truncate(k);
    }
    let mut json = header(&s, seed);
    json["operator"] = json!(format!("{op:?}").to_lowercase());
    json["spectrum"] = serde_json::to_value(&sp).map_err(specgraph::Error::from)?;
    let r = sp.residual_bound.map(num).unwrap_or_default();
    let mut rows = vec![["index", "eigenvalue", "residual"].map(String::from).to_vec()];
    rows.extend(sp.eigenvalues.iter().enumerate().map(|(i, e)| vec![(i + 1).to_string(), num(*e), r.clone()]));
    Ok(Artifact { name: "spectrum".into(), json, csv: rows })
}

fn ratio(cfg: &ExperimentConfig, seed: Option<u64>, n_max: Option<usize>) -> Result<Artifact, Failure> {
    let s = section(cfg, seed)?;
    let n_max = n_max.unwrap_or(s.section.len() / 4).max(1);
    let series = ratio_series(&laplacian_matrix(&s.section, None)?, &degree_matrix(&s.section), n_max)?;
    let mut json = header(&s, seed);
    json["median_deviation"] = json!(series.median_deviation());
    json["series"] = serde_json::to_value(&series).map_err(specgraph::Error::from)?;
    let mut rows = vec![["N", "lambda_H", "lambda_D", "ratio"].map(String::from).to_vec()];
    for i in 0..series.n.len() {
        rows.push(vec![series.n[i].to_string(), num(series.lambda_h[i]), num(series.lambda_d[i]), num(series.ratio[i])]);
    }
    Ok(Artifact { name: "ratio".into(), json, csv: rows })
}

fn iso(cfg: &ExperimentConfig, seed: Option<u64>, mode: Option<IsoMode>) -> Result<Artifact, Failure> {
    let s = section(cfg, seed)?;
    let mode = match mode {
        Some(IsoMode::Exhaustive) => SearchMode::Exhaustive,
        Some(IsoMode::Nested) => SearchMode::Nested,
        Some(IsoMode::Greedy) => SearchMode::Greedy,
        None if s.section.len() <= EXHAUSTIVE_CAP => SearchMode::Exhaustive,
        None => SearchMode::Greedy,
    };
    let est = isoperimetric_constant(&s.section, mode, EXHAUSTIVE_CAP)?;
    let mut json = header(&s, seed);
    json["estimate"] = serde_json::to_value(&est).map_err(specgraph::Error::from)?;
    let mut rows = vec![["mode", "alpha_exact", "alpha_upper", "best_subset_size"].map(String::from).to_vec()];
    rows.push(vec![
        serde_json::to_value(est.search_mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        est.alpha_exact.map(num).unwrap_or_default(),
        num(est.alpha_upper),
        est.best_subset.len().to_string(),
    ]);
    Ok(Artifact { name: "iso".into(), json, csv: rows })
}

fn essaa(cfg: &ExperimentConfig, seed: Option<u64>, horizon: usize, gamma: f64, lambda: f64, lookahead: usize) -> Result<Artifact, Failure> {
    let spec = cfg.families.first().cloned().ok_or_else(|| Failure::Usage("no family configured".into()))?;
    let mut g = family_graph(&spec)?;
    if let Some(s) = seed {
        g = randomize(&g, &RandomizeSpec { phase_seed: Some(s), weight_law: WeightLaw::LogUniform { spread: 0.5 }, weight_seed: s });
    }
    let start = g.root().ok_or_else(|| Failure::Usage("family has no root".into()))?;
    let diag = ess_sa_diagnostic(&g, &|_| 0.0, gamma, lambda, &PathChoice::Search { start, lookahead }, horizon)?;
    let json = json!({ "schema": SCHEMA_VERSION, "family": spec, "seed": seed, "horizon": horizon, "diagnostic": diag });
    let mut rows = vec![["n", "vertex", "a_n", "partial_sum"].map(String::from).to_vec()];
    for (n, ((v, a), p)) in diag.path.iter().zip(&diag.a_n).zip(&diag.partial_sums).enumerate() {
        rows.push(vec![n.to_string(), v.to_string(), num(*a), num(*p)]);
    }
    Ok(Artifact { name: "essaa".into(), json, csv: rows })
}

fn hs_demo(seed: u64, order: usize, quad_tol: f64) -> Result<Artifact, Failure> {
    let ext = build_extension(std::sync::Arc::new(Lorentzian), -2.0, order, 1.0)?;
    let quad = QuadratureParams { tol: quad_tol, ..Default::default() };
    let s2 = ball_section(&star(2)?, Vertex::id(0), 1)?;
    let cases = [("star S_2".to_string(), laplacian_matrix(&s2, None)?), (format!("random 20x20 seed {seed}"), random_hermitian(20, 0.0, 10.0, seed)?)];
    let mut rows = vec![["case", "nodes", "error", "seconds"].map(String::from).to_vec()];
    let mut out = Vec::new();
    for (name, h) in &cases {
        let res = hs_matrix_function(h, &ext, quad)?;
        let oracle = spectral_function_oracle(h, &|x| 1.0 / (1.0 + x * x))?;
        let errs = hs_level_errors(&res.level_matrices, &oracle);
        for (l, e) in res.levels.iter().zip(&errs) {
            rows.push(vec![name.clone(), l.nodes.to_string(), num(*e), format!("{:.6}", l.seconds)]);
        }
        let levels: Vec<Value> = res.levels.iter().zip(&errs).map(|(l, e)| json!({ "nodes": l.nodes, "error": e, "seconds": l.seconds })).collect();
        out.push(json!({ "case": name, "levels": levels, "error_estimate": res.error_estimate }));
    }
    let json = json!({ "schema": SCHEMA_VERSION, "phi": "1/(1+x^2)", "order": order, "quad_tol": quad_tol, "cases": out });
    Ok(Artifact { name: "hs-demo".into(), json, csv: rows })
}

/// Parses `args`, runs, and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn std::io::Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli, stdout) {
        Ok(true) => 0,
        Ok(false) => EXIT_FAIL,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
