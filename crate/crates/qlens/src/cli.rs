//! Argument parsing and subcommand dispatch.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Read;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use qlens_core::checks::{self, CheckReport, RunConfig};
use qlens_core::expr::{normalize, parse};
use qlens_core::groupoid::embed_normalform;
use qlens_core::modules::{k_invariant, line_bundle_projection, verify_line_bundle_iso, verify_projection, KInvariant};
use qlens_core::structure::symbol;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigEcho, ConfigFile};
use crate::projection::ProjectionFile;
use crate::CliError;

const DEGREES: [i64; 9] = [-4, -3, -2, -1, 0, 1, 2, 3, 4];

#[derive(Debug, Parser)]
#[command(
    name = "qlens",
    version,
    about = "Normal forms, operator models and line-bundle checks for quantum lens spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Run parameters; flags override `--config`, which overrides the defaults.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON file mirroring the run parameters.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Deformation parameter, 0 < q < 1.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Lens parameter l >= 1.
    #[arg(long, global = true)]
    pub l: Option<u32>,
    /// Truncation level N.
    #[arg(long = "N", visible_alias = "trunc", global = true)]
    pub n: Option<usize>,
    /// Half-width W of the merged model's shift window.
    #[arg(long = "W", global = true)]
    pub w: Option<usize>,
    /// Comparison tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Distance from the truncation edge excluded from comparisons.
    #[arg(long, global = true)]
    pub margin: Option<usize>,
    /// Seed for every random sample.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random samples per (l, q) pair.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            ConfigFile::load(path)?.apply(&mut cfg);
        }
        let flags = ConfigFile {
            q: self.q,
            l: self.l,
            n: self.n,
            w: self.w,
            tol: self.tol,
            margin: self.margin,
            seed: self.seed,
            samples: self.samples,
        };
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the PBW normal form of an expression.
    Normalize { expr: String },
    /// Check the rewrite rules as operator identities.
    VerifyRelations,
    /// Compare normal forms with operator norms on random expressions.
    CheckFaithful {
        #[arg(long, default_value_t = 6)]
        degree: usize,
    },
    /// Homomorphism, associativity and generator embedding of the groupoid model.
    GroupoidCheck,
    /// Slice independence of rho_n and the degree structure.
    GradingCheck,
    /// Print the symbol of an expression as Fourier coefficients.
    Symbol { expr: String },
    /// The exact sequence and the matched-symbol description.
    StructureCheck,
    /// Classify a projection file ("-" reads standard input); without a file,
    /// run the classification round trip.
    Classify { file: Option<PathBuf> },
    /// Invariant and module isomorphism of one line bundle, or of all
    /// degrees in [-4, 4] when --n is absent.
    LineBundle {
        #[arg(long = "n", allow_hyphen_values = true)]
        degree: Option<i64>,
        /// Write the line-bundle projection to this file.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Every suite.
    ReportAll,
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    passed: bool,
    max_deviation: f64,
    tolerance: f64,
    samples: usize,
    note: &'a str,
}

impl<'a> From<&'a CheckReport> for ReportJson<'a> {
    fn from(r: &'a CheckReport) -> Self {
        ReportJson {
            name: &r.name,
            passed: r.passed,
            max_deviation: r.max_deviation,
            tolerance: r.tolerance,
            samples: r.samples,
            note: &r.note,
        }
    }
}

fn invariant_json(inv: &KInvariant) -> Value {
    let mut v = vec![json!(inv.rho)];
    v.extend(inv.t.iter().map(|t| json!(t)));
    Value::Array(v)
}

fn summary_line(r: &CheckReport) -> String {
    format!(
        "{} {}: max deviation {:.3e} (tolerance {:.1e}, {} samples) {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.max_deviation,
        r.tolerance,
        r.samples,
        r.note
    )
}

/// Worker count from `QLENS_THREADS`, defaulting to the available cores.
pub fn thread_count() -> usize {
    std::env::var("QLENS_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

type Job<'a> = Box<dyn FnOnce() -> qlens_core::Result<CheckReport> + Send + 'a>;

/// Runs the jobs on at most `threads` workers; results keep job order.
fn run_jobs(jobs: Vec<Job<'_>>, threads: usize) -> Result<Vec<CheckReport>, CliError> {
    let n = jobs.len();
    let queue: Vec<Mutex<Option<Job<'_>>>> = jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let results: Vec<Mutex<Option<qlens_core::Result<CheckReport>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let job = queue[i].lock().expect("job lock").take().expect("each job runs once");
                *results[i].lock().expect("result lock") = Some(job());
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("result lock").expect("every job ran").map_err(CliError::from))
        .collect()
}

fn suite_outcome(cfg: &RunConfig, reports: &[CheckReport]) -> Outcome {
    let passed = reports.iter().all(|r| r.passed);
    let body = json!({
        "config": ConfigEcho::from(cfg),
        "checks": reports.iter().map(ReportJson::from).collect::<Vec<_>>(),
        "passed": passed,
    });
    let stderr = reports.iter().map(|r| summary_line(r) + "\n").collect();
    Outcome { code: if passed { 0 } else { 1 }, stdout: pretty(&body), stderr }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn all_jobs(cfg: &RunConfig) -> Vec<Job<'static>> {
    let c = *cfg;
    let pair = cfg.pair();
    let (p1, p2, p3, p4, p5, p6, p7, p8) =
        (pair.clone(), pair.clone(), pair.clone(), pair.clone(), pair.clone(), pair.clone(), pair.clone(), pair);
    vec![
        Box::new(move || checks::relations(&c, &p1)),
        Box::new(move || checks::faithfulness(&c, &p2, 6)),
        Box::new(move || checks::groupoid_homomorphism(&c, &p3)),
        Box::new(move || checks::generator_embedding(&c, &p4)),
        Box::new(move || checks::exact_sequence(&c, &p5)),
        Box::new(move || checks::matched_symbols(&c, &p6)),
        Box::new(move || checks::slice_independence(&c, &p7)),
        Box::new(move || checks::classification(&c, &[c.l])),
        Box::new(move || checks::line_bundles(&c, &[c.l], &DEGREES)),
        Box::new(move || checks::degree_structure(&c, &p8)),
    ]
}

fn read_input(file: &Option<PathBuf>) -> Result<String, CliError> {
    match file {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            Ok(s)
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.opts.resolve()?;
    let pair = cfg.pair();
    let threads = thread_count();
    let suites =
        |jobs: Vec<Job<'_>>| -> Result<Outcome, CliError> { Ok(suite_outcome(&cfg, &run_jobs(jobs, threads)?)) };
    match &cli.command {
        Command::Normalize { expr } => {
            let nf = normalize(&parse(expr)?, cfg.l);
            let text = nf.to_string();
            Ok(Outcome { code: 0, stdout: pretty(&json!({ "normalform": text })), stderr: format!("{text}\n") })
        }
        Command::Symbol { expr } => {
            let nf = normalize(&parse(expr)?, cfg.l);
            let f = embed_normalform(&nf, &cfg.params(cfg.l, cfg.q)?)?;
            let sigma = symbol(&f);
            let coeffs: BTreeMap<i64, [f64; 2]> = sigma.coeffs().map(|(n, a)| (n, [a.re, a.im])).collect();
            Ok(Outcome { code: 0, stdout: pretty(&json!({ "symbol": coeffs })), stderr: format!("{sigma}\n") })
        }
        Command::VerifyRelations => suites(vec![Box::new(|| checks::relations(&cfg, &pair))]),
        Command::CheckFaithful { degree } => {
            let degree = *degree;
            suites(vec![Box::new(move || checks::faithfulness(&cfg, &cfg.pair(), degree))])
        }
        Command::GroupoidCheck => suites(vec![
            Box::new(|| checks::groupoid_homomorphism(&cfg, &pair)),
            Box::new(|| checks::generator_embedding(&cfg, &pair)),
        ]),
        Command::GradingCheck => suites(vec![
            Box::new(|| checks::slice_independence(&cfg, &pair)),
            Box::new(|| checks::degree_structure(&cfg, &pair)),
        ]),
        Command::StructureCheck => suites(vec![
            Box::new(|| checks::exact_sequence(&cfg, &pair)),
            Box::new(|| checks::matched_symbols(&cfg, &pair)),
        ]),
        Command::Classify { file: None } => suites(vec![Box::new(|| checks::classification(&cfg, &[cfg.l]))]),
        Command::Classify { file } => {
            let p = ProjectionFile::parse(&read_input(file)?)?.to_projection()?;
            let report = verify_projection(&p, cfg.tol);
            let verification = json!({
                "idempotent": report.idempotent,
                "self_adjoint": report.self_adjoint,
                "scalar_idempotent": report.scalar_idempotent,
                "passed": report.passed,
            });
            match k_invariant(&p, cfg.tol) {
                Ok(inv) => Ok(Outcome {
                    code: 0,
                    stdout: pretty(&json!({
                        "l": p.l(), "N": p.n(), "r": p.r(),
                        "projection": verification,
                        "invariant": invariant_json(&inv),
                        "passed": true,
                    })),
                    stderr: format!("invariant {inv}\n"),
                }),
                Err(e) => Ok(Outcome {
                    code: 1,
                    stdout: pretty(&json!({
                        "l": p.l(), "N": p.n(), "r": p.r(),
                        "projection": verification,
                        "error": e.to_string(),
                        "passed": false,
                    })),
                    stderr: format!("FAIL classify: {e}\n"),
                }),
            }
        }
        Command::LineBundle { degree: None, output: Some(_) } => {
            Err(CliError::Format("--output needs a single degree --n".into()))
        }
        Command::LineBundle { degree: None, output: None } => {
            suites(vec![Box::new(|| checks::line_bundles(&cfg, &[cfg.l], &DEGREES))])
        }
        Command::LineBundle { degree: Some(n), output } => {
            let n = *n;
            let proj = line_bundle_projection(n, cfg.l, cfg.n)?;
            if let Some(path) = output {
                let text = serde_json::to_string_pretty(&ProjectionFile::from_projection(&proj))?;
                std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
            }
            let inv = k_invariant(&proj, cfg.tol)?;
            let expected = KInvariant::new(1, vec![n; cfg.l as usize])?;
            let iso = verify_line_bundle_iso(n, &cfg.params(cfg.l, cfg.q)?, cfg.samples, cfg.tol, cfg.seed)?;
            let passed = inv == expected && iso.passed;
            let body = json!({
                "config": ConfigEcho::from(&cfg),
                "n": n,
                "invariant": invariant_json(&inv),
                "expected_invariant": invariant_json(&expected),
                "iso": {
                    "samples": iso.samples,
                    "relations": iso.relations,
                    "domain_round_trip": iso.domain_round_trip,
                    "module_round_trip": iso.module_round_trip,
                    "left_linearity": iso.left_linearity,
                    "max_deviation": iso.max_deviation,
                    "passed": iso.passed,
                },
                "passed": passed,
            });
            let stderr = format!(
                "{} L[{n}]: invariant {inv}, isomorphism max deviation {:.3e}\n",
                if passed { "PASS" } else { "FAIL" },
                iso.max_deviation
            );
            Ok(Outcome { code: if passed { 0 } else { 1 }, stdout: pretty(&body), stderr })
        }
        Command::ReportAll => Ok(suite_outcome(&cfg, &run_jobs(all_jobs(&cfg), threads)?)),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}
