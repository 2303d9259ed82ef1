use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use lightsp::graph::measure;
use lightsp::metric::MetricKind;
use lightsp::verify::VerifyOptions;
use lightsp::{load_metric, run, verify_all, BasicSpKind, MetricSpaceF64, Mode, OracleCaps, RunConfig, SpannerGraph};

mod sweep;

/// Light, low-degree, low-hop-diameter spanners.
#[derive(Parser)]
#[command(name = "lightsp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a spanner and write it, with metrics, into a bundle directory.
    Build(BuildArgs),
    /// Rebuild a bundle, compare edge lists and run the verification suite.
    Verify(VerifyArgs),
    /// Run a grid of configurations and write one CSV row per run.
    Sweep(sweep::SweepArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Point file (CSV coordinates or distance matrix) or `gen:kind,n=..,dim=..,seed=..`.
    #[arg(long)]
    points: String,
    #[arg(long)]
    rho: usize,
    #[arg(long)]
    eps: f64,
    /// Stretch handed to the greedy back-end.
    #[arg(long)]
    t: f64,
    /// `greedy`, `theta:K` or `complete`.
    #[arg(long, default_value = "greedy", value_parser = check_basic)]
    basic: String,
    /// `strict`, `explore` or `explore:GAMMA`.
    #[arg(long, default_value = "strict", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    /// Seed for generated points without an explicit `seed=` and for verification sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant in the strict cage height.
    #[arg(long, default_value_t = 8)]
    c0: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Bundle directory written by `build`.
    dir: PathBuf,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
}

/// What `build` records so that `verify` can reproduce the run.
#[derive(Serialize, Deserialize)]
struct BundleConfig {
    points_source: String,
    points_file: String,
    config: RunConfig,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    Mode::parse(s).map_err(|e| e.to_string())
}

fn check_basic(s: &str) -> std::result::Result<String, String> {
    BasicSpKind::parse(s, 1.0).map(|_| s.to_string()).map_err(|e| e.to_string())
}

/// An error in the request rather than in the run; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

fn oracle_caps() -> Result<OracleCaps> {
    OracleCaps::from_env().map_err(|e| usage(format!("{}: {e}", OracleCaps::ENV_VAR)))
}

/// Appends the fallback seed to generator specs that do not carry one.
fn points_source(points: &str, seed: u64) -> String {
    if points.starts_with("gen:") && !points.contains("seed=") {
        format!("{points},seed={seed}")
    } else {
        points.to_string()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let caps = oracle_caps()?;
    let basic = BasicSpKind::parse(&a.basic, a.t).map_err(usage)?;
    let mut cfg = RunConfig::new(a.rho, a.eps, a.t, basic).with_mode(a.mode);
    cfg.seed = a.seed;
    cfg.c0 = a.c0;
    cfg.caps = caps;
    cfg.validate().map_err(usage)?;

    let source = points_source(&a.points, a.seed);
    let m: MetricSpaceF64 = load_metric(&source).with_context(|| format!("loading points from {source:?}"))?;
    let b = run(&m, &cfg)?;

    let mut metrics = b.metrics();
    let measured = measure(&b.graph, &m, cfg.target_stretch(), &caps);
    metrics.stretch = measured.stretch;
    metrics.hop_diameter = measured.hop_diameter;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let points_file = match m.kind() {
        MetricKind::Euclidean { .. } => "points.csv",
        MetricKind::Matrix { .. } => "points.mat",
    };
    m.save(&a.out.join(points_file))?;
    fs::write(a.out.join("edges.txt"), b.graph.to_edge_list())?;
    write_json(&a.out.join("metrics.json"), &metrics)?;
    write_json(&a.out.join("forest.json"), &b.forest.dump())?;
    write_json(
        &a.out.join("config.json"),
        &BundleConfig { points_source: source, points_file: points_file.into(), config: cfg },
    )?;

    println!(
        "n = {}, |E| = {}, max degree = {}, lightness = {:.3}, stretch = {}, hop diameter = {}",
        metrics.n,
        metrics.edges,
        metrics.max_degree,
        metrics.lightness,
        metrics.stretch.map_or("n/a".into(), |s| format!("{s:.6}")),
        metrics.hop_diameter.map_or("n/a".into(), |h| h.to_string()),
    );
    Ok(())
}

/// Returns whether verification passed.
fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let read = |name: &str| {
        let p = a.dir.join(name);
        fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))
    };
    let bc: BundleConfig = serde_json::from_str(&read("config.json")?).context("parsing config.json")?;
    let points = a.dir.join(&bc.points_file);
    let m: MetricSpaceF64 = load_metric(&points.to_string_lossy()).context("loading bundle points")?;
    let stored = SpannerGraph::<f64>::parse_edge_list(m.n(), &read("edges.txt")?).context("parsing edges.txt")?;

    let mut cfg = bc.config;
    cfg.caps = oracle_caps()?;
    cfg.validate()?;
    let b = run(&m, &cfg)?;
    let edges_match = stored.to_edge_list() == b.graph.to_edge_list();

    let opts = VerifyOptions { caps: cfg.caps, seed: cfg.seed, ..VerifyOptions::default() };
    let report = verify_all(&b, &m, &opts);
    let full = serde_json::json!({ "edges_match": edges_match, "report": &report });
    write_json(&a.dir.join("report.json"), &full)?;

    if a.json {
        println!("{}", serde_json::to_string_pretty(&full)?);
    } else {
        print!("{}", report.table());
        println!("edges_match                {}", if edges_match { "pass" } else { "FAIL" });
    }
    let ok = edges_match && report.passed();
    if !ok {
        let mut failed: Vec<&str> = report.failures().map(|c| c.name).collect();
        if !edges_match {
            failed.insert(0, "edges_match");
        }
        eprintln!("verification failed: {}", failed.join(", "));
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(a).map(|()| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => sweep::cmd_sweep(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}

fn ensure_nonempty<T>(what: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(usage(format!("--{what} list is empty")));
    }
    Ok(())
}
