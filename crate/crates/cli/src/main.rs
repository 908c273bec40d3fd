//! `qrec`: simulate point sets, extract corners and records, run the
//! verification scenarios and summarize their reports.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage, configuration
//! or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use qrec::io::{
    corners_table, ground_table, lifetimes_table, path_table, points_table, read_points_file, Table,
};
use qrec::{
    gen_selfsim_poisson, gen_unit_poisson, k_corners, k_records, kth_min_path, lifetimes,
    run_scenario, OutputFormat, PlanarPointSet, RngStream, RunConfig, ScenarioId, ScenarioReport,
    Window, ALGORITHM_VERSION,
};

const DEFAULT_WINDOW: f64 = 20.0;

#[derive(Parser)]
#[command(name = "qrec", version, about = "k-corners and k-records of the unit Poisson process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a unit Poisson point set, and optionally the k/t ground process.
    Simulate(Opts),
    /// Extract corners, records, the k-th minimum path and its flats from a points CSV.
    Extract {
        /// Points CSV with header `t,x`.
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run verification scenarios and write one JSON report each.
    Verify(Opts),
    /// Summarize the scenario reports found in the output directory.
    Report(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// TOML file with run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    window_t: Option<f64>,
    #[arg(long)]
    window_x: Option<f64>,
    #[arg(long)]
    t_lo: Option<f64>,
    #[arg(long)]
    t_hi: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// Defaults to $QR_SEED, else 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario ids, comma separated or repeated; all when omitted.
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
    /// Write raw samples next to each report.
    #[arg(long)]
    emit_raw: bool,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    /// Thinning probability for V3.
    #[arg(long)]
    thin_p: Option<f64>,
    /// Run the deliberately violated configuration of each scenario.
    #[arg(long)]
    control: bool,
}

/// Settings readable from a config file; every field is optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<f64>,
    window_t: Option<f64>,
    window_x: Option<f64>,
    t_lo: Option<f64>,
    t_hi: Option<f64>,
    replicas: Option<u64>,
    seed: Option<u64>,
    scenarios: Option<Vec<String>>,
    output_dir: Option<PathBuf>,
    format: Option<String>,
    emit_raw: Option<bool>,
    jobs: Option<usize>,
    thin_p: Option<f64>,
    control: Option<bool>,
}

fn defaults() -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Ok(s) = std::env::var("QR_SEED") {
        cfg.seed = s
            .trim()
            .parse()
            .with_context(|| format!("QR_SEED must be a 64-bit unsigned integer, got '{s}'"))?;
    }
    Ok(cfg)
}

/// Defaults, then the config file, then flags.
fn resolve(opts: &Opts) -> Result<RunConfig> {
    let mut cfg = defaults()?;
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        macro_rules! take {
            ($($field:ident),*) => { $(if file.$field.is_some() { cfg.$field = file.$field; })* };
        }
        take!(window_t, window_x, t_lo, t_hi, replicas, jobs, thin_p);
        if let Some(v) = file.k {
            cfg.k = v;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.scenarios {
            cfg.scenarios = v;
        }
        if let Some(v) = file.output_dir {
            cfg.output_dir = v;
        }
        if let Some(v) = file.format {
            cfg.format = v.parse()?;
        }
        if let Some(v) = file.emit_raw {
            cfg.emit_raw = v;
        }
        if let Some(v) = file.control {
            cfg.control = v;
        }
    }
    macro_rules! flag {
        ($($field:ident),*) => { $(if opts.$field.is_some() { cfg.$field = opts.$field; })* };
    }
    flag!(window_t, window_x, t_lo, t_hi, replicas, jobs, thin_p);
    if let Some(v) = opts.k {
        cfg.k = v;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if !opts.scenario.is_empty() {
        cfg.scenarios = opts.scenario.clone();
    }
    if let Some(v) = &opts.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &opts.format {
        cfg.format = v.parse()?;
    }
    cfg.emit_raw |= opts.emit_raw;
    cfg.control |= opts.control;
    cfg.validate()?;
    Ok(cfg)
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Jsonl => "jsonl",
    }
}

fn write_table(dir: &Path, stem: &str, table: &Table, format: OutputFormat) -> Result<()> {
    let path = dir.join(format!("{stem}.{}", extension(format)));
    table
        .write_file(&path, format)
        .with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    algorithm_version: &'a str,
    config: &'a RunConfig,
    window_t: f64,
    window_x: f64,
    expected_count: f64,
    point_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_expected_count: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_count: Option<usize>,
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let (wt, wx) = (cfg.window_t.unwrap_or(DEFAULT_WINDOW), cfg.window_x.unwrap_or(DEFAULT_WINDOW));
    let ps = gen_unit_poisson(&mut RngStream::new(cfg.seed, 0), wt, wx)?;
    let ground = match (cfg.t_lo, cfg.t_hi) {
        (Some(lo), Some(hi)) => Some(gen_selfsim_poisson(&mut RngStream::new(cfg.seed, 1), cfg.k, lo, hi)?),
        _ => None,
    };
    create_dir(&cfg.output_dir)?;
    write_table(&cfg.output_dir, "points", &points_table(ps.points()), cfg.format)?;
    if let Some(gs) = &ground {
        write_table(&cfg.output_dir, "ground", &ground_table(gs), cfg.format)?;
    }
    let manifest = Manifest {
        seed: cfg.seed,
        algorithm_version: ALGORITHM_VERSION,
        config: cfg,
        window_t: wt,
        window_x: wx,
        expected_count: wt * wx,
        point_count: ps.len(),
        ground_expected_count: ground.as_ref().map(|_| cfg.k * (cfg.t_hi.unwrap() / cfg.t_lo.unwrap()).ln()),
        ground_count: ground.as_ref().map(|g| g.len()),
    };
    let path = cfg.output_dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} points to {}", ps.len(), cfg.output_dir.display());
    Ok(())
}

fn cmd_extract(cfg: &RunConfig, input: &Path) -> Result<()> {
    let k = cfg.planar_k()?;
    let points = read_points_file(input).with_context(|| format!("reading {}", input.display()))?;
    let ps = match (cfg.window_t, cfg.window_x) {
        (Some(t), Some(x)) => PlanarPointSet::new(points, Window::rectangle(t, x)?)?,
        (None, None) => PlanarPointSet::bounding(points)?,
        _ => bail!("give both --window-t and --window-x, or neither"),
    };
    let cs = k_corners(&ps, k);
    let records = k_records(&ps, k);
    let path = kth_min_path(&ps, k, ps.window_t())?;
    create_dir(&cfg.output_dir)?;
    let mut rec = Table::new("records", &["t", "x"]);
    for p in &records {
        rec.push(vec![p.t.into(), p.x.into()]);
    }
    write_table(&cfg.output_dir, "corners", &corners_table(&cs), cfg.format)?;
    write_table(&cfg.output_dir, "records", &rec, cfg.format)?;
    write_table(&cfg.output_dir, "path", &path_table(&path), cfg.format)?;
    write_table(&cfg.output_dir, "lifetimes", &lifetimes_table(&lifetimes(&path)), cfg.format)?;
    println!(
        "{} points: {} corners, {} records, {} path jumps",
        ps.len(),
        cs.len(),
        records.len(),
        path.jumps.len()
    );
    Ok(())
}

fn scenario_ids(cfg: &RunConfig) -> Result<Vec<ScenarioId>> {
    if cfg.scenarios.is_empty() {
        return Ok(ScenarioId::ALL.to_vec());
    }
    cfg.scenarios.iter().map(|s| s.parse().map_err(anyhow::Error::from)).collect()
}

fn summary_line(r: &ScenarioReport) -> String {
    let ok = r.tests.iter().filter(|t| t.passed).count();
    format!(
        "{:<4} {} k={} seed={} tests {}/{} {} ms{}",
        r.scenario_id,
        if r.passed { "PASS" } else { "FAIL" },
        r.k,
        r.seed,
        ok,
        r.tests.len(),
        r.runtime_ms,
        if r.control { " (control)" } else { "" }
    )
}

fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let ids = scenario_ids(cfg)?;
    create_dir(&cfg.output_dir)?;
    let mut all = true;
    let mut errors = Vec::new();
    for id in ids {
        let report = match run_scenario(id, cfg) {
            Ok(r) => r,
            Err(e) => {
                println!("{id:<4} ERROR {e}");
                errors.push(format!("{id}: {e}"));
                continue;
            }
        };
        let path = cfg.output_dir.join(format!("{id}.json"));
        fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        if cfg.emit_raw {
            for table in &report.raw {
                write_table(&cfg.output_dir, &format!("{id}_{}", table.name), table, cfg.format)?;
            }
        }
        println!("{}", summary_line(&report));
        for t in report.tests.iter().filter(|t| !t.passed) {
            println!("     failed {}: {} {} {} ({})", t.name, t.statistic, t.criterion, t.threshold, t.detail);
        }
        all &= report.passed;
    }
    if !errors.is_empty() {
        bail!("{} scenario(s) could not run: {}", errors.len(), errors.join("; "));
    }
    Ok(all)
}

fn cmd_report(cfg: &RunConfig) -> Result<bool> {
    let ids = scenario_ids(cfg)?;
    let mut found = 0;
    let mut all = true;
    for id in ids {
        let path = cfg.output_dir.join(format!("{id}.json"));
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let report: ScenarioReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        found += 1;
        println!("{}", summary_line(&report));
        for t in &report.tests {
            println!(
                "     {} {:<40} {:.6e} {} {:.6e}",
                if t.passed { "ok  " } else { "FAIL" },
                t.name,
                t.statistic,
                t.criterion,
                t.threshold
            );
        }
        all &= report.passed;
    }
    if found == 0 {
        return Err(anyhow!("no scenario reports in {}", cfg.output_dir.display()));
    }
    Ok(all)
}

fn run(cli: Cli) -> Result<bool> {
    let opts = match &cli.command {
        Command::Simulate(o) | Command::Verify(o) | Command::Report(o) => o,
        Command::Extract { opts, .. } => opts,
    };
    let cfg = resolve(opts)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Simulate(_) => cmd_simulate(&cfg).map(|_| true),
        Command::Extract { input, .. } => cmd_extract(&cfg, input).map(|_| true),
        Command::Verify(_) => cmd_verify(&cfg),
        Command::Report(_) => cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
