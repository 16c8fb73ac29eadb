//! Command-line front end: `run`, `compare`, `tables` and `presets`.
//!
//! Exit status is 0 on success, 2 for bad flags, configs or inputs, and 1
//! when a simulation or a write fails.

pub mod config;
pub mod csv;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::sim::{run_experiment, Algo, ExperimentConfig, MetricSeries};
use crate::stats::{summarize, welch_t_test, ConditionSample, WelchResult};

use self::config::NamedConfig;
use self::csv::{SeriesTable, SummaryRow};
use self::presets::{grid_name, preset, STEERING_GRID};

pub const DEFAULT_THRESHOLD: f64 = 0.0001;

#[derive(Debug, Parser)]
#[command(
    name = "epgg",
    version,
    about = "Multi-agent learning on the extended public goods game"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a pool of agents and write series.csv, summary.csv and config.txt.
    Run(RunArgs),
    /// Welch t-tests between two conditions at every evaluation factor.
    Compare(CompareArgs),
    /// Assemble the reputation/steering grid into one table.
    Tables(TablesArgs),
    /// List preset names, or print one preset as a config file.
    Presets(PresetsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Tabular,
    Dqn,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Algo {
        match a {
            AlgoArg::Tabular => Algo::Tabular,
            AlgoArg::Dqn => Algo::Dqn,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Named condition, e.g. dqn-uncertainty-reputation-steer30.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Experiment file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "EPGG_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub steering_frac: Option<f64>,
    /// Learner type. Without a preset or config, starts from its defaults.
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    #[arg(long, value_enum)]
    pub reputation: Option<Switch>,
    #[arg(long, value_enum)]
    pub intrinsic: Option<Switch>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Whether evaluation uses noisy observations.
    #[arg(long, value_enum)]
    pub eval_noise: Option<Switch>,
    /// Epochs averaged into the summary (capped at the run length).
    #[arg(long)]
    pub last_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First condition: a run directory or its series.csv.
    pub a: PathBuf,
    /// Second condition.
    pub b: PathBuf,
    /// Directory for ttest.csv.
    #[arg(long, env = "EPGG_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Rows with p below this are marked significant.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Epochs averaged per run (capped at the run length).
    #[arg(long, default_value_t = 50)]
    pub last_k: usize,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Directory holding one run directory per grid cell.
    #[arg(long = "in", env = "EPGG_OUT_DIR")]
    pub input: Option<PathBuf>,
    /// Preset stem of the grid cells.
    #[arg(long, default_value = "dqn-uncertainty")]
    pub prefix: String,
    /// Table file; defaults to table2.csv inside the input directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write R-versus-RI Welch tests to this file.
    #[arg(long)]
    pub ttest: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Epochs averaged per run (capped at the run length).
    #[arg(long, default_value_t = 50)]
    pub last_k: usize,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    pub name: Option<String>,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Executes a parsed command, writing human-readable output to stdout.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => run_command(&a),
        Command::Compare(a) => compare_command(&a),
        Command::Tables(a) => tables_command(&a),
        Command::Presets(a) => presets_command(&a),
    }
}

/// The configuration a `run` invocation resolves to, before any simulation.
pub fn resolve_run(args: &RunArgs) -> Result<NamedConfig, CliError> {
    let mut named = if let Some(name) = &args.preset {
        NamedConfig {
            name: name.clone(),
            config: preset(name).map_err(usage)?,
        }
    } else if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
        config::parse(&text, stem).map_err(|e| usage(format!("{}: {e}", path.display())))?
    } else if let Some(algo) = args.algo {
        let algo = Algo::from(algo);
        NamedConfig {
            name: algo.name().to_string(),
            config: ExperimentConfig::for_algo(algo),
        }
    } else {
        return Err(usage("run needs --preset, --config or --algo"));
    };

    let c = &mut named.config;
    if let Some(algo) = args.algo.map(Algo::from) {
        if algo != c.algo {
            // Switch learner defaults but keep the experimental condition.
            let mut fresh = ExperimentConfig::for_algo(algo);
            fresh.reputation_enabled = c.reputation_enabled;
            fresh.intrinsic_enabled = c.intrinsic_enabled;
            fresh.steering_fraction = c.steering_fraction;
            fresh.sigma = c.sigma;
            fresh.eval_noise = c.eval_noise;
            fresh.beta = c.beta;
            fresh.runs = c.runs;
            fresh.master_seed = c.master_seed;
            *c = fresh;
        }
    }
    if let Some(v) = args.runs {
        c.runs = v;
    }
    if let Some(v) = args.epochs {
        c.epochs = v;
    }
    if let Some(v) = args.sigma {
        c.sigma = v;
    }
    if let Some(v) = args.beta {
        c.beta = v;
    }
    if let Some(v) = args.steering_frac {
        c.steering_fraction = v;
    }
    if let Some(v) = args.reputation {
        c.reputation_enabled = v.is_on();
    }
    if let Some(v) = args.intrinsic {
        c.intrinsic_enabled = v.is_on();
    }
    if let Some(v) = args.seed {
        c.master_seed = v;
    }
    if let Some(v) = args.eval_noise {
        c.eval_noise = v.is_on();
    }
    if let Some(v) = args.last_k {
        c.last_k = v;
    }
    if c.epochs == 0 {
        return Err(usage("invalid config: at least one epoch is required"));
    }
    if c.last_k == 0 {
        return Err(usage("invalid config: last_k must be positive"));
    }
    c.validate().map_err(usage)?;
    Ok(named)
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.clone()
        .ok_or_else(|| usage("no output directory: pass --out or set EPGG_OUT_DIR"))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(runtime)?;
            Ok(pool.install(f))
        }
    }
}

fn run_command(args: &RunArgs) -> Result<(), CliError> {
    let named = resolve_run(args)?;
    let dir = out_dir(&args.out)?;
    let cfg = &named.config;
    let series = with_jobs(args.jobs, || run_experiment(cfg))?.map_err(runtime)?;

    let rows = summary_rows(&named.name, cfg, &series).map_err(runtime)?;

    fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    write(&dir.join("series.csv"), &csv::series_csv(&series))?;
    write(&dir.join("summary.csv"), &csv::summary_csv(&rows))?;
    write(&dir.join("config.txt"), &config::to_text(&named.name, cfg))?;

    println!("{} ({} runs x {} epochs)", named.name, cfg.runs, cfg.epochs);
    for r in &rows {
        println!("  f = {:<4} {:.2} ± {:.2}", csv::num(r.f), r.mean, r.std);
    }
    Ok(())
}

fn series_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("series.csv")
    } else {
        p.to_path_buf()
    }
}

fn read_series(p: &Path) -> Result<SeriesTable, CliError> {
    SeriesTable::read(&series_path(p)).map_err(usage)
}

/// Welch's test with a convention for two constant samples: equal means
/// give `t = 0, p = 1`, different means `t = ±inf, p = 0`.
pub fn welch_or_degenerate(xs: &ConditionSample, ys: &ConditionSample) -> Result<WelchResult, Error> {
    match welch_t_test(xs, ys) {
        Err(Error::DegenerateSample) => {
            let d = xs.mean() - ys.mean();
            let df = (xs.len() + ys.len()) as f64 - 2.0;
            Ok(if d == 0.0 {
                WelchResult { t: 0.0, df, p: 1.0 }
            } else {
                WelchResult {
                    t: d.signum() * f64::INFINITY,
                    df,
                    p: 0.0,
                }
            })
        }
        other => other,
    }
}

/// Per-factor Welch tests between two series.
pub fn compare_series(a: &SeriesTable, b: &SeriesTable, last_k: usize) -> Result<Vec<(f64, WelchResult)>, CliError> {
    if a.eval_f != b.eval_f {
        return Err(usage(format!(
            "evaluation factors differ: {:?} vs {:?}",
            a.eval_f, b.eval_f
        )));
    }
    a.eval_f
        .iter()
        .map(|&f| {
            let xs = a.final_values(f, last_k.min(a.num_epochs())).map_err(usage)?;
            let ys = b.final_values(f, last_k.min(b.num_epochs())).map_err(usage)?;
            Ok((f, welch_or_degenerate(&xs, &ys).map_err(usage)?))
        })
        .collect()
}

fn compare_command(args: &CompareArgs) -> Result<(), CliError> {
    let a = read_series(&args.a)?;
    let b = read_series(&args.b)?;
    let rows = compare_series(&a, &b, args.last_k)?;
    let dir = out_dir(&args.out)?;
    fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    write(&dir.join("ttest.csv"), &csv::ttest_csv(&rows, args.threshold))?;
    for (f, w) in &rows {
        let mark = if w.p < args.threshold { " *" } else { "" };
        println!(
            "  f = {:<4} t = {:<10} df = {:<8} p = {}{mark}",
            csv::num(*f),
            csv::num(w.t),
            csv::num(w.df),
            csv::num(w.p)
        );
    }
    Ok(())
}

fn tables_command(args: &TablesArgs) -> Result<(), CliError> {
    let dir = args
        .input
        .clone()
        .ok_or_else(|| usage("no input directory: pass --in or set EPGG_OUT_DIR"))?;

    let mut missing = Vec::new();
    let mut cells: Vec<[Option<SeriesTable>; 2]> = Vec::new();
    for pct in STEERING_GRID {
        let mut pair = [None, None];
        for (slot, intrinsic) in [false, true].into_iter().enumerate() {
            let name = grid_name(&args.prefix, intrinsic, pct);
            let path = dir.join(&name).join("series.csv");
            if path.is_file() {
                pair[slot] = Some(SeriesTable::read(&path).map_err(usage)?);
            } else {
                missing.push(name);
            }
        }
        cells.push(pair);
    }
    if !missing.is_empty() {
        return Err(usage(format!("missing grid cells: {}", missing.join(", "))));
    }
    let cells: Vec<[SeriesTable; 2]> = cells.into_iter().map(|[r, ri]| [r.unwrap(), ri.unwrap()]).collect();
    let eval_f = cells[0][0].eval_f.clone();
    if cells.iter().flatten().any(|t| t.eval_f != eval_f) {
        return Err(usage("grid cells use different evaluation factors"));
    }

    let mut table = String::from("f");
    for pct in STEERING_GRID {
        table.push_str(&format!(",R {pct}%,RI {pct}%"));
    }
    table.push('\n');
    let mut tests = String::from("steering,f,t,df,p,significant\n");
    for &f in &eval_f {
        table.push_str(&csv::num(f));
        for (pct, [r, ri]) in STEERING_GRID.iter().zip(&cells) {
            let xs = r.final_values(f, args.last_k.min(r.num_epochs())).map_err(usage)?;
            let ys = ri.final_values(f, args.last_k.min(ri.num_epochs())).map_err(usage)?;
            for s in [&xs, &ys] {
                table.push_str(&format!(",{:.2} ± {:.2}", s.mean(), s.std()));
            }
            let w = welch_or_degenerate(&xs, &ys).map_err(usage)?;
            tests.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv::num(*pct as f64 / 100.0),
                csv::num(f),
                csv::num(w.t),
                csv::num(w.df),
                csv::num(w.p),
                w.p < args.threshold
            ));
        }
        table.push('\n');
    }
    let out = args.out.clone().unwrap_or_else(|| dir.join("table2.csv"));
    write(&out, &table)?;
    if let Some(path) = &args.ttest {
        write(path, &tests)?;
    }
    print!("{table}");
    Ok(())
}

fn presets_command(args: &PresetsArgs) -> Result<(), CliError> {
    match &args.name {
        Some(name) => {
            let c = preset(name).map_err(usage)?;
            print!("{}", config::to_text(name, &c));
        }
        None => {
            for name in presets::BASE_NAMES {
                println!("{name}");
            }
            println!("(append -steerNN for NN% steering agents)");
        }
    }
    Ok(())
}

/// Summary rows of a finished experiment, one per evaluation factor.
pub fn summary_rows(name: &str, cfg: &ExperimentConfig, series: &MetricSeries) -> crate::Result<Vec<SummaryRow>> {
    let last_k = cfg.last_k.min(cfg.epochs);
    cfg.eval_f
        .iter()
        .map(|&f| {
            let (mean, std) = summarize(series, f, last_k)?;
            Ok(SummaryRow {
                condition: name.to_string(),
                f,
                mean,
                std,
            })
        })
        .collect()
}
