use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use cfmmr_core::harness::experiment::run_name;
use cfmmr_core::harness::metrics::format_table;
use cfmmr_core::harness::{load_config, metrics_from_table, run_experiment, ExperimentConfig, Table};
use cfmmr_core::interaction::InteractionCase;
use cfmmr_core::Error;

#[derive(Parser)]
#[command(name = "cfmmr", version, about = "Posture-regulation experiments for a two-axle compliant-framed mobile robot")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its run directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Interaction case: 1 ideal, 2 velocity feedback, 3 position feedback.
        #[arg(long)]
        case: Option<u8>,
        /// Seed for both the encoder noise and the disturbance.
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated time in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Parent directory of the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: bool,
        /// Log every plant step instead of every control period.
        #[arg(long)]
        full_rate: bool,
    },
    /// Run every `*.cfg` file in a directory.
    Batch {
        #[arg(long)]
        config_dir: PathBuf,
    },
    /// Recompute the report from a trajectory CSV.
    Metrics {
        #[arg(long)]
        csv: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Validation { .. } => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn simulate(
    config: &Path,
    case: Option<u8>,
    seed: Option<u64>,
    duration: Option<f64>,
    out: Option<PathBuf>,
    plot: bool,
    full_rate: bool,
) -> Result<u8, Error> {
    let mut cfg = load_config(config)?;
    if let Some(c) = case {
        cfg.run.case = InteractionCase::try_from(c)?;
    }
    if let Some(s) = seed {
        cfg.run.sensor.seed = s;
        cfg.run.disturbance_seed = s;
    }
    if let Some(d) = duration {
        cfg.run.duration = d;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    cfg.plot |= plot;
    cfg.full_rate |= full_rate;
    cfg.validate()?;

    let name = run_name(&stem(config), &cfg);
    let outcome = run_experiment(&cfg, &name)?;
    print!("{}", format_table(&[(format!("case{}", cfg.run.case), outcome.report)]));
    println!("wrote {}", outcome.dir.display());
    if let Some(e) = outcome.aborted() {
        eprintln!("error: {e}");
        return Ok(exit_code(e));
    }
    Ok(0)
}

fn batch(dir: &Path) -> Result<u8, Error> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io { path: dir.into(), source: e })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();

    let mut code = 0u8;
    let mut jobs: Vec<(String, ExperimentConfig)> = Vec::new();
    for p in &paths {
        match load_config(p) {
            Ok(cfg) => jobs.push((stem(p), cfg)),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                code = code.max(exit_code(&e));
            }
        }
    }
    let results: Vec<_> = jobs.par_iter().map(|(name, cfg)| (name, run_experiment(cfg, name))).collect();

    let mut rows = Vec::new();
    for (name, r) in results {
        match r {
            Ok(out) => {
                if let Some(e) = out.aborted() {
                    eprintln!("error: {name}: {e}");
                    code = code.max(exit_code(e));
                }
                rows.push((name.clone(), out.report));
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                code = code.max(exit_code(&e));
            }
        }
    }
    print!("{}", format_table(&rows));
    Ok(code)
}

fn metrics(csv: &Path) -> Result<u8, Error> {
    let file = fs::File::open(csv).map_err(|e| Error::Io { path: csv.into(), source: e })?;
    let report = metrics_from_table(&Table::read(file)?)?;
    print!("{}", format_table(&[(stem(csv), report)]));
    print!("{}", report.to_key_values(""));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Simulate { config, case, seed, duration, out, plot, full_rate } => {
            simulate(&config, case, seed, duration, out, plot, full_rate)
        }
        Cmd::Batch { config_dir } => batch(&config_dir),
        Cmd::Metrics { csv } => metrics(&csv),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
