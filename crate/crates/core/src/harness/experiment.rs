//! One experiment run: simulate, then write the run directory.
//!
//! A run directory holds
//! - `config.txt`: every key including seeds, enough to replay the run exactly;
//! - `trajectory.csv`;
//! - `summary.txt`: the aligned report table;
//! - `summary.kv`: the same report as `key = value` lines;
//! - `plot.svg` when plotting is enabled.
//!
//! Each file is written to a temporary name and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{format_table, metrics_of_log, MetricsReport};
use crate::harness::plot::render_plot;
use crate::harness::trajectory::{to_csv_string, Table};
use crate::interaction::{RunLog, Simulation};

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: MetricsReport,
    pub log: RunLog,
}

impl RunOutcome {
    /// Watchdog or numerical failure that ended the run early.
    pub fn aborted(&self) -> Option<&Error> {
        self.log.aborted.as_ref()
    }
}

/// Write `data` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, data).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Directory name used by `simulate` for a config file stem.
pub fn run_name(stem: &str, cfg: &ExperimentConfig) -> String {
    format!("{stem}-case{}-seed{}", cfg.run.case, cfg.run.sensor.seed)
}

/// Run `cfg` and write its artifacts under `cfg.out_dir/name`.
///
/// A watchdog abort is not an error here: the partial log is written and
/// the abort is reported through [`RunOutcome::aborted`].
pub fn run_experiment(cfg: &ExperimentConfig, name: &str) -> Result<RunOutcome> {
    cfg.validate()?;
    let log = Simulation::new(cfg.run)?.run(cfg.full_rate);
    let report = metrics_of_log(&log);

    let dir = cfg.out_dir.join(name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_atomic(&dir.join("config.txt"), cfg.to_config_string().as_bytes())?;

    let csv = to_csv_string(&log.records, &log.target, &cfg.run.plant.geo)?;
    write_atomic(&dir.join("trajectory.csv"), csv.as_bytes())?;

    let label = format!("case{}", cfg.run.case);
    let mut table = format_table(&[(label, report)]);
    let mut kv = format!("case = {}\n", cfg.run.case);
    kv.push_str(&report.to_key_values(""));
    match &log.aborted {
        Some(e) => {
            table.push_str(&format!("aborted: {e}\n"));
            kv.push_str(&format!("aborted = {e}\n"));
        }
        None => kv.push_str("aborted = none\n"),
    }
    write_atomic(&dir.join("summary.txt"), table.as_bytes())?;
    write_atomic(&dir.join("summary.kv"), kv.as_bytes())?;

    if cfg.plot {
        let svg = render_plot(&Table::read(csv.as_bytes())?)?;
        write_atomic(&dir.join("plot.svg"), svg.as_bytes())?;
    }
    Ok(RunOutcome { dir, report, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_writes_header_and_initial_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig { out_dir: tmp.path().to_path_buf(), plot: true, ..Default::default() };
        cfg.run.duration = 0.0;
        let out = run_experiment(&cfg, "zero").unwrap();
        let csv = fs::read_to_string(out.dir.join("trajectory.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!((out.report.e - 1.5f64.hypot(1.0)).abs() < 1e-12);
        assert!((out.report.xo + 1.5).abs() < 1e-12);
        for f in ["config.txt", "summary.txt", "summary.kv", "plot.svg"] {
            assert!(out.dir.join(f).is_file(), "{f}");
        }
        let left: Vec<_> = fs::read_dir(&out.dir).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().extension().is_some_and(|x| x == "tmp")).collect();
        assert!(left.is_empty());
    }

    #[test]
    fn snapshot_reproduces_config() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig { out_dir: tmp.path().to_path_buf(), ..Default::default() };
        cfg.run.duration = 0.05;
        cfg.run.sensor.seed = 99;
        let out = run_experiment(&cfg, "snap").unwrap();
        let back = crate::harness::config::load_config(&out.dir.join("config.txt")).unwrap();
        assert_eq!(back, cfg);
        let kv = fs::read_to_string(out.dir.join("summary.kv")).unwrap();
        assert_eq!(MetricsReport::from_key_values(&kv).unwrap(), out.report);
    }
}
