use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cfmmr_core::harness::MetricsReport;

fn cfmmr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmmr")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.cfg", "sim.duration = 1.0\n");
    let out = tmp.path().join("runs");
    let o = cfmmr(&["simulate", "--config", &cfg, "--case", "2", "--seed", "5", "--out", out.to_str().unwrap(), "--plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.join("short-case2-seed5");
    for f in ["config.txt", "trajectory.csv", "summary.txt", "summary.kv", "plot.svg"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let snapshot = fs::read_to_string(dir.join("config.txt")).unwrap();
    assert!(snapshot.contains("sim.case = 2"));
    assert!(snapshot.contains("sensor.seed = 5"));
    assert!(snapshot.contains("dist.seed = 5"));
}

#[test]
fn metrics_subcommand_matches_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "m.cfg", &format!("sim.duration = 2.0\nout.dir = {}\n", tmp.path().display()));
    assert_eq!(cfmmr(&["simulate", "--config", &cfg]).status.code(), Some(0));
    let dir = tmp.path().join("m-case1-seed1");
    let o = cfmmr(&["metrics", "--csv", dir.join("trajectory.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let printed = MetricsReport::from_key_values(&String::from_utf8_lossy(&o.stdout)).unwrap();
    let stored = MetricsReport::from_key_values(&fs::read_to_string(dir.join("summary.kv")).unwrap()).unwrap();
    assert_eq!(printed, stored);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_value = write(tmp.path(), "a.cfg", "kin.r = 0.2\n");
    let o = cfmmr(&["simulate", "--config", &bad_value]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kin.r"));

    let unknown = write(tmp.path(), "b.cfg", "kin.rr = 0.5\n");
    assert_eq!(cfmmr(&["simulate", "--config", &unknown]).status.code(), Some(2));

    let malformed = write(tmp.path(), "c.cfg", "sim.duration 3\n");
    assert_eq!(cfmmr(&["simulate", "--config", &malformed]).status.code(), Some(2));

    let ok = write(tmp.path(), "d.cfg", "");
    assert_eq!(cfmmr(&["simulate", "--config", &ok, "--case", "4"]).status.code(), Some(2));
}

#[test]
fn watchdog_exits_3_and_keeps_partial_log() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "w.cfg", &format!("sim.duration = 5.0\nsim.watchdog = 1.2\nout.dir = {}\n", tmp.path().display()));
    let o = cfmmr(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let kv = fs::read_to_string(tmp.path().join("w-case1-seed1/summary.kv")).unwrap();
    assert!(kv.lines().any(|l| l.starts_with("aborted = ") && l != "aborted = none"));
}

#[test]
fn batch_runs_every_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = format!("out.dir = {}\n", tmp.path().join("runs").display());
    for (name, case) in [("a.cfg", 1), ("b.cfg", 3)] {
        write(tmp.path(), name, &format!("sim.duration = 0.5\nsim.case = {case}\n{out}"));
    }
    write(tmp.path(), "notes.txt", "ignored");
    let o = cfmmr(&["batch", "--config-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains('a') && stdout.contains('b'));
    assert!(tmp.path().join("runs/a/trajectory.csv").is_file());
    assert!(tmp.path().join("runs/b/trajectory.csv").is_file());

    write(tmp.path(), "c.cfg", "bogus = 1\n");
    assert_eq!(cfmmr(&["batch", "--config-dir", tmp.path().to_str().unwrap()]).status.code(), Some(2));
}
