use std::fs;

use cfmmr_core::harness::{load_config, run_experiment, ExperimentConfig};
use cfmmr_core::interaction::InteractionCase;
use cfmmr_core::plant::DisturbanceMode;

fn config(dir: &std::path::Path, case: InteractionCase) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { out_dir: dir.to_path_buf(), ..Default::default() };
    cfg.run.case = case;
    cfg.run.duration = 3.0;
    cfg.run.sensor.seed = 11;
    cfg.run.disturbance_seed = 12;
    cfg.run.plant.disturbance.mode = DisturbanceMode::Sphere;
    cfg
}

#[test]
fn replay_from_snapshot_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for case in InteractionCase::ALL {
        let cfg = config(tmp.path(), case);
        let first = run_experiment(&cfg, &format!("first{case}")).unwrap();
        let again = load_config(&first.dir.join("config.txt")).unwrap();
        let second = run_experiment(&again, &format!("second{case}")).unwrap();
        for f in ["trajectory.csv", "summary.kv", "config.txt"] {
            let a = fs::read(first.dir.join(f)).unwrap();
            let b = fs::read(second.dir.join(f)).unwrap();
            assert!(a == b, "case {case}: {f} differs");
        }
    }
}

#[test]
fn disturbance_seed_changes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = config(tmp.path(), InteractionCase::Ideal);
    let mut b = a.clone();
    b.run.disturbance_seed = 13;
    let ra = run_experiment(&a, "a").unwrap();
    let rb = run_experiment(&b, "b").unwrap();
    assert_ne!(
        fs::read(ra.dir.join("trajectory.csv")).unwrap(),
        fs::read(rb.dir.join("trajectory.csv")).unwrap()
    );
}
