//! Flat `key = value` experiment configuration with dotted section names.
//!
//! ```text
//! # comments and blank lines are ignored
//! sim.case = 3
//! init.x = -1.5
//! plant.mass = 4.0
//! ```
//!
//! Omitted keys keep their defaults, so an empty file is a valid config.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::interaction::{InteractionCase, LoopConfig};
use crate::plant::DisturbanceMode;

/// A closed-loop run plus where and how to write its artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run: LoopConfig,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub full_rate: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { run: LoopConfig::default(), out_dir: PathBuf::from("runs"), plot: false, full_rate: false }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.run.validate()
    }

    /// Apply one key. Unknown keys and unparsable values are validation
    /// errors naming the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let c = &mut self.run;
        match key {
            "sim.case" => c.case = InteractionCase::try_from(parse::<u8>(key, value)?)?,
            "sim.duration" => c.duration = num(key, value)?,
            "sim.dt_plant" => c.dt_plant = num(key, value)?,
            "sim.dt_ctrl" => c.dt_ctrl = num(key, value)?,
            "sim.watchdog" => c.watchdog = num(key, value)?,
            "sim.true_velocity" => c.true_velocity = flag(key, value)?,
            "init.x" => c.start.x = num(key, value)?,
            "init.y" => c.start.y = num(key, value)?,
            "init.phi" => c.start.phi = num(key, value)?,
            "init.psi" => c.psi0 = if value == "auto" { None } else { Some(num(key, value)?) },
            "target.x" => c.target.x = num(key, value)?,
            "target.y" => c.target.y = num(key, value)?,
            "target.phi" => c.target.phi = num(key, value)?,
            "kin.v_des" => c.kin.v_des = num(key, value)?,
            "kin.kappa_des" => c.kin.kappa_des = num(key, value)?,
            "kin.r" => c.kin.r = num(key, value)?,
            "kin.epsilon" => c.kin.epsilon = num(key, value)?,
            "kin.v_max" => c.kin.v_max = num(key, value)?,
            "kin.kappa_max" => c.kin.kappa_max = num(key, value)?,
            "dyn.k_x" => c.dyn_gains.k_x = num(key, value)?,
            "dyn.k_y" => c.dyn_gains.k_y = num(key, value)?,
            "dyn.k_phi" => c.dyn_gains.k_phi = num(key, value)?,
            "dyn.k1" => c.dyn_gains.k1 = num(key, value)?,
            "dyn.k2" => c.dyn_gains.k2 = num(key, value)?,
            "dyn.compensate_frame" => c.dyn_gains.compensate_frame = flag(key, value)?,
            "dyn.tau_max" => c.dyn_gains.tau_max = if value == "none" { None } else { Some(num(key, value)?) },
            "dyn.rho_max" => c.dyn_gains.rho_max = num(key, value)?,
            "plant.mass" => c.plant.axle.mass = num(key, value)?,
            "plant.inertia" => c.plant.axle.inertia = num(key, value)?,
            "plant.b_v" => c.plant.axle.b_v = num(key, value)?,
            "plant.b_w" => c.plant.axle.b_w = num(key, value)?,
            "plant.tau_d_max" => c.plant.axle.tau_d_max = num(key, value)?,
            "frame.k_bend" => c.plant.frame.k_bend = num(key, value)?,
            "frame.k_axial" => c.plant.frame.k_axial = num(key, value)?,
            "frame.c_bend" => c.plant.frame.c_bend = num(key, value)?,
            "frame.c_axial" => c.plant.frame.c_axial = num(key, value)?,
            "geo.length" => c.plant.geo.length = num(key, value)?,
            "geo.half_track" => c.plant.geo.half_track = num(key, value)?,
            "geo.wheel_radius" => c.plant.geo.wheel_radius = num(key, value)?,
            "dist.mode" => c.plant.disturbance.mode = parse::<DisturbanceMode>(key, value)?,
            "dist.period" => c.plant.disturbance.period = num(key, value)?,
            "dist.direction" => c.plant.disturbance.direction = num(key, value)?,
            "dist.seed" => c.disturbance_seed = parse(key, value)?,
            "sensor.ticks_per_rev" => c.sensor.ticks_per_rev = parse(key, value)?,
            "sensor.sigma_noise" => c.sensor.sigma_noise = num(key, value)?,
            "sensor.seed" => c.sensor.seed = parse(key, value)?,
            "out.dir" => self.out_dir = PathBuf::from(value),
            "out.plot" => self.plot = flag(key, value)?,
            "out.full_rate" => self.full_rate = flag(key, value)?,
            _ => return Err(Error::invalid(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, in a form [`parse_config`] reads
    /// back to an identical config.
    pub fn to_config_string(&self) -> String {
        let c = &self.run;
        let opt = |v: Option<f64>, none: &str| v.map_or(none.to_string(), fmt_f64);
        let entries: Vec<(&str, String)> = vec![
            ("sim.case", c.case.to_string()),
            ("sim.duration", fmt_f64(c.duration)),
            ("sim.dt_plant", fmt_f64(c.dt_plant)),
            ("sim.dt_ctrl", fmt_f64(c.dt_ctrl)),
            ("sim.watchdog", fmt_f64(c.watchdog)),
            ("sim.true_velocity", c.true_velocity.to_string()),
            ("init.x", fmt_f64(c.start.x)),
            ("init.y", fmt_f64(c.start.y)),
            ("init.phi", fmt_f64(c.start.phi)),
            ("init.psi", opt(c.psi0, "auto")),
            ("target.x", fmt_f64(c.target.x)),
            ("target.y", fmt_f64(c.target.y)),
            ("target.phi", fmt_f64(c.target.phi)),
            ("kin.v_des", fmt_f64(c.kin.v_des)),
            ("kin.kappa_des", fmt_f64(c.kin.kappa_des)),
            ("kin.r", fmt_f64(c.kin.r)),
            ("kin.epsilon", fmt_f64(c.kin.epsilon)),
            ("kin.v_max", fmt_f64(c.kin.v_max)),
            ("kin.kappa_max", fmt_f64(c.kin.kappa_max)),
            ("dyn.k_x", fmt_f64(c.dyn_gains.k_x)),
            ("dyn.k_y", fmt_f64(c.dyn_gains.k_y)),
            ("dyn.k_phi", fmt_f64(c.dyn_gains.k_phi)),
            ("dyn.k1", fmt_f64(c.dyn_gains.k1)),
            ("dyn.k2", fmt_f64(c.dyn_gains.k2)),
            ("dyn.compensate_frame", c.dyn_gains.compensate_frame.to_string()),
            ("dyn.tau_max", opt(c.dyn_gains.tau_max, "none")),
            ("dyn.rho_max", fmt_f64(c.dyn_gains.rho_max)),
            ("plant.mass", fmt_f64(c.plant.axle.mass)),
            ("plant.inertia", fmt_f64(c.plant.axle.inertia)),
            ("plant.b_v", fmt_f64(c.plant.axle.b_v)),
            ("plant.b_w", fmt_f64(c.plant.axle.b_w)),
            ("plant.tau_d_max", fmt_f64(c.plant.axle.tau_d_max)),
            ("frame.k_bend", fmt_f64(c.plant.frame.k_bend)),
            ("frame.k_axial", fmt_f64(c.plant.frame.k_axial)),
            ("frame.c_bend", fmt_f64(c.plant.frame.c_bend)),
            ("frame.c_axial", fmt_f64(c.plant.frame.c_axial)),
            ("geo.length", fmt_f64(c.plant.geo.length)),
            ("geo.half_track", fmt_f64(c.plant.geo.half_track)),
            ("geo.wheel_radius", fmt_f64(c.plant.geo.wheel_radius)),
            ("dist.mode", c.plant.disturbance.mode.to_string()),
            ("dist.period", fmt_f64(c.plant.disturbance.period)),
            ("dist.direction", fmt_f64(c.plant.disturbance.direction)),
            ("dist.seed", c.disturbance_seed.to_string()),
            ("sensor.ticks_per_rev", c.sensor.ticks_per_rev.to_string()),
            ("sensor.sigma_noise", fmt_f64(c.sensor.sigma_noise)),
            ("sensor.seed", c.sensor.seed.to_string()),
            ("out.dir", self.out_dir.display().to_string()),
            ("out.plot", self.plot.to_string()),
            ("out.full_rate", self.full_rate.to_string()),
        ];
        let mut s = String::new();
        for (k, v) in entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::invalid(key, format!("cannot parse `{value}`: {e}")))
}

fn num(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(key, format!("must be finite, got `{value}`")))
    }
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(Error::invalid(key, format!("expected true or false, got `{value}`"))),
    }
}

/// Parse and validate config text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected `key = value`, got `{body}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::Parse { line, msg: format!("malformed key `{k}`") });
        }
        if !seen.insert(k.to_string()) {
            return Err(Error::Parse { line, msg: format!("duplicate key `{k}`") });
        }
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Load a config file. A relative `out.dir` is taken relative to the
/// file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if cfg.out_dir.is_relative() {
        if let Some(parent) = path.parent() {
            cfg.out_dir = parent.join(&cfg.out_dir);
        }
    }
    Ok(cfg)
}
