//! Closed-loop wiring of the kinematic layer, the cascade, the two axle
//! controllers and the plant, in the three feedback structures.
//!
//! The kinematic layer and the cascade update once per control period.
//! Axle controllers, encoders, odometry and reference propagation run at
//! the plant rate.

use std::fmt;

use crate::cascade::{center_from_axles, solve_psi, AxleReference, ReferenceGenerator};
use crate::dynamic::{AxleController, AxleDiagnostics, AxleMeasurement, DynGains, WheelTorques};
use crate::error::{Error, Result};
use crate::geometry::{propagate_unicycle, BodyVelocity, PolarError, Posture};
use crate::kinematic::{lyapunov_values, CenterCommand, KinematicController, KinematicGains, Saturation};
use crate::plant::{Encoders, Odometer, Plant, PlantParams, SensorModel, SimState};

/// Default divergence threshold on any plant state component.
pub const WATCHDOG_LIMIT: f64 = 1e3;

/// Which signals reach the kinematic layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InteractionCase {
    /// Kinematic layer runs on an internal ideal unicycle driven by its own
    /// commands. Only the axle controllers see the robot.
    Ideal = 1,
    /// Internal posture is propagated with the measured center velocity.
    Velocity = 2,
    /// Polar error comes from the odometric center posture.
    Position = 3,
}

impl InteractionCase {
    pub const ALL: [Self; 3] = [Self::Ideal, Self::Velocity, Self::Position];

    pub fn id(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for InteractionCase {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::Ideal),
            2 => Ok(Self::Velocity),
            3 => Ok(Self::Position),
            _ => Err(Error::invalid("sim.case", format!("must be 1, 2 or 3, got {v}"))),
        }
    }
}

impl fmt::Display for InteractionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Everything a closed-loop run needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub case: InteractionCase,
    pub start: Posture,
    /// Initial frame deflection. `None` matches the first command's curvature.
    pub psi0: Option<f64>,
    pub target: Posture,
    pub duration: f64,
    pub dt_plant: f64,
    pub dt_ctrl: f64,
    pub kin: KinematicGains,
    pub dyn_gains: DynGains,
    pub plant: PlantParams,
    pub sensor: SensorModel,
    pub disturbance_seed: u64,
    /// Feed true instead of odometric velocities to the kinematic layer in
    /// the velocity-feedback case.
    pub true_velocity: bool,
    pub watchdog: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            case: InteractionCase::Ideal,
            start: Posture::new(-1.5, -1.0, 0.0),
            psi0: None,
            target: Posture::default(),
            duration: 60.0,
            dt_plant: 1e-3,
            dt_ctrl: 1e-2,
            kin: KinematicGains::default(),
            dyn_gains: DynGains::default(),
            plant: PlantParams::default(),
            sensor: SensorModel::default(),
            disturbance_seed: 1,
            true_velocity: false,
            watchdog: WATCHDOG_LIMIT,
        }
    }
}

impl LoopConfig {
    /// Plant sub-steps per control period.
    pub fn substeps(&self) -> Result<usize> {
        let ratio = self.dt_ctrl / self.dt_plant;
        let n = ratio.round();
        if !(n >= 1.0 && (ratio - n).abs() < 1e-9 * ratio) {
            return Err(Error::invalid(
                "sim.dt_ctrl",
                format!("must be a whole multiple of sim.dt_plant ({} / {})", self.dt_ctrl, self.dt_plant),
            ));
        }
        Ok(n as usize)
    }

    /// Number of control periods in `duration`.
    pub fn periods(&self) -> usize {
        (self.duration / self.dt_ctrl + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("sim.dt_plant", self.dt_plant), ("sim.dt_ctrl", self.dt_ctrl), ("sim.watchdog", self.watchdog)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::invalid("sim.duration", format!("must be non-negative, got {}", self.duration)));
        }
        if !self.start.is_finite() {
            return Err(Error::invalid("init.x", "start posture must be finite"));
        }
        if !self.target.is_finite() {
            return Err(Error::invalid("target.x", "target posture must be finite"));
        }
        if let Some(p) = self.psi0 {
            if !(p.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(Error::invalid("init.psi", format!("must lie in (-pi/2, pi/2), got {p}")));
            }
        }
        self.substeps()?;
        self.kin.validate()?;
        self.dyn_gains.validate()?;
        self.plant.validate()?;
        self.sensor.validate()
    }
}

/// One logged sample. Postures and errors are taken at time `t`; the
/// command is the one applied over the control period ending at `t`, and
/// the axle diagnostics come from the last plant sub-step before `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRecord {
    pub t: f64,
    pub center_true: Posture,
    pub center_odo: Posture,
    /// Posture the kinematic layer computes its error from.
    pub center_kin: Posture,
    pub axles_true: [Posture; 2],
    pub axles_odo: [Posture; 2],
    pub polar: PolarError,
    pub command: CenterCommand,
    pub saturation: Saturation,
    pub guarded: bool,
    pub escaping: bool,
    pub references: [AxleReference; 2],
    pub axle: [AxleDiagnostics; 2],
    pub torques: [WheelTorques; 2],
    /// Kinematic Lyapunov values `(V1, V2)`.
    pub kin_lyapunov: (f64, f64),
}

impl LogRecord {
    /// Center of the two axle references.
    pub fn reference_center(&self) -> Posture {
        let [a, b] = &self.references;
        center_from_axles(&a.q_r, &b.q_r, &a.velocity(), &b.velocity()).posture
    }
}

/// Result of a closed-loop run.
#[derive(Debug)]
pub struct RunLog {
    pub case: InteractionCase,
    pub target: Posture,
    pub records: Vec<LogRecord>,
    /// State at the end of the run, or at abort.
    pub last: LogRecord,
    /// Watchdog or numerical failure that ended the run early.
    pub aborted: Option<Error>,
}

impl RunLog {
    pub fn final_record(&self) -> &LogRecord {
        &self.last
    }
}

/// A running closed loop.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: LoopConfig,
    substeps: usize,
    kin: KinematicController,
    cascade: ReferenceGenerator,
    controllers: [AxleController; 2],
    plant: Plant,
    encoders: Encoders,
    odometers: [Odometer; 2],
    /// Internal posture of the kinematic layer in the ideal and velocity cases.
    internal: Posture,
    /// Plant sub-steps taken so far.
    ticks: u64,
    last_diag: [AxleDiagnostics; 2],
    last_torques: [WheelTorques; 2],
}

impl Simulation {
    pub fn new(cfg: LoopConfig) -> Result<Self> {
        cfg.validate()?;
        let substeps = cfg.substeps()?;
        let kin = KinematicController::new(cfg.kin, &cfg.start, &cfg.target);
        let psi0 = match cfg.psi0 {
            Some(p) => p,
            None => solve_psi(kin.clone().command(&cfg.start).command.kappa, &cfg.plant.geo)?,
        };
        let axles = cfg.plant.geo.axle_postures(&cfg.start, psi0);
        let state = SimState::at_rest(axles);
        let mut encoders = Encoders::new(cfg.sensor);
        let ticks = encoders.read(&state);
        let odometers = [Odometer::new(axles[0], ticks[0]), Odometer::new(axles[1], ticks[1])];
        let a = &cfg.plant.axle;
        let ctl = AxleController::new(cfg.dyn_gains, cfg.plant.geo, a.mass, a.inertia, cfg.dt_plant);
        Ok(Self {
            substeps,
            kin,
            cascade: ReferenceGenerator::new(cfg.plant.geo, axles),
            controllers: [ctl, ctl],
            plant: Plant::new(state, cfg.plant, cfg.disturbance_seed),
            encoders,
            odometers,
            internal: cfg.start,
            ticks: 0,
            last_diag: Default::default(),
            last_torques: Default::default(),
            cfg,
        })
    }

    pub fn config(&self) -> &LoopConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.cfg.dt_plant
    }

    pub fn state(&self) -> &SimState {
        &self.plant.state
    }

    fn odo_center(&self) -> Posture {
        let [a, b] = &self.odometers;
        center_from_axles(&a.q, &b.q, &a.u, &b.u).posture
    }

    fn true_center(&self) -> Posture {
        let [a, b] = &self.plant.state.axles;
        center_from_axles(&a.q, &b.q, &a.u, &b.u).posture
    }

    /// Posture the kinematic layer sees in this case.
    fn kinematic_input(&self) -> Posture {
        match self.cfg.case {
            InteractionCase::Ideal | InteractionCase::Velocity => self.internal,
            InteractionCase::Position => self.odo_center(),
        }
    }

    /// Snapshot of the current state, tagged with the given command data.
    fn record(&self, command: CenterCommand, saturation: Saturation, guarded: bool) -> LogRecord {
        let kin_in = self.kinematic_input();
        let polar = self.kin.polar(&kin_in);
        let s = &self.plant.state;
        LogRecord {
            t: self.time(),
            center_true: self.true_center(),
            center_odo: self.odo_center(),
            center_kin: kin_in,
            axles_true: [s.axles[0].q, s.axles[1].q],
            axles_odo: [self.odometers[0].q, self.odometers[1].q],
            polar,
            command,
            saturation,
            guarded,
            escaping: self.kin.is_escaping(),
            references: *self.cascade.references(),
            axle: self.last_diag,
            torques: self.last_torques,
            kin_lyapunov: lyapunov_values(&polar, self.kin.gains()),
        }
    }

    /// Snapshot with no command applied yet.
    pub fn snapshot(&self) -> LogRecord {
        self.record(CenterCommand::default(), Saturation::default(), false)
    }

    fn plant_substep(&mut self) -> Result<()> {
        let dt = self.cfg.dt_plant;
        let fk = self.plant.frame_force()?;
        let refs = *self.cascade.references();
        let mut tau = [WheelTorques::default(); 2];
        for i in 0..2 {
            let meas = AxleMeasurement { q: self.odometers[i].q, u: self.odometers[i].u, f_k: fk[i] };
            let (t, d) = self.controllers[i].step(&meas, &refs[i]);
            tau[i] = t;
            self.last_diag[i] = d;
        }
        self.last_torques = tau;
        self.plant.step(&tau, dt)?;
        self.ticks += 1;
        self.cascade.advance(dt);
        let ticks = self.encoders.read(&self.plant.state);
        for (o, t) in self.odometers.iter_mut().zip(ticks) {
            o.update(t, self.encoders.model(), &self.cfg.plant.geo, dt);
        }
        self.watchdog()
    }

    fn watchdog(&self) -> Result<()> {
        let s = &self.plant.state;
        let bad = !s.is_finite() || s.max_abs() > self.cfg.watchdog;
        let torque_bad = self.last_torques.iter().any(|t| !t.is_finite());
        if bad || torque_bad {
            return Err(Error::Divergence {
                t: s.t,
                what: format!("plant state magnitude {:.3e} exceeds {}", s.max_abs(), self.cfg.watchdog),
            });
        }
        Ok(())
    }

    /// Advance one control period. `on_substep` sees the state after each
    /// plant sub-step.
    pub fn loop_step_with(&mut self, mut on_substep: impl FnMut(&Self)) -> Result<LogRecord> {
        let dt = self.cfg.dt_ctrl;
        let kin_in = self.kinematic_input();
        let k = self.kin.command(&kin_in);
        self.cascade.set_command(&k.command, dt)?;

        let mut vel_sum = [BodyVelocity::default(); 2];
        for _ in 0..self.substeps {
            self.plant_substep()?;
            for (i, sum) in vel_sum.iter_mut().enumerate() {
                let u = if self.cfg.true_velocity { self.plant.state.axles[i].u } else { self.odometers[i].u };
                sum.v += u.v;
                sum.omega += u.omega;
            }
            on_substep(self);
        }

        self.internal = match self.cfg.case {
            InteractionCase::Ideal => propagate_unicycle(&self.internal, &k.command.as_velocity(), dt),
            InteractionCase::Velocity => {
                let n = self.substeps as f64;
                let mean = vel_sum.map(|s| BodyVelocity::new(s.v / n, s.omega / n));
                let [a, b] = &self.odometers;
                let c = center_from_axles(&a.q, &b.q, &mean[0], &mean[1]);
                propagate_unicycle(&self.internal, &BodyVelocity::new(c.v, c.phi_dot), dt)
            }
            InteractionCase::Position => self.odo_center(),
        };
        self.kin.advance_reference(dt);
        Ok(self.record(k.command, k.law.saturation, k.law.guarded))
    }

    pub fn loop_step(&mut self) -> Result<LogRecord> {
        self.loop_step_with(|_| {})
    }

    /// Run for the configured duration. With `full_rate`, every plant
    /// sub-step is logged instead of one record per control period.
    pub fn run(mut self, full_rate: bool) -> RunLog {
        let n = self.cfg.periods();
        let mut records = Vec::with_capacity(if full_rate { n * self.substeps } else { n });
        let mut last = self.snapshot();
        let mut aborted = None;
        for _ in 0..n {
            let res = if full_rate {
                let mut sub = Vec::with_capacity(self.substeps);
                let r = self.loop_step_with(|s| sub.push(s.snapshot()));
                if let Ok(rec) = &r {
                    // sub-step records carry the command of their period
                    for s in &mut sub {
                        s.command = rec.command;
                        s.saturation = rec.saturation;
                        s.guarded = rec.guarded;
                    }
                    if let Some(l) = sub.last_mut() {
                        *l = *rec;
                    }
                }
                records.extend(sub);
                r
            } else {
                self.loop_step().inspect(|rec| records.push(*rec))
            };
            match res {
                Ok(rec) => last = rec,
                Err(e) => {
                    last = self.snapshot();
                    aborted = Some(e);
                    break;
                }
            }
        }
        RunLog { case: self.cfg.case, target: self.cfg.target, records, last, aborted }
    }
}

/// Build and run a loop in one call.
pub fn run(cfg: LoopConfig, full_rate: bool) -> Result<RunLog> {
    Ok(Simulation::new(cfg)?.run(full_rate))
}
