//! Ground-truth physics for two differential-drive axles joined by a
//! compliant frame, plus encoder sensing and dead-reckoning odometry.
//!
//! Each axle obeys `M̄ u̇ + B̄ u + τ̄_d = SᵀE τ + F_K` with `M̄ = diag(m, I)`.
//! The frame is lumped into two end bending springs about the chord and an
//! axial spring whose rest length is the chord of a circular arc of length
//! `L`. All frame loads derive from one potential and one dissipation
//! function, so they obey action and reaction exactly.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cascade::FrameGeometry;
use crate::dynamic::WheelTorques;
use crate::error::{Error, Result};
use crate::geometry::{wrap, BodyVelocity, Posture};

/// Minimum axle separation accepted by [`frame_force`].
pub const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxleParams {
    pub mass: f64,
    pub inertia: f64,
    pub b_v: f64,
    pub b_w: f64,
    /// Bound on the body-frame disturbance `(force, moment)` norm.
    pub tau_d_max: f64,
}

impl Default for AxleParams {
    fn default() -> Self {
        Self { mass: 4.0, inertia: 0.05, b_v: 1.0, b_w: 0.02, tau_d_max: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameStiffness {
    pub k_bend: f64,
    pub k_axial: f64,
    pub c_bend: f64,
    pub c_axial: f64,
}

impl Default for FrameStiffness {
    fn default() -> Self {
        Self { k_bend: 6.0, k_axial: 800.0, c_bend: 0.05, c_axial: 5.0 }
    }
}

impl FrameStiffness {
    /// A frame that transmits no load.
    pub fn free() -> Self {
        Self { k_bend: 0.0, k_axial: 0.0, c_bend: 0.0, c_axial: 0.0 }
    }

    fn is_free(&self) -> bool {
        *self == Self::free()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisturbanceMode {
    #[default]
    Off,
    /// Uniform on the disk of radius `tau_d_max`.
    Ball,
    /// Uniform direction at full magnitude `tau_d_max`.
    Sphere,
    /// Fixed vector of magnitude `tau_d_max` along `direction`.
    Constant,
}

impl std::str::FromStr for DisturbanceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "off" => Ok(Self::Off),
            "ball" => Ok(Self::Ball),
            "sphere" => Ok(Self::Sphere),
            "constant" => Ok(Self::Constant),
            _ => Err(format!("unknown disturbance mode `{s}` (off|ball|sphere|constant)")),
        }
    }
}

impl std::fmt::Display for DisturbanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Off => "off",
            Self::Ball => "ball",
            Self::Sphere => "sphere",
            Self::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceModel {
    pub mode: DisturbanceMode,
    /// Zero-order-hold period between samples.
    pub period: f64,
    /// Angle of the constant disturbance in the `(force, moment)` plane.
    pub direction: f64,
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self { mode: DisturbanceMode::Off, period: 0.1, direction: std::f64::consts::FRAC_PI_4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantParams {
    pub axle: AxleParams,
    pub frame: FrameStiffness,
    pub geo: FrameGeometry,
    pub disturbance: DisturbanceModel,
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        self.geo.validate()?;
        let a = &self.axle;
        let f = &self.frame;
        let positive = [("plant.mass", a.mass), ("plant.inertia", a.inertia)];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("plant.b_v", a.b_v),
            ("plant.b_w", a.b_w),
            ("plant.tau_d_max", a.tau_d_max),
            ("frame.k_bend", f.k_bend),
            ("frame.k_axial", f.k_axial),
            ("frame.c_bend", f.c_bend),
            ("frame.c_axial", f.c_axial),
        ];
        for (key, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(key, format!("must be non-negative, got {v}")));
            }
        }
        let d = &self.disturbance;
        if !(d.period.is_finite() && d.period > 0.0) {
            return Err(Error::invalid("dist.period", format!("must be positive, got {}", d.period)));
        }
        if !d.direction.is_finite() {
            return Err(Error::invalid("dist.direction", "must be finite"));
        }
        Ok(())
    }
}

/// Frame loads in the global frame: force and moment on each axle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameWrench {
    pub force: [[f64; 2]; 2],
    pub moment: [f64; 2],
}

impl FrameWrench {
    /// Each axle's load as `(longitudinal force, yaw moment)`. The lateral
    /// part is carried by the wheel rolling constraint.
    pub fn body(&self, q: [&Posture; 2]) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            let (s, c) = q[i].phi.sin_cos();
            out[i] = [c * self.force[i][0] + s * self.force[i][1], self.moment[i]];
        }
        out
    }
}

struct Chord {
    len: f64,
    unit: [f64; 2],
    angle: f64,
}

fn chord(q1: &Posture, q2: &Posture) -> Result<Chord> {
    let c = [q1.x - q2.x, q1.y - q2.y];
    let len = c[0].hypot(c[1]);
    if !(len > MIN_SEPARATION) {
        return Err(Error::Degenerate(format!("axle separation {len:e} m")));
    }
    Ok(Chord { len, unit: [c[0] / len, c[1] / len], angle: c[1].atan2(c[0]) })
}

/// Frame loads on both axles for the given axle states.
pub fn frame_wrench(
    q1: &Posture,
    q2: &Posture,
    u1: &BodyVelocity,
    u2: &BodyVelocity,
    ks: &FrameStiffness,
    geo: &FrameGeometry,
) -> Result<FrameWrench> {
    let ch = chord(q1, q2)?;
    if ks.is_free() {
        return Ok(FrameWrench::default());
    }
    let [cx, cy] = ch.unit;
    let normal = [-cy, cx];
    let rel = [
        u1.v * q1.phi.cos() - u2.v * q2.phi.cos(),
        u1.v * q1.phi.sin() - u2.v * q2.phi.sin(),
    ];
    let len_dot = cx * rel[0] + cy * rel[1];
    let chord_rate = (normal[0] * rel[0] + normal[1] * rel[1]) / ch.len;

    let b = [wrap(q1.phi - ch.angle), wrap(q2.phi - ch.angle)];
    let bend = [
        -ks.k_bend * b[0] - ks.c_bend * (u1.omega - chord_rate),
        -ks.k_bend * b[1] - ks.c_bend * (u2.omega - chord_rate),
    ];
    let psi = 0.5 * wrap(q1.phi - q2.phi);
    let stretch = ch.len - geo.chord_length(psi);
    let axial = -ks.k_axial * stretch - ks.c_axial * len_dot;
    // the rest length depends on ψ, so the axial spring also loads the headings
    let coupled = 0.5 * ks.k_axial * stretch * geo.chord_length_slope(psi);
    let shear = -(bend[0] + bend[1]) / ch.len;

    let f1 = [axial * cx + shear * normal[0], axial * cy + shear * normal[1]];
    Ok(FrameWrench {
        force: [f1, [-f1[0], -f1[1]]],
        moment: [bend[0] + coupled, bend[1] - coupled],
    })
}

/// Body-frame `(longitudinal force, yaw moment)` on each axle.
pub fn frame_force(
    q1: &Posture,
    q2: &Posture,
    u1: &BodyVelocity,
    u2: &BodyVelocity,
    ks: &FrameStiffness,
    geo: &FrameGeometry,
) -> Result<[[f64; 2]; 2]> {
    Ok(frame_wrench(q1, q2, u1, u2, ks, geo)?.body([q1, q2]))
}

/// Elastic energy stored in the frame.
pub fn frame_potential(q1: &Posture, q2: &Posture, ks: &FrameStiffness, geo: &FrameGeometry) -> Result<f64> {
    let ch = chord(q1, q2)?;
    let b1 = wrap(q1.phi - ch.angle);
    let b2 = wrap(q2.phi - ch.angle);
    let psi = 0.5 * wrap(q1.phi - q2.phi);
    let stretch = ch.len - geo.chord_length(psi);
    Ok(0.5 * ks.k_bend * (b1 * b1 + b2 * b2) + 0.5 * ks.k_axial * stretch * stretch)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxleState {
    pub q: Posture,
    pub u: BodyVelocity,
    /// Right and left wheel angles.
    pub wheels: [f64; 2],
}

/// Physical state of both axles (index 0 front, 1 rear).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState {
    pub t: f64,
    pub axles: [AxleState; 2],
}

impl SimState {
    /// Both axles at rest at the given postures.
    pub fn at_rest(q: [Posture; 2]) -> Self {
        let a = |q| AxleState { q, ..Default::default() };
        Self { t: 0.0, axles: [a(q[0]), a(q[1])] }
    }

    pub fn is_finite(&self) -> bool {
        self.axles.iter().all(|a| {
            a.q.is_finite() && a.u.v.is_finite() && a.u.omega.is_finite() && a.wheels.iter().all(|w| w.is_finite())
        })
    }

    /// Largest absolute value over all state components.
    pub fn max_abs(&self) -> f64 {
        self.axles
            .iter()
            .flat_map(|a| [a.q.x, a.q.y, a.u.v, a.u.omega])
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn kinetic_energy(&self, p: &AxleParams) -> f64 {
        self.axles
            .iter()
            .map(|a| 0.5 * (p.mass * a.u.v * a.u.v + p.inertia * a.u.omega * a.u.omega))
            .sum()
    }

    pub fn total_energy(&self, p: &PlantParams) -> Result<f64> {
        let [a, b] = &self.axles;
        Ok(self.kinetic_energy(&p.axle) + frame_potential(&a.q, &b.q, &p.frame, &p.geo)?)
    }
}

/// Time derivative of one axle: `(ẋ, ẏ, φ̇, v̇, ω̇, θ̇_R, θ̇_L)`.
pub type AxleDeriv = [f64; 7];

/// State derivative for the given wheel torques and body-frame
/// disturbances `(force, moment)` on each axle.
pub fn dynamics_deriv(
    s: &SimState,
    tau: &[WheelTorques; 2],
    d: &[[f64; 2]; 2],
    p: &PlantParams,
) -> Result<[AxleDeriv; 2]> {
    let [a, b] = &s.axles;
    let fk = frame_force(&a.q, &b.q, &a.u, &b.u, &p.frame, &p.geo)?;
    let mut out = [[0.0; 7]; 2];
    for i in 0..2 {
        let ax = &s.axles[i];
        let gen = tau[i].generalized(&p.geo);
        let (sn, cs) = ax.q.phi.sin_cos();
        let v_dot = (gen[0] - p.axle.b_v * ax.u.v - d[i][0] + fk[i][0]) / p.axle.mass;
        let w_dot = (gen[1] - p.axle.b_w * ax.u.omega - d[i][1] + fk[i][1]) / p.axle.inertia;
        let spin = p.geo.half_track * ax.u.omega;
        out[i] = [
            ax.u.v * cs,
            ax.u.v * sn,
            ax.u.omega,
            v_dot,
            w_dot,
            (ax.u.v + spin) / p.geo.wheel_radius,
            (ax.u.v - spin) / p.geo.wheel_radius,
        ];
    }
    Ok(out)
}

fn offset(s: &SimState, k: &[AxleDeriv; 2], h: f64) -> SimState {
    let mut n = *s;
    for (a, d) in n.axles.iter_mut().zip(k) {
        // heading left unwrapped inside a step
        a.q.x += h * d[0];
        a.q.y += h * d[1];
        a.q.phi += h * d[2];
        a.u.v += h * d[3];
        a.u.omega += h * d[4];
        a.wheels[0] += h * d[5];
        a.wheels[1] += h * d[6];
    }
    n
}

/// One RK4 step with torques and disturbances held constant.
pub fn rk4_step(
    s: &SimState,
    tau: &[WheelTorques; 2],
    d: &[[f64; 2]; 2],
    p: &PlantParams,
    dt: f64,
) -> Result<SimState> {
    let k1 = dynamics_deriv(s, tau, d, p)?;
    let k2 = dynamics_deriv(&offset(s, &k1, 0.5 * dt), tau, d, p)?;
    let k3 = dynamics_deriv(&offset(s, &k2, 0.5 * dt), tau, d, p)?;
    let k4 = dynamics_deriv(&offset(s, &k3, dt), tau, d, p)?;
    let mut sum = [[0.0; 7]; 2];
    for i in 0..2 {
        for j in 0..7 {
            sum[i][j] = (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) / 6.0;
        }
    }
    let mut n = offset(s, &sum, dt);
    for a in &mut n.axles {
        a.q.phi = wrap(a.q.phi);
    }
    n.t = s.t + dt;
    Ok(n)
}

/// Seeded sampler for the body-frame disturbance on each axle.
#[derive(Debug, Clone)]
pub struct DisturbanceSource {
    model: DisturbanceModel,
    bound: f64,
    rng: ChaCha8Rng,
    held: [[f64; 2]; 2],
    next: f64,
}

impl DisturbanceSource {
    pub fn new(model: DisturbanceModel, bound: f64, seed: u64) -> Self {
        // A separate stream keeps the draws independent of a sensor RNG
        // seeded with the same value.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Self { model, bound, rng, held: [[0.0; 2]; 2], next: 0.0 }
    }

    fn draw(&mut self) -> [f64; 2] {
        let m = self.bound;
        let (r, a) = match self.model.mode {
            DisturbanceMode::Off => return [0.0; 2],
            DisturbanceMode::Constant => (m, self.model.direction),
            DisturbanceMode::Sphere => (m, self.rng.gen_range(0.0..TAU)),
            DisturbanceMode::Ball => {
                let u: f64 = self.rng.gen();
                (m * u.sqrt(), self.rng.gen_range(0.0..TAU))
            }
        };
        let v = [r * a.cos(), r * a.sin()];
        let n = v[0].hypot(v[1]);
        if n > m {
            [v[0] * m / n, v[1] * m / n]
        } else {
            v
        }
    }

    /// Disturbance to apply over a step starting at time `t`.
    pub fn at(&mut self, t: f64) -> [[f64; 2]; 2] {
        // small slack keeps the hold boundaries stable under accumulated t
        if t + 1e-9 >= self.next {
            self.held = [self.draw(), self.draw()];
            self.next += self.model.period;
        }
        self.held
    }
}

/// Physics plant: state, parameters and disturbance source.
#[derive(Debug, Clone)]
pub struct Plant {
    pub state: SimState,
    pub params: PlantParams,
    disturbance: DisturbanceSource,
    last_disturbance: [[f64; 2]; 2],
}

impl Plant {
    pub fn new(state: SimState, params: PlantParams, disturbance_seed: u64) -> Self {
        let disturbance = DisturbanceSource::new(params.disturbance, params.axle.tau_d_max, disturbance_seed);
        Self { state, params, disturbance, last_disturbance: [[0.0; 2]; 2] }
    }

    pub fn step(&mut self, tau: &[WheelTorques; 2], dt: f64) -> Result<()> {
        let d = self.disturbance.at(self.state.t);
        self.last_disturbance = d;
        self.state = rk4_step(&self.state, tau, &d, &self.params, dt)?;
        Ok(())
    }

    /// Disturbance applied during the most recent step.
    pub fn last_disturbance(&self) -> [[f64; 2]; 2] {
        self.last_disturbance
    }

    /// Frame load currently felt by each axle, body frame.
    pub fn frame_force(&self) -> Result<[[f64; 2]; 2]> {
        let [a, b] = &self.state.axles;
        frame_force(&a.q, &b.q, &a.u, &b.u, &self.params.frame, &self.params.geo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub ticks_per_rev: u32,
    /// Standard deviation of the per-read angle noise.
    pub sigma_noise: f64,
    pub seed: u64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self { ticks_per_rev: 65_536, sigma_noise: 2e-4, seed: 1 }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if self.ticks_per_rev == 0 {
            return Err(Error::invalid("sensor.ticks_per_rev", "must be positive"));
        }
        if !(self.sigma_noise.is_finite() && self.sigma_noise >= 0.0) {
            return Err(Error::invalid("sensor.sigma_noise", format!("must be non-negative, got {}", self.sigma_noise)));
        }
        Ok(())
    }

    /// Wheel angle per tick.
    pub fn resolution(&self) -> f64 {
        TAU / self.ticks_per_rev as f64
    }
}

/// Quantize a wheel angle to whole encoder ticks (floor).
pub fn quantize(angle: f64, ticks_per_rev: u32) -> i64 {
    // the tiny bias absorbs round-off at exact tick boundaries
    (angle * ticks_per_rev as f64 / TAU + 1e-9).floor() as i64
}

/// Noisy encoder bank for both wheels of both axles.
#[derive(Debug, Clone)]
pub struct Encoders {
    model: SensorModel,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Encoders {
    pub fn new(model: SensorModel) -> Self {
        let noise = (model.sigma_noise > 0.0).then(|| Normal::new(0.0, model.sigma_noise).expect("sigma validated"));
        Self { model, rng: ChaCha8Rng::seed_from_u64(model.seed), noise }
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    /// Read one wheel angle.
    pub fn read_one(&mut self, angle: f64) -> i64 {
        let n = match &self.noise {
            Some(d) => d.sample(&mut self.rng),
            None => 0.0,
        };
        quantize(angle + n, self.model.ticks_per_rev)
    }

    /// Tick counts `[[R, L]; 2]` for the current state.
    pub fn read(&mut self, s: &SimState) -> [[i64; 2]; 2] {
        let mut out = [[0; 2]; 2];
        for (o, a) in out.iter_mut().zip(&s.axles) {
            *o = [self.read_one(a.wheels[0]), self.read_one(a.wheels[1])];
        }
        out
    }
}

/// Dead-reckon one axle from wheel tick increments over `dt`.
pub fn odometry_update(
    q: &Posture,
    dticks: [i64; 2],
    m: &SensorModel,
    geo: &FrameGeometry,
    dt: f64,
) -> (Posture, BodyVelocity) {
    let res = m.resolution();
    let dr = dticks[0] as f64 * res;
    let dl = dticks[1] as f64 * res;
    let ds = geo.wheel_radius * (dr + dl) / 2.0;
    let dphi = geo.wheel_radius * (dr - dl) / (2.0 * geo.half_track);
    let mid = q.phi + 0.5 * dphi;
    let next = Posture::new(q.x + ds * mid.cos(), q.y + ds * mid.sin(), q.phi + dphi);
    (next, BodyVelocity::new(ds / dt, dphi / dt))
}

/// Odometric estimate of one axle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Odometer {
    pub q: Posture,
    pub u: BodyVelocity,
    last: [i64; 2],
}

impl Odometer {
    pub fn new(q: Posture, ticks: [i64; 2]) -> Self {
        Self { q, u: BodyVelocity::default(), last: ticks }
    }

    pub fn update(&mut self, ticks: [i64; 2], m: &SensorModel, geo: &FrameGeometry, dt: f64) {
        let d = [ticks[0] - self.last[0], ticks[1] - self.last[1]];
        (self.q, self.u) = odometry_update(&self.q, d, m, geo, dt);
        self.last = ticks;
    }
}
