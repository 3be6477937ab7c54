//! Per-axle robust tracking controller: a kinematic velocity law that
//! turns the posture error into a velocity command, and a nonlinear-damping
//! torque law that forces the axle velocity onto that command.
//!
//! Each [`AxleController`] sees only its own axle's measurements, its own
//! reference and the frame force felt at that axle.

use crate::cascade::{AxleReference, FrameGeometry};
use crate::error::{Error, Result};
use crate::geometry::{wrap, BodyVelocity, Posture};

/// Posture error expressed in the axle body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingError {
    pub e_x: f64,
    pub e_y: f64,
    pub e_phi: f64,
}

impl TrackingError {
    pub fn position_norm(&self) -> f64 {
        self.e_x.hypot(self.e_y)
    }
}

/// Rotate `q_r - q` into the body frame of `q`.
pub fn tracking_error(q: &Posture, q_r: &Posture) -> TrackingError {
    let (s, c) = q.phi.sin_cos();
    let dx = q_r.x - q.x;
    let dy = q_r.y - q.y;
    TrackingError { e_x: c * dx + s * dy, e_y: -s * dx + c * dy, e_phi: wrap(q_r.phi - q.phi) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynGains {
    pub k_x: f64,
    pub k_y: f64,
    pub k_phi: f64,
    /// Damping gain on the linear velocity error.
    pub k1: f64,
    /// Damping gain on the angular velocity error.
    pub k2: f64,
    /// Include the frame force magnitude in the damping regressor.
    pub compensate_frame: bool,
    /// Per-wheel torque limit, if any.
    pub tau_max: Option<f64>,
    /// Upper bound on the per-sample contraction `K ‖ξ‖² dt / M` of each
    /// velocity channel. The continuous law is unchanged below it.
    pub rho_max: f64,
}

impl Default for DynGains {
    fn default() -> Self {
        Self {
            k_x: 10.0,
            k_y: 64.0,
            k_phi: 16.0,
            k1: 1000.0,
            k2: 10.0,
            compensate_frame: true,
            tau_max: None,
            rho_max: 0.5,
        }
    }
}

impl DynGains {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("dyn.k_x", self.k_x),
            ("dyn.k_y", self.k_y),
            ("dyn.k_phi", self.k_phi),
            ("dyn.k1", self.k1),
            ("dyn.k2", self.k2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.rho_max.is_finite() && self.rho_max > 0.0) {
            return Err(Error::invalid("dyn.rho_max", format!("must be positive, got {}", self.rho_max)));
        }
        if let Some(t) = self.tau_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid("dyn.tau_max", format!("must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Both damping gains multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { k1: self.k1 * factor, k2: self.k2 * factor, ..*self }
    }
}

/// Velocity command that stabilizes the posture error.
///
/// The lateral and heading corrections are proportional to `v_r`, so they
/// vanish when the reference is at rest.
pub fn velocity_law(e: &TrackingError, v_r: f64, omega_r: f64, g: &DynGains) -> BodyVelocity {
    BodyVelocity::new(
        v_r * e.e_phi.cos() + g.k_x * e.e_x,
        omega_r + g.k_y * v_r * e.e_y + g.k_phi * v_r * e.e_phi.sin(),
    )
}

pub fn velocity_error(u: &BodyVelocity, v_c: &BodyVelocity) -> BodyVelocity {
    BodyVelocity::new(u.v - v_c.v, u.omega - v_c.omega)
}

/// Damping regressor `(‖v_c‖, ‖u‖, ‖v_r‖, ‖v̇_r‖, 1, ‖F_K‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Xi(pub [f64; 6]);

impl Xi {
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

pub fn xi_vector(
    v_c: &BodyVelocity,
    u: &BodyVelocity,
    v_r: &BodyVelocity,
    v_r_dot: &BodyVelocity,
    f_k_norm: f64,
    compensate: bool,
) -> Xi {
    Xi([
        v_c.norm(),
        u.norm(),
        v_r.norm(),
        v_r_dot.norm(),
        1.0,
        if compensate { f_k_norm } else { 0.0 },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelTorques {
    pub tau_r: f64,
    pub tau_l: f64,
}

impl WheelTorques {
    pub fn new(tau_r: f64, tau_l: f64) -> Self {
        Self { tau_r, tau_l }
    }

    pub fn is_finite(&self) -> bool {
        self.tau_r.is_finite() && self.tau_l.is_finite()
    }

    /// Body-frame generalized force `(F, M)` produced by these torques.
    pub fn generalized(&self, geo: &FrameGeometry) -> [f64; 2] {
        [
            (self.tau_r + self.tau_l) / geo.wheel_radius,
            geo.half_track * (self.tau_r - self.tau_l) / geo.wheel_radius,
        ]
    }

    /// Wheel torques producing the body-frame generalized force `f`.
    pub fn from_generalized(f: [f64; 2], geo: &FrameGeometry) -> Self {
        let h = 0.5 * geo.wheel_radius;
        let m = f[1] / geo.half_track;
        Self::new(h * (f[0] + m), h * (f[0] - m))
    }

    fn clamp(self, limit: f64) -> (Self, bool) {
        let c = Self::new(self.tau_r.clamp(-limit, limit), self.tau_l.clamp(-limit, limit));
        (c, c != self)
    }
}

/// `τ = -(SᵀE)⁻¹ K e_c ‖ξ‖²`, unclamped.
pub fn damping_torque(e_c: &BodyVelocity, xi: &Xi, g: &DynGains, geo: &FrameGeometry) -> WheelTorques {
    let n2 = xi.norm_sq();
    damping_torque_with(e_c, [n2, n2], g, geo)
}

fn damping_torque_with(e_c: &BodyVelocity, n2: [f64; 2], g: &DynGains, geo: &FrameGeometry) -> WheelTorques {
    WheelTorques::from_generalized([-g.k1 * e_c.v * n2[0], -g.k2 * e_c.omega * n2[1]], geo)
}

/// Tracking Lyapunov function of one axle.
pub fn tracking_lyapunov(e: &TrackingError, k_y: f64) -> f64 {
    0.5 * e.e_x * e.e_x + 0.5 * e.e_y * e.e_y + (1.0 - e.e_phi.cos()) / k_y
}

/// Kinetic-error Lyapunov function `½ e_cᵀ M̄ e_c`.
pub fn velocity_lyapunov(e_c: &BodyVelocity, mass: f64, inertia: f64) -> f64 {
    0.5 * (mass * e_c.v * e_c.v + inertia * e_c.omega * e_c.omega)
}

/// What one axle can measure locally.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxleMeasurement {
    pub q: Posture,
    pub u: BodyVelocity,
    /// Frame force felt at this axle, body frame `(F, M)`.
    pub f_k: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxleDiagnostics {
    pub error: TrackingError,
    pub v_c: BodyVelocity,
    pub e_c: BodyVelocity,
    pub xi_norm: f64,
    pub v1: f64,
    pub v2: f64,
    /// Torque limit active.
    pub clamped: bool,
    /// Sampled-data damping cap active on either channel.
    pub capped: bool,
}

/// Controller for a single axle, sampled every `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxleController {
    pub gains: DynGains,
    pub geo: FrameGeometry,
    /// Nominal mass and yaw inertia.
    pub nominal: [f64; 2],
    pub dt: f64,
}

impl AxleController {
    pub fn new(gains: DynGains, geo: FrameGeometry, mass: f64, inertia: f64, dt: f64) -> Self {
        Self { gains, geo, nominal: [mass, inertia], dt }
    }

    /// Largest `‖ξ‖²` each channel may use at this sample period.
    pub fn damping_caps(&self) -> [f64; 2] {
        let g = &self.gains;
        [
            g.rho_max * self.nominal[0] / (g.k1 * self.dt),
            g.rho_max * self.nominal[1] / (g.k2 * self.dt),
        ]
    }

    pub fn step(&self, meas: &AxleMeasurement, r: &AxleReference) -> (WheelTorques, AxleDiagnostics) {
        let g = &self.gains;
        let error = tracking_error(&meas.q, &r.q_r);
        let v_c = velocity_law(&error, r.v_r, r.omega_r, g);
        let e_c = velocity_error(&meas.u, &v_c);
        let f_k_norm = meas.f_k[0].hypot(meas.f_k[1]);
        let xi = xi_vector(&v_c, &meas.u, &r.velocity(), &r.acceleration(), f_k_norm, g.compensate_frame);
        let n2 = xi.norm_sq();
        let caps = self.damping_caps();
        let eff = [n2.min(caps[0]), n2.min(caps[1])];
        let raw = damping_torque_with(&e_c, eff, g, &self.geo);
        let (tau, clamped) = match g.tau_max {
            Some(limit) => raw.clamp(limit),
            None => (raw, false),
        };
        let diag = AxleDiagnostics {
            error,
            v_c,
            e_c,
            xi_norm: xi.norm(),
            v1: tracking_lyapunov(&error, g.k_y),
            v2: velocity_lyapunov(&e_c, self.nominal[0], self.nominal[1]),
            clamped,
            capped: n2 > caps[0] || n2 > caps[1],
        };
        (tau, diag)
    }
}
