//! Center command to per-axle references, and the inverse map from two
//! axle states back to the frame center.
//!
//! Under pure bending both frame ends deflect by `±ψ` relative to the chord
//! and the frame takes a circular shape, so the center curvature fixes `ψ`
//! through `κ = 2ψ / (L cos ψ)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::{mean_angle, propagate_unicycle, wrap, BodyVelocity, Posture};
use crate::kinematic::CenterCommand;

/// Bisection interval half-width margin from `±π/2`.
const PSI_MARGIN: f64 = 1e-6;
const PSI_TOL: f64 = 1e-12;

/// Saturation applied to differenced reference accelerations.
pub const MAX_REF_ACCEL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGeometry {
    /// Frame (arc) length between the axles.
    pub length: f64,
    /// Half the axle length, wheel contact to axle midpoint.
    pub half_track: f64,
    pub wheel_radius: f64,
}

impl Default for FrameGeometry {
    fn default() -> Self {
        Self { length: 0.35, half_track: 0.18, wheel_radius: 0.06 }
    }
}

impl FrameGeometry {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("geo.length", self.length),
            ("geo.half_track", self.half_track),
            ("geo.wheel_radius", self.wheel_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Chord length of a circular frame of arc length `L` with end angle `ψ`.
    pub fn chord_length(&self, psi: f64) -> f64 {
        if psi.abs() < 1e-8 {
            self.length * (1.0 - psi * psi / 6.0)
        } else {
            self.length * psi.sin() / psi
        }
    }

    /// `d/dψ` of [`chord_length`](Self::chord_length).
    pub fn chord_length_slope(&self, psi: f64) -> f64 {
        if psi.abs() < 1e-4 {
            -self.length * psi / 3.0
        } else {
            self.length * (psi * psi.cos() - psi.sin()) / (psi * psi)
        }
    }

    /// Front and rear axle postures for a center posture and deflection `ψ`.
    pub fn axle_postures(&self, center: &Posture, psi: f64) -> [Posture; 2] {
        let half = 0.5 * self.chord_length(psi);
        let (s, c) = center.phi.sin_cos();
        [
            Posture::new(center.x + half * c, center.y + half * s, center.phi + psi),
            Posture::new(center.x - half * c, center.y - half * s, center.phi - psi),
        ]
    }
}

fn curvature_residual(psi: f64, kappa: f64, length: f64) -> f64 {
    2.0 * psi / (length * psi.cos()) - kappa
}

/// Solve `κ = 2ψ / (L cos ψ)` for `ψ ∈ (-π/2, π/2)` by bisection.
pub fn solve_psi(kappa: f64, geo: &FrameGeometry) -> Result<f64> {
    if !kappa.is_finite() {
        return Err(Error::Domain(format!("curvature {kappa} is not finite")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let mut lo = -FRAC_PI_2 + PSI_MARGIN;
    let mut hi = FRAC_PI_2 - PSI_MARGIN;
    let f_lo = curvature_residual(lo, kappa, geo.length);
    let f_hi = curvature_residual(hi, kappa, geo.length);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::NoRoot(format!("2ψ/(L cos ψ) = {kappa}")));
    }
    // residual is increasing in ψ on the interval
    while hi - lo > PSI_TOL {
        let mid = 0.5 * (lo + hi);
        if curvature_residual(mid, kappa, geo.length) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Front (index 0) and rear (index 1) axle velocities for a center motion
/// `(v, φ̇)` and frame deflection `(ψ, ψ̇)`.
pub fn axle_velocities(v: f64, phi_dot: f64, psi: f64, psi_dot: f64, geo: &FrameGeometry) -> [BodyVelocity; 2] {
    let base = v / psi.cos();
    let foreshortening = geo.length * psi * psi_dot / 6.0;
    [
        BodyVelocity::new(base - foreshortening, phi_dot + psi_dot),
        BodyVelocity::new(base + foreshortening, phi_dot - psi_dot),
    ]
}

/// Center posture and motion reconstructed from both axles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CenterEstimate {
    pub posture: Posture,
    pub v: f64,
    pub phi_dot: f64,
    pub psi: f64,
    pub psi_dot: f64,
}

/// Inverse of [`axle_velocities`] plus midpoint reconstruction of the
/// center posture.
pub fn center_from_axles(q1: &Posture, q2: &Posture, u1: &BodyVelocity, u2: &BodyVelocity) -> CenterEstimate {
    let psi = 0.5 * wrap(q1.phi - q2.phi);
    CenterEstimate {
        posture: Posture {
            x: 0.5 * (q1.x + q2.x),
            y: 0.5 * (q1.y + q2.y),
            phi: mean_angle(q1.phi, q2.phi),
        },
        v: psi.cos() * 0.5 * (u1.v + u2.v),
        phi_dot: 0.5 * (u1.omega + u2.omega),
        psi,
        psi_dot: 0.5 * (u1.omega - u2.omega),
    }
}

/// Per-axle reference state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxleReference {
    pub q_r: Posture,
    pub v_r: f64,
    pub omega_r: f64,
    pub v_r_dot: f64,
    pub omega_r_dot: f64,
}

impl AxleReference {
    pub fn at_rest(q: Posture) -> Self {
        Self { q_r: q, ..Default::default() }
    }

    pub fn velocity(&self) -> BodyVelocity {
        BodyVelocity::new(self.v_r, self.omega_r)
    }

    pub fn acceleration(&self) -> BodyVelocity {
        BodyVelocity::new(self.v_r_dot, self.omega_r_dot)
    }
}

/// Generates both axle references from a stream of center commands.
///
/// `ψ̇` and the reference accelerations are backward differences across
/// command updates; the first update reports zero for both.
#[derive(Debug, Clone)]
pub struct ReferenceGenerator {
    geo: FrameGeometry,
    refs: [AxleReference; 2],
    psi: f64,
    psi_dot: f64,
    primed: bool,
}

impl ReferenceGenerator {
    pub fn new(geo: FrameGeometry, start: [Posture; 2]) -> Self {
        let psi = 0.5 * wrap(start[0].phi - start[1].phi);
        Self {
            geo,
            refs: [AxleReference::at_rest(start[0]), AxleReference::at_rest(start[1])],
            psi,
            psi_dot: 0.0,
            primed: false,
        }
    }

    pub fn references(&self) -> &[AxleReference; 2] {
        &self.refs
    }

    pub fn psi(&self) -> (f64, f64) {
        (self.psi, self.psi_dot)
    }

    /// Latch a new center command issued every `dt` seconds.
    pub fn set_command(&mut self, cmd: &CenterCommand, dt: f64) -> Result<()> {
        let psi = solve_psi(cmd.kappa, &self.geo)?;
        let psi_dot = if self.primed { (psi - self.psi) / dt } else { 0.0 };
        let vel = axle_velocities(cmd.v, cmd.phi_dot, psi, psi_dot, &self.geo);
        for (r, u) in self.refs.iter_mut().zip(vel) {
            if self.primed {
                r.v_r_dot = ((u.v - r.v_r) / dt).clamp(-MAX_REF_ACCEL, MAX_REF_ACCEL);
                r.omega_r_dot = ((u.omega - r.omega_r) / dt).clamp(-MAX_REF_ACCEL, MAX_REF_ACCEL);
            }
            r.v_r = u.v;
            r.omega_r = u.omega;
        }
        self.psi = psi;
        self.psi_dot = psi_dot;
        self.primed = true;
        Ok(())
    }

    /// Propagate both reference postures with the latched velocities.
    pub fn advance(&mut self, dt: f64) {
        for r in &mut self.refs {
            r.q_r = propagate_unicycle(&r.q_r, &r.velocity(), dt);
        }
    }

    /// Latch `cmd` and advance by `dt`.
    pub fn update(&mut self, cmd: &CenterCommand, dt: f64) -> Result<&[AxleReference; 2]> {
        self.set_command(cmd, dt)?;
        self.advance(dt);
        Ok(&self.refs)
    }
}
