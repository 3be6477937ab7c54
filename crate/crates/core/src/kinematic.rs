//! Curvature-based, smooth, time-invariant posture controller with bounded
//! speed and curvature.
//!
//! The controller drives the polar error `(e, θ, α)` onto a circular path
//! manifold of radius `r` and slides along it to the target. Its outputs are
//! a center speed `v ∈ [0, v_max]` and a path curvature `|κ| ≤ κ_max`.
//!
//! Two Lyapunov functions describe the closed loop: `V₁ = z²/2`, where `z`
//! is the distance to the (ε-perturbed) manifold, and `V₂ = (θ + α)²/2`.
//! The speed law forces `ż = -k₁ tanh z + v (1 - cos α)`, which is
//! non-increasing in `V₁` wherever [`law_denominator_exact`] is
//! non-negative. The curvature law makes `V̇₂ = -k₂ (θ+α) tanh(θ+α)`
//! exactly as long as `κ` is not clipped.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::{propagate_unicycle, to_polar_error, BodyVelocity, PolarError, Posture, E_FLOOR};

/// Below this magnitude the speed-law denominator is treated as singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Slack on the convergence-circle test, in meters.
pub const CONFORMING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicGains {
    /// Desired reference speed; `0` for pure posture regulation.
    pub v_des: f64,
    /// Desired reference curvature.
    pub kappa_des: f64,
    /// Path manifold radius.
    pub r: f64,
    /// Perturbation keeping the law away from its singularity at the origin.
    pub epsilon: f64,
    pub v_max: f64,
    pub kappa_max: f64,
    /// Initial distance to the target, captured on controller reset.
    pub e0: f64,
}

impl Default for KinematicGains {
    fn default() -> Self {
        Self {
            v_des: 0.0,
            kappa_des: 0.0,
            r: 1.0 / 3.0,
            epsilon: 1e-5,
            v_max: 0.5,
            kappa_max: 3.0,
            e0: 1.0,
        }
    }
}

impl KinematicGains {
    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(key, format!("must be positive, got {v}")))
            }
        };
        pos("kin.v_max", self.v_max)?;
        pos("kin.kappa_max", self.kappa_max)?;
        pos("kin.epsilon", self.epsilon)?;
        pos("kin.r", self.r)?;
        pos("kin.e0", self.e0)?;
        if self.r < 1.0 / self.kappa_max {
            return Err(Error::invalid(
                "kin.r",
                format!("manifold radius {} is below 1/kappa_max = {}", self.r, 1.0 / self.kappa_max),
            ));
        }
        if !(self.v_des.is_finite() && self.v_des >= 0.0) {
            return Err(Error::invalid("kin.v_des", "must be finite and non-negative"));
        }
        if !self.kappa_des.is_finite() {
            return Err(Error::invalid("kin.kappa_des", "must be finite"));
        }
        Ok(())
    }
}

/// Center-point command: speed and path curvature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CenterCommand {
    pub v: f64,
    pub kappa: f64,
    /// `v * kappa`.
    pub phi_dot: f64,
}

impl CenterCommand {
    pub fn new(v: f64, kappa: f64) -> Self {
        Self { v, kappa, phi_dot: v * kappa }
    }

    pub fn as_velocity(&self) -> BodyVelocity {
        BodyVelocity::new(self.v, self.phi_dot)
    }
}

/// Which bounds were active when a command was clipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saturation {
    pub v: bool,
    pub kappa: bool,
}

/// Output of [`control_law`] with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LawOutput {
    pub command: CenterCommand,
    /// Unclipped speed from the speed law (or the guard fallback).
    pub raw_v: f64,
    pub raw_kappa: f64,
    /// The denominator guard fired.
    pub guarded: bool,
    pub saturation: Saturation,
}

/// Gains and reference motion scheduled on the current error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub k1: f64,
    pub k2: f64,
    pub v_r: f64,
    pub kappa_r: f64,
}

/// Circular path manifold `(e, α)` as a function of `θ`.
pub fn path_manifold(theta: f64, r: f64) -> (f64, f64) {
    (r * (2.0 * (1.0 - (2.0 * theta).cos())).sqrt(), -theta)
}

/// `sqrt(ζ - cos 2θ)` with `ζ = 1 + ε`, evaluated as `sqrt(ε + 2 sin²θ)` to
/// avoid cancellation for small `θ`.
#[inline]
fn perturbed_root(theta: f64, epsilon: f64) -> f64 {
    let s = theta.sin();
    (epsilon + 2.0 * s * s).sqrt()
}

/// Signed distance `z = e - r√2·sqrt(ζ - cos 2θ)` to the perturbed manifold.
pub fn manifold_distance(e: f64, theta: f64, g: &KinematicGains) -> f64 {
    e - g.r * SQRT_2 * perturbed_root(theta, g.epsilon)
}

/// `+1` on `[0, π]`, `-1` on `[-π, 0)`.
pub fn sign_u(theta: f64) -> f64 {
    if theta >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Error-dependent gains and reference motion.
///
/// `k₂`'s first term is read as `(0.3 / e₀)·tanh(1 / (2|α|))`, which tends
/// to `0.3 / e₀` as `α → 0`.
pub fn gain_schedule(e: f64, alpha: f64, e0: f64, v_des: f64, kappa_des: f64) -> Schedule {
    let e = e.max(E_FLOOR);
    let k1 = 0.2 + 0.3 * (1.0 - (1.3 / e).tanh());
    let k2 = 0.3 / e0 * (1.0 / (2.0 * alpha.abs())).tanh() + 0.3 * (1.0 / e).tanh();
    Schedule {
        k1,
        k2,
        v_r: v_des * (0.1 / e).tanh(),
        kappa_r: kappa_des,
    }
}

/// Denominator of the speed law as used by the controller:
/// `e·sqrt(ζ - cos 2θ) + r√2 sin 2θ sin α`.
pub fn law_denominator(p: &PolarError, g: &KinematicGains) -> f64 {
    let e = p.e.max(E_FLOOR);
    e * perturbed_root(p.theta, g.epsilon) + g.r * SQRT_2 * (2.0 * p.theta).sin() * p.alpha.sin()
}

/// The coefficient of `v` in `-e·sqrt(ζ - cos 2θ)·ż`. It differs from
/// [`law_denominator`] by `e·sqrt(ζ - cos 2θ)(1 - cos α)`, and its sign
/// decides whether the speed law decreases `V₁`.
pub fn law_denominator_exact(p: &PolarError, g: &KinematicGains) -> f64 {
    let e = p.e.max(E_FLOOR);
    e * perturbed_root(p.theta, g.epsilon) * p.alpha.cos()
        + g.r * SQRT_2 * (2.0 * p.theta).sin() * p.alpha.sin()
}

/// Clip `(v, κ)` to `[0, v_max] × [-κ_max, κ_max]`.
pub fn saturate(v: f64, kappa: f64, g: &KinematicGains) -> (CenterCommand, Saturation) {
    let vs = v.clamp(0.0, g.v_max);
    let ks = kappa.clamp(-g.kappa_max, g.kappa_max);
    let sat = Saturation { v: vs != v, kappa: ks != kappa };
    (CenterCommand::new(vs, ks), sat)
}

/// Heading rate demanded by the curvature law at speed `v`.
fn heading_rate(p: &PolarError, k2: f64, v: f64) -> f64 {
    let e = p.e.max(E_FLOOR);
    k2 * (p.theta + p.alpha).tanh() + 2.0 / e * (v * p.alpha.sin() - p.v_r * p.theta.sin())
        - p.v_r * p.kappa_r
}

/// Bounded speed and curvature command for the polar error `p`.
///
/// `p.v_r` and `p.kappa_r` describe the reference motion; `k₁`, `k₂` are
/// scheduled from `p.e`, `p.alpha` and `g.e0`.
pub fn control_law(p: &PolarError, g: &KinematicGains) -> LawOutput {
    let sched = gain_schedule(p.e, p.alpha, g.e0, g.v_des, g.kappa_des);
    let e = p.e.max(E_FLOOR);
    let root = perturbed_root(p.theta, g.epsilon);
    let rs2 = g.r * SQRT_2;
    let s2t = (2.0 * p.theta).sin();

    let num = sched.k1 * e * root * (e - rs2 * root).tanh()
        + p.v_r * e * p.theta.cos() * root
        + p.v_r * rs2 * s2t * (p.theta.sin() + p.kappa_r * e);
    let den = e * root + rs2 * s2t * p.alpha.sin();

    let (raw_v, guarded) = if den.abs() < DENOMINATOR_FLOOR {
        (g.v_max * e.tanh(), true)
    } else {
        (num / den, false)
    };
    let v_eval = raw_v.clamp(0.0, g.v_max);
    // At v = 0 take the limit of ω/v as v → 0⁺ so the clipped curvature
    // does not jump when the speed touches zero.
    let w = heading_rate(p, sched.k2, v_eval);
    let raw_kappa = if v_eval > 0.0 {
        w / v_eval
    } else if w == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(w)
    };
    let (command, saturation) = saturate(raw_v, raw_kappa, g);
    LawOutput { command, raw_v, raw_kappa, guarded, saturation }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    Conforming,
    NonConforming,
}

/// Whether the robot sits on or outside the convergence circle.
///
/// A point exactly on the manifold has `z ≈ -r√(2ε)` for small `θ`, so the
/// test is made against the unperturbed circle `e = 2r|sin θ|`.
pub fn check_initial_condition(p: &PolarError, g: &KinematicGains) -> InitialCondition {
    let circle = g.r * SQRT_2 * perturbed_root(p.theta, 0.0);
    if p.e >= circle - CONFORMING_TOL {
        InitialCondition::Conforming
    } else {
        InitialCondition::NonConforming
    }
}

/// `(V₁, V₂) = (z²/2, (θ+α)²/2)`.
pub fn lyapunov_values(p: &PolarError, g: &KinematicGains) -> (f64, f64) {
    let z = manifold_distance(p.e, p.theta, g);
    let s = p.theta + p.alpha;
    (0.5 * z * z, 0.5 * s * s)
}

/// One evaluation of the stateful controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicStep {
    pub polar: PolarError,
    pub law: LawOutput,
    pub command: CenterCommand,
    pub escaping: bool,
    pub v1: f64,
    pub v2: f64,
}

/// Counts of clipping and fallback events over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KinematicCounters {
    pub saturated_v: u64,
    pub saturated_kappa: u64,
    pub guarded: u64,
    pub escape_steps: u64,
}

/// Controller state owned by one simulation loop: the reference frame
/// (moving when `v_des > 0`), the captured `e₀`, and the escape latch.
#[derive(Debug, Clone)]
pub struct KinematicController {
    gains: KinematicGains,
    reference: Posture,
    escaping: bool,
    counters: KinematicCounters,
    last_schedule: Option<Schedule>,
}

impl KinematicController {
    /// Create a controller for `target`, capturing `e₀` from `start`.
    ///
    /// The escape latch engages if the start is inside the convergence
    /// circle or if the speed law cannot produce forward motion there.
    pub fn new(mut gains: KinematicGains, start: &Posture, target: &Posture) -> Self {
        gains.e0 = start.distance(target).max(E_FLOOR);
        let mut ctl = Self {
            gains,
            reference: *target,
            escaping: false,
            counters: KinematicCounters::default(),
            last_schedule: None,
        };
        let p = ctl.polar(start);
        ctl.escaping = check_initial_condition(&p, &ctl.gains) == InitialCondition::NonConforming
            || law_denominator(&p, &ctl.gains) <= DENOMINATOR_FLOOR;
        ctl
    }

    pub fn gains(&self) -> &KinematicGains {
        &self.gains
    }

    pub fn reference(&self) -> &Posture {
        &self.reference
    }

    pub fn counters(&self) -> KinematicCounters {
        self.counters
    }

    pub fn is_escaping(&self) -> bool {
        self.escaping
    }

    /// Polar error of `robot` with the scheduled reference motion filled in.
    pub fn polar(&self, robot: &Posture) -> PolarError {
        let raw = to_polar_error(robot, &self.reference, 0.0, 0.0);
        let s = gain_schedule(raw.e, raw.alpha, self.gains.e0, self.gains.v_des, self.gains.kappa_des);
        PolarError { v_r: s.v_r, kappa_r: s.kappa_r, phi_r_dot: s.v_r * s.kappa_r, ..raw }
    }

    /// Compute the command for the current robot posture.
    pub fn command(&mut self, robot: &Posture) -> KinematicStep {
        let polar = self.polar(robot);
        let (v1, v2) = lyapunov_values(&polar, &self.gains);

        if self.escaping {
            let z = manifold_distance(polar.e, polar.theta, &self.gains);
            if z > 0.0 && law_denominator(&polar, &self.gains) > DENOMINATOR_FLOOR {
                self.escaping = false;
            }
        }

        let law = control_law(&polar, &self.gains);
        let command = if self.escaping {
            self.counters.escape_steps += 1;
            CenterCommand::new(0.5 * self.gains.v_max, 0.0)
        } else {
            if law.saturation.v {
                self.counters.saturated_v += 1;
            }
            if law.saturation.kappa {
                self.counters.saturated_kappa += 1;
            }
            if law.guarded {
                self.counters.guarded += 1;
            }
            law.command
        };
        self.last_schedule = Some(gain_schedule(
            polar.e,
            polar.alpha,
            self.gains.e0,
            self.gains.v_des,
            self.gains.kappa_des,
        ));
        KinematicStep { polar, law, command, escaping: self.escaping, v1, v2 }
    }

    /// Move the reference frame along its scheduled motion for `dt`.
    pub fn advance_reference(&mut self, dt: f64) {
        if let Some(s) = self.last_schedule {
            if s.v_r != 0.0 {
                self.reference =
                    propagate_unicycle(&self.reference, &BodyVelocity::new(s.v_r, s.v_r * s.kappa_r), dt);
            }
        }
    }
}

/// One sample of an ideal-unicycle closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealSample {
    pub t: f64,
    pub posture: Posture,
    pub step: KinematicStep,
}

/// Close the kinematic controller around an ideal unicycle. Samples are
/// taken before each step, so the log holds `round(duration / dt) + 1`
/// entries.
pub fn simulate_ideal(
    gains: KinematicGains,
    start: Posture,
    target: Posture,
    dt: f64,
    duration: f64,
) -> Vec<IdealSample> {
    let mut ctl = KinematicController::new(gains, &start, &target);
    let n = (duration / dt).round() as usize;
    let mut q = start;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let step = ctl.command(&q);
        out.push(IdealSample { t: k as f64 * dt, posture: q, step });
        if k == n {
            break;
        }
        q = propagate_unicycle(&q, &step.command.as_velocity(), dt);
        ctl.advance_reference(dt);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn gains_eps(eps: f64) -> KinematicGains {
        KinematicGains { epsilon: eps, ..Default::default() }
    }

    #[test]
    fn manifold_examples() {
        let r = 1.0 / 3.0;
        assert_eq!(path_manifold(0.0, r), (0.0, 0.0));
        let (e, a) = path_manifold(FRAC_PI_2, r);
        assert_abs_diff_eq!(e, 2.0 * r, epsilon = 1e-12);
        assert_abs_diff_eq!(a, -FRAC_PI_2);
        let (e, a) = path_manifold(FRAC_PI_4, r);
        assert_abs_diff_eq!(e, 0.471_404_520_791_031_7, epsilon = 1e-12);
        assert_abs_diff_eq!(a, -FRAC_PI_4);
    }

    #[test]
    fn manifold_distance_examples() {
        let g = gains_eps(1e-3);
        assert_abs_diff_eq!(manifold_distance(1.0, 0.0, &g), 0.985_092_880_150_001_4, epsilon = 1e-12);
        assert!(manifold_distance(0.0, 0.7, &g) < 0.0);
        let g0 = gains_eps(1e-14);
        let (e, _) = path_manifold(FRAC_PI_2, g0.r);
        assert!(manifold_distance(e, FRAC_PI_2, &g0).abs() < 1e-12);
    }

    #[test]
    fn sign_u_branches() {
        assert_eq!(sign_u(0.0), 1.0);
        assert_eq!(sign_u(-0.1), -1.0);
        assert_eq!(sign_u(PI), 1.0);
        assert_eq!(sign_u(-PI), -1.0);
    }

    #[test]
    fn schedule_limits_and_values() {
        let s = gain_schedule(1e9, 0.3, 1.0, 0.5, 0.0);
        assert_abs_diff_eq!(s.k1, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(s.v_r, 0.0, epsilon = 1e-9);
        let s = gain_schedule(1e-12, 0.3, 1.0, 0.5, 0.0);
        assert_abs_diff_eq!(s.k1, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.v_r, 0.5, epsilon = 1e-12);

        // independent high-precision evaluation
        let s = gain_schedule(1.0, 0.5, 2.0, 0.5, 0.7);
        assert_abs_diff_eq!(s.k1, 0.241_483_052_206_008_1, epsilon = 1e-14);
        assert_abs_diff_eq!(s.k2, 0.342_717_370_180_094_2, epsilon = 1e-14);
        assert_abs_diff_eq!(s.v_r, 0.049_833_997_312_477_91, epsilon = 1e-14);
        assert_eq!(s.kappa_r, 0.7);

        let s = gain_schedule(1.0, 0.0, 2.0, 0.0, 0.0);
        assert!(s.k2.is_finite());
        assert_abs_diff_eq!(s.k2, 0.15 + 0.3 * 1f64.tanh(), epsilon = 1e-14);
    }

    #[test]
    fn law_on_manifold_is_at_rest() {
        let g = gains_eps(1e-3);
        let theta = 0.6;
        let e = g.r * SQRT_2 * perturbed_root(theta, g.epsilon);
        let p = PolarError { e, theta, alpha: -theta, ..Default::default() };
        let out = control_law(&p, &g);
        assert_abs_diff_eq!(out.command.v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn law_zero_curvature_when_aligned() {
        let g = gains_eps(1e-3);
        let p = PolarError { e: 1.2, theta: 0.0, alpha: 0.0, ..Default::default() };
        let out = control_law(&p, &g);
        assert!(out.command.v > 0.0);
        assert_eq!(out.command.kappa, 0.0);
    }

    #[test]
    fn curvature_at_zero_speed_is_the_limit() {
        let g = gains_eps(1e-3);
        let mut seen = 0;
        for i in 0..40 {
            for j in 0..40 {
                let theta = -3.0 + 0.15 * i as f64;
                let alpha = -3.0 + 0.15 * j as f64;
                let p = PolarError { e: 0.5, theta, alpha, ..Default::default() };
                let out = control_law(&p, &g);
                if out.raw_v >= 0.0 {
                    continue;
                }
                seen += 1;
                let w = heading_rate(&p, gain_schedule(p.e, alpha, g.e0, g.v_des, g.kappa_des).k2, 0.0);
                assert_eq!(out.command.v, 0.0);
                let want = if w == 0.0 { 0.0 } else { g.kappa_max.copysign(w) };
                assert_eq!(out.command.kappa, want, "{p:?}");
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn law_matches_scalar_oracle() {
        // term-by-term evaluation at 30 digits, e0 = 1
        let g = KinematicGains { epsilon: 1e-3, e0: 1.0, ..Default::default() };
        let p = PolarError { e: 1.0, theta: FRAC_PI_4, alpha: -FRAC_PI_4, v_r: 0.1, kappa_r: 0.0, phi_r_dot: 0.0 };
        let out = control_law(&p, &g);
        assert!(!out.guarded);
        assert_abs_diff_eq!(out.raw_v, 0.331_320_728_176_010_5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.raw_kappa, -1.841_054_819_833_391_8, epsilon = 1e-12);
        assert_eq!(out.saturation, Saturation::default());
    }

    #[test]
    fn guard_fires_on_vanishing_denominator() {
        let g = gains_eps(1e-12);
        // on the unperturbed manifold at small θ the denominator is O(θ⁴)
        let theta = 1e-3;
        let (e, alpha) = path_manifold(theta, g.r);
        let p = PolarError { e, theta, alpha, ..Default::default() };
        assert!(law_denominator(&p, &g).abs() < DENOMINATOR_FLOOR);
        let out = control_law(&p, &g);
        assert!(out.guarded);
        assert!(out.command.v <= g.v_max && out.command.kappa.abs() <= g.kappa_max);
        assert_abs_diff_eq!(out.raw_v, g.v_max * e.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn saturate_examples() {
        let g = KinematicGains::default();
        let (c, s) = saturate(0.3, 1.0, &g);
        assert_eq!((c.v, c.kappa), (0.3, 1.0));
        assert_eq!(s, Saturation::default());
        let (c, s) = saturate(0.7, -5.0, &g);
        assert_eq!((c.v, c.kappa), (0.5, -3.0));
        assert!(s.v && s.kappa);
        let (c, _) = saturate(-0.1, 0.0, &g);
        assert_eq!((c.v, c.kappa), (0.0, 0.0));
    }

    #[test]
    fn initial_condition_examples() {
        let g = gains_eps(1e-3);
        let at = |e: f64, theta: f64| PolarError { e, theta, alpha: 0.0, ..Default::default() };
        assert_eq!(check_initial_condition(&at(3.0 * g.r, FRAC_PI_2), &g), InitialCondition::Conforming);
        assert_eq!(check_initial_condition(&at(0.1 * g.r, FRAC_PI_2), &g), InitialCondition::NonConforming);
        // exactly on the manifold: z is slightly negative (≈ -1.92e-4 at θ = π/3)
        let (e, _) = path_manifold(FRAC_PI_3, g.r);
        assert_abs_diff_eq!(manifold_distance(e, FRAC_PI_3, &g), -1.924_180_254_021_391e-4, epsilon = 1e-12);
        assert_eq!(check_initial_condition(&at(e, FRAC_PI_3), &g), InitialCondition::Conforming);
    }

    #[test]
    fn lyapunov_examples() {
        let g = gains_eps(1e-3);
        let theta = 0.4;
        let e = g.r * SQRT_2 * perturbed_root(theta, g.epsilon);
        let (v1, v2) = lyapunov_values(&PolarError { e, theta, alpha: -theta, ..Default::default() }, &g);
        assert_abs_diff_eq!(v1, 0.0, epsilon = 1e-24);
        assert_abs_diff_eq!(v2, 0.0);
        // pick e so that z = 1
        let e = 1.0 + g.r * SQRT_2 * perturbed_root(0.5, g.epsilon);
        let (v1, v2) = lyapunov_values(&PolarError { e, theta: 0.5, alpha: 1.5, ..Default::default() }, &g);
        assert_abs_diff_eq!(v1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn manifold_velocity_relations_hold_for_small_epsilon() {
        // On the manifold the speed law keeps ż = v(1 - cos θ) rather than 0,
        // so the sliding relation reads v = cos θ·(v_r - 2rθ̇U(θ)); the
        // uncorrected form v = v_r - 2rθ̇U(θ) is recovered as θ → 0.
        // The heading relation φ̇ = 2θ̇ + φ̇_r holds whenever κ is not clipped.
        let g = KinematicGains { epsilon: 1e-6, v_des: 0.2, kappa_max: 1e9, v_max: 1e9, ..Default::default() };
        for &theta in &[0.02, 0.3, 0.8, -0.5, 1.2] {
            let e = g.r * SQRT_2 * perturbed_root(theta, g.epsilon);
            let s = gain_schedule(e, -theta, g.e0, g.v_des, g.kappa_des);
            let p = PolarError { e, theta, alpha: -theta, v_r: s.v_r, kappa_r: s.kappa_r, phi_r_dot: 0.0 };
            let out = control_law(&p, &g);
            assert!(!out.saturation.v && !out.saturation.kappa);
            let v = out.command.v;
            let (_, theta_dot, _) = polar_error_rates_at(&p, v, out.command.phi_dot);
            let sliding = p.v_r - 2.0 * g.r * theta_dot * sign_u(theta);
            assert!((v - theta.cos() * sliding).abs() <= 1e-3 * v.abs(), "theta={theta} v={v} vm={sliding}");
            if theta.abs() < 0.03 {
                assert!((v - sliding).abs() <= 1e-3 * v.abs());
            }
            let w_manifold = 2.0 * theta_dot + p.phi_r_dot;
            assert!((out.command.phi_dot - w_manifold).abs() <= 1e-9 * out.command.phi_dot.abs().max(1.0));
        }
    }

    fn polar_error_rates_at(p: &PolarError, v: f64, w: f64) -> (f64, f64, f64) {
        crate::geometry::polar_error_rates(p, v, w).unwrap()
    }

    #[test]
    fn law_is_smooth_away_from_guard() {
        let g = gains_eps(1e-3);
        let h = 1e-6;
        for i in 0..6 {
            for j in 0..6 {
                let theta = -1.2 + 0.45 * i as f64;
                let alpha = -1.0 + 0.4 * j as f64;
                let p = PolarError { e: 1.5, theta, alpha, ..Default::default() };
                if law_denominator(&p, &g).abs() < 0.05 {
                    continue;
                }
                let f = |dt: f64| control_law(&PolarError { theta: theta + dt, ..p }, &g).raw_v;
                let d1 = (f(h) - f(-h)) / (2.0 * h);
                let d2 = (f(2.0 * h) - f(0.0)) / (2.0 * h);
                assert!(d1.is_finite());
                assert!((d1 - d2).abs() < 1e-3 * (1.0 + d1.abs()));
            }
        }
    }

    #[test]
    fn escape_engages_inside_circle_and_releases() {
        let g = KinematicGains::default();
        // inside the convergence circle on the left of the target, facing away
        let start = Posture::new(-0.05, 0.3, PI);
        let log = simulate_ideal(g, start, Posture::default(), 0.01, 20.0);
        assert!(log[0].step.escaping);
        assert!(log.iter().any(|s| !s.step.escaping));
        for s in log.iter().take_while(|s| s.step.escaping) {
            assert_eq!(s.step.command.kappa, 0.0);
            assert_abs_diff_eq!(s.step.command.v, 0.25);
        }
    }

    #[test]
    fn ideal_loop_reaches_target_from_default_start() {
        let g = KinematicGains::default();
        let log = simulate_ideal(g, Posture::new(-1.5, -1.0, 0.0), Posture::default(), 0.01, 60.0);
        let last = log.last().unwrap();
        assert!(last.step.polar.e < 0.01);
        assert!((last.step.polar.theta + last.step.polar.alpha).abs() < 1e-2);
    }

    proptest! {
        #[test]
        fn law_output_is_bounded(
            e in 1e-6f64..5.0, theta in -PI..PI, alpha in -PI..PI,
            v_des in 0.0f64..0.5, kappa_des in -3.0f64..3.0,
        ) {
            let g = KinematicGains { v_des, kappa_des, ..Default::default() };
            let s = gain_schedule(e, alpha, g.e0, v_des, kappa_des);
            let p = PolarError { e, theta, alpha, v_r: s.v_r, kappa_r: s.kappa_r, phi_r_dot: s.v_r * s.kappa_r };
            let c = control_law(&p, &g).command;
            prop_assert!(c.v >= 0.0 && c.v <= 0.5);
            prop_assert!(c.kappa.abs() <= 3.0);
            prop_assert!(c.phi_dot.is_finite());
        }

        #[test]
        fn lyapunov_values_nonnegative(e in 0.0f64..5.0, theta in -PI..PI, alpha in -PI..PI) {
            let g = KinematicGains::default();
            let (v1, v2) = lyapunov_values(&PolarError { e, theta, alpha, ..Default::default() }, &g);
            prop_assert!(v1 >= 0.0 && v2 >= 0.0);
        }
    }
}
