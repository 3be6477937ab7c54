//! Planar pose algebra, the Cartesian to polar error transform and ideal
//! unicycle propagation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Lower bound applied to `e` before it is used as a divisor.
pub const E_FLOOR: f64 = 1e-9;

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("cannot wrap non-finite angle {a}")));
    }
    Ok(wrap(a))
}

/// Infallible variant of [`wrap_angle`] for values already known to be finite.
/// Non-finite inputs propagate unchanged.
#[inline]
pub(crate) fn wrap(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Planar pose of an axle midpoint or of the frame center point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Posture {
    pub x: f64,
    pub y: f64,
    /// Heading, always in `(-π, π]`.
    pub phi: f64,
}

impl Posture {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi: wrap(phi) }
    }

    pub fn distance(&self, other: &Posture) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.phi.is_finite()
    }
}

/// Linear speed along the heading and heading rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub v: f64,
    pub omega: f64,
}

impl BodyVelocity {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn norm(&self) -> f64 {
        self.v.hypot(self.omega)
    }
}

/// Polar error coordinates of a robot relative to a (possibly moving)
/// reference frame, together with the reference motion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarError {
    /// Distance robot to reference, `>= 0`.
    pub e: f64,
    /// Line-of-sight angle measured from the reference heading.
    pub theta: f64,
    /// Line-of-sight angle measured from the robot heading.
    pub alpha: f64,
    pub v_r: f64,
    pub kappa_r: f64,
    /// Reference heading rate, `v_r * kappa_r`.
    pub phi_r_dot: f64,
}

/// Express `robot` in polar error coordinates relative to `reference`.
///
/// With `λ = atan2(y_r - y, x_r - x)`: `θ = λ - φ_r`, `α = λ - φ`. Under
/// unicycle motion of both frames these coordinates obey
/// [`polar_error_rates`].
pub fn to_polar_error(robot: &Posture, reference: &Posture, v_r: f64, kappa_r: f64) -> PolarError {
    let dx = reference.x - robot.x;
    let dy = reference.y - robot.y;
    let e = dx.hypot(dy);
    let lambda = dy.atan2(dx);
    PolarError {
        e,
        theta: wrap(lambda - reference.phi),
        alpha: wrap(lambda - robot.phi),
        v_r,
        kappa_r,
        phi_r_dot: v_r * kappa_r,
    }
}

/// Time derivatives `(ė, θ̇, α̇)` of the polar error for robot speed `v` and
/// heading rate `phi_dot`.
pub fn polar_error_rates(p: &PolarError, v: f64, phi_dot: f64) -> Result<(f64, f64, f64)> {
    if p.e <= 0.0 {
        return Err(Error::Singularity("polar error rates undefined at e = 0".into()));
    }
    let e = p.e.max(E_FLOOR);
    let e_dot = -v * p.alpha.cos() + p.v_r * p.theta.cos();
    let lam_dot = (v * p.alpha.sin() - p.v_r * p.theta.sin()) / e;
    Ok((e_dot, lam_dot - p.phi_r_dot, lam_dot - phi_dot))
}

#[inline]
fn unicycle_rate(phi: f64, u: &BodyVelocity) -> [f64; 3] {
    [u.v * phi.cos(), u.v * phi.sin(), u.omega]
}

/// One classical RK4 step of `ẋ = v cos φ, ẏ = v sin φ, φ̇ = ω` with
/// constant inputs over `dt`.
pub fn propagate_unicycle(q: &Posture, u: &BodyVelocity, dt: f64) -> Posture {
    let k1 = unicycle_rate(q.phi, u);
    let k2 = unicycle_rate(q.phi + 0.5 * dt * k1[2], u);
    let k3 = unicycle_rate(q.phi + 0.5 * dt * k2[2], u);
    let k4 = unicycle_rate(q.phi + dt * k3[2], u);
    let step = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Posture {
        x: q.x + step(0),
        y: q.y + step(1),
        phi: wrap(q.phi + step(2)),
    }
}

/// Mean of two headings via unit-vector averaging.
pub fn mean_angle(a: f64, b: f64) -> f64 {
    let s = a.sin() + b.sin();
    let c = a.cos() + b.cos();
    if s.abs() < 1e-300 && c.abs() < 1e-300 {
        // antipodal headings; fall back to the arithmetic midpoint
        return wrap(a + 0.5 * wrap(b - a));
    }
    wrap(s.atan2(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI).unwrap(), PI, epsilon = 1e-12);
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn polar_examples() {
        let p = to_polar_error(&Posture::new(-1.0, 0.0, 0.0), &Posture::default(), 0.0, 0.0);
        assert_abs_diff_eq!(p.e, 1.0);
        assert_abs_diff_eq!(p.theta, 0.0);
        assert_abs_diff_eq!(p.alpha, 0.0);

        let p = to_polar_error(&Posture::new(0.0, -1.0, FRAC_PI_2), &Posture::default(), 0.0, 0.0);
        assert_abs_diff_eq!(p.e, 1.0);
        assert_abs_diff_eq!(p.theta, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.alpha, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rates_examples() {
        let p = PolarError { e: 1.0, ..Default::default() };
        assert_eq!(polar_error_rates(&p, 1.0, 0.0).unwrap(), (-1.0, 0.0, 0.0));

        let p = PolarError { e: 0.7, theta: 0.3, alpha: -1.1, v_r: 0.0, kappa_r: 2.0, phi_r_dot: 0.25 };
        let (ed, td, ad) = polar_error_rates(&p, 0.0, 0.4).unwrap();
        assert_eq!(ed, 0.0);
        assert_abs_diff_eq!(td, -0.25);
        assert_abs_diff_eq!(ad, -0.4);

        // hand evaluation: e=1, θ=α=π/4, v_r=0.1, φ̇_r=0, v=0.5, φ̇=0.2
        // ė = -0.5·0.70711 + 0.1·0.70711 = -0.28284
        // θ̇ = 0.5·0.70711 - 0.1·0.70711 = 0.28284; α̇ = 0.28284 - 0.2
        let q = std::f64::consts::FRAC_PI_4;
        let p = PolarError { e: 1.0, theta: q, alpha: q, v_r: 0.1, kappa_r: 0.0, phi_r_dot: 0.0 };
        let (ed, td, ad) = polar_error_rates(&p, 0.5, 0.2).unwrap();
        assert_abs_diff_eq!(ed, -0.282_842_712_474_619, epsilon = 1e-12);
        assert_abs_diff_eq!(td, 0.282_842_712_474_619, epsilon = 1e-12);
        assert_abs_diff_eq!(ad, 0.082_842_712_474_619, epsilon = 1e-12);

        assert!(polar_error_rates(&PolarError::default(), 1.0, 0.0).is_err());
    }

    #[test]
    fn unicycle_examples() {
        let q = propagate_unicycle(&Posture::default(), &BodyVelocity::new(1.0, 0.0), 1.0);
        assert_eq!((q.x, q.y, q.phi), (1.0, 0.0, 0.0));

        let q = propagate_unicycle(&Posture::default(), &BodyVelocity::new(0.0, PI), 1.0);
        assert_abs_diff_eq!(q.phi, PI, epsilon = 1e-12);
        assert_eq!((q.x, q.y), (0.0, 0.0));

        // closed-form arc; a single RK4 step over a quarter turn is good to ~1e-4,
        // so subdivide to reach the 1e-6 tolerance
        let mut q = Posture::default();
        let n = 64;
        for _ in 0..n {
            q = propagate_unicycle(&q, &BodyVelocity::new(1.0, 1.0), FRAC_PI_2 / n as f64);
        }
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q.phi, FRAC_PI_2, epsilon = 1e-6);
    }

    #[test]
    fn full_circle_returns_home() {
        let (v, w) = (0.4, 1.3);
        let period = 2.0 * PI / w;
        let n = 2000;
        let mut q = Posture::new(0.3, -0.2, 0.5);
        let start = q;
        for _ in 0..n {
            q = propagate_unicycle(&q, &BodyVelocity::new(v, w), period / n as f64);
        }
        let path = v * period;
        assert!(q.distance(&start) < 1e-6 * path);
        assert!(wrap(q.phi - start.phi).abs() < 1e-6 * path);
    }

    #[test]
    fn mean_angle_across_branch_cut() {
        let m = mean_angle(PI - 0.1, -PI + 0.1);
        assert_abs_diff_eq!(wrap(m - PI).abs(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean_angle(0.2, 0.4), 0.3, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_congruent(a in -1e3f64..1e3) {
            let w = wrap_angle(a).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w).unwrap(), w);
            let k = ((a - w) / (2.0 * PI)).round();
            prop_assert!((a - w - 2.0 * PI * k).abs() < 1e-9);
        }
    }
}
