//! Browser bindings. Each export has a plain Rust twin that the native
//! tests exercise; the `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

use cfmmr_core::cascade::{solve_psi, FrameGeometry};
use cfmmr_core::harness::compute_metrics;
use cfmmr_core::harness::trajectory::wheel_points;
use cfmmr_core::interaction::{run, InteractionCase, LoopConfig};
use cfmmr_core::kinematic::{path_manifold, simulate_ideal, KinematicGains};
use cfmmr_core::plant::DisturbanceMode;
use cfmmr_core::{Posture, Result};

/// Interleaved `x, y` samples.
fn push(buf: &mut Vec<f64>, x: f64, y: f64) {
    buf.push(x);
    buf.push(y);
}

/// Closed-loop run reduced to what the page draws.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct RunView {
    center: Vec<f64>,
    odometry: Vec<f64>,
    wheels: Vec<f64>,
    kappa: Vec<f64>,
    summary: Vec<f64>,
    aborted: Option<String>,
}

#[wasm_bindgen]
impl RunView {
    /// True center path.
    pub fn center(&self) -> Vec<f64> {
        self.center.clone()
    }

    /// Odometric center path.
    pub fn odometry(&self) -> Vec<f64> {
        self.odometry.clone()
    }

    /// Four wheel paths, concatenated: front right, front left, rear right,
    /// rear left. Each has the same length as `center`.
    pub fn wheels(&self) -> Vec<f64> {
        self.wheels.clone()
    }

    /// Interleaved `t, κ` command samples.
    pub fn kappa(&self) -> Vec<f64> {
        self.kappa.clone()
    }

    /// `[‖(Xt, Yt)‖, φt, DEV, t]` at the end of the run.
    pub fn summary(&self) -> Vec<f64> {
        self.summary.clone()
    }

    pub fn aborted(&self) -> Option<String> {
        self.aborted.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoRun {
    pub case: u8,
    pub start: Posture,
    pub duration: f64,
    pub noise: bool,
    pub disturbance: bool,
    pub seed: u64,
}

pub fn simulate_view(d: &DemoRun) -> Result<RunView> {
    let mut cfg = LoopConfig {
        case: InteractionCase::try_from(d.case)?,
        start: d.start,
        duration: d.duration,
        disturbance_seed: d.seed,
        ..Default::default()
    };
    cfg.sensor.seed = d.seed;
    if !d.noise {
        cfg.sensor.sigma_noise = 0.0;
    }
    cfg.plant.disturbance.mode = if d.disturbance { DisturbanceMode::Sphere } else { DisturbanceMode::Off };
    let log = run(cfg, false)?;

    let geo = cfg.plant.geo;
    let n = log.records.len();
    let mut view = RunView { wheels: vec![0.0; 8 * n], ..Default::default() };
    for (k, r) in log.records.iter().enumerate() {
        push(&mut view.center, r.center_true.x, r.center_true.y);
        push(&mut view.odometry, r.center_odo.x, r.center_odo.y);
        push(&mut view.kappa, r.t, r.command.kappa);
        let pts = [wheel_points(&r.axles_true[0], geo.half_track), wheel_points(&r.axles_true[1], geo.half_track)];
        for (w, p) in [pts[0][0], pts[0][1], pts[1][0], pts[1][1]].into_iter().enumerate() {
            view.wheels[w * 2 * n + 2 * k] = p[0];
            view.wheels[w * 2 * n + 2 * k + 1] = p[1];
        }
    }
    let m = compute_metrics(log.final_record(), &log.target);
    view.summary = vec![m.norm_t, m.phi_t, m.dev, m.t];
    view.aborted = log.aborted.as_ref().map(|e| e.to_string());
    Ok(view)
}

/// Kinematic layer alone around an ideal unicycle, with the path manifold
/// it steers onto.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct IdealView {
    path: Vec<f64>,
    manifold: Vec<f64>,
    conforming: bool,
}

#[wasm_bindgen]
impl IdealView {
    pub fn path(&self) -> Vec<f64> {
        self.path.clone()
    }

    /// Manifold points in the world frame, one branch per side of the
    /// target, separated by a `NaN` pair.
    pub fn manifold(&self) -> Vec<f64> {
        self.manifold.clone()
    }

    /// Whether the start needed no escape maneuver.
    pub fn conforming(&self) -> bool {
        self.conforming
    }
}

pub fn ideal_view(start: Posture, duration: f64) -> IdealView {
    let target = Posture::default();
    let gains = KinematicGains::default();
    let samples = simulate_ideal(gains, start, target, 0.01, duration);
    let mut view = IdealView { conforming: !samples.iter().any(|s| s.step.escaping), ..Default::default() };
    for s in &samples {
        push(&mut view.path, s.posture.x, s.posture.y);
    }
    // the robot sits at -e(cos θ, sin θ) from the target
    for branch in [1.0, -1.0] {
        for i in 1..200 {
            let theta = branch * std::f64::consts::PI * i as f64 / 200.0;
            let (e, _) = path_manifold(theta, gains.r);
            push(&mut view.manifold, -e * theta.cos(), -e * theta.sin());
        }
        push(&mut view.manifold, f64::NAN, f64::NAN);
    }
    view
}

/// Frame bent to a commanded curvature, in the center's body frame.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct FrameView {
    psi: f64,
    arc: Vec<f64>,
    axles: Vec<f64>,
}

#[wasm_bindgen]
impl FrameView {
    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// Frame centerline from the rear axle to the front axle.
    pub fn arc(&self) -> Vec<f64> {
        self.arc.clone()
    }

    /// `x, y, φ` of the front then the rear axle.
    pub fn axles(&self) -> Vec<f64> {
        self.axles.clone()
    }
}

pub fn frame_view(kappa: f64) -> Result<FrameView> {
    let geo = FrameGeometry::default();
    let psi = solve_psi(kappa, &geo)?;
    let q = geo.axle_postures(&Posture::default(), psi);
    let mut view = FrameView { psi, ..Default::default() };
    for a in &q {
        view.axles.extend([a.x, a.y, a.phi]);
    }
    // the tangent turns linearly from -ψ at the rear to +ψ at the front
    let n = 64;
    let (x0, y0) = (q[1].x, q[1].y);
    for i in 0..=n {
        let s = geo.length * i as f64 / n as f64;
        let beta = -psi + 2.0 * psi * s / geo.length;
        let (dx, dy) = if psi.abs() < 1e-9 {
            (s, 0.0)
        } else {
            let rad = geo.length / (2.0 * psi);
            (rad * (beta.sin() + psi.sin()), rad * (psi.cos() - beta.cos()))
        };
        push(&mut view.arc, x0 + dx, y0 + dy);
    }
    Ok(view)
}

fn js_err(e: cfmmr_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Run the full two-axle loop from `(x, y, φ)` toward the origin.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn simulate(case: u8, x: f64, y: f64, phi: f64, duration: f64, noise: bool, disturbance: bool, seed: u32) -> std::result::Result<RunView, JsError> {
    let d = DemoRun { case, start: Posture::new(x, y, phi), duration, noise, disturbance, seed: seed.into() };
    simulate_view(&d).map_err(js_err)
}

/// Ideal-unicycle path from `(x, y, φ)` and the path manifold.
#[wasm_bindgen]
pub fn ideal_path(x: f64, y: f64, phi: f64, duration: f64) -> IdealView {
    ideal_view(Posture::new(x, y, phi), duration)
}

/// Frame shape for a center curvature.
#[wasm_bindgen]
pub fn frame_shape(kappa: f64) -> std::result::Result<FrameView, JsError> {
    frame_view(kappa).map_err(js_err)
}
