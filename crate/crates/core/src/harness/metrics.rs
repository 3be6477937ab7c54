//! Final position errors of a run, in the layout of an experimental
//! position-error table.
//!
//! All position errors are expressed in the target frame. The odometric
//! columns are what the robot believes; the `t`-suffixed columns use ground
//! truth, standing in for tape-measured positions.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{wrap, Posture};
use crate::harness::config::fmt_f64;
use crate::harness::trajectory::Table;
use crate::interaction::{LogRecord, RunLog};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub t: f64,
    /// Final polar error of the kinematic layer.
    pub e: f64,
    pub theta: f64,
    pub alpha: f64,
    /// Odometric center minus the center of the axle references.
    pub xo_d: f64,
    pub yo_d: f64,
    /// Odometric center relative to the target.
    pub xo: f64,
    pub yo: f64,
    pub norm_o: f64,
    pub phi_o: f64,
    /// True center relative to the target.
    pub xt: f64,
    pub yt: f64,
    pub norm_t: f64,
    pub phi_t: f64,
    /// Distance between the odometric and true centers.
    pub dev: f64,
}

/// `p - origin` rotated into the frame of `frame`.
fn relative(p: [f64; 2], origin: [f64; 2], frame: &Posture) -> [f64; 2] {
    let (s, c) = frame.phi.sin_cos();
    let (dx, dy) = (p[0] - origin[0], p[1] - origin[1]);
    [c * dx + s * dy, -s * dx + c * dy]
}

/// Inputs shared by the record and CSV paths.
struct Final {
    t: f64,
    polar: [f64; 3],
    odo: Posture,
    truth: Posture,
    refs: [[f64; 2]; 2],
}

fn assemble(f: &Final, target: &Posture) -> MetricsReport {
    let tgt = [target.x, target.y];
    let ref_mid = [0.5 * (f.refs[0][0] + f.refs[1][0]), 0.5 * (f.refs[0][1] + f.refs[1][1])];
    let [xo_d, yo_d] = relative([f.odo.x, f.odo.y], ref_mid, target);
    let [xo, yo] = relative([f.odo.x, f.odo.y], tgt, target);
    let [xt, yt] = relative([f.truth.x, f.truth.y], tgt, target);
    MetricsReport {
        t: f.t,
        e: f.polar[0],
        theta: f.polar[1],
        alpha: f.polar[2],
        xo_d,
        yo_d,
        xo,
        yo,
        norm_o: xo.hypot(yo),
        phi_o: wrap(f.odo.phi - target.phi),
        xt,
        yt,
        norm_t: xt.hypot(yt),
        phi_t: wrap(f.truth.phi - target.phi),
        dev: (f.odo.x - f.truth.x).hypot(f.odo.y - f.truth.y),
    }
}

/// Metrics of one log record against `target`.
pub fn compute_metrics(r: &LogRecord, target: &Posture) -> MetricsReport {
    let f = Final {
        t: r.t,
        polar: [r.polar.e, r.polar.theta, r.polar.alpha],
        odo: r.center_odo,
        truth: r.center_true,
        refs: r.references.map(|a| [a.q_r.x, a.q_r.y]),
    };
    assemble(&f, target)
}

/// Metrics of the final state of a run.
pub fn metrics_of_log(log: &RunLog) -> MetricsReport {
    compute_metrics(log.final_record(), &log.target)
}

/// Columns [`metrics_from_table`] reads.
pub const METRIC_COLUMNS: &[&str] = &[
    "t", "e", "theta", "alpha", "odo_x", "odo_y", "odo_phi", "true_x", "true_y", "true_phi", "ref1_x", "ref1_y", "ref2_x",
    "ref2_y", "target_x", "target_y", "target_phi",
];

/// Metrics of the last row of a trajectory table.
pub fn metrics_from_table(t: &Table) -> Result<MetricsReport> {
    t.require(METRIC_COLUMNS)?;
    let n = t.rows.len().checked_sub(1).ok_or(Error::EmptyLog)?;
    let g = |c: &str| t.get(n, c);
    let f = Final {
        t: g("t")?,
        polar: [g("e")?, g("theta")?, g("alpha")?],
        odo: Posture::new(g("odo_x")?, g("odo_y")?, g("odo_phi")?),
        truth: Posture::new(g("true_x")?, g("true_y")?, g("true_phi")?),
        refs: [[g("ref1_x")?, g("ref1_y")?], [g("ref2_x")?, g("ref2_y")?]],
    };
    Ok(assemble(&f, &Posture::new(g("target_x")?, g("target_y")?, g("target_phi")?)))
}

impl MetricsReport {
    /// Column headers of the aligned table, in order.
    pub const HEADERS: [&'static str; 15] = [
        "e", "theta", "alpha", "Xo-d", "Yo-d", "Xo", "Yo", "|Xo,Yo|", "phi_o", "Xt", "Yt", "|Xt,Yt|", "phi_t", "DEV", "t",
    ];

    /// Machine keys matching [`Self::HEADERS`].
    pub const KEYS: [&'static str; 15] =
        ["e", "theta", "alpha", "xo_d", "yo_d", "xo", "yo", "norm_o", "phi_o", "xt", "yt", "norm_t", "phi_t", "dev", "t"];

    pub fn values(&self) -> [f64; 15] {
        [
            self.e, self.theta, self.alpha, self.xo_d, self.yo_d, self.xo, self.yo, self.norm_o, self.phi_o, self.xt,
            self.yt, self.norm_t, self.phi_t, self.dev, self.t,
        ]
    }

    /// `prefix.key = value` lines, floats in round-trip form.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let mut s = String::new();
        for (k, v) in Self::KEYS.iter().zip(self.values()) {
            let _ = writeln!(s, "{prefix}{k} = {}", fmt_f64(v));
        }
        s
    }

    /// Read back the output of [`Self::to_key_values`] with an empty prefix.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut vals = [f64::NAN; 15];
        for (n, line) in text.lines().enumerate() {
            let Some((k, v)) = line.split_once('=') else { continue };
            if let Some(i) = Self::KEYS.iter().position(|x| *x == k.trim()) {
                vals[i] = v.trim().parse().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad value for `{}`", k.trim()) })?;
            }
        }
        if let Some(i) = vals.iter().position(|v| v.is_nan()) {
            return Err(Error::invalid(Self::KEYS[i], "missing from report"));
        }
        let [e, theta, alpha, xo_d, yo_d, xo, yo, norm_o, phi_o, xt, yt, norm_t, phi_t, dev, t] = vals;
        Ok(Self { t, e, theta, alpha, xo_d, yo_d, xo, yo, norm_o, phi_o, xt, yt, norm_t, phi_t, dev })
    }
}

/// Aligned text table, one row per labelled report.
pub fn format_table(rows: &[(String, MetricsReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("run".len());
    let cells: Vec<Vec<String>> = rows.iter().map(|(_, m)| m.values().iter().map(|v| format!("{v:.5}")).collect()).collect();
    let widths: Vec<usize> = MetricsReport::HEADERS
        .iter()
        .enumerate()
        .map(|(i, h)| cells.iter().map(|c| c[i].len()).max().unwrap_or(0).max(h.len()))
        .collect();
    let mut s = format!("{:<label_w$}", "run");
    for (h, w) in MetricsReport::HEADERS.iter().zip(&widths) {
        let _ = write!(s, "  {h:>w$}");
    }
    s.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        let _ = write!(s, "{label:<label_w$}");
        for (c, w) in row.iter().zip(&widths) {
            let _ = write!(s, "  {c:>w$}");
        }
        s.push('\n');
    }
    s
}
