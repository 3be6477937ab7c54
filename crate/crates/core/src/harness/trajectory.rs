//! Trajectory CSV: one row per logged record, fixed column set.
//!
//! Floats are written in shortest round-trip form, so a reader recovers the
//! logged values bit for bit. Flags are `0` or `1`. Angles are radians.
//!
//! | columns | meaning |
//! |---|---|
//! | `t` | time at the end of the logged step |
//! | `true_*`, `odo_*`, `kin_*` | center posture: ground truth, odometry, kinematic-layer input |
//! | `true1_*`, `true2_*`, `odo1_*`, `odo2_*` | front (1) and rear (2) axle postures |
//! | `wheel{i}{r,l}_{x,y}` | true wheel contact points |
//! | `e`, `theta`, `alpha` | polar error seen by the kinematic layer |
//! | `v_cmd`, `kappa_cmd` | center command applied over the step |
//! | `sat_v`, `sat_kappa`, `guarded`, `escaping` | kinematic-layer flags |
//! | `ref{i}_*` | axle reference posture and velocity |
//! | `ec{i}_v`, `ec{i}_omega` | axle velocity tracking error |
//! | `xi{i}` | damping regressor norm |
//! | `tau{i}_r`, `tau{i}_l` | wheel torques |
//! | `V1`, `V2` | kinematic Lyapunov values |
//! | `target_*` | target posture |

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::cascade::FrameGeometry;
use crate::error::{Error, Result};
use crate::geometry::Posture;
use crate::harness::config::fmt_f64;
use crate::interaction::LogRecord;

pub const COLUMNS: &[&str] = &[
    "t",
    "true_x", "true_y", "true_phi",
    "odo_x", "odo_y", "odo_phi",
    "kin_x", "kin_y", "kin_phi",
    "true1_x", "true1_y", "true1_phi",
    "true2_x", "true2_y", "true2_phi",
    "odo1_x", "odo1_y", "odo1_phi",
    "odo2_x", "odo2_y", "odo2_phi",
    "wheel1r_x", "wheel1r_y", "wheel1l_x", "wheel1l_y",
    "wheel2r_x", "wheel2r_y", "wheel2l_x", "wheel2l_y",
    "e", "theta", "alpha",
    "v_cmd", "kappa_cmd",
    "sat_v", "sat_kappa", "guarded", "escaping",
    "ref1_x", "ref1_y", "ref1_phi", "ref1_v", "ref1_omega",
    "ref2_x", "ref2_y", "ref2_phi", "ref2_v", "ref2_omega",
    "ec1_v", "ec1_omega", "ec2_v", "ec2_omega",
    "xi1", "xi2",
    "tau1_r", "tau1_l", "tau2_r", "tau2_l",
    "V1", "V2",
    "target_x", "target_y", "target_phi",
];

/// Right and left wheel contact points of an axle.
pub fn wheel_points(q: &Posture, half_track: f64) -> [[f64; 2]; 2] {
    let (s, c) = q.phi.sin_cos();
    [[q.x + half_track * s, q.y - half_track * c], [q.x - half_track * s, q.y + half_track * c]]
}

fn row(r: &LogRecord, target: &Posture, geo: &FrameGeometry) -> Vec<String> {
    let mut v: Vec<f64> = Vec::with_capacity(COLUMNS.len());
    let pose = |v: &mut Vec<f64>, q: &Posture| v.extend([q.x, q.y, q.phi]);
    v.push(r.t);
    pose(&mut v, &r.center_true);
    pose(&mut v, &r.center_odo);
    pose(&mut v, &r.center_kin);
    r.axles_true.iter().for_each(|q| pose(&mut v, q));
    r.axles_odo.iter().for_each(|q| pose(&mut v, q));
    for q in &r.axles_true {
        for w in wheel_points(q, geo.half_track) {
            v.extend(w);
        }
    }
    v.extend([r.polar.e, r.polar.theta, r.polar.alpha, r.command.v, r.command.kappa]);
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    v.extend([b(r.saturation.v), b(r.saturation.kappa), b(r.guarded), b(r.escaping)]);
    for a in &r.references {
        v.extend([a.q_r.x, a.q_r.y, a.q_r.phi, a.v_r, a.omega_r]);
    }
    for d in &r.axle {
        v.extend([d.e_c.v, d.e_c.omega]);
    }
    v.extend([r.axle[0].xi_norm, r.axle[1].xi_norm]);
    for t in &r.torques {
        v.extend([t.tau_r, t.tau_l]);
    }
    v.extend([r.kin_lyapunov.0, r.kin_lyapunov.1]);
    pose(&mut v, target);
    debug_assert_eq!(v.len(), COLUMNS.len());
    // flags are whole numbers, everything else keeps full precision
    v.iter()
        .enumerate()
        .map(|(i, x)| if (35..39).contains(&i) { format!("{}", *x as u8) } else { fmt_f64(*x) })
        .collect()
}

/// Write records as CSV. With no records only the header is written.
pub fn write_csv<W: Write>(out: W, records: &[LogRecord], target: &Posture, geo: &FrameGeometry) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record(row(r, target, geo)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn to_csv_string(records: &[LogRecord], target: &Posture, geo: &FrameGeometry) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records, target, geo)?;
    String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
}

/// Numeric CSV columns by name.
#[derive(Debug, Clone, Default)]
pub struct Table {
    index: HashMap<String, usize>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Read a CSV with a header row. Every field must parse as a number.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
        let index = header.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        let mut rows = Vec::new();
        for (n, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| Error::Csv(format!("row {}: `{f}` is not a number", n + 1))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { index, rows })
    }

    /// Fail with every absent column named.
    pub fn require(&self, cols: &[&str]) -> Result<()> {
        let missing: Vec<String> = cols.iter().filter(|c| !self.index.contains_key(**c)).map(|c| c.to_string()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingColumns(missing))
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        self.require(&[name])?;
        let i = self.index[name];
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Value of `name` in row `row`.
    pub fn get(&self, row: usize, name: &str) -> Result<f64> {
        self.require(&[name])?;
        Ok(self.rows[row][self.index[name]])
    }
}
