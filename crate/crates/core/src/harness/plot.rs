//! Planar trajectory plot as SVG: center path solid, wheel paths dashed,
//! target axes dotted. Output depends only on the input table.

use std::fmt::Write as _;

use crate::error::Result;
use crate::harness::trajectory::Table;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;

pub const PLOT_COLUMNS: &[&str] = &[
    "true_x", "true_y", "wheel1r_x", "wheel1r_y", "wheel1l_x", "wheel1l_y", "wheel2r_x", "wheel2r_y", "wheel2l_x",
    "wheel2l_y", "target_x", "target_y", "target_phi",
];

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.scale, SIZE - MARGIN - (y - self.y0) * self.scale)
    }
}

fn path(f: &Frame, xs: &[f64], ys: &[f64]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let (px, py) = f.map(*x, *y);
        let _ = write!(d, "{}{px:.2},{py:.2}", if i == 0 { "M" } else { " L" });
    }
    d
}

/// Render the trajectory table. Missing columns are reported by name.
pub fn render_plot(t: &Table) -> Result<String> {
    t.require(PLOT_COLUMNS)?;
    let col = |c: &str| t.column(c);
    let center = (col("true_x")?, col("true_y")?);
    let wheels = [
        (col("wheel1r_x")?, col("wheel1r_y")?),
        (col("wheel1l_x")?, col("wheel1l_y")?),
        (col("wheel2r_x")?, col("wheel2r_y")?),
        (col("wheel2l_x")?, col("wheel2l_y")?),
    ];
    let target = match t.rows.len() {
        0 => [0.0; 3],
        n => [t.get(n - 1, "target_x")?, t.get(n - 1, "target_y")?, t.get(n - 1, "target_phi")?],
    };

    let (mut lo, mut hi) = ([target[0], target[1]], [target[0], target[1]]);
    for (xs, ys) in std::iter::once(&center).chain(&wheels) {
        for (x, y) in xs.iter().zip(ys) {
            lo = [lo[0].min(*x), lo[1].min(*y)];
            hi = [hi[0].max(*x), hi[1].max(*y)];
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(0.1) * 1.1;
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let f = Frame { x0: mid[0] - 0.5 * span, y0: mid[1] - 0.5 * span, scale: (SIZE - 2.0 * MARGIN) / span };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // target axes, long enough to cross the plot
    let (sn, cs) = target[2].sin_cos();
    for (dx, dy) in [(cs, sn), (-sn, cs)] {
        let (ax, ay) = f.map(target[0] - span * dx, target[1] - span * dy);
        let (bx, by) = f.map(target[0] + span * dx, target[1] + span * dy);
        let _ = writeln!(
            s,
            r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="gray" stroke-width="1" stroke-dasharray="1,4"/>"#
        );
    }
    for (xs, ys) in &wheels {
        if !xs.is_empty() {
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="black" stroke-width="1" stroke-dasharray="6,4"/>"#,
                path(&f, xs, ys)
            );
        }
    }
    if !center.0.is_empty() {
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="black" stroke-width="2"/>"#, path(&f, &center.0, &center.1));
    }

    // scale bar
    let bar = 10f64.powf((span / 4.0).log10().floor());
    let (bx, by) = (MARGIN, SIZE - MARGIN / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{bx:.2}" y1="{by:.2}" x2="{:.2}" y2="{by:.2}" stroke="black" stroke-width="2"/>"#,
        bx + bar * f.scale
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{bar} m</text>"#, bx + bar * f.scale + 6.0, by + 4.0);
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn table(rows: &[[f64; 13]]) -> Table {
        let mut s = PLOT_COLUMNS.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        Table::read(s.as_bytes()).unwrap()
    }

    fn straight(n: usize) -> Table {
        let rows: Vec<[f64; 13]> = (0..n)
            .map(|i| {
                let x = i as f64 * 0.1;
                [x, 0.0, x + 0.2, -0.2, x + 0.2, 0.2, x - 0.2, -0.2, x - 0.2, 0.2, 1.0, 0.0, 0.0]
            })
            .collect();
        table(&rows)
    }

    #[test]
    fn straight_line_draws_parallel_tracks() {
        let svg = render_plot(&straight(11)).unwrap();
        assert_eq!(svg.matches("stroke-dasharray=\"6,4\"").count(), 4);
        assert_eq!(svg.matches("stroke-dasharray=\"1,4\"").count(), 2);
        assert_eq!(svg.matches("stroke-width=\"2\"/>").count(), 2);
        // every wheel path is horizontal
        for line in svg.lines().filter(|l| l.contains("6,4")) {
            let d = line.split('"').nth(1).unwrap();
            let ys: Vec<&str> = d.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
            assert!(ys.windows(2).all(|w| w[0] == w[1]), "{d}");
        }
    }

    #[test]
    fn rotation_in_place_draws_circles() {
        let rows: Vec<[f64; 13]> = (0..=36)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 36.0;
                let (s, c) = a.sin_cos();
                [0.0, 0.0, 0.2 * c, 0.2 * s, -0.2 * c, -0.2 * s, 0.1 * c, 0.1 * s, -0.1 * c, -0.1 * s, 0.0, 0.0, 0.0]
            })
            .collect();
        let svg = render_plot(&table(&rows)).unwrap();
        let center = svg.lines().find(|l| l.contains("stroke-width=\"2\"/>") && l.starts_with("<path")).unwrap();
        let d = center.split('"').nth(1).unwrap();
        let pts: std::collections::BTreeSet<&str> = d.split(' ').map(|p| p.trim_start_matches(['M', 'L'])).collect();
        assert_eq!(pts.len(), 1, "midpoint should stay put");
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(render_plot(&straight(5)).unwrap(), render_plot(&straight(5)).unwrap());
    }

    #[test]
    fn names_missing_columns() {
        let t = Table::read("t,true_x,true_y\n0,0,0\n".as_bytes()).unwrap();
        match render_plot(&t) {
            Err(Error::MissingColumns(m)) => {
                assert!(m.contains(&"wheel1r_x".to_string()));
                assert!(m.contains(&"target_phi".to_string()));
                assert!(!m.contains(&"true_x".to_string()));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn header_only_renders() {
        let svg = render_plot(&table(&[])).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
