//! CSV and SVG emitters for flowlines.

use std::fmt::Write as _;

/// One sampled flowline: start point `a` and rows `(s, point, N, speed)`.
#[derive(Clone, Debug)]
pub struct Curve {
    pub a: Vec<f64>,
    pub rows: Vec<(f64, Vec<f64>, f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `(x_1, x_2)`.
    Horizontal,
    /// `(|x|, t)` with `t` the first central coordinate.
    RadialHeight,
}

impl Projection {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "x1x2" | "horizontal" => Ok(Projection::Horizontal),
            "rt" | "radial" => Ok(Projection::RadialHeight),
            other => Err(format!("unknown projection `{other}`; expected x1x2 or rt")),
        }
    }

    fn project(&self, g: &[f64], m: usize) -> (f64, f64) {
        match self {
            Projection::Horizontal => (g[0], if g.len() > 1 { g[1] } else { 0.0 }),
            Projection::RadialHeight => {
                (g[..m].iter().map(|v| v * v).sum::<f64>().sqrt(), if g.len() > m { g[m] } else { 0.0 })
            }
        }
    }
}

/// Columns: `curve, a_1..a_n, s, g_1..g_n, N, speed`.
pub fn curves_csv(curves: &[Curve]) -> String {
    let mut o = String::new();
    let n = curves.first().map_or(0, |c| c.a.len());
    let mut header = vec!["curve".to_string()];
    header.extend((1..=n).map(|i| format!("a_{i}")));
    header.push("s".into());
    header.extend((1..=n).map(|i| format!("g_{i}")));
    header.push("N".into());
    header.push("speed".into());
    let _ = writeln!(o, "{}", header.join(","));
    for (k, c) in curves.iter().enumerate() {
        for (s, g, nv, speed) in &c.rows {
            let mut row = vec![k.to_string()];
            row.extend(c.a.iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{s:.12e}"));
            row.extend(g.iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{nv:.12e}"));
            row.push(format!("{speed:.12e}"));
            let _ = writeln!(o, "{}", row.join(","));
        }
    }
    o
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// One `<path>` per curve, in input order, on a fixed 800×800 canvas.
pub fn curves_svg(curves: &[Curve], m: usize, projection: Projection) -> String {
    let pts: Vec<Vec<(f64, f64)>> =
        curves.iter().map(|c| c.rows.iter().map(|(_, g, _, _)| projection.project(g, m)).collect()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts.iter().flatten() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        (x0, x1) = (x0 - 1.0, x0 + 1.0);
    }
    if !(y1 > y0) {
        (y0, y1) = (y0 - 1.0, y0 + 1.0);
    }
    let scale = (SIZE - 2.0 * MARGIN) / (x1 - x0).max(y1 - y0);
    let mut o = String::new();
    let _ = writeln!(
        o,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(o, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
    for (k, line) in pts.iter().enumerate() {
        let mut d = String::new();
        for (i, (x, y)) in line.iter().enumerate() {
            let px = MARGIN + (x - x0) * scale;
            let py = SIZE - MARGIN - (y - y0) * scale;
            let _ = write!(d, "{}{px:.3},{py:.3}", if i == 0 { "M" } else { " L" });
        }
        let _ = writeln!(
            o,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            COLORS[k % COLORS.len()]
        );
    }
    let _ = writeln!(o, "</svg>");
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Curve> {
        (0..3)
            .map(|k| Curve {
                a: vec![1.0, k as f64, 0.0],
                rows: (1..4).map(|i| (i as f64, vec![i as f64, k as f64, 0.5], i as f64, 1.0)).collect(),
            })
            .collect()
    }

    #[test]
    fn csv_shape() {
        let text = curves_csv(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "curve,a_1,a_2,a_3,s,g_1,g_2,g_3,N,speed");
        assert_eq!(lines.len(), 1 + 9);
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn svg_has_one_path_per_curve() {
        let svg = curves_svg(&sample(), 2, Projection::Horizontal);
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
