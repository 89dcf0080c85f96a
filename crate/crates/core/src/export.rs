//! File emission: profile CSV, contour-report JSON, and deterministic SVG
//! figures (phase portraits, Evans image curves, profile plots).

use crate::contour::{ContourReport, Verdict};
use crate::profile::{PhasePortrait, ProfileGrid};
use serde_json::json;
use std::fmt::Write as _;

/// Floating-point formatting with 17 significant digits (round-trip safe).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV of a profile grid: header `z,a1,..,b1,..,a1p,..,b1p,..`, one row per
/// node, 17 significant digits.
pub fn profile_csv(grid: &ProfileGrid) -> String {
    let d = grid.alpha.len();
    let mut out = String::new();
    let mut cols = vec!["z".to_string()];
    for prefix in ["a", "b"] {
        for i in 1..=d {
            cols.push(format!("{prefix}{i}"));
        }
    }
    for prefix in ["a", "b"] {
        for i in 1..=d {
            cols.push(format!("{prefix}{i}p"));
        }
    }
    out.push_str(&cols.join(","));
    out.push('\n');
    for i in 0..grid.len() {
        let mut row = vec![format_float(grid.z[i])];
        let b = grid.b_at(i);
        for j in 0..d {
            row.push(format_float(grid.a_vals[i][j]));
        }
        for j in 0..d {
            row.push(format_float(b[j]));
        }
        for j in 0..d {
            row.push(format_float(grid.a_prime[i][j]));
        }
        for j in 0..d {
            row.push(format_float(grid.b_prime[i][j]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// JSON record of a contour computation, mirroring the sweep-table columns.
#[allow(clippy::too_many_arguments)]
pub fn contour_report_json(
    model: &str,
    alpha: &[f64],
    s: f64,
    l_scaled: f64,
    report: &ContourReport,
    verdict: &Verdict,
) -> serde_json::Value {
    json!({
        "model": model,
        "alpha": alpha,
        "s": s,
        "R": report.spec.radius,
        "n_points": report.samples.len().saturating_sub(1),
        "max_rel_step": report.max_rel_step,
        "L": l_scaled,
        "winding": report.winding,
        "verdict": verdict.label(),
    })
}

/// Minimal deterministic SVG canvas: fixed viewport, polylines and circles
/// drawn in insertion order, coordinates rounded to 1e-4.
pub struct SvgCanvas {
    width: f64,
    height: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    body: String,
}

impl SvgCanvas {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        SvgCanvas { width: 640.0, height: 480.0, x_min, x_max, y_min, y_max, body: String::new() }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let pad = 20.0;
        let sx = (self.width - 2.0 * pad) / (self.x_max - self.x_min);
        let sy = (self.height - 2.0 * pad) / (self.y_max - self.y_min);
        (pad + (x - self.x_min) * sx, self.height - pad - (y - self.y_min) * sy)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut path = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = self.map(x, y);
            let _ = write!(path, "{}{px:.4},{py:.4}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" points=\"{path}\"/>"
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, color: &str, filled: bool) {
        let (px, py) = self.map(x, y);
        let fill = if filled { color } else { "none" };
        let _ = writeln!(
            self.body,
            "<circle cx=\"{px:.4}\" cy=\"{py:.4}\" r=\"{r}\" fill=\"{fill}\" stroke=\"{color}\"/>"
        );
    }

    pub fn axes(&mut self) {
        if self.x_min < 0.0 && self.x_max > 0.0 {
            let pts = [(0.0, self.y_min), (0.0, self.y_max)];
            self.polyline(&pts, "#bbbbbb", 0.5);
        }
        if self.y_min < 0.0 && self.y_max > 0.0 {
            let pts = [(self.x_min, 0.0), (self.x_max, 0.0)];
            self.polyline(&pts, "#bbbbbb", 0.5);
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Phase portrait figure: trajectories, equilibria, feasibility boundary,
/// and the elliptic (hyperbolicity-loss) region outline.
pub fn phase_portrait_svg(portrait: &PhasePortrait) -> String {
    let w = portrait.window;
    let mut canvas = SvgCanvas::new(w.x_min, w.x_max, w.y_min, w.y_max);
    canvas.axes();
    if portrait.feasibility_boundary && w.y_min < 0.0 && w.y_max > 0.0 {
        canvas.polyline(&[(w.x_min, 0.0), (w.x_max, 0.0)], "#333333", 1.2);
    }
    if let Some(boundary) = &portrait.elliptic_boundary {
        canvas.polyline(boundary, "#cc8800", 0.8);
    }
    for traj in &portrait.trajectories {
        canvas.polyline(traj, "#3366cc", 0.7);
    }
    for (e, _) in &portrait.equilibria {
        canvas.circle(e[0], e[1], 3.5, "#cc0000", true);
    }
    canvas.finish()
}

/// Image of the contour under the Evans function, normalized by the largest
/// modulus (the winding around the origin is what the figure shows).
pub fn evans_image_svg(report: &ContourReport) -> String {
    let scale = report
        .samples
        .iter()
        .map(|s| s.value.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let pts: Vec<(f64, f64)> = report
        .samples
        .iter()
        .map(|s| (s.value.re / scale, s.value.im / scale))
        .collect();
    let mut canvas = SvgCanvas::new(-1.1, 1.1, -1.1, 1.1);
    canvas.axes();
    canvas.circle(0.0, 0.0, 2.5, "#cc0000", true);
    canvas.polyline(&pts, "#3366cc", 1.0);
    canvas.finish()
}

/// Profile figure: strain and reconstructed velocity components against z.
pub fn profile_svg(grid: &ProfileGrid) -> String {
    let d = grid.alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        for j in 0..d {
            lo = lo.min(grid.a_vals[i][j]).min(grid.b_at(i)[j]);
            hi = hi.max(grid.a_vals[i][j]).max(grid.b_at(i)[j]);
        }
    }
    let pad = 0.1 * (hi - lo).max(1e-6);
    let mut canvas = SvgCanvas::new(-grid.half_domain, grid.half_domain, lo - pad, hi + pad);
    canvas.axes();
    let colors = ["#3366cc", "#cc0000", "#22aa55"];
    for j in 0..d {
        let pts: Vec<(f64, f64)> =
            grid.z.iter().zip(&grid.a_vals).map(|(z, a)| (*z, a[j])).collect();
        canvas.polyline(&pts, colors[j % colors.len()], 1.2);
        let bpts: Vec<(f64, f64)> =
            (0..grid.len()).map(|i| (grid.z[i], grid.b_at(i)[j])).collect();
        canvas.polyline(&bpts, colors[j % colors.len()], 0.6);
    }
    canvas.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::shock_type;
    use crate::model::{ElasticPotential, ModelVariant};
    use crate::profile::{compute_profile, phase_portrait, PhiPotential, ProfileOptions, Window};
    use nalgebra::DVector;

    fn fig3_grid() -> ProfileGrid {
        let w0 = ElasticPotential::w0();
        let v2 = |x: f64, y: f64| DVector::from_vec(vec![x, y]);
        let cand = shock_type(&v2(1.0, 0.0), &v2(0.8, 0.0), 3.44f64.sqrt(), &w0,
            ModelVariant::Shear2D).unwrap();
        compute_profile(&cand, &w0, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -3.25e-17, 1.8547, std::f64::consts::PI, 1e300] {
            let parsed: f64 = format_float(x).parse().unwrap();
            assert_eq!(parsed, x);
        }
    }

    #[test]
    fn profile_csv_schema_and_parse() {
        let grid = fig3_grid();
        let csv = profile_csv(&grid);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "z,a1,a2,b1,b2,a1p,a2p,b1p,b2p");
        let first: Vec<f64> =
            lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[0], grid.z[0]);
        assert_eq!(first[1], grid.a_vals[0][0]);
        assert_eq!(csv.lines().count(), grid.len() + 1);
    }

    #[test]
    fn svg_emission_is_deterministic() {
        let w0 = ElasticPotential::w0();
        let p = PhiPotential::new(DVector::from_vec(vec![1.0, 0.0]), 2.75, w0,
            ModelVariant::Shear2D).unwrap();
        let window = Window { x_min: -3.0, x_max: 3.0, y_min: -2.0, y_max: 2.0 };
        let portrait = phase_portrait(&p, window, 8).unwrap();
        let svg1 = phase_portrait_svg(&portrait);
        let svg2 = phase_portrait_svg(&portrait);
        assert_eq!(svg1, svg2);
        assert!(svg1.starts_with("<svg"));
        assert!(svg1.contains("circle"));
    }

    #[test]
    fn empty_trajectories_give_axes_only_svg() {
        let w0 = ElasticPotential::w0();
        let p = PhiPotential::new(DVector::from_vec(vec![1.0, 0.0]), 2.75, w0,
            ModelVariant::Shear2D).unwrap();
        let window = Window { x_min: -3.0, x_max: 3.0, y_min: -2.0, y_max: 2.0 };
        let portrait = phase_portrait(&p, window, 0).unwrap();
        let svg = phase_portrait_svg(&portrait);
        assert!(!svg.contains("stroke=\"#3366cc\""), "no trajectories expected");
    }
}
