//! Semicircular contours for the winding-number stability test: mesh
//! construction with quadratic grading near the origin, asymptotic-fit
//! radius selection, adaptive argument tracking, and the final verdict.

use crate::equilibria::{ShockCandidate, ShockClass};
use crate::error::{CoreError, Result};
use crate::evans::EvansEvaluator;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

/// Geometry and refinement parameters of the semicircular contour
/// `boundary of (B(0, R) intersect { Re lambda >= 0 })`, indented at the
/// origin with radius `min_modulus`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    /// Initial number of mesh points along the closed traversal.
    pub n_init: usize,
    /// Relative-change cap per step after refinement.
    pub max_step_change: f64,
    /// Radius of the origin indentation.
    pub min_modulus: f64,
    /// Quadratic grading of moduli on the imaginary-axis legs.
    pub quadratic_mesh: bool,
    /// Bulge the indentation into the left half plane so the origin lies
    /// inside the contour (used for undercompressive verdicts).
    pub enclose_origin: bool,
}

impl ContourSpec {
    pub fn new(radius: f64) -> Self {
        ContourSpec {
            radius,
            n_init: 20,
            max_step_change: 0.2,
            min_modulus: 1e-4,
            quadratic_mesh: true,
            enclose_origin: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.radius <= self.min_modulus {
            return Err(CoreError::contract("contour: radius must exceed min_modulus"));
        }
        if self.n_init < 8 {
            return Err(CoreError::contract("contour: n_init must be at least 8"));
        }
        Ok(())
    }
}

/// The contour as a map from a global parameter `tau` in `[0, 4)`:
/// indentation arc, descending axis leg, main arc through `+R`, ascending
/// axis leg. The traversal runs counterclockwise around the enclosed region,
/// starting at `i * min_modulus`.
#[derive(Debug, Clone)]
pub struct ContourPath {
    radius: f64,
    min_modulus: f64,
    quadratic: bool,
    enclose_origin: bool,
}

impl ContourPath {
    pub fn new(spec: &ContourSpec) -> Self {
        ContourPath {
            radius: spec.radius,
            min_modulus: spec.min_modulus,
            quadratic: spec.quadratic_mesh,
            enclose_origin: spec.enclose_origin,
        }
    }

    /// Point on the contour at global parameter `tau` in `[0, 4]`.
    pub fn point(&self, tau: f64) -> C64 {
        let seg = (tau.floor() as usize).min(3);
        let u = tau - seg as f64;
        let (m, r) = (self.min_modulus, self.radius);
        let grade = |u: f64| if self.quadratic { u * u } else { u };
        match seg {
            0 => {
                // indentation from +im to -im, around the right (or around
                // the left, enclosing the origin)
                let theta = if self.enclose_origin {
                    std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * u
                } else {
                    std::f64::consts::FRAC_PI_2 - std::f64::consts::PI * u
                };
                C64::from_polar(m, theta)
            }
            1 => {
                let rho = m + (r - m) * grade(u);
                C64::new(0.0, -rho)
            }
            2 => {
                let theta = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * u;
                C64::from_polar(r, theta)
            }
            _ => {
                let rho = m + (r - m) * grade(1.0 - u);
                C64::new(0.0, rho)
            }
        }
    }

    /// Closed mesh of `n` points (the first point is duplicated at the end).
    /// The point set is symmetric under complex conjugation.
    pub fn mesh(&self, n: usize) -> Vec<(f64, C64)> {
        let n_arc = ((n as f64 * 0.45).round() as usize).max(5);
        let n_axis = ((n as f64 * 0.2).round() as usize).max(3);
        let n_indent = n.saturating_sub(n_arc + 2 * n_axis).max(3);
        let mut taus = Vec::with_capacity(n + 1);
        for j in 0..n_indent {
            taus.push(j as f64 / n_indent as f64);
        }
        for j in 0..n_axis {
            taus.push(1.0 + j as f64 / n_axis as f64);
        }
        for j in 0..n_arc {
            taus.push(2.0 + j as f64 / n_arc as f64);
        }
        for j in 0..n_axis {
            taus.push(3.0 + j as f64 / n_axis as f64);
        }
        taus.push(4.0);
        taus.into_iter().map(|t| (t, self.point(t))).collect()
    }
}

/// Builds the closed contour mesh for a spec.
pub fn mesh_contour(spec: &ContourSpec) -> Result<Vec<(f64, C64)>> {
    spec.validate()?;
    Ok(ContourPath::new(spec).mesh(spec.n_init))
}

/// One evaluated sample of the Evans function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContourSample {
    pub tau: f64,
    pub lambda: C64,
    pub value: C64,
    /// Overflow-safe log of the value.
    pub log_value: C64,
}

/// Stability verdict of a winding computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable(i64),
    Inconclusive(String),
}

impl Verdict {
    pub fn label(&self) -> String {
        match self {
            Verdict::Stable => "stable".into(),
            Verdict::Unstable(w) => format!("unstable({w})"),
            Verdict::Inconclusive(reason) => format!("inconclusive({reason})"),
        }
    }

    pub fn parse(text: &str) -> Result<Verdict> {
        if text == "stable" {
            return Ok(Verdict::Stable);
        }
        if let Some(rest) = text.strip_prefix("unstable(").and_then(|r| r.strip_suffix(')')) {
            let w: i64 = rest
                .parse()
                .map_err(|_| CoreError::contract(format!("bad verdict '{text}'")))?;
            return Ok(Verdict::Unstable(w));
        }
        if let Some(rest) = text.strip_prefix("inconclusive(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Verdict::Inconclusive(rest.to_string()));
        }
        Err(CoreError::contract(format!("bad verdict '{text}'")))
    }
}

/// Result of a winding-number computation over a closed contour.
#[derive(Debug, Clone)]
pub struct ContourReport {
    pub spec: ContourSpec,
    pub samples: Vec<ContourSample>,
    pub refinements: usize,
    pub winding: i64,
    pub max_rel_step: f64,
    pub mean_rel_step: f64,
    /// Verdict under the Lax/overcompressive reading (no roots means
    /// stable); class-specific verdicts are issued by [`verdict`].
    pub verdict: Verdict,
}

/// Anything that can evaluate the (integrated) Evans function.
pub trait DEvaluator {
    /// Returns the value and an overflow-safe complex logarithm of it.
    fn eval(&mut self, lambda: C64) -> Result<(C64, C64)>;
}

impl<'a> DEvaluator for EvansEvaluator<'a> {
    fn eval(&mut self, lambda: C64) -> Result<(C64, C64)> {
        let d = EvansEvaluator::eval(self, lambda)?;
        Ok((d.value, d.log_value))
    }
}

/// Adapter turning a closure into an evaluator (used by tests and the
/// synthetic harnesses).
pub struct ClosureEvaluator<F: FnMut(C64) -> C64>(pub F);

impl<F: FnMut(C64) -> C64> DEvaluator for ClosureEvaluator<F> {
    fn eval(&mut self, lambda: C64) -> Result<(C64, C64)> {
        let v = (self.0)(lambda);
        Ok((v, v.ln()))
    }
}

/// Relative change of a step, computed from the log values so that heavily
/// scaled Evans data cannot overflow: `|exp(dlog) - 1| / min(1, |exp(dlog)|)`.
fn rel_change(log0: C64, log1: C64) -> f64 {
    let ratio = (log1 - log0).exp();
    let change = (ratio - C64::new(1.0, 0.0)).norm();
    change / ratio.norm().min(1.0)
}

fn phase_increment(log0: C64, log1: C64) -> f64 {
    let mut d = log1.im - log0.im;
    while d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    }
    while d <= -std::f64::consts::PI {
        d += std::f64::consts::TAU;
    }
    d
}

/// Compute the winding number of the evaluator around the contour, bisecting
/// any step whose relative change exceeds `spec.max_step_change` (depth cap
/// 12 per initial segment).
pub fn winding_number(eval: &mut dyn DEvaluator, spec: &ContourSpec) -> Result<ContourReport> {
    spec.validate()?;
    let path = ContourPath::new(spec);
    let mesh = path.mesh(spec.n_init);
    let mut samples: Vec<ContourSample> = Vec::with_capacity(mesh.len() * 2);
    for (tau, lambda) in mesh {
        let (value, log_value) = eval.eval(lambda)?;
        samples.push(ContourSample { tau, lambda, value, log_value });
    }
    let mut refinements = 0usize;
    let max_new = spec.n_init * (1 << 12);
    loop {
        let mut inserted = false;
        let mut i = 0;
        while i + 1 < samples.len() {
            let rel = rel_change(samples[i].log_value, samples[i + 1].log_value);
            let gap = samples[i + 1].tau - samples[i].tau;
            if rel > spec.max_step_change && gap > 1.0 / (1 << 12) as f64 {
                let tau = 0.5 * (samples[i].tau + samples[i + 1].tau);
                let lambda = path.point(tau);
                let (value, log_value) = eval.eval(lambda)?;
                samples.insert(i + 1, ContourSample { tau, lambda, value, log_value });
                refinements += 1;
                inserted = true;
                if samples.len() > max_new {
                    break;
                }
            } else {
                i += 1;
            }
        }
        if !inserted || samples.len() > max_new {
            break;
        }
    }

    let max_log = samples.iter().map(|s| s.log_value.re).fold(f64::NEG_INFINITY, f64::max);
    let mut report = ContourReport {
        spec: spec.clone(),
        refinements,
        winding: 0,
        max_rel_step: 0.0,
        mean_rel_step: 0.0,
        verdict: Verdict::Stable,
        samples,
    };
    // vanishing is judged on the logs, which survive exponent underflow
    let floor = max_log + (1e-13f64).ln();
    if let Some(bad) =
        report.samples.iter().find(|s| !s.log_value.re.is_finite() || s.log_value.re < floor)
    {
        report.verdict =
            Verdict::Inconclusive(format!("possible root on contour at {}", bad.lambda));
        return Ok(report);
    }

    let mut total_arg = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut sum_rel = 0.0;
    let steps = report.samples.len() - 1;
    for i in 0..steps {
        let rel = rel_change(report.samples[i].log_value, report.samples[i + 1].log_value);
        max_rel = max_rel.max(rel);
        sum_rel += rel;
        total_arg +=
            phase_increment(report.samples[i].log_value, report.samples[i + 1].log_value);
    }
    report.max_rel_step = max_rel;
    report.mean_rel_step = sum_rel / steps as f64;
    if max_rel > 1.0 {
        report.verdict = Verdict::Inconclusive(format!(
            "relative step change {max_rel:.3} exceeds the Rouche bound after refinement"
        ));
        return Ok(report);
    }
    let turns = total_arg / std::f64::consts::TAU;
    let winding = turns.round() as i64;
    if (turns - winding as f64).abs() > 0.05 {
        report.verdict =
            Verdict::Inconclusive(format!("argument sum {turns:.4} turns is not an integer"));
        return Ok(report);
    }
    report.winding = winding;
    report.verdict = if winding == 0 { Verdict::Stable } else { Verdict::Unstable(winding) };
    Ok(report)
}

/// Least-squares fit of the high-frequency model
/// `log D(lambda) = log C + alpha sqrt(lambda)` on real sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub fit_log_c: f64,
    pub fit_alpha: f64,
    /// Imaginary parts of the fitted constants; zero (mod pi for the phase)
    /// when the Evans function is initialized on the real axis.
    pub phase: f64,
    pub alpha_imag: f64,
    /// Largest relative misfit on the fit samples.
    pub fit_residual: f64,
    /// Largest relative error observed on the accepted contour arc.
    pub max_rel_err_on_contour: f64,
}

impl AsymptoticFit {
    pub fn model(&self, lambda: C64) -> C64 {
        let c = C64::new(self.fit_log_c, self.phase);
        let a = C64::new(self.fit_alpha, self.alpha_imag);
        (c + a * lambda.sqrt()).exp()
    }
}

/// Fit the asymptotic model on increasing real spectral points; the complex
/// log is tracked with a continuous phase so negative real values fit too.
pub fn fit_asymptotics(eval: &mut dyn DEvaluator, lambdas: &[f64]) -> Result<AsymptoticFit> {
    if lambdas.len() < 3 {
        return Err(CoreError::FitFailure("need at least 3 fit points".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::FitFailure("fit points must be increasing".into()));
    }
    let mut logs: Vec<C64> = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let (_, logv) = eval.eval(C64::new(l, 0.0))?;
        if !logv.re.is_finite() {
            return Err(CoreError::FitFailure(format!("Evans value vanished at lambda = {l}")));
        }
        logs.push(logv);
    }
    // continuous phase along the real axis
    for i in 1..logs.len() {
        let mut im = logs[i].im;
        while im - logs[i - 1].im > std::f64::consts::PI {
            im -= std::f64::consts::TAU;
        }
        while im - logs[i - 1].im <= -std::f64::consts::PI {
            im += std::f64::consts::TAU;
        }
        logs[i].im = im;
    }
    // least squares over the basis {1, sqrt(lambda)}
    let n = lambdas.len() as f64;
    let sx: f64 = lambdas.iter().map(|l| l.sqrt()).sum();
    let sxx: f64 = lambdas.iter().sum();
    let sy: C64 = logs.iter().sum();
    let sxy: C64 = lambdas.iter().zip(&logs).map(|(l, w)| w * l.sqrt()).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(CoreError::FitFailure("degenerate fit system".into()));
    }
    let alpha = (sxy * n - sy * sx) / det;
    let logc = (sy * sxx - sxy * sx) / det;
    let mut fit = AsymptoticFit {
        fit_log_c: logc.re,
        fit_alpha: alpha.re,
        phase: logc.im,
        alpha_imag: alpha.im,
        fit_residual: 0.0,
        max_rel_err_on_contour: f64::NAN,
    };
    let mut resid: f64 = 0.0;
    for (&l, w) in lambdas.iter().zip(&logs) {
        let model = logc + alpha * l.sqrt();
        resid = resid.max(((w - model).exp() - C64::new(1.0, 0.0)).norm());
    }
    fit.fit_residual = resid;
    Ok(fit)
}

/// Choose the contour radius: starting from `r_start`, double until the
/// relative error between the Evans function and the fitted model drops
/// below `tol` everywhere on the arc `|lambda| = R`. Radii beyond 1024 are
/// refused (the high-frequency bound is then not certified).
pub fn choose_radius_with_tol(
    eval: &mut dyn DEvaluator,
    r_start: f64,
    tol: f64,
) -> Result<(f64, AsymptoticFit)> {
    let mut r = r_start;
    while r <= 1024.0 {
        // fit on a geometric ladder reaching 4R
        let lambdas: Vec<f64> = (0..6).map(|i| r * 4.0f64.powf(i as f64 / 5.0)).collect();
        let mut fit = fit_asymptotics(eval, &lambdas)?;
        let mut worst: f64 = 0.0;
        let n_probe = 9;
        let log_c = C64::new(fit.fit_log_c, fit.phase);
        let alpha = C64::new(fit.fit_alpha, fit.alpha_imag);
        for i in 0..n_probe {
            let theta = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (i as f64) / (n_probe - 1) as f64;
            let lambda = C64::from_polar(r, theta);
            let (_, logv) = eval.eval(lambda)?;
            if !logv.re.is_finite() {
                worst = f64::INFINITY;
                break;
            }
            // |D - M| / |M| computed from the logs, underflow safe
            let model_log = log_c + alpha * lambda.sqrt();
            worst = worst.max(((logv - model_log).exp() - C64::new(1.0, 0.0)).norm());
        }
        if worst < tol {
            fit.max_rel_err_on_contour = worst;
            return Ok((r, fit));
        }
        r *= 2.0;
    }
    Err(CoreError::FitFailure(format!(
        "no radius up to 1024 met the asymptotic criterion {tol}"
    )))
}

/// [`choose_radius_with_tol`] at the standard tolerance 0.2.
pub fn choose_radius(eval: &mut dyn DEvaluator, r_start: f64) -> Result<(f64, AsymptoticFit)> {
    choose_radius_with_tol(eval, r_start, 0.2)
}

/// Final stability verdict for a shock candidate.
///
/// Lax and overcompressive shocks are stable exactly when the winding number
/// vanishes. Undercompressive candidates need an origin-enclosing report and
/// are stable when the winding equals `1 + |ell_tilde|` (the forced root at
/// the origin); confirming the root location requires agreement between two
/// indentation radii, see [`verdict_undercompressive`].
pub fn verdict(report: &ContourReport, cand: &ShockCandidate) -> Verdict {
    if let Verdict::Inconclusive(r) = &report.verdict {
        return Verdict::Inconclusive(r.clone());
    }
    match cand.shock_class {
        ShockClass::Lax | ShockClass::Overcompressive => {
            if report.winding == 0 {
                Verdict::Stable
            } else {
                Verdict::Unstable(report.winding)
            }
        }
        ShockClass::Undercompressive => {
            if !report.spec.enclose_origin {
                return Verdict::Inconclusive(
                    "undercompressive verdicts need an origin-enclosing contour".into(),
                );
            }
            let expected = 1 + cand.ell_tilde.unsigned_abs() as i64;
            if report.winding == expected {
                Verdict::Stable
            } else {
                Verdict::Unstable(report.winding - expected)
            }
        }
        ShockClass::Degenerate => {
            Verdict::Inconclusive("degenerate (characteristic or nonhyperbolic) shock".into())
        }
    }
}

/// Undercompressive verdict from two indentation radii: both windings must
/// agree (locating every counted root inside the smaller indentation, i.e.
/// at the origin) and equal `1 + |ell_tilde|`.
pub fn verdict_undercompressive(
    eval: &mut dyn DEvaluator,
    spec: &ContourSpec,
    cand: &ShockCandidate,
) -> Result<(Verdict, ContourReport)> {
    let mut spec_small = spec.clone();
    spec_small.enclose_origin = true;
    let mut spec_large = spec_small.clone();
    spec_large.min_modulus = spec.min_modulus * 10.0;
    let small = winding_number(eval, &spec_small)?;
    let large = winding_number(eval, &spec_large)?;
    if small.winding != large.winding {
        let v = Verdict::Inconclusive(format!(
            "winding changed with indentation radius: {} vs {}",
            small.winding, large.winding
        ));
        return Ok((v, small));
    }
    Ok((verdict(&small, cand), small))
}
