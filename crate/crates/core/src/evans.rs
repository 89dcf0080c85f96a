//! The first-order Evans systems of the integrated eigenvalue problem,
//! analytic basis transport in the spectral parameter (Kato's ODE), and the
//! polar-coordinate (continuous orthogonalization) integration across the
//! profile that evaluates the integrated Evans function.
//!
//! The matrices are assembled generically from the strain Hessian `M(a)` and
//! the viscous weights, so one code path covers every variant; the canonical
//! closed-form matrices serve as test oracles.

use crate::error::{CoreError, Result};
use crate::linalg::{
    invariant_half_space, left_half_space, log_det_upper, qr_positive, spectral_projector,
    HalfSpace,
};
use crate::model::{hess_potential, ElasticPotential, ModelVariant};
use crate::ode::{integrate, OdeOptions, StepControl};
use crate::profile::{PhiPotential, ProfileGrid};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;

/// Which spatial infinity a frame or basis belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// The first-order Evans system `Z' = A(z, lambda) Z` along a profile.
#[derive(Debug, Clone)]
pub struct EvansSystem<'a> {
    pub variant: ModelVariant,
    pub grid: &'a ProfileGrid,
    pub pot: &'a ElasticPotential,
    pub s: f64,
    pub n: usize,
    phi: PhiPotential,
}

impl<'a> EvansSystem<'a> {
    pub fn new(
        variant: ModelVariant,
        grid: &'a ProfileGrid,
        pot: &'a ElasticPotential,
    ) -> Result<Self> {
        if grid.variant != variant.profile_variant() {
            return Err(CoreError::contract(format!(
                "assemble_evans: grid holds a {} profile, variant {} rides on {}",
                grid.variant.name(),
                variant.name(),
                variant.profile_variant().name()
            )));
        }
        if grid.s == 0.0 {
            return Err(CoreError::contract("assemble_evans: s must be nonzero"));
        }
        if let Some(i) = grid.variant.axial_index() {
            if grid.a_vals.iter().any(|a| a[i] <= 0.0) {
                return Err(CoreError::domain(
                    "assemble_evans: profile leaves the feasible region a3 > 0",
                ));
            }
        }
        let phi = PhiPotential::new(
            if grid.s > 0.0 { grid.alpha.clone() } else { grid.a_plus.clone() },
            grid.s * grid.s,
            *pot,
            grid.variant,
        )?;
        Ok(EvansSystem { variant, grid, pot, s: grid.s, n: variant.evans_dim(), phi })
    }

    /// Evaluate `A(z, lambda)`; outside `[-L, L]` the endstate matrices are
    /// used (the grid clamps to the endstates there).
    pub fn matrix(&self, z: f64, lambda: C64) -> DMatrix<C64> {
        let a = self.grid.interpolate(z);
        let bp = if z.abs() >= self.grid.half_domain {
            DVector::zeros(a.len())
        } else {
            // along the profile b' = -s a'(z) is an explicit function of a
            -self.phi.flow_rhs(&a)
        };
        self.assemble(&a, &bp, lambda)
    }

    /// Constant-coefficient matrix with the profile replaced by an endstate.
    pub fn limit_matrix(&self, side: Side, lambda: C64) -> DMatrix<C64> {
        let a = match side {
            Side::Plus => self.grid.a_plus.clone(),
            Side::Minus => self.grid.alpha.clone(),
        };
        self.assemble(&a, &DVector::zeros(a.len()), lambda)
    }

    /// Assemble the Evans matrix at strain `a` with background velocity
    /// gradient `bp`.
    fn assemble(&self, a: &DVector<f64>, bp: &DVector<f64>, lambda: C64) -> DMatrix<C64> {
        let s = self.s;
        let l = lambda;
        match self.variant {
            ModelVariant::Shear2D | ModelVariant::Shear1D => {
                // per-component blocks Z_j = (a_j, b_j, b_j'):
                //   a_j' = (lambda a_j - b_j') / s
                //   b_j'' = lambda b_j - s b_j' - sum_k M_jk (lambda a_k - b_k') / s
                let m = hess_potential(a, self.pot, self.variant).unwrap();
                let d = a.len();
                let mut out = DMatrix::<C64>::zeros(3 * d, 3 * d);
                for j in 0..d {
                    out[(3 * j, 3 * j)] = l / s;
                    out[(3 * j, 3 * j + 2)] = C64::new(-1.0 / s, 0.0);
                    out[(3 * j + 1, 3 * j + 2)] = C64::new(1.0, 0.0);
                    out[(3 * j + 2, 3 * j + 1)] = l;
                    out[(3 * j + 2, 3 * j + 2)] += C64::new(-s, 0.0);
                    for k in 0..d {
                        out[(3 * j + 2, 3 * k)] += -l * (m[(j, k)] / s);
                        out[(3 * j + 2, 3 * k + 2)] += C64::new(m[(j, k)] / s, 0.0);
                    }
                }
                out
            }
            ModelVariant::Transverse => {
                // Z = (b_1, a_1, a_1') riding on an in-plane profile
                let y = a.norm_squared();
                let a3 = a[1];
                let m11 = self.pot.transverse_factor(y);
                let mut out = DMatrix::<C64>::zeros(3, 3);
                out[(0, 1)] = l;
                out[(0, 2)] = C64::new(-s, 0.0);
                out[(1, 2)] = C64::new(1.0, 0.0);
                out[(2, 0)] = -l * (a3 / s);
                out[(2, 1)] = l * a3;
                out[(2, 2)] = (l + C64::new(a3 * (m11 - s * s), 0.0)) / s;
                out
            }
            ModelVariant::Compressible3D
            | ModelVariant::Compressible2D
            | ModelVariant::Compressible1D => {
                // per-component blocks Z_j = (b_j, a_j, a_j'):
                //   b_j' = lambda a_j - s a_j'
                //   a_j'' = lambda a_j'/s - (a3 / (d_j s)) [lambda b_j
                //           - s lambda a_j + s^2 a_j' - (M a')_j
                //           + d_j a_3' bbar_j' / a3^2]
                let m = hess_potential(a, self.pot, self.variant).unwrap();
                let weights = self.variant.profile_scaling();
                let axial = self.variant.axial_index().unwrap();
                let a3 = a[axial];
                let d = a.len();
                let mut out = DMatrix::<C64>::zeros(3 * d, 3 * d);
                for j in 0..d {
                    let dj = weights[j];
                    out[(3 * j, 3 * j + 1)] = l;
                    out[(3 * j, 3 * j + 2)] = C64::new(-s, 0.0);
                    out[(3 * j + 1, 3 * j + 2)] = C64::new(1.0, 0.0);
                    let row = 3 * j + 2;
                    out[(row, 3 * j)] = -l * (a3 / (dj * s));
                    out[(row, 3 * j + 1)] = l * (a3 / dj);
                    out[(row, 3 * j + 2)] = l / s + C64::new(-a3 * s / dj, 0.0);
                    for k in 0..d {
                        out[(row, 3 * k + 2)] += C64::new(a3 * m[(j, k)] / (dj * s), 0.0);
                    }
                    out[(row, 3 * axial + 2)] += C64::new(-bp[j] / (s * a3), 0.0);
                }
                out
            }
        }
    }
}

/// Orthonormal frame plus log-radius of the polar decomposition of a wedge.
#[derive(Debug, Clone)]
pub struct SubspaceFrame {
    /// n-by-k with orthonormal columns.
    pub omega: DMatrix<C64>,
    /// Complex log of the scalar radius factor.
    pub log_r: C64,
    pub side: Side,
    pub k: usize,
    /// Number of re-orthonormalization corrections applied.
    pub corrections: usize,
    /// Largest orthonormality drift observed before correction.
    pub max_drift: f64,
}

/// Analytically transported bases and projectors at one spectral point.
#[derive(Debug, Clone)]
pub struct AnalyticBasisState {
    pub lambda: C64,
    pub basis_plus: DMatrix<C64>,
    pub basis_minus: DMatrix<C64>,
    pub projector_plus: DMatrix<C64>,
    pub projector_minus: DMatrix<C64>,
}

/// Orthonormal basis of the relevant invariant subspace of a limit matrix:
/// stable for `Side::Plus`, unstable for `Side::Minus`. The dimension is
/// counted from the eigenvalues; one within 1e-8 of the imaginary axis is a
/// splitting degeneracy.
pub fn spectral_split(a_limit: &DMatrix<C64>, side: Side) -> Result<(DMatrix<C64>, usize)> {
    let half = match side {
        Side::Plus => HalfSpace::Negative,
        Side::Minus => HalfSpace::Positive,
    };
    let b = invariant_half_space(a_limit, half, None, 1e-8)?;
    let dim = b.basis.ncols();
    Ok((b.basis, dim))
}

/// Spectral projectors `P = R (L R)^{-1} L` onto the stable subspace of
/// `A_+` and the unstable subspace of `A_-`, at fixed dimensions.
pub fn projector_pair(
    sys: &EvansSystem,
    lambda: C64,
    k_plus: usize,
    k_minus: usize,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let build = |a: &DMatrix<C64>, half: HalfSpace, k: usize| -> Result<DMatrix<C64>> {
        let r = invariant_half_space(a, half, Some(k), 0.0)?.basis;
        let l = left_half_space(a, half, k)?;
        spectral_projector(&r, &l)
    };
    let ap = sys.limit_matrix(Side::Plus, lambda);
    let am = sys.limit_matrix(Side::Minus, lambda);
    let p_plus = build(&ap, HalfSpace::Negative, k_plus).map_err(|e| at_lambda(e, lambda))?;
    let p_minus = build(&am, HalfSpace::Positive, k_minus).map_err(|e| at_lambda(e, lambda))?;
    Ok((p_plus, p_minus))
}

fn at_lambda(e: CoreError, lambda: C64) -> CoreError {
    match e {
        CoreError::SplittingDegenerate { detail, .. } => {
            CoreError::SplittingDegenerate { lambda, detail }
        }
        other => other,
    }
}

/// Real orthonormal basis spanning a conjugation-closed complex subspace.
fn realify_basis(q: &DMatrix<C64>) -> DMatrix<C64> {
    let n = q.nrows();
    let k = q.ncols();
    let mut raw: Vec<DVector<f64>> = Vec::with_capacity(2 * k);
    for j in 0..k {
        raw.push(DVector::from_fn(n, |i, _| q[(i, j)].re));
        raw.push(DVector::from_fn(n, |i, _| q[(i, j)].im));
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    for mut v in raw {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / nrm);
            if basis.len() == k {
                break;
            }
        }
    }
    if basis.len() < k {
        return q.clone(); // not conjugation-closed; keep the complex basis
    }
    DMatrix::from_fn(n, k, |i, j| C64::new(basis[j][i], 0.0))
}

/// Splitting dimensions and the initial analytic basis at a real anchor
/// point (the bases are made real so that conjugate symmetry of the Evans
/// function holds).
pub fn anchor_basis(sys: &EvansSystem, lambda0: f64) -> Result<AnalyticBasisState> {
    let lambda = C64::new(lambda0, 0.0);
    let ap = sys.limit_matrix(Side::Plus, lambda);
    let am = sys.limit_matrix(Side::Minus, lambda);
    let (bp, kp) = spectral_split(&ap, Side::Plus).map_err(|e| at_lambda(e, lambda))?;
    let (bm, km) = spectral_split(&am, Side::Minus).map_err(|e| at_lambda(e, lambda))?;
    if kp + km != sys.n {
        return Err(CoreError::SplittingDegenerate {
            lambda,
            detail: format!("inconsistent splitting: {kp} + {km} != {}", sys.n),
        });
    }
    let basis_plus = realify_basis(&bp);
    let basis_minus = realify_basis(&bm);
    let lp = left_half_space(&ap, HalfSpace::Negative, kp)?;
    let lm = left_half_space(&am, HalfSpace::Positive, km)?;
    let projector_plus = spectral_projector(&basis_plus, &lp)?;
    let projector_minus = spectral_projector(&basis_minus, &lm)?;
    Ok(AnalyticBasisState { lambda, basis_plus, basis_minus, projector_plus, projector_minus })
}

/// One second-order discrete Kato step: midpoint approximation of the
/// transport generator `P' P - P P'`, exponentiated to second order, with
/// the result projected back onto the range of the new projector.
fn kato_step(z: &DMatrix<C64>, p0: &DMatrix<C64>, p1: &DMatrix<C64>) -> DMatrix<C64> {
    let dp = p1 - p0;
    let pbar = (p0 + p1) * C64::new(0.5, 0.0);
    let q = &dp * &pbar - &pbar * &dp;
    let n = p0.nrows();
    let t = DMatrix::<C64>::identity(n, n) + &q + &q * &q * C64::new(0.5, 0.0);
    p1 * (t * z)
}

/// Transport an analytic basis state along a path of spectral points.
///
/// Steps where either projector changes by more than 0.2 in norm are
/// bisected, to a depth of 12.
pub fn kato_transport<F>(
    start: &AnalyticBasisState,
    path: &[C64],
    mut projectors: F,
) -> Result<Vec<AnalyticBasisState>>
where
    F: FnMut(C64) -> Result<(DMatrix<C64>, DMatrix<C64>)>,
{
    let mut out = Vec::with_capacity(path.len());
    let mut current = start.clone();
    for &target in path {
        current = transport_one(&current, target, &mut projectors, 0)?;
        out.push(current.clone());
    }
    Ok(out)
}

fn transport_one<F>(
    state: &AnalyticBasisState,
    target: C64,
    projectors: &mut F,
    depth: usize,
) -> Result<AnalyticBasisState>
where
    F: FnMut(C64) -> Result<(DMatrix<C64>, DMatrix<C64>)>,
{
    if (target - state.lambda).norm() == 0.0 {
        return Ok(state.clone());
    }
    let (p_plus, p_minus) = projectors(target)?;
    let jump = (&p_plus - &state.projector_plus)
        .norm()
        .max((&p_minus - &state.projector_minus).norm());
    if jump > 0.2 && depth < 12 {
        let mid = (state.lambda + target) * C64::new(0.5, 0.0);
        let half = transport_one(state, mid, projectors, depth + 1)?;
        return transport_one(&half, target, projectors, depth + 1);
    }
    Ok(AnalyticBasisState {
        lambda: target,
        basis_plus: kato_step(&state.basis_plus, &state.projector_plus, &p_plus),
        basis_minus: kato_step(&state.basis_minus, &state.projector_minus, &p_minus),
        projector_plus: p_plus,
        projector_minus: p_minus,
    })
}

/// Initialize a polar frame at `z = +-L` from an analytic basis: the frame
/// is the orthonormalization of the basis, and the log-radius carries the
/// trace exponent of the limit matrix restricted to the tracked subspace.
pub fn initialize_at_infinity(
    sys: &EvansSystem,
    basis: &DMatrix<C64>,
    side: Side,
    l: f64,
    lambda: C64,
) -> Result<SubspaceFrame> {
    let (omega, r) = qr_positive(basis);
    let k = omega.ncols();
    let a_lim = sys.limit_matrix(side, lambda);
    // trace of the restriction in the (invariant) basis: tr((B*B)^{-1} B* A B)
    let bb = basis.adjoint() * basis;
    let bab = basis.adjoint() * &a_lim * basis;
    let restricted = bb
        .lu()
        .solve(&bab)
        .ok_or_else(|| CoreError::contract("initialize_at_infinity: basis is rank deficient"))?;
    let trace: C64 = (0..k).map(|i| restricted[(i, i)]).sum();
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    Ok(SubspaceFrame {
        omega,
        log_r: trace * C64::new(sign * l, 0.0) + log_det_upper(&r),
        side,
        k,
        corrections: 0,
        max_drift: 0.0,
    })
}

/// Options for the polar-coordinate integration.
#[derive(Debug, Clone)]
pub struct DruryOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Orthonormality drift that triggers a re-orthonormalization.
    pub ortho_tol: f64,
    /// Interior matching point where the two frames meet.
    pub match_z: f64,
}

impl Default for DruryOptions {
    fn default() -> Self {
        DruryOptions { abs_tol: 1e-8, rel_tol: 1e-6, ortho_tol: 1e-8, match_z: 0.0 }
    }
}

fn pack(omega: &DMatrix<C64>, log_r: C64) -> DVector<C64> {
    let (n, k) = omega.shape();
    let mut v = DVector::zeros(n * k + 1);
    for j in 0..k {
        for i in 0..n {
            v[j * n + i] = omega[(i, j)];
        }
    }
    v[n * k] = log_r;
    v
}

fn unpack(v: &DVector<C64>, n: usize, k: usize) -> (DMatrix<C64>, C64) {
    let omega = DMatrix::from_fn(n, k, |i, j| v[j * n + i]);
    (omega, v[n * k])
}

/// Integrate the polar-coordinate system `Omega' = (I - Omega Omega*) A
/// Omega`, `(log r)' = tr(Omega* A Omega)` from `from_z` to `to_z`,
/// re-orthonormalizing whenever the drift exceeds `opts.ortho_tol` and
/// folding the correction determinant into the radius.
pub fn drury_integrate(
    sys: &EvansSystem,
    frame: &SubspaceFrame,
    lambda: C64,
    from_z: f64,
    to_z: f64,
    opts: &DruryOptions,
) -> Result<SubspaceFrame> {
    let n = sys.n;
    let k = frame.k;
    let y0 = pack(&frame.omega, frame.log_r);
    let mut corrections = frame.corrections;
    let mut max_drift = frame.max_drift;
    let rhs = |z: f64, y: &DVector<C64>| -> DVector<C64> {
        let (omega, _) = unpack(y, n, k);
        let a = sys.matrix(z, lambda);
        let aw = &a * &omega;
        let gram = omega.adjoint() * &aw;
        let dw = &aw - &omega * &gram;
        let trace: C64 = (0..k).map(|i| gram[(i, i)]).sum();
        let mut out = pack(&dw, trace);
        out[n * k] = trace;
        out
    };
    let ode_opts = OdeOptions {
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
        max_step: f64::INFINITY,
        max_steps: 2_000_000,
    };
    let (_, yf) = integrate(rhs, from_z, to_z, y0, &ode_opts, |_, y, _| {
        let (omega, log_r) = unpack(y, n, k);
        let drift = (omega.adjoint() * &omega - DMatrix::<C64>::identity(k, k)).norm();
        max_drift = max_drift.max(drift);
        if drift > opts.ortho_tol {
            let (q, r) = qr_positive(&omega);
            let corrected = pack(&q, log_r + log_det_upper(&r));
            y.copy_from(&corrected);
            corrections += 1;
            StepControl::ContinueMutated
        } else {
            StepControl::Continue
        }
    })
    .map_err(|e| match e {
        CoreError::StiffFailure { t } => CoreError::StiffFailure { t },
        other => other,
    })?;
    let (omega, log_r) = unpack(&yf, n, k);
    Ok(SubspaceFrame { omega, log_r, side: frame.side, k, corrections, max_drift })
}

/// The value of the integrated Evans function at one spectral point.
#[derive(Debug, Clone, Copy)]
pub struct DValue {
    pub value: C64,
    /// `log_r+ + log_r- + log det [Omega+ | Omega-]`, safe against overflow.
    pub log_value: C64,
    pub max_drift: f64,
    pub corrections: usize,
}

/// Evaluate the integrated Evans function
/// `D(lambda) = r+ r- det[Omega+(z0) | Omega-(z0)]` from a transported
/// analytic basis state.
pub fn evaluate_d(
    sys: &EvansSystem,
    state: &AnalyticBasisState,
    opts: &DruryOptions,
) -> Result<DValue> {
    let l = sys.grid.half_domain;
    let lambda = state.lambda;
    let f_plus = initialize_at_infinity(sys, &state.basis_plus, Side::Plus, l, lambda)?;
    let f_minus = initialize_at_infinity(sys, &state.basis_minus, Side::Minus, l, lambda)?;
    if f_plus.k + f_minus.k != sys.n {
        return Err(CoreError::SplittingDegenerate {
            lambda,
            detail: format!("frame dimensions {} + {} != {}", f_plus.k, f_minus.k, sys.n),
        });
    }
    let g_plus = drury_integrate(sys, &f_plus, lambda, l, opts.match_z, opts)?;
    let g_minus = drury_integrate(sys, &f_minus, lambda, -l, opts.match_z, opts)?;
    let mut joint = DMatrix::<C64>::zeros(sys.n, sys.n);
    joint.columns_mut(0, g_plus.k).copy_from(&g_plus.omega);
    joint.columns_mut(g_plus.k, g_minus.k).copy_from(&g_minus.omega);
    let det = joint.determinant();
    let log_r = g_plus.log_r + g_minus.log_r;
    Ok(DValue {
        value: log_r.exp() * det,
        log_value: log_r + det.ln(),
        max_drift: g_plus.max_drift.max(g_minus.max_drift),
        corrections: g_plus.corrections + g_minus.corrections,
    })
}

/// Stateful Evans-function evaluator: caches Kato-transported basis states
/// and continues from the nearest cached spectral point on each call.
pub struct EvansEvaluator<'a> {
    pub sys: EvansSystem<'a>,
    pub k_plus: usize,
    pub k_minus: usize,
    pub opts: DruryOptions,
    cache: Vec<AnalyticBasisState>,
}

impl<'a> EvansEvaluator<'a> {
    /// Anchor the analytic bases at the reference point `lambda0` (real); the
    /// splitting dimensions found there are held fixed afterwards.
    pub fn new(sys: EvansSystem<'a>, lambda0: f64, opts: DruryOptions) -> Result<Self> {
        let anchor = anchor_basis(&sys, lambda0)?;
        let k_plus = anchor.basis_plus.ncols();
        let k_minus = anchor.basis_minus.ncols();
        Ok(EvansEvaluator { sys, k_plus, k_minus, opts, cache: vec![anchor] })
    }

    /// Analytic basis at `lambda`, transported from the anchor along the
    /// straight segment (adaptively substepped). Anchoring every transport
    /// at the same real point keeps conjugate spectral points on exactly
    /// mirrored paths, so the conjugate symmetry of the Evans function
    /// survives discretization.
    pub fn basis_at(&mut self, lambda: C64) -> Result<AnalyticBasisState> {
        if let Some(hit) = self.cache.iter().find(|s| s.lambda == lambda) {
            return Ok(hit.clone());
        }
        let anchor = self.cache[0].clone();
        let (kp, km) = (self.k_plus, self.k_minus);
        let sys = &self.sys;
        let state = transport_one(&anchor, lambda, &mut |l| projector_pair(sys, l, kp, km), 0)?;
        if self.cache.len() > 4096 {
            self.cache.truncate(1);
        }
        self.cache.push(state.clone());
        Ok(state)
    }

    pub fn eval(&mut self, lambda: C64) -> Result<DValue> {
        let state = self.basis_at(lambda)?;
        evaluate_d(&self.sys, &state, &self.opts)
    }
}
