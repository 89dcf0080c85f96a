//! Small dense linear-algebra helpers built on nalgebra: phase-fixed complex
//! QR, Schur-based invariant subspace extraction with eigenvalue reordering,
//! spectral projectors, and companion-matrix polynomial roots.

use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;

/// Economic QR factorization `m = q * r` with the diagonal of `r` made real
/// and nonnegative, so the factorization is unique and varies continuously
/// with `m`. Returns `(q, r)` with `q` of size n-by-k.
pub fn qr_positive(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let k = m.ncols();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            // fold the phase into q so that r keeps a positive real diagonal
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
            let conj = phase.conj();
            for c in j..k {
                r[(j, c)] *= conj;
            }
        }
    }
    (q, r)
}

/// Log-determinant of an upper-triangular matrix with positive real diagonal.
pub fn log_det_upper(r: &DMatrix<C64>) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for j in 0..r.ncols().min(r.nrows()) {
        s += r[(j, j)].ln();
    }
    s
}

/// Which invariant subspace to extract from a limit matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSpace {
    /// Eigenvalues with negative real part (stable directions).
    Negative,
    /// Eigenvalues with positive real part (unstable directions).
    Positive,
}

/// Orthonormal basis of an invariant subspace together with the eigenvalues
/// it carries.
#[derive(Debug, Clone)]
pub struct InvariantBasis {
    /// n-by-k matrix with orthonormal columns spanning the subspace.
    pub basis: DMatrix<C64>,
    /// Eigenvalues associated with the subspace, sorted by real part.
    pub eigenvalues: Vec<C64>,
    /// Real-part gap between the selected block and the rest.
    pub gap: f64,
}

impl InvariantBasis {
    /// Sum of the eigenvalues carried by the subspace, i.e. the trace of the
    /// matrix restricted to it.
    pub fn trace(&self) -> C64 {
        self.eigenvalues.iter().sum()
    }
}

/// Swap the adjacent diagonal entries (j, j+1) of an upper-triangular Schur
/// factor `t` by a unitary similarity, accumulating the rotation into `q`.
fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, j: usize) {
    let a = t[(j, j)];
    let b = t[(j, j + 1)];
    let c = t[(j + 1, j + 1)];
    // eigenvector of [[a, b], [0, c]] for eigenvalue c is (b, c - a)
    let v1 = b;
    let v2 = c - a;
    let nrm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return; // equal eigenvalues with zero coupling: nothing to do
    }
    let g11 = v1 / nrm;
    let g21 = v2 / nrm;
    // unitary G = [[g11, -conj(g21)], [g21, conj(g11)]]; apply T <- G^* T G
    let n = t.nrows();
    for col in 0..n {
        let x = t[(j, col)];
        let y = t[(j + 1, col)];
        t[(j, col)] = g11.conj() * x + g21.conj() * y;
        t[(j + 1, col)] = -g21 * x + g11 * y;
    }
    for row in 0..n {
        let x = t[(row, j)];
        let y = t[(row, j + 1)];
        t[(row, j)] = x * g11 + y * g21;
        t[(row, j + 1)] = -x * g21.conj() + y * g11.conj();
    }
    for row in 0..n {
        let x = q[(row, j)];
        let y = q[(row, j + 1)];
        q[(row, j)] = x * g11 + y * g21;
        q[(row, j + 1)] = -x * g21.conj() + y * g11.conj();
    }
    t[(j + 1, j)] = C64::new(0.0, 0.0);
}

/// Complex Schur form with the eigenvalues listed in `order` moved to the
/// leading block. `order` ranks every eigenvalue; the `k` smallest ranks end
/// up in positions 0..k.
fn schur_ordered(
    a: &DMatrix<C64>,
    rank: impl Fn(C64) -> f64,
    k: usize,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let schur = a.clone().schur();
    let (mut q, mut t) = schur.unpack();
    let n = t.nrows();
    // selection sort on the diagonal, realized by adjacent swaps
    for target in 0..k {
        let mut best = target;
        let mut best_rank = rank(t[(target, target)]);
        for j in (target + 1)..n {
            let r = rank(t[(j, j)]);
            if r < best_rank {
                best = j;
                best_rank = r;
            }
        }
        for j in (target..best).rev() {
            swap_adjacent(&mut t, &mut q, j);
        }
    }
    Ok((q, t))
}

/// Extract an orthonormal basis of the invariant subspace of `a` associated
/// with eigenvalues in the requested half plane.
///
/// With `dim = None`, the dimension is determined by counting eigenvalues;
/// any eigenvalue with `|Re| < re_tol` makes the splitting degenerate. With
/// `dim = Some(k)`, the `k` eigenvalues deepest in the half plane are taken
/// regardless of sign, and only an (almost) vanishing gap between the k-th
/// and (k+1)-th real parts is treated as degenerate.
pub fn invariant_half_space(
    a: &DMatrix<C64>,
    half: HalfSpace,
    dim: Option<usize>,
    re_tol: f64,
) -> Result<InvariantBasis> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::contract("invariant_half_space: square matrix required"));
    }
    let sgn = match half {
        HalfSpace::Negative => 1.0,
        HalfSpace::Positive => -1.0,
    };
    let rank = |z: C64| sgn * z.re;
    let t_probe = a.clone().schur().unpack().1;
    let eigs_probe: Vec<C64> = (0..n).map(|i| t_probe[(i, i)]).collect();
    let mut ranks: Vec<f64> = eigs_probe.iter().map(|&z| rank(z)).collect();
    ranks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let k = match dim {
        Some(k) => {
            if k > n {
                return Err(CoreError::contract("invariant_half_space: dim exceeds size"));
            }
            k
        }
        None => {
            if let Some(z) = eigs_probe.iter().find(|z| z.re.abs() < re_tol) {
                return Err(CoreError::SplittingDegenerate {
                    lambda: C64::new(f64::NAN, f64::NAN),
                    detail: format!("eigenvalue {z} within {re_tol:.1e} of the imaginary axis"),
                });
            }
            ranks.iter().filter(|&&r| r < 0.0).count()
        }
    };
    let gap = if k == 0 || k == n {
        f64::INFINITY
    } else {
        ranks[k] - ranks[k - 1]
    };
    if dim.is_some() && gap < 1e-12 {
        return Err(CoreError::SplittingDegenerate {
            lambda: C64::new(f64::NAN, f64::NAN),
            detail: format!("half-space gap {gap:.3e} collapsed"),
        });
    }
    let (q, t) = schur_ordered(a, rank, k)?;
    let basis = q.columns(0, k).into_owned();
    let eigenvalues = (0..k).map(|i| t[(i, i)]).collect();
    Ok(InvariantBasis { basis, eigenvalues, gap })
}

/// Spectral projector onto the invariant subspace spanned by `right`, along
/// the complementary invariant subspace, built as `R (L R)^{-1} L` from
/// orthonormal right and left bases.
pub fn spectral_projector(right: &DMatrix<C64>, left_adj: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let lr = left_adj * right;
    let lr_inv = lr.clone().try_inverse().ok_or_else(|| CoreError::SplittingDegenerate {
        lambda: C64::new(f64::NAN, f64::NAN),
        detail: "L*R singular while forming spectral projector".into(),
    })?;
    Ok(right * lr_inv * left_adj)
}

/// Orthonormal left basis (returned as a k-by-n matrix `L`, rows spanning the
/// left invariant subspace) matching the half-space selection of
/// [`invariant_half_space`]. Computed from the adjoint matrix, whose
/// invariant subspace for the conjugated eigenvalues is the left subspace.
pub fn left_half_space(
    a: &DMatrix<C64>,
    half: HalfSpace,
    dim: usize,
) -> Result<DMatrix<C64>> {
    let adj = a.adjoint();
    let b = invariant_half_space(&adj, half, Some(dim), 0.0)?;
    Ok(b.basis.adjoint())
}

/// Real roots of a polynomial with real coefficients, via companion-matrix
/// eigenvalues followed by Newton polishing.
///
/// `coeffs` are ordered from the constant term upward. Roots whose imaginary
/// part exceeds `1e-8 * (1 + |root|)` are discarded; surviving roots are
/// polished with 5 Newton steps and deduplicated with tolerance 1e-7.
pub fn real_poly_roots(coeffs: &[f64]) -> Vec<f64> {
    // trim trailing (near-)zero leading coefficients
    let mut deg = coeffs.len();
    while deg > 1 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let n = deg - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eigs = m.complex_eigenvalues();
    let mut roots: Vec<f64> = Vec::new();
    for z in eigs.iter() {
        if z.im.abs() <= 1e-8 * (1.0 + z.norm()) {
            let mut x = z.re;
            for _ in 0..5 {
                let (p, dp) = horner(coeffs, x);
                if dp != 0.0 {
                    let step = p / dp;
                    if step.is_finite() {
                        x -= step;
                    }
                }
            }
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-7);
    roots
}

/// Evaluate a polynomial and its derivative at `x` (coefficients from the
/// constant term upward).
pub fn horner(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Eigenvalues of `diag(d)^{-1} h` for symmetric `h` and positive `d`,
/// computed through the symmetric similarity `d^{-1/2} h d^{-1/2}`.
pub fn scaled_symmetric_eigenvalues(h: &DMatrix<f64>, d: &DVector<f64>) -> Vec<f64> {
    let n = h.nrows();
    let mut m = h.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    let mut eigs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_matrix(n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |i, j| {
            let base = C64::new(
                ((i * 3 + j * 7) as f64 * 0.37).sin(),
                ((i as f64) - 1.3 * (j as f64)).cos() * 0.5,
            );
            if i == j {
                base + C64::new(1.1 * (i as f64) - 2.3, 0.4)
            } else {
                base
            }
        })
    }

    #[test]
    fn qr_positive_reconstructs_and_has_positive_diagonal() {
        let m = test_matrix(5).columns(0, 3).into_owned();
        let (q, r) = qr_positive(&m);
        assert_relative_eq!((&q * &r - &m).norm(), 0.0, epsilon = 1e-12);
        let id = q.adjoint() * &q;
        assert_relative_eq!((id - DMatrix::<C64>::identity(3, 3)).norm(), 0.0, epsilon = 1e-12);
        for j in 0..3 {
            assert!(r[(j, j)].re > 0.0);
            assert!(r[(j, j)].im.abs() < 1e-13);
        }
    }

    #[test]
    fn half_space_splits_diagonal_matrix() {
        let mut a = DMatrix::<C64>::zeros(3, 3);
        a[(0, 0)] = C64::new(-1.0, 0.0);
        a[(1, 1)] = C64::new(-2.0, 0.3);
        a[(2, 2)] = C64::new(3.0, -0.1);
        let s = invariant_half_space(&a, HalfSpace::Negative, None, 1e-8).unwrap();
        assert_eq!(s.basis.ncols(), 2);
        // span{e1, e2}: residual of projecting e3 out
        for col in 0..2 {
            assert!(s.basis[(2, col)].norm() < 1e-12);
        }
        assert_relative_eq!(s.trace().re, -3.0, epsilon = 1e-12);
        let u = invariant_half_space(&a, HalfSpace::Positive, None, 1e-8).unwrap();
        assert_eq!(u.basis.ncols(), 1);
        assert_relative_eq!(u.trace().re, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn half_space_is_invariant_subspace() {
        let a = test_matrix(6);
        let s = invariant_half_space(&a, HalfSpace::Negative, None, 1e-8).unwrap();
        let k = s.basis.ncols();
        // A * basis must stay inside span(basis): (I - B B^*) A B = 0
        let b = &s.basis;
        let resid = (DMatrix::<C64>::identity(6, 6) - b * b.adjoint()) * &a * b;
        assert!(resid.norm() < 1e-10, "residual {}", resid.norm());
        let u = invariant_half_space(&a, HalfSpace::Positive, None, 1e-8).unwrap();
        assert_eq!(k + u.basis.ncols(), 6);
    }

    #[test]
    fn stable_basis_of_a_matches_unstable_of_negated() {
        let a = test_matrix(5);
        let s = invariant_half_space(&a, HalfSpace::Negative, None, 1e-8).unwrap();
        let u = invariant_half_space(&(-a.clone()), HalfSpace::Positive, None, 1e-8).unwrap();
        // same span: projectors agree
        let ps = &s.basis * s.basis.adjoint();
        let pu = &u.basis * u.basis.adjoint();
        assert!((ps - pu).norm() < 1e-10);
    }

    #[test]
    fn projector_is_idempotent_and_ranges_correctly() {
        let a = test_matrix(6);
        let s = invariant_half_space(&a, HalfSpace::Negative, None, 1e-8).unwrap();
        let k = s.basis.ncols();
        let l = left_half_space(&a, HalfSpace::Negative, k).unwrap();
        let p = spectral_projector(&s.basis, &l).unwrap();
        assert!((&p * &p - &p).norm() < 1e-9);
        assert!((&p * &s.basis - &s.basis).norm() < 1e-9);
        // P commutes with A (invariant decomposition)
        assert!((&p * &a - &a * &p).norm() < 1e-9);
    }

    #[test]
    fn cubic_roots_found_and_polished() {
        // (x - 1)(x - 0.8)(x + 1.8) = x^3 - 2.44 x + 1.44
        let roots = real_poly_roots(&[1.44, -2.44, 0.0, 1.0]);
        assert_eq!(roots.len(), 3);
        assert_relative_eq!(roots[0], -1.8, epsilon = 1e-12);
        assert_relative_eq!(roots[1], 0.8, epsilon = 1e-12);
        assert_relative_eq!(roots[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_pair_rejected() {
        // (x^2 + 1)(x - 2)
        let roots = real_poly_roots(&[-2.0, 1.0, -2.0, 1.0]);
        assert_eq!(roots, vec![2.0]);
    }
}
