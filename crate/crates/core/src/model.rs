//! Elastic potentials, viscosity tensors, characteristic data, and entropy
//! for the planar viscoelastic systems, plus the frame-invariant derivative
//! machinery for general isotropic energy densities.
//!
//! The planar strain is `a` (1 to 3 components depending on the variant) and
//! the planar state is `V = (a, b)` with velocity `b`. The first-order flux
//! is `G(V) = (-b, -DW(a))`, so characteristic speeds are the square roots of
//! the eigenvalues of the strain Hessian `M = D^2 W(a)`.

use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Which planar system is active. Fixes the strain dimension and the
/// dimension of the first-order Evans system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelVariant {
    /// Full planar compressible system, strain (a1, a2, a3).
    Compressible3D,
    /// Compressible restriction to the (a2, a3) plane.
    Compressible2D,
    /// Incompressible shear flow, strain (a1, a2).
    Shear2D,
    /// Scalar shear (transverse perturbations of a string).
    Shear1D,
    /// Scalar compressible (longitudinal perturbations of a rod).
    Compressible1D,
    /// Transverse perturbations riding on an in-plane compressible profile.
    Transverse,
}

pub use ModelVariant as VariantTag;

impl ModelVariant {
    pub fn strain_dim(self) -> usize {
        match self {
            ModelVariant::Compressible3D => 3,
            ModelVariant::Compressible2D | ModelVariant::Shear2D => 2,
            ModelVariant::Shear1D | ModelVariant::Compressible1D | ModelVariant::Transverse => 1,
        }
    }

    pub fn evans_dim(self) -> usize {
        match self {
            ModelVariant::Compressible3D => 9,
            ModelVariant::Compressible2D | ModelVariant::Shear2D => 6,
            ModelVariant::Shear1D | ModelVariant::Compressible1D | ModelVariant::Transverse => 3,
        }
    }

    /// Index of the longitudinal strain component a3 within the strain
    /// vector, for variants constrained by physical feasibility a3 > 0.
    pub fn axial_index(self) -> Option<usize> {
        match self {
            ModelVariant::Compressible3D => Some(2),
            ModelVariant::Compressible2D => Some(1),
            ModelVariant::Compressible1D => Some(0),
            _ => None,
        }
    }

    pub fn is_compressible(self) -> bool {
        self.axial_index().is_some()
    }

    /// The variant whose profile a Transverse computation rides on; identity
    /// for every other variant.
    pub fn profile_variant(self) -> ModelVariant {
        match self {
            ModelVariant::Transverse => ModelVariant::Compressible2D,
            v => v,
        }
    }

    /// Diagonal weights of the viscous scaling in the reduced profile flow,
    /// `D a' = a3 grad phi(a)` (compressible) or `a' = grad phi(a)` (shear).
    pub fn profile_scaling(self) -> DVector<f64> {
        match self.profile_variant() {
            ModelVariant::Compressible3D => DVector::from_vec(vec![1.0, 1.0, 2.0]),
            ModelVariant::Compressible2D => DVector::from_vec(vec![1.0, 2.0]),
            ModelVariant::Compressible1D => DVector::from_vec(vec![2.0]),
            ModelVariant::Shear2D => DVector::from_vec(vec![1.0, 1.0]),
            _ => DVector::from_vec(vec![1.0]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Compressible3D => "comp3d",
            ModelVariant::Compressible2D => "comp2d",
            ModelVariant::Shear2D => "shear2d",
            ModelVariant::Shear1D => "shear1d",
            ModelVariant::Compressible1D => "comp1d",
            ModelVariant::Transverse => "transverse",
        }
    }

    pub fn parse(name: &str) -> Result<ModelVariant> {
        Ok(match name {
            "comp3d" => ModelVariant::Compressible3D,
            "comp2d" => ModelVariant::Compressible2D,
            "shear2d" => ModelVariant::Shear2D,
            "shear1d" => ModelVariant::Shear1D,
            "comp1d" => ModelVariant::Compressible1D,
            "transverse" => ModelVariant::Transverse,
            other => return Err(CoreError::contract(format!("unknown model variant '{other}'"))),
        })
    }
}

/// Coefficients of the reduced planar elastic potential.
///
/// The compressible family is
/// `W(a) = mu1/4 (|a|^2 - 1)^2 + mu2/2 |a|^2 + mu3/2 (a1^2 + a2^2) + c`,
/// whose flux components are `(mu1 (|a|^2 - 1) + mu2 + mu3) a_j` transversely
/// and `(mu1 (|a|^2 - 1) + mu2) a3` longitudinally. The canonical quartic
/// double-well potential is `(1, 0, 1)` with zero offset; shear variants fix
/// a3 = 1 and 1D variants drop the remaining components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticPotential {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub c_offset: f64,
}

impl ElasticPotential {
    pub fn new(mu1: f64, mu2: f64, mu3: f64, c_offset: f64) -> Self {
        ElasticPotential { mu1, mu2, mu3, c_offset }
    }

    /// The canonical potential `W0(a) = 1/4 (|a|^2 - 1)^2 + 1/2 (a1^2 + a2^2)`.
    pub fn w0() -> Self {
        ElasticPotential::new(1.0, 0.0, 1.0, 0.0)
    }

    /// Whether the closed-form characteristic expressions apply.
    pub fn is_canonical_w0(&self) -> bool {
        self.mu1 == 1.0 && self.mu2 == 0.0 && self.mu3 == 1.0
    }

    /// Member of the family with the same fluxes (up to an additive constant
    /// in the stress) as the cubic-coefficient form
    /// `W(F) = 1/4 |F^T F - Id|^2 + c2 (|F|^2 - 3)^2 + c3 (det F - 1)^2`.
    pub fn from_cubic_coefficients(c2: f64, c3: f64) -> Self {
        ElasticPotential::new(1.0 + 4.0 * c2, 2.0 * c3, 1.0 - 2.0 * c3, 0.0)
    }

    /// Inverse of [`Self::from_cubic_coefficients`]; `None` when the
    /// coefficients lie outside that two-parameter slice (mu2 + mu3 != 1).
    pub fn cubic_coefficients(&self) -> Option<(f64, f64)> {
        if (self.mu2 + self.mu3 - 1.0).abs() < 1e-12 {
            Some(((self.mu1 - 1.0) / 4.0, self.mu2 / 2.0))
        } else {
            None
        }
    }

    /// Strict convexity of the potential at the identity strain: both
    /// distinct eigenvalues of the Hessian there, `mu2 + mu3` (transverse)
    /// and `2 mu1 + mu2` (longitudinal), must be positive.
    pub fn is_strictly_convex_at_identity(&self) -> bool {
        self.mu2 + self.mu3 > 0.0 && 2.0 * self.mu1 + self.mu2 > 0.0
    }

    /// Longitudinal flux factor `mu1 (y - 1) + mu2` at squared norm `y`.
    pub(crate) fn axial_factor(&self, y: f64) -> f64 {
        self.mu1 * (y - 1.0) + self.mu2
    }

    /// Transverse flux factor `mu1 (y - 1) + mu2 + mu3` at squared norm `y`.
    pub(crate) fn transverse_factor(&self, y: f64) -> f64 {
        self.axial_factor(y) + self.mu3
    }
}

/// Planar state `V = (a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateV {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

impl StateV {
    pub fn new(a: DVector<f64>, b: DVector<f64>) -> Self {
        StateV { a, b }
    }

    /// Physical feasibility: a3 > 0 for compressible variants (det F > 0).
    pub fn is_feasible(&self, variant: ModelVariant) -> bool {
        strain_feasible(&self.a, variant)
    }
}

pub fn strain_feasible(a: &DVector<f64>, variant: ModelVariant) -> bool {
    match variant.axial_index() {
        Some(i) => a[i] > 0.0,
        None => true,
    }
}

/// Viscous stress tensor selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViscosityKind {
    Z1,
    Z2,
}

/// Genuine nonlinearity marker for a characteristic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Genuineness {
    GenuinelyNonlinear,
    LinearlyDegenerate,
    Unknown,
}

/// Eigenstructure of the strain Hessian `M = D^2 W(a)`.
#[derive(Debug, Clone)]
pub struct CharacteristicData {
    /// Squared characteristic speeds (eigenvalues of M), ascending.
    pub m: Vec<f64>,
    /// Matching unit eigenvectors, sign fixed by first nonzero component.
    pub r: Vec<DVector<f64>>,
    /// Genuine-nonlinearity markers where the theory states them.
    pub gn_flags: Vec<Genuineness>,
    /// All eigenvalues real, positive, and distinct.
    pub strictly_hyperbolic: bool,
}

impl CharacteristicData {
    /// Characteristic speeds of the first-order system: both signs of
    /// `sqrt(m_j)` for every positive `m_j`.
    pub fn dg_speeds(&self) -> Vec<f64> {
        let mut speeds = Vec::with_capacity(2 * self.m.len());
        for &m in &self.m {
            if m > 0.0 {
                speeds.push(-m.sqrt());
                speeds.push(m.sqrt());
            }
        }
        speeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        speeds
    }
}

fn check_dim(a: &DVector<f64>, variant: ModelVariant, op: &str) -> Result<()> {
    if variant == ModelVariant::Transverse {
        return Err(CoreError::contract(format!(
            "{op}: the transverse variant has no standalone strain energy; use its background variant"
        )));
    }
    if a.len() != variant.strain_dim() {
        return Err(CoreError::contract(format!(
            "{op}: strain has {} components, variant {} needs {}",
            a.len(),
            variant.name(),
            variant.strain_dim()
        )));
    }
    Ok(())
}

/// Reduced elastic energy `W(a)` for the given variant.
pub fn eval_potential(a: &DVector<f64>, pot: &ElasticPotential, variant: ModelVariant) -> Result<f64> {
    check_dim(a, variant, "eval_potential")?;
    let y = a.norm_squared();
    let w = match variant {
        ModelVariant::Compressible3D => {
            0.25 * pot.mu1 * (y - 1.0).powi(2)
                + 0.5 * pot.mu2 * y
                + 0.5 * pot.mu3 * (a[0] * a[0] + a[1] * a[1])
        }
        ModelVariant::Compressible2D => {
            0.25 * pot.mu1 * (y - 1.0).powi(2) + 0.5 * pot.mu2 * y + 0.5 * pot.mu3 * a[0] * a[0]
        }
        ModelVariant::Compressible1D => 0.25 * pot.mu1 * (y - 1.0).powi(2) + 0.5 * pot.mu2 * y,
        // shear variants restrict the 3D potential to a3 = 1
        ModelVariant::Shear2D | ModelVariant::Shear1D => {
            0.25 * pot.mu1 * y * y + 0.5 * (pot.mu2 + pot.mu3) * y + 0.5 * pot.mu2
        }
        ModelVariant::Transverse => unreachable!(),
    };
    Ok(w + pot.c_offset)
}

/// Strain gradient `D_a W(a)`.
pub fn grad_potential(
    a: &DVector<f64>,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<DVector<f64>> {
    check_dim(a, variant, "grad_potential")?;
    let y = a.norm_squared();
    let g = match variant {
        ModelVariant::Compressible3D => DVector::from_vec(vec![
            pot.transverse_factor(y) * a[0],
            pot.transverse_factor(y) * a[1],
            pot.axial_factor(y) * a[2],
        ]),
        ModelVariant::Compressible2D => DVector::from_vec(vec![
            pot.transverse_factor(y) * a[0],
            pot.axial_factor(y) * a[1],
        ]),
        ModelVariant::Compressible1D => DVector::from_vec(vec![pot.axial_factor(y) * a[0]]),
        ModelVariant::Shear2D | ModelVariant::Shear1D => {
            let factor = pot.mu1 * y + pot.mu2 + pot.mu3;
            a * factor
        }
        ModelVariant::Transverse => unreachable!(),
    };
    Ok(g)
}

/// Strain Hessian `M = D^2 W(a)`, exactly symmetric.
pub fn hess_potential(
    a: &DVector<f64>,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<DMatrix<f64>> {
    check_dim(a, variant, "hess_potential")?;
    let y = a.norm_squared();
    let d = a.len();
    let rank_one = 2.0 * pot.mu1;
    let mut m = DMatrix::from_fn(d, d, |i, j| rank_one * (a[i] * a[j]));
    match variant {
        ModelVariant::Compressible3D => {
            let t = pot.axial_factor(y);
            m[(0, 0)] += t + pot.mu3;
            m[(1, 1)] += t + pot.mu3;
            m[(2, 2)] += t;
        }
        ModelVariant::Compressible2D => {
            let t = pot.axial_factor(y);
            m[(0, 0)] += t + pot.mu3;
            m[(1, 1)] += t;
        }
        ModelVariant::Compressible1D => {
            m[(0, 0)] += pot.axial_factor(y);
        }
        ModelVariant::Shear2D | ModelVariant::Shear1D => {
            let c = pot.mu1 * y + pot.mu2 + pot.mu3;
            for i in 0..d {
                m[(i, i)] += c;
            }
        }
        ModelVariant::Transverse => unreachable!(),
    }
    Ok(m)
}

fn normalize_eigvec(mut v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v /= n;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v = -v;
        }
    }
    v
}

fn strictly_hyperbolic(m: &[f64]) -> bool {
    let scale = m.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    if m.iter().any(|&x| x <= 1e-10 * scale) {
        return false;
    }
    m.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-10 * scale)
}

/// Characteristic data of the strain Hessian: closed forms for the canonical
/// potential, numerical symmetric eigendecomposition otherwise.
pub fn characteristics(
    a: &DVector<f64>,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<CharacteristicData> {
    check_dim(a, variant, "characteristics")?;
    let h = hess_potential(a, pot, variant)?;
    let numeric = |flags: Vec<Genuineness>| -> CharacteristicData {
        let se = nalgebra::SymmetricEigen::new(h.clone());
        let mut pairs: Vec<(f64, DVector<f64>)> = (0..h.nrows())
            .map(|i| (se.eigenvalues[i], se.eigenvectors.column(i).into_owned()))
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let m: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let hyp = strictly_hyperbolic(&m);
        CharacteristicData {
            r: pairs.into_iter().map(|p| normalize_eigvec(p.1)).collect(),
            gn_flags: flags,
            strictly_hyperbolic: hyp,
            m,
        }
    };

    let y = a.norm_squared();
    let data = match variant {
        ModelVariant::Shear2D => {
            // rotational structure holds for the whole family
            let slow = pot.mu1 * y + pot.mu2 + pot.mu3;
            let fast = 3.0 * pot.mu1 * y + pot.mu2 + pot.mu3;
            let (r_slow, r_fast) = if y > 1e-24 {
                (
                    normalize_eigvec(DVector::from_vec(vec![a[1], -a[0]])),
                    normalize_eigvec(a.clone()),
                )
            } else {
                (DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0]))
            };
            let flags = if pot.is_canonical_w0() {
                vec![Genuineness::LinearlyDegenerate, Genuineness::GenuinelyNonlinear]
            } else {
                vec![Genuineness::Unknown, Genuineness::Unknown]
            };
            let m = vec![slow, fast];
            let hyp = strictly_hyperbolic(&m);
            CharacteristicData { m, r: vec![r_slow, r_fast], gn_flags: flags, strictly_hyperbolic: hyp }
        }
        ModelVariant::Shear1D => {
            let m = vec![3.0 * pot.mu1 * y + pot.mu2 + pot.mu3];
            let hyp = strictly_hyperbolic(&m);
            CharacteristicData {
                m,
                r: vec![DVector::from_vec(vec![1.0])],
                gn_flags: vec![Genuineness::Unknown],
                strictly_hyperbolic: hyp,
            }
        }
        ModelVariant::Compressible1D => {
            let m = vec![3.0 * pot.mu1 * y - pot.mu1 + pot.mu2];
            let hyp = strictly_hyperbolic(&m);
            CharacteristicData {
                m,
                r: vec![DVector::from_vec(vec![1.0])],
                gn_flags: vec![Genuineness::Unknown],
                strictly_hyperbolic: hyp,
            }
        }
        ModelVariant::Compressible3D if pot.is_canonical_w0() => {
            let trans = a[0] * a[0] + a[1] * a[1];
            let disc = ((2.0 * y - 1.0).powi(2) + 8.0 * trans).sqrt();
            let m1 = y;
            let m2 = 0.5 * (4.0 * y - 1.0 - disc);
            let m3 = 0.5 * (4.0 * y - 1.0 + disc);
            let build = |mj: f64| DVector::from_vec(vec![
                -2.0 * a[0] * a[2],
                -2.0 * a[1] * a[2],
                3.0 * y - 2.0 * a[2] * a[2] - mj,
            ]);
            let mut triples = vec![
                (m1, DVector::from_vec(vec![a[1], -a[0], 0.0]), Genuineness::LinearlyDegenerate),
                (m2, build(m2), Genuineness::Unknown),
                (m3, build(m3), Genuineness::GenuinelyNonlinear),
            ];
            // degenerate closed-form eigenvectors (e.g. on the a3 axis):
            // replace by a numerically computed eigenbasis
            if triples.iter().any(|t| t.1.norm() < 1e-8 * (1.0 + y)) {
                let mut num = numeric(vec![
                    Genuineness::Unknown,
                    Genuineness::Unknown,
                    Genuineness::Unknown,
                ]);
                let mut ms = vec![m1, m2, m3];
                ms.sort_by(|x, z| x.partial_cmp(z).unwrap());
                num.m = ms;
                return Ok(num);
            }
            triples.sort_by(|x, z| x.0.partial_cmp(&z.0).unwrap());
            let m: Vec<f64> = triples.iter().map(|t| t.0).collect();
            let hyp = strictly_hyperbolic(&m);
            CharacteristicData {
                r: triples.iter().map(|t| normalize_eigvec(t.1.clone())).collect(),
                gn_flags: triples.iter().map(|t| t.2).collect(),
                strictly_hyperbolic: hyp,
                m,
            }
        }
        ModelVariant::Compressible2D if pot.is_canonical_w0() => {
            let disc = ((2.0 * y - 1.0).powi(2) + 8.0 * a[0] * a[0]).sqrt();
            let m2 = 0.5 * (4.0 * y - 1.0 - disc);
            let m3 = 0.5 * (4.0 * y - 1.0 + disc);
            let build = |mj: f64| {
                if a[0].abs() < 1e-12 * (1.0 + y) {
                    // on the a3 axis r2 = (1, 0); the other field is axial
                    let axial_m = 3.0 * a[1] * a[1] - 1.0;
                    if (mj - axial_m).abs() <= (mj - y).abs() {
                        DVector::from_vec(vec![0.0, 1.0])
                    } else {
                        DVector::from_vec(vec![1.0, 0.0])
                    }
                } else {
                    DVector::from_vec(vec![-2.0 * a[0] * a[1], 3.0 * y - 2.0 * a[1] * a[1] - mj])
                }
            };
            let mut triples = vec![
                (m2, build(m2), Genuineness::Unknown),
                (m3, build(m3), Genuineness::GenuinelyNonlinear),
            ];
            triples.sort_by(|x, z| x.0.partial_cmp(&z.0).unwrap());
            let m: Vec<f64> = triples.iter().map(|t| t.0).collect();
            let hyp = strictly_hyperbolic(&m);
            CharacteristicData {
                r: triples.iter().map(|t| normalize_eigvec(t.1.clone())).collect(),
                gn_flags: triples.iter().map(|t| t.2).collect(),
                strictly_hyperbolic: hyp,
                m,
            }
        }
        _ => numeric(vec![Genuineness::Unknown; variant.strain_dim()]),
    };
    Ok(data)
}

/// Entropy and entropy flux `(eta, q) = (|b|^2/2 + W(a), -b . D_a W(a))`.
pub fn entropy_pair(v: &StateV, pot: &ElasticPotential, variant: ModelVariant) -> Result<(f64, f64)> {
    let eta = 0.5 * v.b.norm_squared() + eval_potential(&v.a, pot, variant)?;
    let q = -v.b.dot(&grad_potential(&v.a, pot, variant)?);
    Ok((eta, q))
}

/// Viscosity matrix `B0` acting on the velocity gradient.
pub fn viscosity_matrix(
    a: &DVector<f64>,
    kind: ViscosityKind,
    variant: ModelVariant,
) -> Result<DMatrix<f64>> {
    check_dim(a, variant, "viscosity_matrix")?;
    let d = a.len();
    match kind {
        ViscosityKind::Z2 => {
            if let Some(i) = variant.axial_index() {
                if a[i] <= 0.0 {
                    return Err(CoreError::domain(format!(
                        "viscosity_matrix: Z2 requires a3 > 0, got {}",
                        a[i]
                    )));
                }
            }
            let b = match variant {
                ModelVariant::Compressible3D => {
                    DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0])) / a[2]
                }
                ModelVariant::Compressible2D => {
                    DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])) / a[1]
                }
                ModelVariant::Compressible1D => DMatrix::from_element(1, 1, 2.0 / a[0]),
                ModelVariant::Shear2D | ModelVariant::Shear1D => DMatrix::identity(d, d),
                ModelVariant::Transverse => unreachable!(),
            };
            Ok(b)
        }
        ViscosityKind::Z1 => {
            let mut b = DMatrix::from_fn(d, d, |i, j| 2.0 * a[i] * a[j]);
            match variant {
                ModelVariant::Compressible3D => {
                    b[(0, 0)] += 1.0;
                    b[(1, 1)] += 1.0;
                }
                ModelVariant::Compressible2D => {
                    b[(0, 0)] += 1.0;
                }
                ModelVariant::Compressible1D => {}
                ModelVariant::Shear2D | ModelVariant::Shear1D => {
                    for i in 0..d {
                        b[(i, i)] += 1.0;
                    }
                }
                ModelVariant::Transverse => unreachable!(),
            }
            Ok(b)
        }
    }
}

/// Cofactor matrix of a 3x3 matrix (always defined).
pub fn cofactor3(f: &Matrix3<f64>) -> Matrix3<f64> {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        f[(r0, c0)] * f[(r1, c1)] - f[(r0, c1)] * f[(r1, c0)]
    };
    Matrix3::new(
        minor(1, 2, 1, 2), -minor(1, 2, 0, 2), minor(1, 2, 0, 1),
        -minor(0, 2, 1, 2), minor(0, 2, 0, 2), -minor(0, 2, 0, 1),
        minor(0, 1, 1, 2), -minor(0, 1, 0, 2), minor(0, 1, 0, 1),
    )
}

/// Frame-invariant stress for `W(F) = sigma(|F|^2, |F F^T|^2, det F)`:
/// `DW(F) = 2 s_1 F + 4 s_2 F F^T F + s_3 cof F` with `s = sigma_grad`
/// evaluated at the invariants of `F`.
pub fn general_w_derivative(f: &Matrix3<f64>, sigma_grad: &Vector3<f64>) -> Matrix3<f64> {
    f * (2.0 * sigma_grad[0])
        + f * f.transpose() * f * (4.0 * sigma_grad[1])
        + cofactor3(f) * sigma_grad[2]
}

/// Lame constants of the linearization at the identity.
#[derive(Debug, Clone, Copy)]
pub struct LameConstants {
    pub lambda: f64,
    pub mu: f64,
    /// Shear modulus sign condition `mu >= 0`.
    pub mu_valid: bool,
    /// Bulk condition `3 lambda + mu >= 0`.
    pub bulk_valid: bool,
}

/// Lame constants from the gradient and Hessian of `sigma` at the identity
/// invariants (3, 3, 1): `lambda = Hess sigma : w (x) w` with `w = (2, 4, 1)`
/// and `mu = grad sigma . (0, 8, -2)`.
pub fn lame_constants(sigma_grad: &Vector3<f64>, sigma_hess: &Matrix3<f64>) -> LameConstants {
    let w = Vector3::new(2.0, 4.0, 1.0);
    let lambda = (sigma_hess * w).dot(&w);
    let mu = sigma_grad.dot(&Vector3::new(0.0, 8.0, -2.0));
    LameConstants { lambda, mu, mu_valid: mu >= 0.0, bulk_valid: 3.0 * lambda + mu >= 0.0 }
}

/// Strain-rate dissipation `S(C, D) : D` for the two viscosity laws.
///
/// `Z1` gives exactly `|D|^2 / 2`; `Z2` gives
/// `sqrt(det C) tr(C^{-1} D C^{-1} D) / 2` and requires `C` positive definite.
pub fn dissipation_check(c: &Matrix3<f64>, d: &Matrix3<f64>, kind: ViscosityKind) -> Result<f64> {
    match kind {
        ViscosityKind::Z1 => Ok(0.5 * d.norm_squared()),
        ViscosityKind::Z2 => {
            let chol = nalgebra::Cholesky::new(*c).ok_or_else(|| {
                CoreError::domain("dissipation_check: C must be positive definite for Z2")
            })?;
            let det = c.determinant();
            let cinv = chol.inverse();
            Ok(0.5 * det.sqrt() * (cinv * d * cinv * d).trace())
        }
    }
}
