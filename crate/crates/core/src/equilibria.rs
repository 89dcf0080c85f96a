//! Rankine-Hugoniot endstate solvers for each planar variant, Morse
//! classification of profile-flow equilibria, hyperbolicity screening, and
//! shock-type computation from the hyperbolic index.
//!
//! Equilibria of the reduced profile flow are exactly the RH solutions: the
//! residual used everywhere is `DW(a+) - sigma a+ - (DW(alpha) - sigma alpha)`.

use crate::error::{CoreError, Result};
use crate::linalg::{real_poly_roots, scaled_symmetric_eigenvalues};
use crate::model::{
    characteristics, grad_potential, hess_potential, strain_feasible, ElasticPotential,
    ModelVariant,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Hyperbolic classification of a shock pair by the index `ell_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShockClass {
    Lax,
    Overcompressive,
    Undercompressive,
    /// A characteristic speed coincides with the shock speed, or an endstate
    /// is not hyperbolic; the index is not meaningful.
    Degenerate,
}

impl ShockClass {
    pub fn name(self) -> &'static str {
        match self {
            ShockClass::Lax => "lax",
            ShockClass::Overcompressive => "overcompressive",
            ShockClass::Undercompressive => "undercompressive",
            ShockClass::Degenerate => "degenerate",
        }
    }
}

/// Equilibrium type of the reduced profile flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorseClass {
    Repellor,
    Attractor,
    Saddle,
    Degenerate,
}

/// A shock candidate: endstates, speed, and hyperbolic type.
#[derive(Debug, Clone)]
pub struct ShockCandidate {
    pub variant: ModelVariant,
    pub alpha: DVector<f64>,
    pub a_plus: DVector<f64>,
    pub s: f64,
    pub sigma: f64,
    pub ell_tilde: i32,
    pub shock_class: ShockClass,
}

/// Classification data for one equilibrium of the profile flow.
#[derive(Debug, Clone)]
pub struct EquilibriumInfo {
    pub a: DVector<f64>,
    /// Eigenvalues of the profile-flow Jacobian (in the gradient-flow
    /// variable), ascending.
    pub jacobian_eigs: Vec<f64>,
    pub morse: MorseClass,
    pub feasible: bool,
    /// Strict hyperbolicity of the first-order flux at this state, with the
    /// shock speed distinct from every characteristic speed.
    pub hyperbolic_endstate: bool,
}

impl EquilibriumInfo {
    /// Index of the equilibrium as a zero of the gradient field:
    /// the sign of `det(D^2 W - sigma Id)`.
    pub fn index(&self) -> i32 {
        let det: f64 = self.jacobian_eigs.iter().product();
        if det > 0.0 {
            1
        } else if det < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// A circle of rest points around the symmetry axis.
#[derive(Debug, Clone, Copy)]
pub struct RingSolutions {
    /// Common longitudinal component of the ring.
    pub a3: f64,
    pub radius: f64,
    pub feasible: bool,
}

/// Solutions of the shear RH relations.
#[derive(Debug, Clone)]
pub struct ShearRhSolutions {
    /// Isolated solutions, identity included.
    pub points: Vec<DVector<f64>>,
    /// For `alpha = 0` and supersonic speeds, the circle of rest states.
    pub circle_radius: Option<f64>,
}

/// Max-norm residual of the Rankine-Hugoniot relations in profile form.
pub fn rh_residual(
    alpha: &DVector<f64>,
    a_plus: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<f64> {
    let g_plus = grad_potential(a_plus, pot, variant)? - a_plus * sigma;
    let g_minus = grad_potential(alpha, pot, variant)? - alpha * sigma;
    Ok((g_plus - g_minus).amax())
}

fn dedup_points(mut points: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    points.sort_by(|a, b| a.iter().partial_cmp(b.iter()).unwrap());
    for p in points {
        if !out.iter().any(|q| (q - &p).amax() <= 1e-7) {
            out.push(p);
        }
    }
    out
}

/// Newton-polish an RH solution on the full nonlinear system.
fn polish_rh(
    a0: &DVector<f64>,
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> DVector<f64> {
    let g_minus = grad_potential(alpha, pot, variant).unwrap() - alpha * sigma;
    let mut a = a0.clone();
    for _ in 0..5 {
        let f = grad_potential(&a, pot, variant).unwrap() - &a * sigma - &g_minus;
        let mut j = hess_potential(&a, pot, variant).unwrap();
        for i in 0..a.len() {
            j[(i, i)] -= sigma;
        }
        match j.lu().solve(&f) {
            Some(step) if step.amax().is_finite() && step.amax() < 1.0 => a -= step,
            _ => break,
        }
    }
    a
}

/// Snap an approximate endstate onto the exact RH solution at the flux
/// level of `alpha`. Errors if no solution lies within `max_move`.
pub fn snap_to_rh(
    a: &DVector<f64>,
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
    max_move: f64,
) -> Result<DVector<f64>> {
    let variant = variant.profile_variant();
    let polished = polish_rh(a, alpha, sigma, pot, variant);
    let moved = (&polished - a).norm();
    let resid = rh_residual(alpha, &polished, sigma, pot, variant)?;
    if resid > 1e-9 || moved > max_move {
        return Err(CoreError::contract(format!(
            "snap_to_rh: no RH solution near the given endstate \
             (moved {moved:.3e}, residual {resid:.3e})"
        )));
    }
    Ok(polished)
}

/// All real solutions `a+` of the shear RH relations
/// `(mu1 |a+|^2 + mu2 + mu3 - sigma) a+ = (mu1 |alpha|^2 + mu2 + mu3 - sigma) alpha`.
///
/// Solutions are collinear with `alpha`; for `alpha = 0` the rest states on
/// the degenerate circle are reported through `circle_radius`.
pub fn rh_shear(
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
) -> Result<ShearRhSolutions> {
    if alpha.len() != 2 {
        return Err(CoreError::contract("rh_shear: alpha must have 2 components"));
    }
    if sigma <= 0.0 {
        return Err(CoreError::contract("rh_shear: sigma must be positive"));
    }
    let shear_const = pot.mu2 + pot.mu3;
    let r = alpha.norm();
    if r < 1e-14 {
        let rad2 = (sigma - shear_const) / pot.mu1;
        return Ok(ShearRhSolutions {
            points: vec![DVector::zeros(2)],
            circle_radius: if rad2 > 0.0 { Some(rad2.sqrt()) } else { None },
        });
    }
    let u = alpha / r;
    // on-axis cubic mu1 t^3 + (mu2 + mu3 - sigma) t = flux level of alpha
    let level = (pot.mu1 * r * r + shear_const - sigma) * r;
    let roots = real_poly_roots(&[-level, shear_const - sigma, 0.0, pot.mu1]);
    let mut points: Vec<DVector<f64>> = roots.iter().map(|&t| &u * t).collect();
    points.push(alpha.clone());
    let points = dedup_points(
        points
            .into_iter()
            .map(|p| polish_rh(&p, alpha, sigma, pot, ModelVariant::Shear2D))
            .collect(),
    );
    Ok(ShearRhSolutions { points, circle_radius: None })
}

/// A root of the 1D compressible RH relations with its feasibility flag.
#[derive(Debug, Clone, Copy)]
pub struct FeasibleRoot {
    pub a3: f64,
    pub feasible: bool,
}

/// Real solutions of the 1D compressible RH relations (identity included);
/// at most one non-identity solution is physically feasible.
pub fn rh_compressible_1d(
    alpha3: f64,
    sigma: f64,
    pot: &ElasticPotential,
) -> Result<Vec<FeasibleRoot>> {
    if alpha3 <= 0.0 {
        return Err(CoreError::contract("rh_compressible_1d: alpha3 must be positive"));
    }
    let mut roots = vec![alpha3];
    // deflating the identity root leaves
    // mu1 t^2 + mu1 alpha t + mu1 alpha^2 + mu2 - mu1 - sigma = 0
    let disc = pot.mu1 * pot.mu1 * alpha3 * alpha3
        - 4.0 * pot.mu1 * (pot.mu1 * alpha3 * alpha3 + pot.mu2 - pot.mu1 - sigma);
    if disc >= 0.0 && pot.mu1 != 0.0 {
        let sq = disc.sqrt();
        roots.push((-pot.mu1 * alpha3 + sq) / (2.0 * pot.mu1));
        roots.push((-pot.mu1 * alpha3 - sq) / (2.0 * pot.mu1));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-7);
    Ok(roots.into_iter().map(|a3| FeasibleRoot { a3, feasible: a3 > 0.0 }).collect())
}

/// An isolated 2D compressible RH solution.
#[derive(Debug, Clone)]
pub struct Comp2dRoot {
    pub a: DVector<f64>,
    pub feasible: bool,
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Coefficients (constant term first) of the quintic in `y = |a+|^2` whose
/// roots generate the 2D compressible RH solutions for `alpha_2 != 0`.
pub fn comp2d_quintic(alpha: &DVector<f64>, sigma: f64, pot: &ElasticPotential) -> Vec<f64> {
    let y_alpha = alpha.norm_squared();
    // transverse and longitudinal flux factors minus sigma, linear in y
    let a_lin = [pot.mu2 + pot.mu3 - pot.mu1 - sigma, pot.mu1];
    let b_lin = [pot.mu2 - pot.mu1 - sigma, pot.mu1];
    let c2 = a_lin[0] + a_lin[1] * y_alpha;
    let c3 = b_lin[0] + b_lin[1] * y_alpha;
    let a2 = poly_mul(&a_lin, &a_lin);
    let b2 = poly_mul(&b_lin, &b_lin);
    let mut quintic = poly_mul(&a2, &b2);
    quintic.insert(0, 0.0); // multiply by y
    let t1 = c2 * c2 * alpha[0] * alpha[0];
    for (i, &b) in b2.iter().enumerate() {
        quintic[i] -= t1 * b;
    }
    let t2 = c3 * c3 * alpha[1] * alpha[1];
    for (i, &a) in a2.iter().enumerate() {
        quintic[i] -= t2 * a;
    }
    quintic
}

/// All isolated real solutions of the 2D compressible RH relations, identity
/// included, with feasibility flags.
///
/// For `alpha_2 != 0` the roots come from the quintic in `y = |a+|^2`; roots
/// at the poles of the recovery map are excluded. For `alpha_2 = 0` the 1D
/// roots are combined with the off-axis pair at the degenerate modulus.
pub fn rh_compressible_2d(
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
) -> Result<Vec<Comp2dRoot>> {
    if alpha.len() != 2 {
        return Err(CoreError::contract("rh_compressible_2d: alpha must have 2 components"));
    }
    let variant = ModelVariant::Compressible2D;
    let mut points: Vec<DVector<f64>> = Vec::new();
    if alpha[0].abs() < 1e-14 {
        for root in rh_compressible_1d(alpha[1], sigma, pot)? {
            points.push(DVector::from_vec(vec![0.0, root.a3]));
        }
        // off-axis pair: transverse flux factor equals sigma
        if pot.mu1 != 0.0 {
            let y_star = (sigma - pot.mu2 - pot.mu3) / pot.mu1 + 1.0;
            let b_star = pot.axial_factor(y_star) - sigma;
            if b_star.abs() > 1e-12 {
                let a3 = (pot.axial_factor(alpha.norm_squared()) - sigma) * alpha[1] / b_star;
                let rad2 = y_star - a3 * a3;
                if rad2 > 0.0 {
                    let r = rad2.sqrt();
                    points.push(DVector::from_vec(vec![r, a3]));
                    points.push(DVector::from_vec(vec![-r, a3]));
                }
            }
        }
    } else {
        let quintic = comp2d_quintic(alpha, sigma, pot);
        let y_alpha = alpha.norm_squared();
        let scale = 1.0 + y_alpha.abs() + sigma.abs();
        for y in real_poly_roots(&quintic) {
            if y < -1e-10 {
                continue;
            }
            let a_fac = pot.transverse_factor(y) - sigma;
            let b_fac = pot.axial_factor(y) - sigma;
            if a_fac.abs() < 1e-8 * scale || b_fac.abs() < 1e-8 * scale {
                continue; // pole of the recovery map
            }
            let a2 = (pot.transverse_factor(y_alpha) - sigma) * alpha[0] / a_fac;
            let a3 = (pot.axial_factor(y_alpha) - sigma) * alpha[1] / b_fac;
            points.push(DVector::from_vec(vec![a2, a3]));
        }
        points.push(alpha.clone());
    }
    let polished: Vec<DVector<f64>> = points
        .into_iter()
        .map(|p| polish_rh(&p, alpha, sigma, pot, variant))
        .filter(|p| {
            rh_residual(alpha, p, sigma, pot, variant).map(|r| r <= 1e-9).unwrap_or(false)
        })
        .collect();
    Ok(dedup_points(polished)
        .into_iter()
        .map(|a| {
            let feasible = strain_feasible(&a, variant);
            Comp2dRoot { a, feasible }
        })
        .collect())
}

/// Solutions of the 3D compressible RH relations.
#[derive(Debug, Clone)]
pub struct Comp3dSolutions {
    /// Isolated solutions (identity included), in the original frame.
    pub points: Vec<DVector<f64>>,
    /// For axisymmetric `alpha`, the ring of rest points.
    pub ring: Option<RingSolutions>,
    /// Out-of-plane solutions exist only in this degenerate case; they are
    /// flagged rather than enumerated.
    pub degenerate_out_of_plane: bool,
}

/// 3D compressible RH solutions: after rotating `alpha` so its first
/// component vanishes, the isolated solutions are the planar ones embedded
/// in-plane; axisymmetric data additionally produces a ring of rest points.
pub fn rh_compressible_3d(
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
) -> Result<Comp3dSolutions> {
    if alpha.len() != 3 {
        return Err(CoreError::contract("rh_compressible_3d: alpha must have 3 components"));
    }
    let rho = (alpha[0] * alpha[0] + alpha[1] * alpha[1]).sqrt();
    // rotation about the a3 axis sending alpha to (0, rho, alpha3)
    let (cos_t, sin_t) = if rho > 1e-14 { (alpha[1] / rho, alpha[0] / rho) } else { (1.0, 0.0) };
    let rotate_back =
        |p: &DVector<f64>| DVector::from_vec(vec![sin_t * p[0], cos_t * p[0], p[1]]);
    let planar_alpha = DVector::from_vec(vec![rho, alpha[2]]);

    if rho < 1e-14 {
        let points: Vec<DVector<f64>> = rh_compressible_1d(alpha[2], sigma, pot)?
            .into_iter()
            .map(|r| DVector::from_vec(vec![0.0, 0.0, r.a3]))
            .collect();
        let mut ring = None;
        if pot.mu1 != 0.0 {
            let y_star = (sigma - pot.mu2 - pot.mu3) / pot.mu1 + 1.0;
            let b_star = pot.axial_factor(y_star) - sigma;
            if b_star.abs() > 1e-12 {
                let a3 = (pot.axial_factor(alpha.norm_squared()) - sigma) * alpha[2] / b_star;
                let rad2 = y_star - a3 * a3;
                if rad2 > 0.0 {
                    ring = Some(RingSolutions { a3, radius: rad2.sqrt(), feasible: a3 > 0.0 });
                }
            }
        }
        return Ok(Comp3dSolutions { points: dedup_points(points), ring, degenerate_out_of_plane: false });
    }

    let degenerate =
        (pot.transverse_factor(alpha.norm_squared()) - sigma).abs() < 1e-8 * (1.0 + sigma.abs());
    let planar = rh_compressible_2d(&planar_alpha, sigma, pot)?;
    let points = planar.into_iter().map(|r| rotate_back(&r.a)).collect();
    Ok(Comp3dSolutions { points, ring: None, degenerate_out_of_plane: degenerate })
}

/// Classify an equilibrium of the profile flow for the wave generated by
/// `(alpha, sigma)`.
pub fn classify_equilibrium(
    a: &DVector<f64>,
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<EquilibriumInfo> {
    let variant = variant.profile_variant();
    let resid = rh_residual(alpha, a, sigma, pot, variant)?;
    if resid > 1e-6 {
        return Err(CoreError::contract(format!(
            "classify_equilibrium: point is not an equilibrium (residual {resid:.3e})"
        )));
    }
    let mut h = hess_potential(a, pot, variant)?;
    for i in 0..a.len() {
        h[(i, i)] -= sigma;
    }
    let weights = variant.profile_scaling();
    let mut eigs = scaled_symmetric_eigenvalues(&h, &weights);
    // compressible flows carry the a3 factor from the viscous scaling
    if let Some(i) = variant.axial_index() {
        let a3 = a[i];
        for e in eigs.iter_mut() {
            *e *= a3;
        }
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    let scale = eigs.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let morse = if eigs.iter().any(|e| e.abs() <= 1e-8 * scale) {
        MorseClass::Degenerate
    } else if eigs.iter().all(|&e| e > 0.0) {
        MorseClass::Repellor
    } else if eigs.iter().all(|&e| e < 0.0) {
        MorseClass::Attractor
    } else {
        MorseClass::Saddle
    };
    let ch = characteristics(a, pot, variant)?;
    let noncharacteristic =
        ch.m.iter().all(|&m| (m - sigma).abs() > 1e-9 * (1.0 + sigma) && m > 0.0);
    let hyperbolic_endstate = ch.strictly_hyperbolic && noncharacteristic && sigma > 0.0;
    Ok(EquilibriumInfo {
        a: a.clone(),
        jacobian_eigs: eigs,
        morse,
        feasible: strain_feasible(a, variant),
        hyperbolic_endstate,
    })
}

/// Compute the hyperbolic index and shock class of an endstate pair.
///
/// `ell_tilde` counts characteristic speeds above `s` at the left state plus
/// speeds below `s` at the right state, minus the full state dimension
/// `2 * strain_dim`. A characteristic speed equal to `s` (within 1e-9), or a
/// non-hyperbolic endstate, makes the pair `Degenerate`.
pub fn shock_type(
    alpha: &DVector<f64>,
    a_plus: &DVector<f64>,
    s: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<ShockCandidate> {
    let variant_p = variant.profile_variant();
    let sigma = s * s;
    let resid = rh_residual(alpha, a_plus, sigma, pot, variant_p)?;
    if resid > 1e-6 {
        return Err(CoreError::contract(format!(
            "shock_type: endstates do not satisfy the RH relations (residual {resid:.3e})"
        )));
    }
    let ch_minus = characteristics(alpha, pot, variant_p)?;
    let ch_plus = characteristics(a_plus, pot, variant_p)?;
    let dim_v = 2 * variant_p.strain_dim() as i32;
    let tol = 1e-9 * (1.0 + s.abs());
    let mut degenerate = !ch_minus.strictly_hyperbolic || !ch_plus.strictly_hyperbolic;
    let mut unstable_minus = 0i32;
    for speed in ch_minus.dg_speeds() {
        if (speed - s).abs() <= tol {
            degenerate = true;
        } else if speed > s {
            unstable_minus += 1;
        }
    }
    let mut stable_plus = 0i32;
    for speed in ch_plus.dg_speeds() {
        if (speed - s).abs() <= tol {
            degenerate = true;
        } else if speed < s {
            stable_plus += 1;
        }
    }
    if variant == ModelVariant::Transverse {
        // the rotational field of the full system has speeds +-|a|; a match
        // with s makes the transverse splitting characteristic
        for a in [alpha, a_plus] {
            let speed = a.norm();
            if (speed - s.abs()).abs() <= tol {
                degenerate = true;
            }
        }
    }
    let ell_tilde = unstable_minus + stable_plus - dim_v;
    let shock_class = if degenerate {
        ShockClass::Degenerate
    } else if ell_tilde == 1 {
        ShockClass::Lax
    } else if ell_tilde > 1 {
        ShockClass::Overcompressive
    } else {
        ShockClass::Undercompressive
    };
    Ok(ShockCandidate {
        variant,
        alpha: alpha.clone(),
        a_plus: a_plus.clone(),
        s,
        sigma,
        ell_tilde,
        shock_class,
    })
}

/// All isolated equilibria of the profile flow generated by `(alpha, sigma)`,
/// identity included (rings are not sampled).
pub fn equilibria_for(
    alpha: &DVector<f64>,
    sigma: f64,
    pot: &ElasticPotential,
    variant: ModelVariant,
) -> Result<Vec<DVector<f64>>> {
    match variant.profile_variant() {
        ModelVariant::Shear2D => Ok(rh_shear(alpha, sigma, pot)?.points),
        ModelVariant::Compressible2D => {
            Ok(rh_compressible_2d(alpha, sigma, pot)?.into_iter().map(|r| r.a).collect())
        }
        ModelVariant::Compressible3D => Ok(rh_compressible_3d(alpha, sigma, pot)?.points),
        ModelVariant::Compressible1D => Ok(rh_compressible_1d(alpha[0], sigma, pot)?
            .into_iter()
            .map(|r| DVector::from_vec(vec![r.a3]))
            .collect()),
        ModelVariant::Shear1D => {
            let embedded = DVector::from_vec(vec![alpha[0], 0.0]);
            Ok(rh_shear(&embedded, sigma, pot)?
                .points
                .into_iter()
                .filter(|p| p[1].abs() < 1e-9)
                .map(|p| DVector::from_vec(vec![p[0]]))
                .collect())
        }
        ModelVariant::Transverse => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn w0() -> ElasticPotential {
        ElasticPotential::w0()
    }

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    #[test]
    fn shear_cubic_reproduces_figure_endstates() {
        // sigma = 3.44 gives the cubic with roots exactly {1.0, 0.8, -1.8}
        let sol = rh_shear(&v2(1.0, 0.0), 3.44, &w0()).unwrap();
        let mut roots: Vec<f64> = sol.points.iter().map(|p| p[0]).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(roots.len(), 3);
        assert_relative_eq!(roots[0], -1.8, epsilon = 1e-9);
        assert_relative_eq!(roots[1], 0.8, epsilon = 1e-9);
        assert_relative_eq!(roots[2], 1.0, epsilon = 1e-9);
        assert!(sol.points.iter().all(|p| p[1].abs() < 1e-12));
        assert!(sol.circle_radius.is_none());
    }

    #[test]
    fn shear_circle_case() {
        let sol = rh_shear(&v2(0.0, 0.0), 2.0, &w0()).unwrap();
        assert_relative_eq!(sol.circle_radius.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(sol.points.len(), 1);
        assert_relative_eq!(sol.points[0].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn shear_triple_root() {
        // sigma = 1: cubic a^3 = 1, only the identity remains
        let sol = rh_shear(&v2(1.0, 0.0), 1.0, &w0()).unwrap();
        assert_eq!(sol.points.len(), 1);
        assert_relative_eq!(sol.points[0][0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn comp1d_roots_from_figure_parameters() {
        let roots = rh_compressible_1d(2.0, 4.84, &w0()).unwrap();
        let vals: Vec<f64> = roots.iter().map(|r| r.a3).collect();
        let expect = -1.0 + 0.5 * 11.36f64.sqrt();
        assert!(vals.iter().any(|&v| (v - expect).abs() < 1e-12));
        assert_relative_eq!(expect, 0.6852, epsilon = 1e-4);
        let low = -1.0 - 0.5 * 11.36f64.sqrt();
        assert!(vals.iter().any(|&v| (v - low).abs() < 1e-12));
        for r in &roots {
            assert_eq!(r.feasible, r.a3 > 0.0);
        }
        // exactly one feasible non-identity root
        assert_eq!(roots.iter().filter(|r| r.feasible && (r.a3 - 2.0).abs() > 1e-7).count(), 1);
    }

    #[test]
    fn comp1d_no_feasible_roots() {
        let roots = rh_compressible_1d(1.0, 0.0, &w0()).unwrap();
        let vals: Vec<f64> = roots.iter().map(|r| r.a3).collect();
        assert!(vals.iter().any(|&v| v.abs() < 1e-12));
        assert!(vals.iter().any(|&v| (v + 1.0).abs() < 1e-12));
        assert!(roots.iter().filter(|r| (r.a3 - 1.0).abs() > 1e-7).all(|r| !r.feasible));
    }

    #[test]
    fn comp1d_degenerate_double_root() {
        // 4 (1 + sigma) = 3 alpha^2 with alpha = 2: sigma = 2
        let roots = rh_compressible_1d(2.0, 2.0, &w0()).unwrap();
        assert!(roots.iter().any(|r| (r.a3 + 1.0).abs() < 1e-9 && !r.feasible));
    }

    #[test]
    fn comp2d_identity_always_recovered() {
        let alpha = v2(0.2, 0.1);
        let roots = rh_compressible_2d(&alpha, 4.0, &w0()).unwrap();
        assert!(
            roots.iter().any(|r| (&r.a - &alpha).amax() < 1e-9),
            "identity solution missing from {roots:?}"
        );
    }

    #[test]
    fn comp2d_residuals_small_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pot = w0();
        for _ in 0..200 {
            let alpha = v2(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
            let sigma = rng.gen_range(0.1..25.0);
            for root in rh_compressible_2d(&alpha, sigma, &pot).unwrap() {
                let res = rh_residual(&alpha, &root.a, sigma, &pot, ModelVariant::Compressible2D)
                    .unwrap();
                assert!(res <= 1e-9, "residual {res} at alpha {alpha:?} sigma {sigma}");
            }
        }
    }

    #[test]
    fn comp2d_quintic_matches_bisection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let pot = w0();
        for _ in 0..200 {
            let alpha = v2(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
            let sigma = rng.gen_range(0.1..25.0);
            let quintic = comp2d_quintic(&alpha, sigma, &pot);
            let companion: Vec<f64> = real_poly_roots(&quintic)
                .into_iter()
                .filter(|y| (-50.0..=50.0).contains(y))
                .collect();
            // independent oracle: sign changes on a dense grid + bisection
            let eval = |y: f64| crate::linalg::horner(&quintic, y).0;
            let n = 200_000;
            let mut oracle = Vec::new();
            let mut prev_y = -50.0;
            let mut prev_f = eval(prev_y);
            for i in 1..=n {
                let y = -50.0 + 100.0 * (i as f64) / (n as f64);
                let f = eval(y);
                if prev_f == 0.0 {
                    oracle.push(prev_y);
                } else if prev_f * f < 0.0 {
                    let (mut lo, mut hi) = (prev_y, y);
                    let mut flo = prev_f;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let fm = eval(mid);
                        if flo * fm <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    oracle.push(0.5 * (lo + hi));
                }
                prev_y = y;
                prev_f = f;
            }
            for r in &companion {
                assert!(
                    oracle.iter().any(|o| (o - r).abs() < 1e-7),
                    "companion root {r} missing from oracle {oracle:?}"
                );
            }
            for o in &oracle {
                assert!(
                    companion.iter().any(|r| (o - r).abs() < 1e-7),
                    "oracle root {o} missing from companion {companion:?}"
                );
            }
        }
    }

    #[test]
    fn comp3d_axisymmetric_points_no_ring() {
        let alpha = DVector::from_vec(vec![0.0, 0.0, 2.0]);
        let sol = rh_compressible_3d(&alpha, 4.84, &w0()).unwrap();
        let expect = -1.0 + 0.5 * 11.36f64.sqrt();
        assert!(sol
            .points
            .iter()
            .any(|p| (p[2] - expect).abs() < 1e-9 && p[0].abs() < 1e-12 && p[1].abs() < 1e-12));
        // ring would sit at a3 = (1 + sigma - alpha3^2) alpha3 = 3.68, but
        // radius^2 = sigma - a3^2 < 0
        assert!(sol.ring.is_none());
        assert!(!sol.degenerate_out_of_plane);
    }

    #[test]
    fn comp3d_ring_present_when_radius_positive() {
        let alpha = DVector::from_vec(vec![0.0, 0.0, 0.3]);
        let sigma = 2.0;
        let sol = rh_compressible_3d(&alpha, sigma, &w0()).unwrap();
        let ring = sol.ring.expect("ring expected");
        let a3 = (1.0 + sigma - 0.09) * 0.3;
        assert_relative_eq!(ring.a3, a3, epsilon = 1e-12);
        assert_relative_eq!(ring.radius, (sigma - a3 * a3).sqrt(), epsilon = 1e-12);
        let p = DVector::from_vec(vec![ring.radius, 0.0, ring.a3]);
        let res = rh_residual(&alpha, &p, sigma, &w0(), ModelVariant::Compressible3D).unwrap();
        assert!(res < 1e-9);
    }

    #[test]
    fn comp3d_planar_embedding() {
        let alpha = DVector::from_vec(vec![0.0, 0.2, 0.1]);
        let sol = rh_compressible_3d(&alpha, 4.0, &w0()).unwrap();
        let planar = rh_compressible_2d(&v2(0.2, 0.1), 4.0, &w0()).unwrap();
        assert_eq!(sol.points.len(), planar.len());
        for p in &sol.points {
            assert!(p[0].abs() < 1e-12);
            assert!(planar
                .iter()
                .any(|q| (q.a[0] - p[1]).abs() < 1e-9 && (q.a[1] - p[2]).abs() < 1e-9));
        }
    }

    #[test]
    fn classify_figure_triple() {
        let pot = w0();
        let sigma = 3.44;
        let alpha = v2(1.0, 0.0);
        let variant = ModelVariant::Shear2D;
        let saddle = classify_equilibrium(&v2(1.0, 0.0), &alpha, sigma, &pot, variant).unwrap();
        assert_eq!(saddle.morse, MorseClass::Saddle);
        assert_relative_eq!(saddle.jacobian_eigs[0], -1.44, epsilon = 1e-12);
        assert_relative_eq!(saddle.jacobian_eigs[1], 0.56, epsilon = 1e-12);
        let attractor = classify_equilibrium(&v2(0.8, 0.0), &alpha, sigma, &pot, variant).unwrap();
        assert_eq!(attractor.morse, MorseClass::Attractor);
        assert_relative_eq!(attractor.jacobian_eigs[0], -1.8, epsilon = 1e-12);
        assert_relative_eq!(attractor.jacobian_eigs[1], -0.52, epsilon = 1e-12);
        let repellor = classify_equilibrium(&v2(-1.8, 0.0), &alpha, sigma, &pot, variant).unwrap();
        assert_eq!(repellor.morse, MorseClass::Repellor);
        assert_relative_eq!(repellor.jacobian_eigs[0], 0.8, epsilon = 1e-12);
        assert_relative_eq!(repellor.jacobian_eigs[1], 7.28, epsilon = 1e-12);
    }

    #[test]
    fn classify_rejects_non_equilibrium() {
        let res =
            classify_equilibrium(&v2(0.5, 0.2), &v2(1.0, 0.0), 3.44, &w0(), ModelVariant::Shear2D);
        assert!(matches!(res, Err(CoreError::Contract(_))));
    }

    #[test]
    fn characteristic_speed_flags_h2_violation() {
        // shear at (1, 0): m = {2, 4}; sigma = 2 hits the slow field
        let info =
            classify_equilibrium(&v2(1.0, 0.0), &v2(1.0, 0.0), 2.0, &w0(), ModelVariant::Shear2D)
                .unwrap();
        assert!(!info.hyperbolic_endstate);
    }

    #[test]
    fn classification_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pot = w0();
        for _ in 0..20 {
            let r = rng.gen_range(0.3..2.0);
            let sigma = rng.gen_range(0.5..6.0);
            let alpha = v2(r, 0.0);
            let eqs = rh_shear(&alpha, sigma, &pot).unwrap().points;
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rot = |p: &DVector<f64>| {
                v2(
                    theta.cos() * p[0] - theta.sin() * p[1],
                    theta.sin() * p[0] + theta.cos() * p[1],
                )
            };
            let alpha_r = rot(&alpha);
            for e in &eqs {
                let m1 = classify_equilibrium(e, &alpha, sigma, &pot, ModelVariant::Shear2D)
                    .unwrap()
                    .morse;
                let m2 = classify_equilibrium(&rot(e), &alpha_r, sigma, &pot, ModelVariant::Shear2D)
                    .unwrap()
                    .morse;
                assert_eq!(m1, m2);
            }
        }
    }

    #[test]
    fn morse_index_sum_is_plus_one_for_shear() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let pot = w0();
        let mut checked = 0;
        while checked < 50 {
            let alpha = v2(rng.gen_range(0.2..2.5), 0.0);
            let sigma = rng.gen_range(0.5..8.0);
            let eqs = rh_shear(&alpha, sigma, &pot).unwrap().points;
            let infos: Vec<EquilibriumInfo> = eqs
                .iter()
                .map(|e| {
                    classify_equilibrium(e, &alpha, sigma, &pot, ModelVariant::Shear2D).unwrap()
                })
                .collect();
            if infos.iter().any(|i| i.morse == MorseClass::Degenerate) {
                continue;
            }
            let sum: i32 = infos.iter().map(|i| i.index()).sum();
            assert_eq!(sum, 1, "alpha {alpha:?} sigma {sigma}");
            checked += 1;
        }
    }

    #[test]
    fn lax_shock_of_figure_three() {
        let s = 3.44f64.sqrt();
        let cand =
            shock_type(&v2(1.0, 0.0), &v2(0.8, 0.0), s, &w0(), ModelVariant::Shear2D).unwrap();
        assert_eq!(cand.shock_class, ShockClass::Lax);
        assert_eq!(cand.ell_tilde, 1);
        assert_relative_eq!(cand.sigma, 3.44, epsilon = 1e-15);
    }

    #[test]
    fn overcompressive_family_of_figure_four() {
        let s = 3.44f64.sqrt();
        let cand =
            shock_type(&v2(-1.8, 0.0), &v2(0.8, 0.0), s, &w0(), ModelVariant::Shear2D).unwrap();
        assert_eq!(cand.shock_class, ShockClass::Overcompressive);
        assert_eq!(cand.ell_tilde, 2);
    }

    #[test]
    fn fast_speed_gives_index_zero() {
        // s above every characteristic speed at both endstates: the index
        // arithmetic gives 0 + 4 - 4 = 0, labeled undercompressive
        let alpha = v2(1.0, 0.0);
        let cand = shock_type(&alpha, &alpha, 5.0, &w0(), ModelVariant::Shear2D).unwrap();
        assert_eq!(cand.ell_tilde, 0);
        assert_eq!(cand.shock_class, ShockClass::Undercompressive);
    }

    #[test]
    fn characteristic_shock_is_degenerate() {
        // s equal to the slow speed sqrt(2) at (1, 0)
        let cand = shock_type(
            &v2(1.0, 0.0),
            &v2(1.0, 0.0),
            2.0f64.sqrt(),
            &w0(),
            ModelVariant::Shear2D,
        )
        .unwrap();
        assert_eq!(cand.shock_class, ShockClass::Degenerate);
    }

    #[test]
    fn identity_returned_and_filterable() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pot = w0();
        for _ in 0..50 {
            let alpha = v2(rng.gen_range(0.2..3.0), 0.0);
            let sigma = rng.gen_range(0.5..9.0);
            let pts = rh_shear(&alpha, sigma, &pot).unwrap().points;
            assert!(pts.iter().any(|p| (p - &alpha).amax() <= 1e-7));
            let shocks: Vec<_> = pts.iter().filter(|p| (*p - &alpha).amax() > 1e-6).collect();
            assert!(shocks.len() < pts.len());
        }
    }
}
