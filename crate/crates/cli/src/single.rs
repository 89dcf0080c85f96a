//! Single-case runs: one explicit connection, or every connection of the
//! configuration generated by `(alpha, s)`.

use crate::record::RunRecord;
use anyhow::{bail, Result};
use nalgebra::DVector;
use shockstab_core::equilibria::{classify_equilibrium, shock_type, snap_to_rh};
use shockstab_core::model::{ElasticPotential, ModelVariant, ViscosityKind};
use shockstab_core::pipeline::{
    plan_cases, run_candidate, CaseFilters, CaseResult, CaseSettings, TargetRule,
};

/// Configuration of a single-case run.
#[derive(Debug, Clone)]
pub struct SingleConfig {
    pub variant: ModelVariant,
    pub pot: ElasticPotential,
    pub alpha: DVector<f64>,
    pub s: f64,
    /// Explicit endstate pair; otherwise the whole configuration runs.
    pub connect: Option<(DVector<f64>, DVector<f64>)>,
    pub viscosity: ViscosityKind,
    pub target: TargetRule,
    pub filters: CaseFilters,
    pub settings: CaseSettings,
}

/// Outcome of a single-case run: the completed results and the connections
/// that were filtered, with reasons.
#[derive(Debug)]
pub struct SingleOutcome {
    pub results: Vec<CaseResult>,
    pub records: Vec<RunRecord>,
    pub skipped: Vec<String>,
}

/// Screen the generating state itself, before any profile work.
pub fn screen_alpha(cfg: &SingleConfig) -> Result<Option<String>> {
    let variant = cfg.variant.profile_variant();
    let info = classify_equilibrium(&cfg.alpha, &cfg.alpha, cfg.s * cfg.s, &cfg.pot, variant)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    if !info.feasible {
        return Ok(Some("alpha is not physically feasible (a3 <= 0)".into()));
    }
    if !info.hyperbolic_endstate {
        let ch = shockstab_core::model::characteristics(&cfg.alpha, &cfg.pot, variant)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        if ch.m.iter().any(|&m| m <= 0.0) {
            return Ok(Some(
                "alpha lies outside the strict hyperbolicity region (a characteristic \
                 speed is not real)"
                    .into(),
            ));
        }
        return Ok(Some(
            "alpha violates noncharacteristicity: s matches a characteristic speed, or \
             the characteristics are degenerate"
                .into(),
        ));
    }
    Ok(None)
}

/// Run the configured case(s).
pub fn run_single(cfg: &SingleConfig) -> Result<SingleOutcome> {
    if cfg.viscosity != ViscosityKind::Z2 {
        bail!("profile and Evans computations use the Z2 viscosity; Z1 is a model-layer option");
    }
    let mut outcome = SingleOutcome { results: Vec::new(), records: Vec::new(), skipped: Vec::new() };
    if let Some((left, right)) = &cfg.connect {
        // snap figure-precision endstates onto the exact RH solution
        let right = snap_to_rh(right, left, cfg.s * cfg.s, &cfg.pot, cfg.variant, 0.05)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let cand = shock_type(left, &right, cfg.s, &cfg.pot, cfg.variant)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let result = run_candidate(&cand, &cfg.pot, &cfg.settings, None)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        outcome.records.push(RunRecord::from_case(&result));
        outcome.results.push(result);
        return Ok(outcome);
    }
    if let Some(reason) = screen_alpha(cfg)? {
        outcome.skipped.push(reason);
        return Ok(outcome);
    }
    let plan = plan_cases(cfg.variant, &cfg.pot, &cfg.alpha, cfg.s, cfg.target, cfg.filters)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    for skip in plan.skipped {
        outcome.skipped.push(format!(
            "{:?} -> {:?}: {}",
            skip.left.as_slice(),
            skip.right.as_slice(),
            skip.reason
        ));
    }
    for run in plan.runs {
        match run_candidate(&run.cand, &cfg.pot, &cfg.settings, run.seed.clone()) {
            Ok(result) => {
                outcome.records.push(RunRecord::from_case(&result));
                outcome.results.push(result);
            }
            Err(e) => outcome.records.push(RunRecord::from_failure(
                cfg.variant,
                &run.cand.alpha,
                &run.cand.a_plus,
                run.cand.s,
                run.cand.shock_class.name(),
                &format!("error: {e}"),
            )),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use shockstab_core::contour::Verdict;

    fn base(variant: ModelVariant, alpha: Vec<f64>, s: f64) -> SingleConfig {
        SingleConfig {
            variant,
            pot: ElasticPotential::w0(),
            alpha: DVector::from_vec(alpha),
            s,
            connect: None,
            viscosity: ViscosityKind::Z2,
            target: TargetRule::FourPointConfigurations { n_interior: 5 },
            filters: CaseFilters::default(),
            settings: CaseSettings::default(),
        }
    }

    #[test]
    fn explicit_connection_matches_figure_three() {
        let mut cfg = base(ModelVariant::Shear2D, vec![1.0, 0.0], 1.8547);
        cfg.connect =
            Some((DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.8, 0.0])));
        let outcome = run_single(&cfg).unwrap();
        assert_eq!(outcome.records.len(), 1);
        let rec = &outcome.records[0];
        assert_eq!(rec.shock_class, "lax");
        assert_eq!(rec.winding, 0);
        assert_eq!(rec.verdict, Verdict::Stable);
    }

    #[test]
    fn nonhyperbolic_alpha_is_filtered_with_reason() {
        let cfg = base(ModelVariant::Compressible1D, vec![0.5], 1.3);
        let outcome = run_single(&cfg).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.skipped.len(), 1);
        assert!(outcome.skipped[0].contains("hyperbolicity"));
    }

    #[test]
    fn z1_viscosity_is_rejected_for_runs() {
        let mut cfg = base(ModelVariant::Shear2D, vec![1.0, 0.0], 1.8547);
        cfg.viscosity = ViscosityKind::Z1;
        assert!(run_single(&cfg).is_err());
    }
}
