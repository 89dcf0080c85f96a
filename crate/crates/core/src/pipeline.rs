//! Single-case orchestration: from an endstate pair (or a generating
//! `(alpha, s)` point) through the profile, the Evans evaluator, radius
//! selection, and the winding verdict. Shared by the CLI and the benches.

use crate::contour::{
    choose_radius, verdict, winding_number, AsymptoticFit, ContourReport, ContourSpec, Verdict,
};
use crate::equilibria::{
    classify_equilibrium, equilibria_for, shock_type, MorseClass, ShockCandidate, ShockClass,
};
use crate::error::{CoreError, Result};
use crate::evans::{DruryOptions, EvansEvaluator, EvansSystem};
use crate::model::{ElasticPotential, ModelVariant};
use crate::profile::{compute_profile, ProfileGrid, ProfileOptions};
use nalgebra::DVector;

/// Knobs of a single stability computation.
#[derive(Debug, Clone)]
pub struct CaseSettings {
    pub profile: ProfileOptions,
    pub drury: DruryOptions,
    pub contour: ContourSpec,
    /// Starting radius for the doubling search.
    pub r_start: f64,
    /// Real anchor point of the analytic bases.
    pub lambda_ref: f64,
}

impl Default for CaseSettings {
    fn default() -> Self {
        CaseSettings {
            profile: ProfileOptions::default(),
            drury: DruryOptions::default(),
            contour: ContourSpec::new(2.0),
            r_start: 2.0,
            lambda_ref: 1.0,
        }
    }
}

/// Everything a single case produced.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub cand: ShockCandidate,
    pub grid: ProfileGrid,
    pub radius: f64,
    pub fit: Option<AsymptoticFit>,
    pub report: ContourReport,
    pub verdict: Verdict,
    pub seconds: f64,
}

/// Run the full stability pipeline for one candidate (optionally shooting
/// from an interior seed for overcompressive families).
pub fn run_candidate(
    cand: &ShockCandidate,
    pot: &ElasticPotential,
    settings: &CaseSettings,
    seed: Option<DVector<f64>>,
) -> Result<CaseResult> {
    let start = std::time::Instant::now();
    let mut profile_opts = settings.profile.clone();
    profile_opts.seed = seed;
    let grid = compute_profile(cand, pot, &profile_opts)?;
    let sys = EvansSystem::new(cand.variant, &grid, pot)?;
    let mut evaluator = EvansEvaluator::new(sys, settings.lambda_ref, settings.drury.clone())?;

    let (radius, fit) = match choose_radius(&mut evaluator, settings.r_start) {
        Ok((r, fit)) => (r, Some(fit)),
        Err(CoreError::FitFailure(reason)) => {
            // high-frequency bound not certified: report and stop
            let spec = ContourSpec { radius: settings.r_start, ..settings.contour.clone() };
            let report = ContourReport {
                spec,
                samples: Vec::new(),
                refinements: 0,
                winding: 0,
                max_rel_step: f64::NAN,
                mean_rel_step: f64::NAN,
                verdict: Verdict::Inconclusive(reason.clone()),
            };
            return Ok(CaseResult {
                cand: cand.clone(),
                grid,
                radius: f64::NAN,
                fit: None,
                verdict: Verdict::Inconclusive(reason),
                report,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        Err(e) => return Err(e),
    };
    let spec = ContourSpec { radius, ..settings.contour.clone() };
    let report = winding_number(&mut evaluator, &spec)?;
    let verdict = verdict(&report, cand);
    Ok(CaseResult {
        cand: cand.clone(),
        grid,
        radius,
        fit,
        report,
        verdict,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Which connections of a phase-portrait configuration to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetRule {
    /// Every Lax pair among the rest points generated by `(alpha, s)`.
    AllLaxPairs,
    /// The overcompressive family only, seeded at interior points.
    OvercompressiveFamily { n_interior: usize },
    /// All Lax pairs plus the overcompressive family (the four-point
    /// configurations of the sweeps).
    FourPointConfigurations { n_interior: usize },
}

/// Sweep-level filters, applied with logged reasons.
#[derive(Debug, Clone, Copy)]
pub struct CaseFilters {
    pub require_hyperbolic_endstates: bool,
    pub require_feasible: bool,
}

impl Default for CaseFilters {
    fn default() -> Self {
        CaseFilters { require_hyperbolic_endstates: true, require_feasible: true }
    }
}

/// One planned profile-plus-winding run.
#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub cand: ShockCandidate,
    pub seed: Option<DVector<f64>>,
    /// Distinguishes members of an overcompressive family.
    pub family_index: Option<usize>,
}

/// A pair that was considered and skipped, with the reason.
#[derive(Debug, Clone)]
pub struct SkippedCase {
    pub left: DVector<f64>,
    pub right: DVector<f64>,
    pub reason: String,
}

/// The runnable connections of one `(alpha, s)` configuration.
#[derive(Debug, Clone)]
pub struct CasePlan {
    pub runs: Vec<PlannedRun>,
    pub skipped: Vec<SkippedCase>,
}

/// Enumerate the connections generated by `(alpha, s)`: all rest points of
/// the profile flow are mutually RH-related, ordered pairs are typed, and
/// the target rule plus filters select what runs.
pub fn plan_cases(
    variant: ModelVariant,
    pot: &ElasticPotential,
    alpha: &DVector<f64>,
    s: f64,
    rule: TargetRule,
    filters: CaseFilters,
) -> Result<CasePlan> {
    let profile_variant = variant.profile_variant();
    let sigma = s * s;
    let points = equilibria_for(alpha, sigma, pot, profile_variant)?;
    let infos: Vec<_> = points
        .iter()
        .map(|p| classify_equilibrium(p, alpha, sigma, pot, profile_variant))
        .collect::<Result<Vec<_>>>()?;
    let mut plan = CasePlan { runs: Vec::new(), skipped: Vec::new() };

    let want_lax = matches!(
        rule,
        TargetRule::AllLaxPairs | TargetRule::FourPointConfigurations { .. }
    );
    let oc_seeds = match rule {
        TargetRule::OvercompressiveFamily { n_interior } => Some(n_interior),
        TargetRule::FourPointConfigurations { n_interior } => Some(n_interior),
        TargetRule::AllLaxPairs => None,
    };

    for (i, left) in points.iter().enumerate() {
        for (j, right) in points.iter().enumerate() {
            if i == j || (left - right).norm() <= 1e-6 {
                continue;
            }
            let skip = |reason: String, plan: &mut CasePlan| {
                plan.skipped.push(SkippedCase {
                    left: left.clone(),
                    right: right.clone(),
                    reason,
                });
            };
            if filters.require_feasible && !(infos[i].feasible && infos[j].feasible) {
                skip("infeasible endstate (a3 <= 0)".into(), &mut plan);
                continue;
            }
            if filters.require_hyperbolic_endstates
                && !(infos[i].hyperbolic_endstate && infos[j].hyperbolic_endstate)
            {
                skip("endstate outside the strict hyperbolicity region".into(), &mut plan);
                continue;
            }
            // a connection must leave the left state and enter the right one
            let departs = matches!(infos[i].morse, MorseClass::Saddle | MorseClass::Repellor);
            let arrives = matches!(infos[j].morse, MorseClass::Saddle | MorseClass::Attractor);
            if !departs || !arrives {
                skip(format!(
                    "no orbit from a {:?} to a {:?}",
                    infos[i].morse, infos[j].morse
                ), &mut plan);
                continue;
            }
            let cand = shock_type(left, right, s, pot, variant)?;
            match cand.shock_class {
                ShockClass::Lax if want_lax => {
                    plan.runs.push(PlannedRun { cand, seed: None, family_index: None });
                }
                ShockClass::Overcompressive => {
                    if let Some(n) = oc_seeds {
                        // seed points on the segment between the two saddles
                        // when the configuration has them, otherwise between
                        // the endstates themselves
                        let saddles: Vec<&DVector<f64>> = points
                            .iter()
                            .zip(&infos)
                            .filter(|(_, inf)| inf.morse == MorseClass::Saddle)
                            .map(|(p, _)| p)
                            .collect();
                        let (seg_a, seg_b) = if saddles.len() == 2 {
                            (saddles[0].clone(), saddles[1].clone())
                        } else {
                            (left.clone(), right.clone())
                        };
                        for idx in 1..=n {
                            let t = idx as f64 / (n + 1) as f64;
                            let seed = &seg_a * (1.0 - t) + &seg_b * t;
                            plan.runs.push(PlannedRun {
                                cand: cand.clone(),
                                seed: Some(seed),
                                family_index: Some(idx),
                            });
                        }
                    }
                }
                ShockClass::Degenerate => {
                    skip("degenerate (characteristic) pair".into(), &mut plan);
                }
                _ => {}
            }
        }
    }
    Ok(plan)
}
