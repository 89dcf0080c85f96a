//! Grid sweeps over `(alpha, s)` with resumable CSV output.

use crate::config::GridRange;
use crate::record::{parse_csv, pad_strain, RunRecord, CSV_HEADER};
use anyhow::{Context, Result};
use nalgebra::DVector;
use rayon::prelude::*;
use shockstab_core::contour::Verdict;
use shockstab_core::model::{ElasticPotential, ModelVariant};
use shockstab_core::pipeline::{plan_cases, run_candidate, CaseFilters, CaseSettings, PlannedRun, TargetRule};
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// A sweep: grid ranges for the strain components and the speed, a target
/// selection rule, and the sweep-level filters.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variant: ModelVariant,
    pub pot: ElasticPotential,
    /// One range per strain component of the profile variant.
    pub alpha_ranges: Vec<GridRange>,
    pub s_range: GridRange,
    pub target: TargetRule,
    pub filters: CaseFilters,
    pub settings: CaseSettings,
}

#[derive(Debug, Default)]
pub struct SweepSummary {
    pub computed: usize,
    pub reused: usize,
    pub inconclusive: usize,
    pub filtered: Vec<String>,
}

fn cartesian(ranges: &[GridRange]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for r in ranges {
        let vals = r.values();
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for prefix in &out {
            for &v in &vals {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn planned_key(variant: ModelVariant, run: &PlannedRun) -> String {
    let alpha = pad_strain(variant.profile_variant(), &run.cand.alpha);
    let ap = pad_strain(variant.profile_variant(), &run.cand.a_plus);
    format!(
        "{}|{:x}:{:x}:{:x}|{:x}|{:x}:{:x}:{:x}",
        variant.name(),
        alpha[0].to_bits(),
        alpha[1].to_bits(),
        alpha[2].to_bits(),
        run.cand.s.to_bits(),
        ap[0].to_bits(),
        ap[1].to_bits(),
        ap[2].to_bits(),
    )
}

/// Enumerate the grid, apply filters (reasons recorded), and compute one
/// record per connection. With `resume`, rows already present in the output
/// file are not recomputed.
pub fn run_sweep(spec: &SweepSpec, out_path: &Path, resume: bool) -> Result<SweepSummary> {
    let mut summary = SweepSummary::default();

    let mut existing: HashMap<String, usize> = HashMap::new();
    let mut have_file = false;
    if resume && out_path.exists() {
        let text = std::fs::read_to_string(out_path)?;
        if !text.trim().is_empty() {
            for row in parse_csv(&text)? {
                *existing.entry(row.case_key()).or_insert(0) += 1;
            }
            have_file = true;
        }
    }

    // deterministic plan: alpha grids in lexicographic order, then speeds
    let mut planned: Vec<(DVector<f64>, f64, PlannedRun)> = Vec::new();
    for alpha_vals in cartesian(&spec.alpha_ranges) {
        let alpha = DVector::from_vec(alpha_vals);
        for s in spec.s_range.values() {
            let plan = plan_cases(spec.variant, &spec.pot, &alpha, s, spec.target, spec.filters)
                .map_err(|e| anyhow::anyhow!("planning alpha={alpha:?} s={s}: {e}"))?;
            for skip in plan.skipped {
                summary.filtered.push(format!(
                    "alpha={:?} s={s}: {} -> {}: {}",
                    alpha.as_slice(),
                    fmt_vec(&skip.left),
                    fmt_vec(&skip.right),
                    skip.reason
                ));
            }
            for run in plan.runs {
                planned.push((alpha.clone(), s, run));
            }
        }
    }

    // resume bookkeeping: skip as many occurrences of each key as the file
    // already holds
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut pending: Vec<&(DVector<f64>, f64, PlannedRun)> = Vec::new();
    for item in &planned {
        let key = planned_key(spec.variant, &item.2);
        let occurrence = seen.entry(key.clone()).or_insert(0);
        if *occurrence < existing.get(&key).copied().unwrap_or(0) {
            summary.reused += 1;
        } else {
            pending.push(item);
        }
        *occurrence += 1;
    }

    let records: Vec<RunRecord> = pending
        .par_iter()
        .map(|(_, _, run)| {
            match run_candidate(&run.cand, &spec.pot, &spec.settings, run.seed.clone()) {
                Ok(result) => RunRecord::from_case(&result),
                Err(e) => RunRecord::from_failure(
                    spec.variant,
                    &run.cand.alpha,
                    &run.cand.a_plus,
                    run.cand.s,
                    run.cand.shock_class.name(),
                    &format!("error: {e}"),
                ),
            }
        })
        .collect();
    summary.computed = records.len();
    summary.inconclusive =
        records.iter().filter(|r| matches!(r.verdict, Verdict::Inconclusive(_))).count();

    let mut file = if have_file {
        std::fs::OpenOptions::new().append(true).open(out_path)?
    } else {
        let mut f = std::fs::File::create(out_path)
            .with_context(|| format!("creating {}", out_path.display()))?;
        writeln!(f, "{CSV_HEADER}")?;
        f
    };
    for rec in &records {
        writeln!(file, "{}", rec.to_csv_row())?;
    }
    file.flush()?;
    Ok(summary)
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shockstab_core::pipeline::TargetRule;

    fn tiny_spec(dir: &std::path::Path) -> (SweepSpec, std::path::PathBuf) {
        let spec = SweepSpec {
            variant: ModelVariant::Shear2D,
            pot: ElasticPotential::w0(),
            alpha_ranges: vec![GridRange::single(1.0), GridRange::single(0.0)],
            s_range: GridRange::single(1.8547),
            target: TargetRule::AllLaxPairs,
            filters: CaseFilters::default(),
            settings: CaseSettings::default(),
        };
        (spec, dir.join("sweep.csv"))
    }

    #[test]
    fn sweep_writes_rows_and_resumes_without_recomputation() {
        let dir = tempfile::tempdir().unwrap();
        let (spec, path) = tiny_spec(dir.path());
        let s1 = run_sweep(&spec, &path, true).unwrap();
        assert!(s1.computed > 0);
        let text1 = std::fs::read_to_string(&path).unwrap();
        let rows1 = parse_csv(&text1).unwrap();
        assert_eq!(rows1.len(), s1.computed);
        for r in &rows1 {
            assert_eq!(r.winding, 0);
            assert_eq!(r.verdict, Verdict::Stable);
        }
        // resume: zero new computations, identical file
        let s2 = run_sweep(&spec, &path, true).unwrap();
        assert_eq!(s2.computed, 0);
        assert_eq!(s2.reused, s1.computed);
        let text2 = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn empty_grid_emits_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(dir.path()).0;
        // a speed at which the triple degenerates to the identity only
        spec.s_range = GridRange::single(1.0);
        let path = dir.path().join("empty.csv");
        let summary = run_sweep(&spec, &path, false).unwrap();
        assert_eq!(summary.computed, 0);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim(), CSV_HEADER);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let dir = tempfile::tempdir().unwrap();
        let (spec, _) = tiny_spec(dir.path());
        let path_a = dir.path().join("a.csv");
        let path_b = dir.path().join("b.csv");
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        pool1.install(|| run_sweep(&spec, &path_a, false)).unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        pool4.install(|| run_sweep(&spec, &path_b, false)).unwrap();
        let rows_a = parse_csv(&std::fs::read_to_string(&path_a).unwrap()).unwrap();
        let rows_b = parse_csv(&std::fs::read_to_string(&path_b).unwrap()).unwrap();
        assert_eq!(rows_a.len(), rows_b.len());
        for (a, b) in rows_a.iter().zip(&rows_b) {
            assert!(a.eq_ignoring_seconds(b));
        }
    }
}
