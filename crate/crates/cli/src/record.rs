//! Flat run records and their CSV schema.

use crate::config::physical_indices;
use anyhow::{anyhow, bail, Result};
use nalgebra::DVector;
use shockstab_core::contour::Verdict;
use shockstab_core::export::format_float;
use shockstab_core::model::ModelVariant;
use shockstab_core::pipeline::CaseResult;

pub const CSV_HEADER: &str =
    "model,alpha1,alpha2,alpha3,s,ap1,ap2,ap3,shock_class,R,n_points,max_rel_step,L,winding,verdict,seconds";

/// One sweep or single-case row: the contour-report fields flattened with
/// the endstates and timing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub alpha: [f64; 3],
    pub s: f64,
    pub a_plus: [f64; 3],
    pub shock_class: String,
    pub r: f64,
    pub n_points: usize,
    pub max_rel_step: f64,
    /// Profile half-domain in the gradient-flow variable.
    pub l: f64,
    pub winding: i64,
    pub verdict: Verdict,
    pub seconds: f64,
}

/// Place strain components into the padded 3-column layout.
pub fn pad_strain(variant: ModelVariant, a: &DVector<f64>) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, &idx) in physical_indices(variant).iter().enumerate() {
        out[idx] = a[k];
    }
    out
}

fn sanitize(reason: &str) -> String {
    reason.replace([',', '\n'], ";")
}

impl RunRecord {
    pub fn from_case(result: &CaseResult) -> RunRecord {
        let variant = result.cand.variant;
        let verdict = match &result.verdict {
            Verdict::Inconclusive(r) => Verdict::Inconclusive(sanitize(r)),
            v => v.clone(),
        };
        RunRecord {
            model: variant.name().to_string(),
            alpha: pad_strain(variant.profile_variant(), &result.cand.alpha),
            s: result.cand.s,
            a_plus: pad_strain(variant.profile_variant(), &result.cand.a_plus),
            shock_class: result.cand.shock_class.name().to_string(),
            r: result.radius,
            n_points: result.report.samples.len().saturating_sub(1),
            max_rel_step: result.report.max_rel_step,
            l: result.grid.scaled_half_domain(),
            winding: result.report.winding,
            verdict,
            seconds: result.seconds,
        }
    }

    /// Row for a case that failed before producing a report.
    pub fn from_failure(
        variant: ModelVariant,
        alpha: &DVector<f64>,
        a_plus: &DVector<f64>,
        s: f64,
        shock_class: &str,
        reason: &str,
    ) -> RunRecord {
        RunRecord {
            model: variant.name().to_string(),
            alpha: pad_strain(variant.profile_variant(), alpha),
            s,
            a_plus: pad_strain(variant.profile_variant(), a_plus),
            shock_class: shock_class.to_string(),
            r: f64::NAN,
            n_points: 0,
            max_rel_step: f64::NAN,
            l: f64::NAN,
            winding: 0,
            verdict: Verdict::Inconclusive(sanitize(reason)),
            seconds: 0.0,
        }
    }

    pub fn to_csv_row(&self) -> String {
        let f = format_float;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            f(self.alpha[0]),
            f(self.alpha[1]),
            f(self.alpha[2]),
            f(self.s),
            f(self.a_plus[0]),
            f(self.a_plus[1]),
            f(self.a_plus[2]),
            self.shock_class,
            f(self.r),
            self.n_points,
            f(self.max_rel_step),
            f(self.l),
            self.winding,
            self.verdict.label(),
            f(self.seconds),
        )
    }

    pub fn parse_csv_row(row: &str) -> Result<RunRecord> {
        let tokens: Vec<&str> = row.split(',').collect();
        if tokens.len() != 16 {
            bail!("expected 16 columns, found {} in '{row}'", tokens.len());
        }
        let num =
            |i: usize| -> Result<f64> { tokens[i].parse().map_err(|e| anyhow!("col {i}: {e}")) };
        Ok(RunRecord {
            model: tokens[0].to_string(),
            alpha: [num(1)?, num(2)?, num(3)?],
            s: num(4)?,
            a_plus: [num(5)?, num(6)?, num(7)?],
            shock_class: tokens[8].to_string(),
            r: num(9)?,
            n_points: tokens[10].parse()?,
            max_rel_step: num(11)?,
            l: num(12)?,
            winding: tokens[13].parse()?,
            verdict: Verdict::parse(tokens[14]).map_err(|e| anyhow!("{e}"))?,
            seconds: num(15)?,
        })
    }

    /// Key identifying the case independently of the outcome (used for
    /// sweep resumption).
    pub fn case_key(&self) -> String {
        format!(
            "{}|{:x}:{:x}:{:x}|{:x}|{:x}:{:x}:{:x}",
            self.model,
            self.alpha[0].to_bits(),
            self.alpha[1].to_bits(),
            self.alpha[2].to_bits(),
            self.s.to_bits(),
            self.a_plus[0].to_bits(),
            self.a_plus[1].to_bits(),
            self.a_plus[2].to_bits(),
        )
    }

    /// Equality modulo the timing column (NaN-tolerant), for
    /// order-independence checks.
    pub fn eq_ignoring_seconds(&self, other: &RunRecord) -> bool {
        let feq = |a: f64, b: f64| a.total_cmp(&b).is_eq();
        self.model == other.model
            && self.alpha.iter().zip(&other.alpha).all(|(a, b)| feq(*a, *b))
            && feq(self.s, other.s)
            && self.a_plus.iter().zip(&other.a_plus).all(|(a, b)| feq(*a, *b))
            && self.shock_class == other.shock_class
            && feq(self.r, other.r)
            && self.n_points == other.n_points
            && feq(self.max_rel_step, other.max_rel_step)
            && feq(self.l, other.l)
            && self.winding == other.winding
            && self.verdict == other.verdict
    }
}

/// Parse a whole CSV document (header required).
pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => bail!("unexpected CSV header '{h}'"),
        None => bail!("empty CSV"),
    }
    lines.filter(|l| !l.trim().is_empty()).map(RunRecord::parse_csv_row).collect()
}
