//! Command-line surface for the shock-stability pipeline: single runs,
//! grid sweeps with resumable CSV output, phase portraits, the dispersion
//! and undercompressive harnesses, and figure emission.

pub mod config;
pub mod record;
pub mod single;
pub mod sweep;

pub use config::GridRange;
pub use record::{RunRecord, CSV_HEADER};
pub use single::{run_single, SingleConfig, SingleOutcome};
pub use sweep::{run_sweep, SweepSpec, SweepSummary};

use anyhow::Result;
use shockstab_core::export;
use shockstab_core::pipeline::CaseResult;
use std::path::Path;

/// Write the figures of a completed case: the profile and the image of the
/// contour under the Evans function.
pub fn emit_case_figures(result: &CaseResult, dir: &Path, stem: &str) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let profile = dir.join(format!("{stem}_profile.svg"));
    std::fs::write(&profile, export::profile_svg(&result.grid))?;
    written.push(profile.display().to_string());
    if !result.report.samples.is_empty() {
        let evans = dir.join(format!("{stem}_evans.svg"));
        std::fs::write(&evans, export::evans_image_svg(&result.report))?;
        written.push(evans.display().to_string());
    }
    Ok(written)
}
