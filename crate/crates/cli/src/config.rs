//! Flat key=value configuration files, grid-range notation, and strain
//! vector parsing shared by the subcommands.

use anyhow::{anyhow, bail, Context, Result};
use shockstab_core::model::ModelVariant;
use std::collections::BTreeMap;
use std::path::Path;

/// `start:step:stop` grid (inclusive of `stop` when it lands within 1e-12),
/// or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl GridRange {
    pub fn single(v: f64) -> Self {
        GridRange { start: v, step: 1.0, stop: v }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.len() {
            1 => Ok(GridRange::single(parts[0].trim().parse()?)),
            3 => {
                let start: f64 = parts[0].trim().parse()?;
                let step: f64 = parts[1].trim().parse()?;
                let stop: f64 = parts[2].trim().parse()?;
                if step <= 0.0 {
                    bail!("grid step must be positive in '{text}'");
                }
                if stop < start {
                    bail!("grid stop below start in '{text}'");
                }
                Ok(GridRange { start, step, stop })
            }
            _ => bail!("expected 'value' or 'start:step:stop', got '{text}'"),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let v = self.start + self.step * k as f64;
            if v > self.stop + 1e-12 {
                break;
            }
            out.push(v);
            k += 1;
            if k > 1_000_000 {
                break;
            }
        }
        out
    }
}

/// Parse a comma-separated strain vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad number '{t}': {e}")))
        .collect()
}

/// Parse an endstate pair `a1,a2:b1,b2`.
pub fn parse_connect(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("expected 'left:right' endstate pair in '{text}'"))?;
    Ok((parse_vector(a)?, parse_vector(b)?))
}

/// Load a flat `key = value` file; '#' starts a comment, blank lines are
/// ignored, later keys override earlier ones.
pub fn load_key_value(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_key_value(&text)
}

pub fn parse_key_value(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value'", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Map CLI grid flags (`alpha1`..`alpha3`) onto the strain components of a
/// variant; the indices match the physical columns of the run records.
pub fn physical_indices(variant: ModelVariant) -> &'static [usize] {
    match variant {
        ModelVariant::Compressible3D => &[0, 1, 2],
        ModelVariant::Compressible2D | ModelVariant::Transverse => &[1, 2],
        ModelVariant::Shear2D => &[0, 1],
        ModelVariant::Shear1D => &[0],
        ModelVariant::Compressible1D => &[2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_inclusive_of_stop() {
        let r = GridRange::parse("0.2:0.2:5").unwrap();
        let vals = r.values();
        assert_eq!(vals.len(), 25);
        assert!((vals[0] - 0.2).abs() < 1e-15);
        assert!((vals.last().unwrap() - 5.0).abs() < 1e-12);
        let single = GridRange::parse("1.8547").unwrap();
        assert_eq!(single.values(), vec![1.8547]);
    }

    #[test]
    fn key_value_parsing() {
        let map = parse_key_value("model = shear2d\n# comment\ns = 1.8547  # inline\n").unwrap();
        assert_eq!(map["model"], "shear2d");
        assert_eq!(map["s"], "1.8547");
        assert!(parse_key_value("oops").is_err());
    }

    #[test]
    fn vectors_and_pairs() {
        assert_eq!(parse_vector("1,0").unwrap(), vec![1.0, 0.0]);
        let (a, b) = parse_connect("1,0:0.8,0").unwrap();
        assert_eq!(a, vec![1.0, 0.0]);
        assert_eq!(b, vec![0.8, 0.0]);
    }
}
