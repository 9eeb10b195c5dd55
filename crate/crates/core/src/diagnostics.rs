//! Cross-attention variance and attention-map export.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::decoder::GenerationTrace;
use crate::numerics::Matrix;
use crate::{Error, Result};

/// Population variance of the cross-attention weights over style tokens,
/// indexed by generated position and layer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceSeries {
    /// `values[t][layer]` for step `t + 1`.
    pub values: Vec<Vec<f64>>,
}

impl VarianceSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layers(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn layer(&self, layer: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[layer]).collect()
    }

    /// Largest variance of `layer` over the steps in `range` (1-based, inclusive start).
    pub fn max_over(&self, layer: usize, steps: core::ops::Range<usize>) -> Option<f64> {
        self.slice(layer, steps).reduce(f64::max)
    }

    pub fn min_over(&self, layer: usize, steps: core::ops::Range<usize>) -> Option<f64> {
        self.slice(layer, steps).reduce(f64::min)
    }

    fn slice(&self, layer: usize, steps: core::ops::Range<usize>) -> impl Iterator<Item = f64> + '_ {
        let end = steps.end.min(self.values.len() + 1);
        let start = steps.start.max(1);
        (start..end.max(start)).map(move |t| self.values[t - 1][layer])
    }
}

fn population_variance(weights: &[f32]) -> f64 {
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for (i, &w) in weights.iter().enumerate() {
        let x = w as f64;
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    (m2 / weights.len() as f64).max(0.0)
}

pub fn attention_variance(trace: &GenerationTrace) -> Result<VarianceSeries> {
    if trace.is_empty() {
        return Err(Error::Empty("generation trace"));
    }
    let layers = trace.entries[0].cross_weights.len();
    let mut values = Vec::with_capacity(trace.len());
    for entry in &trace.entries {
        if entry.cross_weights.len() != layers {
            return Err(Error::DimensionMismatch {
                op: "attention_variance",
                expected: layers,
                found: entry.cross_weights.len(),
            });
        }
        let mut row = Vec::with_capacity(layers);
        for weights in &entry.cross_weights {
            check_distribution(weights)?;
            row.push(population_variance(weights));
        }
        values.push(row);
    }
    Ok(VarianceSeries { values })
}

fn check_distribution(weights: &[f32]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Empty("attention row"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("attention row is not a distribution"));
    }
    let total: f64 = weights.iter().map(|&w| w as f64).sum();
    if (total - 1.0).abs() > 1e-3 {
        return Err(Error::InvalidConfig(format!(
            "attention row sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// Cross-attention map of one layer: rows are style tokens, columns are steps.
pub fn attention_map(trace: &GenerationTrace, layer: usize) -> Result<Matrix> {
    if trace.is_empty() {
        return Err(Error::Empty("generation trace"));
    }
    let style_len = trace.entries[0]
        .cross_weights
        .get(layer)
        .ok_or(Error::PositionOutOfRange {
            index: layer,
            len: trace.entries[0].cross_weights.len(),
        })?
        .len();
    let mut map = Matrix::zeros(style_len, trace.len());
    for (t, entry) in trace.entries.iter().enumerate() {
        let row = entry.cross_weights.get(layer).ok_or(Error::PositionOutOfRange {
            index: layer,
            len: entry.cross_weights.len(),
        })?;
        if row.len() != style_len {
            return Err(Error::DimensionMismatch {
                op: "attention_map",
                expected: style_len,
                found: row.len(),
            });
        }
        for (s, &w) in row.iter().enumerate() {
            map.set(s, t, w);
        }
    }
    Ok(map)
}

/// CSV text for an attention map: header `style,1,2,…` then one row per style token.
/// Cells keep 6 significant digits.
pub fn attention_map_csv(map: &Matrix) -> String {
    let mut out = String::from("style");
    for t in 1..=map.cols() {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for s in 0..map.rows() {
        let _ = write!(out, "{s}");
        for &w in map.row(s) {
            let _ = write!(out, ",{w:.5e}");
        }
        out.push('\n');
    }
    out
}

/// Parses CSV written by [`attention_map_csv`].
pub fn parse_attention_map_csv(text: &str) -> Result<Matrix> {
    let bad = |line: usize| Error::InvalidConfig(format!("malformed attention map at line {line}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(Error::Empty("attention map"))?;
    let cols = header.split(',').count().saturating_sub(1);
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        fields.next();
        let before = data.len();
        for f in fields {
            data.push(f.trim().parse::<f32>().map_err(|_| bad(i + 2))?);
        }
        if data.len() - before != cols {
            return Err(bad(i + 2));
        }
        rows += 1;
    }
    Matrix::new(rows, cols, data)
}
