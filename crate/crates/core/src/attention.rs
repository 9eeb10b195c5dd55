//! KV-cache storage, the sliding-window mask and incremental attention.
//!
//! Positions are 1-based: the first cached row is position 1, and a query at
//! position `i` may look at keys `1..=i`.

use alloc::vec::Vec;

use crate::numerics::{self, MaskEntry};
use crate::{Error, Result};

/// Which key positions a query may attend to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MaskSpec {
    /// Standard causal attention.
    FullCausal,
    /// Causal attention restricted to the first `n` positions plus the
    /// `w`-position window `i − w ..= i`.
    Sliding { n: usize, w: usize },
}

impl MaskSpec {
    pub fn sliding(n: usize, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidConfig("sliding window size must be >= 1".into()));
        }
        Ok(MaskSpec::Sliding { n, w })
    }
}

/// `j ≤ i` and, for a sliding mask, `j ≤ n ∨ i − w ≤ j`.
pub fn mask_allows(i: usize, j: usize, spec: MaskSpec) -> bool {
    if j == 0 || j > i {
        return false;
    }
    match spec {
        MaskSpec::FullCausal => true,
        MaskSpec::Sliding { n, w } => j <= n || i.saturating_sub(w) <= j,
    }
}

/// Mask entries for keys `1..=len` seen from query position `i`.
pub fn mask_row(i: usize, len: usize, spec: MaskSpec) -> Vec<MaskEntry> {
    (1..=len).map(|j| mask_allows(i, j, spec).into()).collect()
}

#[derive(Debug, Clone, PartialEq)]
struct LayerCache {
    keys: Vec<f32>,
    values: Vec<f32>,
    len: usize,
}

/// Per-layer append-only key/value rows.
///
/// Rows are only ever appended, except through [`swap_prefix`], which
/// overwrites a prefix in place.
#[derive(Debug, Clone, PartialEq)]
pub struct KvCache {
    layers: Vec<LayerCache>,
    d_k: usize,
    d_v: usize,
}

impl KvCache {
    pub fn new(n_layers: usize, d_k: usize, d_v: usize) -> Self {
        let layer = LayerCache {
            keys: Vec::new(),
            values: Vec::new(),
            len: 0,
        };
        Self {
            layers: alloc::vec![layer; n_layers],
            d_k,
            d_v,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn d_k(&self) -> usize {
        self.d_k
    }

    pub fn d_v(&self) -> usize {
        self.d_v
    }

    /// Number of positions held by the first layer (all layers agree between steps).
    pub fn len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn layer_len(&self, layer: usize) -> usize {
        self.layers[layer].len
    }

    pub fn append(&mut self, layer: usize, k_row: &[f32], v_row: &[f32]) -> Result<()> {
        if layer >= self.layers.len() {
            return Err(Error::PositionOutOfRange {
                index: layer,
                len: self.layers.len(),
            });
        }
        if k_row.len() != self.d_k {
            return Err(Error::DimensionMismatch {
                op: "cache append (key)",
                expected: self.d_k,
                found: k_row.len(),
            });
        }
        if v_row.len() != self.d_v {
            return Err(Error::DimensionMismatch {
                op: "cache append (value)",
                expected: self.d_v,
                found: v_row.len(),
            });
        }
        numerics::check_finite("cache append", k_row)?;
        numerics::check_finite("cache append", v_row)?;
        let l = &mut self.layers[layer];
        l.keys.extend_from_slice(k_row);
        l.values.extend_from_slice(v_row);
        l.len += 1;
        Ok(())
    }

    /// Key row at 1-based `position`.
    pub fn key(&self, layer: usize, position: usize) -> &[f32] {
        let start = (position - 1) * self.d_k;
        &self.layers[layer].keys[start..start + self.d_k]
    }

    /// Value row at 1-based `position`.
    pub fn value(&self, layer: usize, position: usize) -> &[f32] {
        let start = (position - 1) * self.d_v;
        &self.layers[layer].values[start..start + self.d_v]
    }

    /// FNV-1a over the bit patterns of rows `from..=len` in every layer.
    pub fn checksum_from(&self, from: usize) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for l in &self.layers {
            let keys = &l.keys[(from.max(1) - 1) * self.d_k..];
            let values = &l.values[(from.max(1) - 1) * self.d_v..];
            for v in keys.iter().chain(values) {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}

/// Overwrites rows `1..=n` of `dst` with those of `src` in every layer.
///
/// Rows after `n` and the length of `dst` are untouched.
pub fn swap_prefix(dst: &mut KvCache, src: &KvCache, n: usize) -> Result<()> {
    if dst.layers.len() != src.layers.len() {
        return Err(Error::DimensionMismatch {
            op: "swap_prefix (layers)",
            expected: dst.layers.len(),
            found: src.layers.len(),
        });
    }
    if dst.d_k != src.d_k || dst.d_v != src.d_v {
        return Err(Error::DimensionMismatch {
            op: "swap_prefix (row width)",
            expected: dst.d_k,
            found: src.d_k,
        });
    }
    let (dst_len, src_len) = (dst.len(), src.len());
    if n > dst_len || n > src_len {
        return Err(Error::SwapOutOfRange {
            n,
            dst_len,
            src_len,
        });
    }
    let (d_k, d_v) = (dst.d_k, dst.d_v);
    for (d, s) in dst.layers.iter_mut().zip(&src.layers) {
        d.keys[..n * d_k].copy_from_slice(&s.keys[..n * d_k]);
        d.values[..n * d_v].copy_from_slice(&s.values[..n * d_v]);
    }
    Ok(())
}

/// Output of one attention evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Attended {
    pub context: Vec<f32>,
    /// Softmax weights over positions `1..=i` (blocked positions are 0).
    pub weights: Vec<f32>,
    /// Number of mask-allowed key positions.
    pub allowed: usize,
}

/// Scaled dot-product attention of `q` against cached rows `1..=i` of `layer`.
pub fn attend(q: &[f32], cache: &KvCache, layer: usize, i: usize, spec: MaskSpec) -> Result<Vec<f32>> {
    attend_detailed(q, cache, layer, i, spec).map(|a| a.context)
}

pub fn attend_detailed(
    q: &[f32],
    cache: &KvCache,
    layer: usize,
    i: usize,
    spec: MaskSpec,
) -> Result<Attended> {
    if layer >= cache.n_layers() {
        return Err(Error::PositionOutOfRange {
            index: layer,
            len: cache.n_layers(),
        });
    }
    let len = cache.layer_len(layer);
    if len == 0 {
        return Err(Error::Empty("attend (cache)"));
    }
    if i == 0 || i > len {
        return Err(Error::PositionOutOfRange { index: i, len });
    }
    if q.len() != cache.d_k {
        return Err(Error::DimensionMismatch {
            op: "attend (query)",
            expected: cache.d_k,
            found: q.len(),
        });
    }
    let mask = mask_row(i, i, spec);
    let scale = 1.0 / libm::sqrtf(cache.d_k as f32);
    let scores: Vec<f32> = (1..=i)
        .zip(&mask)
        .map(|(j, m)| {
            if m.is_allowed() {
                numerics::dot(q, cache.key(layer, j)) * scale
            } else {
                0.0
            }
        })
        .collect();
    let weights = numerics::masked_softmax(&scores, &mask)?;
    let mut context = alloc::vec![0.0f32; cache.d_v];
    for (j, &w) in (1..=i).zip(&weights) {
        if w != 0.0 {
            for (c, &v) in context.iter_mut().zip(cache.value(layer, j)) {
                *c += w * v;
            }
        }
    }
    let allowed = mask.iter().filter(|m| m.is_allowed()).count();
    Ok(Attended {
        context,
        weights,
        allowed,
    })
}
