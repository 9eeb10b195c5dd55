//! Prompt embeddings and direction-vector interpolation between two styles.
//!
//! Style prompts are encoded by a small contextual encoder (lookup followed by
//! one unmasked self-attention pass). Two prompts that differ only at their
//! attribute positions yield a direction vector `d_i = ½(e_i^t − e_i^s)`;
//! moving the source embedding by `α·d_i` at those positions gives a style
//! that is the source at `α = 0` and the target at `α = 2`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::numerics::{self, Matrix};
use crate::{Error, Result};

/// Default α grid for inter-utterance sweeps (extends past `[0, 2]` on the low side).
pub const DEFAULT_ALPHA_GRID: [f32; 7] = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

/// Default β grid for full-vector interpolation.
pub const DEFAULT_BETA_GRID: [f32; 7] = [-0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0];

/// Encoder outputs for one style prompt plus the positions of its attribute tokens.
///
/// Attribute positions are 0-based indices into `vectors`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PromptEmbedding {
    vectors: Matrix,
    attr_positions: BTreeSet<usize>,
}

impl PromptEmbedding {
    pub fn new(vectors: Matrix, attr_positions: BTreeSet<usize>) -> Result<Self> {
        if vectors.rows() == 0 {
            return Err(Error::Empty("prompt embedding"));
        }
        check_positions(&attr_positions, vectors.rows())?;
        Ok(Self {
            vectors,
            attr_positions,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        self.vectors.row(i)
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn attr_positions(&self) -> &BTreeSet<usize> {
        &self.attr_positions
    }

    fn same_shape(&self, other: &PromptEmbedding, op: &'static str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.len(),
                found: other.len(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn check_positions(positions: &BTreeSet<usize>, len: usize) -> Result<()> {
    match positions.iter().find(|&&p| p >= len) {
        Some(&index) => Err(Error::PositionOutOfRange { index, len }),
        None => Ok(()),
    }
}

/// Per-attribute-position displacement vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVector {
    entries: Vec<(usize, Vec<f32>)>,
    dim: usize,
}

impl DirectionVector {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(p, _)| *p)
    }

    pub fn get(&self, position: usize) -> Option<&[f32]> {
        self.entries
            .iter()
            .find(|(p, _)| *p == position)
            .map(|(_, v)| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f32])> {
        self.entries.iter().map(|(p, v)| (*p, v.as_slice()))
    }
}

/// Token table plus one self-attention projection set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncoderWeights {
    pub token_embedding: Matrix,
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
}

impl EncoderWeights {
    pub fn dim(&self) -> usize {
        self.token_embedding.cols()
    }

    pub fn vocab(&self) -> usize {
        self.token_embedding.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for m in [&self.wq, &self.wk, &self.wv, &self.wo] {
            if m.rows() != d || m.cols() != d {
                return Err(Error::DimensionMismatch {
                    op: "encoder projection",
                    expected: d,
                    found: if m.rows() != d { m.rows() } else { m.cols() },
                });
            }
        }
        Ok(())
    }
}

/// Encodes a style prompt: `out_i = x_i + Σ_j softmax(q_i·k_j/√d)_j (x_j Wv) Wo`.
///
/// The mixing pass is unmasked, so every output position depends on every
/// token of the prompt.
pub fn encode_prompt(
    token_ids: &[usize],
    attr_positions: &BTreeSet<usize>,
    weights: &EncoderWeights,
) -> Result<PromptEmbedding> {
    weights.validate()?;
    if token_ids.is_empty() {
        return Err(Error::Empty("encode_prompt"));
    }
    check_positions(attr_positions, token_ids.len())?;
    let vocab = weights.vocab();
    let mut rows = Vec::with_capacity(token_ids.len());
    for &id in token_ids {
        if id >= vocab {
            return Err(Error::TokenOutOfVocab { id, vocab });
        }
        rows.push(weights.token_embedding.row(id).to_vec());
    }
    let x = Matrix::from_rows(&rows)?;
    let q = numerics::matmul(&x, &weights.wq)?;
    let k = numerics::matmul(&x, &weights.wk)?;
    let v = numerics::matmul(&x, &weights.wv)?;
    let scale = 1.0 / libm::sqrtf(weights.dim() as f32);

    let mut out = Vec::with_capacity(token_ids.len());
    for i in 0..token_ids.len() {
        let scores: Vec<f32> = (0..token_ids.len())
            .map(|j| numerics::dot(q.row(i), k.row(j)) * scale)
            .collect();
        let attn = numerics::softmax(&scores)?;
        let mut mixed = alloc::vec![0.0f32; weights.dim()];
        for (j, &a) in attn.iter().enumerate() {
            for (m, &vv) in mixed.iter_mut().zip(v.row(j)) {
                *m += a * vv;
            }
        }
        let mut row = numerics::vec_mat(&mixed, &weights.wo)?;
        for (r, &xv) in row.iter_mut().zip(x.row(i)) {
            *r += xv;
        }
        out.push(row);
    }
    PromptEmbedding::new(Matrix::from_rows(&out)?, attr_positions.clone())
}

/// `d_i = ½(e_i^t − e_i^s)` for every `i` in `positions`.
pub fn compute_direction(
    src: &PromptEmbedding,
    tgt: &PromptEmbedding,
    positions: &BTreeSet<usize>,
) -> Result<DirectionVector> {
    src.same_shape(tgt, "compute_direction")?;
    check_positions(positions, src.len())?;
    let entries = positions
        .iter()
        .map(|&i| (i, half_difference(src.vector(i), tgt.vector(i))))
        .collect();
    Ok(DirectionVector {
        entries,
        dim: src.dim(),
    })
}

fn half_difference(src: &[f32], tgt: &[f32]) -> Vec<f32> {
    src.iter().zip(tgt).map(|(s, t)| 0.5 * (t - s)).collect()
}

/// `s + strength·d`, leaving `s` untouched wherever the displacement is zero.
fn shifted(s: f32, strength: f32, d: f32) -> f32 {
    let delta = strength * d;
    if delta == 0.0 {
        s
    } else {
        s + delta
    }
}

/// Moves the attribute positions of `src` by `alpha·d_i`; all other positions
/// are copied unchanged. `alpha` is unrestricted: values outside `[0, 2]`
/// extrapolate past the source or target.
pub fn interpolate(
    src: &PromptEmbedding,
    dir: &DirectionVector,
    alpha: f32,
) -> Result<PromptEmbedding> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("interpolate"));
    }
    if dir.dim != src.dim() {
        return Err(Error::DimensionMismatch {
            op: "interpolate",
            expected: src.dim(),
            found: dir.dim,
        });
    }
    if let Some(index) = dir.positions().find(|p| !src.attr_positions.contains(p)) {
        return Err(Error::PositionOutOfRange {
            index,
            len: src.len(),
        });
    }
    let mut vectors = src.vectors.clone();
    for (i, d) in dir.iter() {
        for (c, &dc) in d.iter().enumerate() {
            vectors.set(i, c, shifted(src.vectors.get(i, c), alpha, dc));
        }
    }
    PromptEmbedding::new(vectors, src.attr_positions.clone())
}

/// Full-vector variant: attribute positions move by `alpha·½(e^t − e^s)` and
/// every other position by `beta·½(e^t − e^s)`.
pub fn interpolate_full(
    src: &PromptEmbedding,
    tgt: &PromptEmbedding,
    alpha: f32,
    beta: f32,
    positions: &BTreeSet<usize>,
) -> Result<PromptEmbedding> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::NonFinite("interpolate_full"));
    }
    src.same_shape(tgt, "interpolate_full")?;
    check_positions(positions, src.len())?;
    let mut vectors = src.vectors.clone();
    for i in 0..src.len() {
        let strength = if positions.contains(&i) { alpha } else { beta };
        let d = half_difference(src.vector(i), tgt.vector(i));
        for (c, &dc) in d.iter().enumerate() {
            vectors.set(i, c, shifted(src.vectors.get(i, c), strength, dc));
        }
    }
    PromptEmbedding::new(vectors, src.attr_positions.clone())
}
