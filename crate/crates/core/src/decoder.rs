//! Layered autoregressive decoder with self-attention over a KV cache,
//! cross-attention to a style memory, and a ReLU feed-forward block.
//!
//! Each layer is single-head with plain residual adds:
//!
//! ```text
//! h += SelfAttn(h) Wo
//! h += CrossAttn(h, style) Wo'
//! h += relu(h W1 + b1) W2 + b2
//! ```
//!
//! The text prompt is prefilled into positions `1..=n_text`. Step `t` then
//! feeds token `t − 1` (the start embedding for `t = 1`) at position
//! `n_text + t` and returns the logits for token `t`.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::attention::{self, KvCache, MaskSpec};
use crate::embedding::PromptEmbedding;
use crate::numerics::{self, Matrix};
use crate::sampler::{Sampler, TokenSampler};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecoderDims {
    pub layers: usize,
    pub d_model: usize,
    /// Audio token vocabulary (size of the output head).
    pub vocab: usize,
    pub text_vocab: usize,
    pub max_len: usize,
    pub ffn: usize,
    pub style_dim: usize,
}

impl Default for DecoderDims {
    fn default() -> Self {
        Self {
            layers: 2,
            d_model: 16,
            vocab: 64,
            text_vocab: 64,
            max_len: 512,
            ffn: 32,
            style_dim: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerWeights {
    pub self_q: Matrix,
    pub self_k: Matrix,
    pub self_v: Matrix,
    pub self_o: Matrix,
    pub cross_q: Matrix,
    /// `style_dim × d_model`
    pub cross_k: Matrix,
    /// `style_dim × d_model`
    pub cross_v: Matrix,
    pub cross_o: Matrix,
    pub ff_in: Matrix,
    pub ff_in_bias: Vec<f32>,
    pub ff_out: Matrix,
    pub ff_out_bias: Vec<f32>,
}

impl LayerWeights {
    pub fn zeros(d: usize, ffn: usize, style_dim: usize) -> Self {
        Self {
            self_q: Matrix::zeros(d, d),
            self_k: Matrix::zeros(d, d),
            self_v: Matrix::zeros(d, d),
            self_o: Matrix::zeros(d, d),
            cross_q: Matrix::zeros(d, d),
            cross_k: Matrix::zeros(style_dim, d),
            cross_v: Matrix::zeros(style_dim, d),
            cross_o: Matrix::zeros(d, d),
            ff_in: Matrix::zeros(d, ffn),
            ff_in_bias: vec![0.0; ffn],
            ff_out: Matrix::zeros(ffn, d),
            ff_out_bias: vec![0.0; d],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecoderWeights {
    pub layers: Vec<LayerWeights>,
    /// Audio token table, `vocab × d_model`.
    pub token_embedding: Matrix,
    /// Text prompt table, `text_vocab × d_model`.
    pub text_embedding: Matrix,
    /// Input embedding of the first generated step.
    pub start_embedding: Vec<f32>,
    /// Absolute positional table, row `p − 1` for position `p`.
    pub positional: Matrix,
    /// Output head, `d_model × vocab`.
    pub head: Matrix,
}

impl DecoderWeights {
    pub fn dims(&self) -> DecoderDims {
        DecoderDims {
            layers: self.layers.len(),
            d_model: self.token_embedding.cols(),
            vocab: self.token_embedding.rows(),
            text_vocab: self.text_embedding.rows(),
            max_len: self.positional.rows(),
            ffn: self.layers.first().map_or(0, |l| l.ff_in.cols()),
            style_dim: self.layers.first().map_or(0, |l| l.cross_k.rows()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        let d = dims.d_model;
        let shape = |op: &'static str, m: &Matrix, rows: usize, cols: usize| -> Result<()> {
            if m.rows() != rows {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: rows,
                    found: m.rows(),
                });
            }
            if m.cols() != cols {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: cols,
                    found: m.cols(),
                });
            }
            Ok(())
        };
        if self.layers.is_empty() {
            return Err(Error::Empty("decoder layers"));
        }
        shape("text_embedding", &self.text_embedding, dims.text_vocab, d)?;
        shape("positional", &self.positional, dims.max_len, d)?;
        shape("head", &self.head, d, dims.vocab)?;
        if self.start_embedding.len() != d {
            return Err(Error::DimensionMismatch {
                op: "start_embedding",
                expected: d,
                found: self.start_embedding.len(),
            });
        }
        numerics::check_finite("start_embedding", &self.start_embedding)?;
        for l in &self.layers {
            for m in [&l.self_q, &l.self_k, &l.self_v, &l.self_o, &l.cross_q, &l.cross_o] {
                shape("layer projection", m, d, d)?;
            }
            shape("cross_k", &l.cross_k, dims.style_dim, d)?;
            shape("cross_v", &l.cross_v, dims.style_dim, d)?;
            shape("ff_in", &l.ff_in, d, dims.ffn)?;
            shape("ff_out", &l.ff_out, dims.ffn, d)?;
            if l.ff_in_bias.len() != dims.ffn || l.ff_out_bias.len() != d {
                return Err(Error::DimensionMismatch {
                    op: "ffn bias",
                    expected: dims.ffn,
                    found: l.ff_in_bias.len(),
                });
            }
            numerics::check_finite("ffn bias", &l.ff_in_bias)?;
            numerics::check_finite("ffn bias", &l.ff_out_bias)?;
        }
        Ok(())
    }

    /// Small uniform random weights from a fixed seed, sinusoidal positions.
    pub fn seeded(dims: DecoderDims, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = |rows: usize, cols: usize, scale: f32| -> Matrix {
            let data = (0..rows * cols)
                .map(|_| {
                    let u = (rng.next_u32() >> 8) as f32 / (1u32 << 24) as f32;
                    (2.0 * u - 1.0) * scale
                })
                .collect();
            Matrix::new(rows, cols, data).expect("finite by construction")
        };
        let d = dims.d_model;
        let s = 1.0 / libm::sqrtf(d as f32);
        let layers = (0..dims.layers)
            .map(|_| LayerWeights {
                self_q: random(d, d, s),
                self_k: random(d, d, s),
                self_v: random(d, d, s),
                self_o: random(d, d, s),
                cross_q: random(d, d, s),
                cross_k: random(dims.style_dim, d, s),
                cross_v: random(dims.style_dim, d, s),
                cross_o: random(d, d, s),
                ff_in: random(d, dims.ffn, s),
                ff_in_bias: random(1, dims.ffn, 0.1).into_vec(),
                ff_out: random(dims.ffn, d, 1.0 / libm::sqrtf(dims.ffn as f32)),
                ff_out_bias: random(1, d, 0.1).into_vec(),
            })
            .collect();
        let weights = Self {
            layers,
            token_embedding: random(dims.vocab, d, 1.0),
            text_embedding: random(dims.text_vocab, d, 1.0),
            start_embedding: random(1, d, 1.0).into_vec(),
            positional: sinusoidal_table(dims.max_len, d),
            head: random(d, dims.vocab, s),
        };
        weights.validate()?;
        Ok(weights)
    }
}

/// Standard sinusoidal table: `PE[p, 2c] = sin(p / 10000^{2c/d})`, `PE[p, 2c+1] = cos(…)`,
/// for 1-based position `p` stored in row `p − 1`.
pub fn sinusoidal_table(max_len: usize, d: usize) -> Matrix {
    let mut m = Matrix::zeros(max_len, d);
    for row in 0..max_len {
        let p = (row + 1) as f64;
        for c in 0..d {
            let freq = libm::pow(10000.0, -((c / 2 * 2) as f64) / d as f64);
            let v = if c % 2 == 0 {
                libm::sin(p * freq)
            } else {
                libm::cos(p * freq)
            };
            m.set(row, c, v as f32);
        }
    }
    m
}

/// Cross-attention of one hidden row against the style memory.
///
/// Returns the output projected through `cross_o` and the attention weights
/// over style tokens.
pub(crate) fn cross_attention(
    h: &[f32],
    style: &PromptEmbedding,
    layer: &LayerWeights,
) -> Result<(Vec<f32>, Vec<f32>)> {
    let q = numerics::vec_mat(h, &layer.cross_q)?;
    let keys = numerics::matmul(style.vectors(), &layer.cross_k)?;
    let values = numerics::matmul(style.vectors(), &layer.cross_v)?;
    let scale = 1.0 / libm::sqrtf(q.len() as f32);
    let scores: Vec<f32> = (0..style.len())
        .map(|s| numerics::dot(&q, keys.row(s)) * scale)
        .collect();
    let weights = numerics::softmax(&scores)?;
    let mut ctx = vec![0.0f32; values.cols()];
    for (s, &w) in weights.iter().enumerate() {
        for (c, &v) in ctx.iter_mut().zip(values.row(s)) {
            *c += w * v;
        }
    }
    Ok((numerics::vec_mat(&ctx, &layer.cross_o)?, weights))
}

pub(crate) fn feed_forward(h: &[f32], layer: &LayerWeights) -> Result<Vec<f32>> {
    let mut hidden = numerics::vec_mat(h, &layer.ff_in)?;
    for (x, b) in hidden.iter_mut().zip(&layer.ff_in_bias) {
        *x = (*x + b).max(0.0);
    }
    let mut out = numerics::vec_mat(&hidden, &layer.ff_out)?;
    numerics::add_assign(&mut out, &layer.ff_out_bias);
    Ok(out)
}

/// Result of one decoding step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub logits: Vec<f32>,
    /// Cross-attention weights over style tokens, one row per layer.
    pub cross_weights: Vec<Vec<f32>>,
    /// Size of the self-attention allowed set at this position.
    pub allowed: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceEntry {
    pub token: usize,
    pub cross_weights: Vec<Vec<f32>>,
    pub allowed: usize,
    pub logits: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationTrace {
    pub entries: Vec<TraceEntry>,
}

impl GenerationTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.token).collect()
    }

    pub fn extend(&mut self, other: GenerationTrace) {
        self.entries.extend(other.entries);
    }
}

/// Live decoding state: caches, style memory and the next input token.
#[derive(Debug, Clone)]
pub struct DecoderState<'w> {
    weights: &'w DecoderWeights,
    cache: KvCache,
    style: PromptEmbedding,
    n_text: usize,
    /// Token fed at the next step; `None` feeds the start embedding.
    next_input: Option<usize>,
}

impl<'w> DecoderState<'w> {
    /// Assembles a state from existing caches, e.g. a hand-spliced cache.
    pub fn from_parts(
        weights: &'w DecoderWeights,
        cache: KvCache,
        style: PromptEmbedding,
        n_text: usize,
        next_input: Option<usize>,
    ) -> Result<Self> {
        let dims = weights.dims();
        if cache.n_layers() != dims.layers {
            return Err(Error::DimensionMismatch {
                op: "decoder state (layers)",
                expected: dims.layers,
                found: cache.n_layers(),
            });
        }
        if (0..cache.n_layers()).any(|l| cache.layer_len(l) != cache.len()) {
            return Err(Error::InvalidConfig("cache layers differ in length".into()));
        }
        if n_text > cache.len() {
            return Err(Error::PositionOutOfRange {
                index: n_text,
                len: cache.len(),
            });
        }
        if style.dim() != dims.style_dim {
            return Err(Error::DimensionMismatch {
                op: "decoder state (style)",
                expected: dims.style_dim,
                found: style.dim(),
            });
        }
        if let Some(id) = next_input.filter(|&id| id >= dims.vocab) {
            return Err(Error::TokenOutOfVocab {
                id,
                vocab: dims.vocab,
            });
        }
        Ok(Self {
            weights,
            cache,
            style,
            n_text,
            next_input,
        })
    }

    pub fn weights(&self) -> &'w DecoderWeights {
        self.weights
    }

    pub fn position(&self) -> usize {
        self.cache.len()
    }

    pub fn n_text(&self) -> usize {
        self.n_text
    }

    pub fn cache(&self) -> &KvCache {
        &self.cache
    }

    pub(crate) fn cache_mut(&mut self) -> &mut KvCache {
        &mut self.cache
    }

    pub fn into_cache(self) -> KvCache {
        self.cache
    }

    pub fn style(&self) -> &PromptEmbedding {
        &self.style
    }

    pub fn next_input(&self) -> Option<usize> {
        self.next_input
    }

    /// Sets the token fed at the next step.
    pub fn accept(&mut self, token: usize) -> Result<()> {
        let vocab = self.weights.dims().vocab;
        if token >= vocab {
            return Err(Error::TokenOutOfVocab { id: token, vocab });
        }
        self.next_input = Some(token);
        Ok(())
    }

    /// Cross-attention reads `new_style` from the next step on; caches are untouched.
    pub fn replace_style(&mut self, new_style: PromptEmbedding) -> Result<()> {
        if new_style.len() != self.style.len() || new_style.dim() != self.style.dim() {
            return Err(Error::DimensionMismatch {
                op: "replace_style",
                expected: self.style.len(),
                found: new_style.len(),
            });
        }
        self.style = new_style;
        Ok(())
    }

    /// Feeds the pending input at position `position() + 1`, appending one row
    /// to every layer's cache.
    pub fn step(&mut self, spec: MaskSpec) -> Result<StepOutput> {
        let w = self.weights;
        let i = self.cache.len() + 1;
        let max_len = w.positional.rows();
        if i > max_len {
            return Err(Error::MaxLenExceeded {
                position: i,
                max_len,
            });
        }
        let mut h = match self.next_input {
            None => w.start_embedding.clone(),
            Some(id) => w.token_embedding.row(id).to_vec(),
        };
        numerics::add_assign(&mut h, w.positional.row(i - 1));

        let mut cross_weights = Vec::with_capacity(w.layers.len());
        let mut allowed = 0;
        for (l, layer) in w.layers.iter().enumerate() {
            let q = numerics::vec_mat(&h, &layer.self_q)?;
            let k = numerics::vec_mat(&h, &layer.self_k)?;
            let v = numerics::vec_mat(&h, &layer.self_v)?;
            self.cache.append(l, &k, &v)?;
            let att = attention::attend_detailed(&q, &self.cache, l, i, spec)?;
            allowed = att.allowed;
            numerics::add_assign(&mut h, &numerics::vec_mat(&att.context, &layer.self_o)?);

            let (cross, weights) = cross_attention(&h, &self.style, layer)?;
            numerics::add_assign(&mut h, &cross);
            cross_weights.push(weights);

            let ff = feed_forward(&h, layer)?;
            numerics::add_assign(&mut h, &ff);
        }
        let logits = numerics::vec_mat(&h, &w.head)?;
        Ok(StepOutput {
            logits,
            cross_weights,
            allowed,
        })
    }
}

/// Runs the text prompt through the decoder in one batch and caches every position.
pub fn prefill<'w>(
    weights: &'w DecoderWeights,
    text_ids: &[usize],
    style: &PromptEmbedding,
) -> Result<DecoderState<'w>> {
    weights.validate()?;
    let dims = weights.dims();
    if text_ids.is_empty() {
        return Err(Error::Empty("prefill (text)"));
    }
    if text_ids.len() > dims.max_len {
        return Err(Error::MaxLenExceeded {
            position: text_ids.len(),
            max_len: dims.max_len,
        });
    }
    let mut rows = Vec::with_capacity(text_ids.len());
    for (p, &id) in text_ids.iter().enumerate() {
        if id >= dims.text_vocab {
            return Err(Error::TokenOutOfVocab {
                id,
                vocab: dims.text_vocab,
            });
        }
        let mut row = weights.text_embedding.row(id).to_vec();
        numerics::add_assign(&mut row, weights.positional.row(p));
        rows.push(row);
    }
    let mut hidden = Matrix::from_rows(&rows)?;
    let mut cache = KvCache::new(dims.layers, dims.d_model, dims.d_model);
    let t = text_ids.len();
    let scale = 1.0 / libm::sqrtf(dims.d_model as f32);

    for (l, layer) in weights.layers.iter().enumerate() {
        let q = numerics::matmul(&hidden, &layer.self_q)?;
        let k = numerics::matmul(&hidden, &layer.self_k)?;
        let v = numerics::matmul(&hidden, &layer.self_v)?;
        for p in 0..t {
            cache.append(l, k.row(p), v.row(p))?;
        }
        let mut next = Vec::with_capacity(t);
        for i in 0..t {
            let scores: Vec<f32> = (0..=i)
                .map(|j| numerics::dot(q.row(i), k.row(j)) * scale)
                .collect();
            let attn = numerics::softmax(&scores)?;
            let mut ctx = vec![0.0f32; dims.d_model];
            for (j, &a) in attn.iter().enumerate() {
                for (c, &vv) in ctx.iter_mut().zip(v.row(j)) {
                    *c += a * vv;
                }
            }
            let mut h = hidden.row(i).to_vec();
            numerics::add_assign(&mut h, &numerics::vec_mat(&ctx, &layer.self_o)?);
            let (cross, _) = cross_attention(&h, style, layer)?;
            numerics::add_assign(&mut h, &cross);
            let ff = feed_forward(&h, layer)?;
            numerics::add_assign(&mut h, &ff);
            next.push(h);
        }
        hidden = Matrix::from_rows(&next)?;
    }
    DecoderState::from_parts(weights, cache, style.clone(), t, None)
}

/// Runs `steps` decoding steps on an existing state, sampling and feeding each token.
pub fn continue_generation(
    state: &mut DecoderState<'_>,
    steps: usize,
    spec: MaskSpec,
    sampler: &mut TokenSampler,
) -> Result<(Vec<usize>, GenerationTrace)> {
    let mut tokens = Vec::with_capacity(steps);
    let mut trace = GenerationTrace::default();
    for _ in 0..steps {
        let out = state.step(spec)?;
        let token = sampler.sample(&out.logits);
        state.accept(token)?;
        tokens.push(token);
        trace.entries.push(TraceEntry {
            token,
            cross_weights: out.cross_weights,
            allowed: out.allowed,
            logits: out.logits,
        });
    }
    Ok((tokens, trace))
}

/// Prefill followed by `steps` generated tokens.
pub fn generate(
    weights: &DecoderWeights,
    text_ids: &[usize],
    style: &PromptEmbedding,
    steps: usize,
    spec: MaskSpec,
    sampler: Sampler,
) -> Result<(Vec<usize>, GenerationTrace)> {
    if steps == 0 {
        return Err(Error::Empty("generate (steps)"));
    }
    let mut state = prefill(weights, text_ids, style)?;
    continue_generation(&mut state, steps, spec, &mut TokenSampler::new(sampler))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn weights() -> DecoderWeights {
        DecoderWeights::seeded(
            DecoderDims {
                layers: 2,
                d_model: 8,
                vocab: 12,
                text_vocab: 10,
                max_len: 64,
                ffn: 16,
                style_dim: 8,
            },
            7,
        )
        .unwrap()
    }

    fn style(seed: f32) -> PromptEmbedding {
        let data = (0..5 * 8).map(|i| libm::sinf(seed + i as f32 * 0.37)).collect();
        PromptEmbedding::new(Matrix::new(5, 8, data).unwrap(), BTreeSet::from([2])).unwrap()
    }

    #[test]
    fn prefill_bookkeeping_and_determinism() {
        let w = weights();
        let text = [1, 2, 3, 4, 5, 6, 7, 8];
        let a = prefill(&w, &text, &style(0.0)).unwrap();
        assert_eq!(a.position(), 8);
        for l in 0..2 {
            assert_eq!(a.cache().layer_len(l), 8);
        }
        let b = prefill(&w, &text, &style(0.0)).unwrap();
        assert_eq!(a.cache(), b.cache());
        assert_eq!(a.next_input(), None);
    }

    #[test]
    fn prefill_rejects_bad_text() {
        let w = weights();
        assert!(matches!(prefill(&w, &[], &style(0.0)), Err(Error::Empty(_))));
        assert!(matches!(
            prefill(&w, &[10], &style(0.0)),
            Err(Error::TokenOutOfVocab { .. })
        ));
    }

    #[test]
    fn step_shapes_and_normalisation() {
        let w = weights();
        let mut s = prefill(&w, &[3, 1, 4], &style(1.0)).unwrap();
        let out = s.step(MaskSpec::FullCausal).unwrap();
        assert_eq!(out.logits.len(), 12);
        assert!(out.logits.iter().all(|v| v.is_finite()));
        assert_eq!(out.cross_weights.len(), 2);
        for row in &out.cross_weights {
            assert_eq!(row.len(), 5);
            let sum: f32 = row.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-6);
        }
        assert_eq!(s.position(), 4);
    }

    #[test]
    fn step_past_max_len_fails() {
        let w = weights();
        let text: Vec<usize> = (0..63).map(|i| i % 10).collect();
        let mut s = prefill(&w, &text, &style(0.0)).unwrap();
        s.step(MaskSpec::FullCausal).unwrap();
        assert_eq!(
            s.step(MaskSpec::FullCausal),
            Err(Error::MaxLenExceeded {
                position: 65,
                max_len: 64
            })
        );
    }

    #[test]
    fn covering_window_gives_identical_logits() {
        let w = weights();
        let text = [1, 2, 3, 4];
        let (_, full) = generate(&w, &text, &style(0.5), 10, MaskSpec::FullCausal, Sampler::Greedy).unwrap();
        let (_, slid) = generate(&w, &text, &style(0.5), 10, MaskSpec::Sliding { n: 6, w: 8 }, Sampler::Greedy).unwrap();
        for (a, b) in full.entries.iter().zip(&slid.entries) {
            for (x, y) in a.logits.iter().zip(&b.logits) {
                assert!((x - y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn one_step_generation_is_prefill_plus_step() {
        let w = weights();
        let text = [5, 5, 2];
        let (tokens, trace) = generate(&w, &text, &style(2.0), 1, MaskSpec::FullCausal, Sampler::Greedy).unwrap();
        let mut s = prefill(&w, &text, &style(2.0)).unwrap();
        let out = s.step(MaskSpec::FullCausal).unwrap();
        assert_eq!(trace.entries[0].logits, out.logits);
        assert_eq!(tokens, vec![crate::sampler::argmax(&out.logits)]);
        assert!(generate(&w, &text, &style(2.0), 0, MaskSpec::FullCausal, Sampler::Greedy).is_err());
    }

    #[test]
    fn replace_style_checks_shape_and_is_a_no_op_for_identical_memory() {
        let w = weights();
        let mut a = prefill(&w, &[1, 2], &style(0.0)).unwrap();
        let mut b = a.clone();
        b.replace_style(style(0.0)).unwrap();
        assert_eq!(a.step(MaskSpec::FullCausal).unwrap(), b.step(MaskSpec::FullCausal).unwrap());

        let short = PromptEmbedding::new(Matrix::zeros(3, 8), BTreeSet::new()).unwrap();
        assert!(a.replace_style(short).is_err());
    }

    #[test]
    fn seeded_sampler_is_deterministic() {
        let w = weights();
        let sampler = Sampler::Temperature {
            temperature: 1.5,
            seed: 99,
        };
        let (a, _) = generate(&w, &[1, 2, 3], &style(0.3), 20, MaskSpec::FullCausal, sampler).unwrap();
        let (b, _) = generate(&w, &[1, 2, 3], &style(0.3), 20, MaskSpec::FullCausal, sampler).unwrap();
        assert_eq!(a, b);
    }
}
