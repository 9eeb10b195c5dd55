//! A hand-built decoder that commits to its style early and then copies it.
//!
//! Every audio token carries a scalar attribute `x(id) = 2·id/(V−1) − 1`.
//! For the first `m` generated steps cross-attention reads the attribute
//! token of the style prompt. After that the query gate closes, and each new
//! token is the weighted mean of the attributes held by the visible generated
//! rows. Rows written during the commit phase carry the style value itself
//! and get a fixed log-weight bonus (`commit_bias`). Replacing the style
//! memory after the commit phase therefore changes nothing; only a swap of
//! the committed cache rows, with a window that drops the source-style rows
//! in between, moves the attribute.
//!
//! Decoder residual channels:
//!
//! | channel | content |
//! |---|---|
//! | 0 | constant 1 |
//! | 1 | is-text flag |
//! | 2 | token attribute `x(id)` |
//! | 3, 4 | position `p` and `p²` |
//! | 5 | commit gate (layer-1 self-attention) |
//! | 6 | style read (layer-1 cross-attention) |
//! | 7 | row value (layer-1 feed-forward) |
//! | 8 | readout (layer-2 self-attention) |
//! | 9.. | sinusoidal position features (unused by the construction) |

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::decoder::{self, DecoderDims, DecoderWeights, LayerWeights};
use crate::embedding::{self, EncoderWeights, PromptEmbedding};
use crate::numerics::Matrix;
use crate::transition::{SegmentMetrics, TransitionPlan, TransitionResult, Window};
use crate::{Error, Result};

const ONE: usize = 0;
const IS_TEXT: usize = 1;
const TOKEN_ATTR: usize = 2;
const POS: usize = 3;
const POS_SQ: usize = 4;
const GATE: usize = 5;
const STYLE_READ: usize = 6;
const ROW_VALUE: usize = 7;
const READOUT: usize = 8;
const FIRST_FREE: usize = 9;

/// Score gap per position of distance in the gate head.
const GATE_SHARPNESS: f32 = 16.0;
/// Cross-attention score on the attribute token while the gate is open.
const STYLE_FOCUS: f32 = 40.0;
/// Score penalty keeping text rows out of the average.
const TEXT_PENALTY: f32 = 60.0;
/// Output head curvature; logits are `−Γ(x − x_v)²` up to a per-row constant.
const HEAD_SCALE: f32 = 32.0;
/// Per-id logit bonus so that exact ties round towards the larger id.
const TIE_BREAK: f32 = 1e-3;
const FFN_UNITS: usize = 8;

/// Attribute words of the toy style vocabulary: ids `0..=8` carry `−1 + 0.25·id`.
pub const ATTRIBUTE_LEVELS: usize = 9;
const FILLER_WORDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ToyConfig {
    pub vocab: usize,
    pub hidden: usize,
    pub layers: usize,
    /// Generated steps during which cross-attention reads the style (`m`).
    pub commit_len: usize,
    /// Style-embedding channel carrying the attribute scalar.
    pub attr_channel: usize,
    pub style_len: usize,
    /// Index of the attribute token inside the style prompt.
    pub attr_pos: usize,
    pub max_len: usize,
    pub text_vocab: usize,
    /// Log-weight bonus of committed rows in the averaging head.
    pub commit_bias: f32,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            vocab: 64,
            hidden: 16,
            layers: 2,
            commit_len: 4,
            attr_channel: 0,
            style_len: 6,
            attr_pos: 2,
            max_len: 512,
            text_vocab: 32,
            commit_bias: 3.5,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.commit_len < 1 {
            return fail("commit_len must be >= 1");
        }
        if self.hidden < FIRST_FREE {
            return Err(Error::InvalidConfig(format!(
                "hidden must be >= {FIRST_FREE} to hold the toy channels"
            )));
        }
        if self.attr_channel >= self.hidden {
            return fail("attr_channel must be < hidden");
        }
        if self.attr_pos >= self.style_len {
            return fail("attr_pos must be < style_len");
        }
        if self.layers < 2 {
            return fail("the toy construction needs at least 2 layers");
        }
        if self.vocab < 2 {
            return fail("vocab must be >= 2");
        }
        if self.text_vocab < 1 {
            return fail("text_vocab must be >= 1");
        }
        if self.max_len <= self.commit_len {
            return fail("max_len must exceed commit_len");
        }
        if !self.commit_bias.is_finite() || self.commit_bias < 0.0 {
            return fail("commit_bias must be finite and >= 0");
        }
        Ok(())
    }

    pub fn dims(&self) -> DecoderDims {
        DecoderDims {
            layers: self.layers,
            d_model: self.hidden,
            vocab: self.vocab,
            text_vocab: self.text_vocab,
            max_len: self.max_len,
            ffn: FFN_UNITS,
            style_dim: self.hidden,
        }
    }

    fn marker_channel(&self) -> usize {
        (self.attr_channel + 1) % self.hidden
    }

    /// Attribute value decoded from a token id.
    pub fn token_attribute(&self, id: usize) -> f64 {
        2.0 * id as f64 / (self.vocab - 1) as f64 - 1.0
    }

    /// `round((a + 1)/2 · (V − 1))` clamped to the vocabulary, ties upward.
    pub fn quantize(&self, a: f64) -> usize {
        let top = (self.vocab - 1) as f64;
        let u = libm::floor((a + 1.0) / 2.0 * top + 0.5);
        u.clamp(0.0, top) as usize
    }
}

/// Closed-form decoder weights for `cfg`.
pub fn build_toy_model(cfg: &ToyConfig) -> Result<DecoderWeights> {
    cfg.validate()?;
    let dims = cfg.dims();
    let d = cfg.hidden;
    let root_d = libm::sqrtf(d as f32);
    let m = cfg.commit_len as f32;

    let mut token_embedding = Matrix::zeros(cfg.vocab, d);
    for v in 0..cfg.vocab {
        token_embedding.set(v, ONE, 1.0);
        token_embedding.set(v, TOKEN_ATTR, cfg.token_attribute(v) as f32);
    }
    let mut text_embedding = Matrix::zeros(cfg.text_vocab, d);
    for t in 0..cfg.text_vocab {
        text_embedding.set(t, ONE, 1.0);
        text_embedding.set(t, IS_TEXT, 1.0);
    }
    let mut start_embedding = vec![0.0; d];
    start_embedding[ONE] = 1.0;

    let mut positional = Matrix::zeros(cfg.max_len, d);
    let sinusoids = decoder::sinusoidal_table(cfg.max_len, d - FIRST_FREE);
    for row in 0..cfg.max_len {
        let p = (row + 1) as f32;
        positional.set(row, POS, p);
        positional.set(row, POS_SQ, p * p);
        for c in FIRST_FREE..d {
            positional.set(row, c, sinusoids.get(row, c - FIRST_FREE));
        }
    }

    // Layer 1: the gate head peaks at position i − m and reads its is-text
    // flag, so the gate is open exactly while i − m is still a text row.
    // score(j) = (p_i − m)·2S·p_j − S·p_j² = −S(p_j − (p_i − m))² + const.
    let mut gate = LayerWeights::zeros(d, FFN_UNITS, d);
    gate.self_q.set(POS, 0, root_d);
    gate.self_q.set(ONE, 0, -m * root_d);
    gate.self_q.set(ONE, 1, root_d);
    gate.self_k.set(POS, 0, 2.0 * GATE_SHARPNESS);
    gate.self_k.set(POS_SQ, 1, -GATE_SHARPNESS);
    gate.self_v.set(IS_TEXT, 0, 1.0);
    gate.self_o.set(0, GATE, 1.0);

    gate.cross_q.set(GATE, 0, STYLE_FOCUS * root_d);
    gate.cross_k.set(cfg.marker_channel(), 0, 1.0);
    gate.cross_v.set(cfg.attr_channel, 0, 1.0);
    gate.cross_o.set(0, STYLE_READ, 1.0);

    // row value = g·read + (1 − g)·attr, with g·y = relu(y + 2g − 2) − relu(−y + 2g − 2)
    // for |y| ≤ 2 and g ∈ {0, 1}.
    let units: [(usize, f32, bool, f32); 6] = [
        (STYLE_READ, 1.0, true, 1.0),
        (STYLE_READ, -1.0, true, -1.0),
        (TOKEN_ATTR, 1.0, false, 1.0),
        (TOKEN_ATTR, -1.0, false, -1.0),
        (TOKEN_ATTR, 1.0, true, -1.0),
        (TOKEN_ATTR, -1.0, true, 1.0),
    ];
    for (u, &(input, sign, gated, out)) in units.iter().enumerate() {
        gate.ff_in.set(input, u, sign);
        if gated {
            gate.ff_in.set(GATE, u, 2.0);
            gate.ff_in_bias[u] = -2.0;
        }
        gate.ff_out.set(u, ROW_VALUE, out);
    }

    // Layer 2: weighted mean of row values over visible generated rows.
    let mut average = LayerWeights::zeros(d, FFN_UNITS, d);
    average.self_q.set(ONE, 0, root_d);
    average.self_k.set(GATE, 0, cfg.commit_bias);
    average.self_k.set(IS_TEXT, 0, -TEXT_PENALTY);
    average.self_v.set(ROW_VALUE, 0, 1.0);
    average.self_o.set(0, READOUT, 1.0);

    let mut layers = vec![gate, average];
    layers.extend((2..cfg.layers).map(|_| LayerWeights::zeros(d, FFN_UNITS, d)));

    let mut head = Matrix::zeros(d, cfg.vocab);
    for v in 0..cfg.vocab {
        let x = cfg.token_attribute(v) as f32;
        head.set(READOUT, v, 2.0 * HEAD_SCALE * x);
        head.set(ONE, v, -HEAD_SCALE * x * x + TIE_BREAK * v as f32);
    }

    let weights = DecoderWeights {
        layers,
        token_embedding,
        text_embedding,
        start_embedding,
        positional,
        head,
    };
    debug_assert_eq!(weights.dims(), dims);
    weights.validate()?;
    Ok(weights)
}

fn context_feature(id: usize, channel: usize) -> f32 {
    0.5 * libm::sinf(1.618 * (id + 1) as f32 * (channel + 1) as f32 + 0.25)
}

/// Style encoder for the toy vocabulary.
///
/// Ids `0..ATTRIBUTE_LEVELS` are attribute words; the rest are fillers. The
/// attribute channel and the marker channel pass through unchanged, while the
/// mixing pass writes a prompt-wide summary into every other channel.
pub fn build_toy_encoder(cfg: &ToyConfig) -> Result<EncoderWeights> {
    cfg.validate()?;
    let d = cfg.hidden;
    let vocab = ATTRIBUTE_LEVELS + FILLER_WORDS;
    let (attr, marker) = (cfg.attr_channel, cfg.marker_channel());
    let passthrough = |c: usize| c == attr || c == marker;

    let mut table = Matrix::zeros(vocab, d);
    for id in 0..vocab {
        for c in (0..d).filter(|&c| !passthrough(c)) {
            table.set(id, c, context_feature(id, c));
        }
        if id < ATTRIBUTE_LEVELS {
            table.set(id, attr, attribute_level(id) as f32);
            table.set(id, marker, 1.0);
        }
    }
    let mut wq = Matrix::zeros(d, d);
    let mut wk = Matrix::zeros(d, d);
    let mut wv = Matrix::zeros(d, d);
    let mut wo = Matrix::zeros(d, d);
    for r in (0..d).filter(|&c| !passthrough(c)) {
        for c in (0..d).filter(|&c| !passthrough(c)) {
            wq.set(r, c, 0.6 * libm::sinf(0.7 * (r * d + c) as f32 + 0.1));
            wk.set(r, c, 0.6 * libm::cosf(1.3 * (r * d + c) as f32 + 0.2));
            wv.set(r, c, 0.5 * libm::sinf(2.1 * (r * d + c) as f32 + 0.3));
            if r == c {
                wo.set(r, c, 1.0);
            }
        }
    }
    let w = EncoderWeights {
        token_embedding: table,
        wq,
        wk,
        wv,
        wo,
    };
    w.validate()?;
    Ok(w)
}

fn attribute_level(id: usize) -> f64 {
    -1.0 + 0.25 * id as f64
}

/// Attribute word for `a`, which must lie on the `0.25` grid in `[−1, 1]`.
pub fn attribute_word(a: f32) -> Result<usize> {
    let scaled = (a as f64 + 1.0) * 4.0;
    let id = libm::round(scaled);
    if !(0.0..ATTRIBUTE_LEVELS as f64).contains(&id) || (scaled - id).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "attribute {a} is not one of -1, -0.75, …, 1"
        )));
    }
    Ok(id as usize)
}

/// A built toy model: decoder, style encoder and configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ToyModel {
    pub config: ToyConfig,
    pub decoder: DecoderWeights,
    pub encoder: EncoderWeights,
}

impl ToyModel {
    pub fn build(cfg: ToyConfig) -> Result<Self> {
        Ok(Self {
            decoder: build_toy_model(&cfg)?,
            encoder: build_toy_encoder(&cfg)?,
            config: cfg,
        })
    }

    /// Style prompt with the attribute word for `a` at `attr_pos` and fillers elsewhere.
    pub fn style_ids(&self, a: f32) -> Result<Vec<usize>> {
        let word = attribute_word(a)?;
        Ok((0..self.config.style_len)
            .map(|i| {
                if i == self.config.attr_pos {
                    word
                } else {
                    ATTRIBUTE_LEVELS + (i * 5 + 3) % FILLER_WORDS
                }
            })
            .collect())
    }

    pub fn attr_positions(&self) -> BTreeSet<usize> {
        BTreeSet::from([self.config.attr_pos])
    }

    pub fn encode_style(&self, a: f32) -> Result<PromptEmbedding> {
        embedding::encode_prompt(&self.style_ids(a)?, &self.attr_positions(), &self.encoder)
    }

    /// Attribute carried by an encoded style at the attribute position.
    pub fn style_attribute(&self, style: &PromptEmbedding) -> f32 {
        style.vector(self.config.attr_pos)[self.config.attr_channel]
    }

    /// Default 8-token text prompt.
    pub fn default_text(&self) -> Vec<usize> {
        (1..=8).map(|t| t % self.config.text_vocab).collect()
    }
}

/// Mean decoded attribute over a token range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributeReading {
    pub value: f32,
    pub segment: Range<usize>,
}

pub fn attribute_of(tokens: &[usize], segment: Range<usize>, cfg: &ToyConfig) -> Result<AttributeReading> {
    if segment.is_empty() {
        return Err(Error::Empty("attribute segment"));
    }
    if segment.end > tokens.len() {
        return Err(Error::PositionOutOfRange {
            index: segment.end,
            len: tokens.len(),
        });
    }
    let sum: f64 = tokens[segment.clone()]
        .iter()
        .map(|&id| cfg.token_attribute(id))
        .sum();
    Ok(AttributeReading {
        value: (sum / segment.len() as f64) as f32,
        segment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignClass {
    SourceLike,
    TargetLike,
    Neutral,
}

impl SignClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SignClass::SourceLike => "source_like",
            SignClass::TargetLike => "target_like",
            SignClass::Neutral => "neutral",
        }
    }
}

/// Binary conversion check: neutral within `±0.1`, otherwise by sign relative to the target.
pub fn sign_class(reading: &AttributeReading, a_target: f32) -> SignClass {
    if reading.value.abs() <= 0.1 {
        SignClass::Neutral
    } else if (reading.value > 0.0) == (a_target > 0.0) {
        SignClass::TargetLike
    } else {
        SignClass::SourceLike
    }
}

/// First/last segment readings of a run and their difference.
pub fn segment_metrics(tokens: &[usize], segment_len: usize, cfg: &ToyConfig) -> Result<SegmentMetrics> {
    let len = segment_len.min(tokens.len());
    let first = attribute_of(tokens, 0..len, cfg)?;
    let last = attribute_of(tokens, tokens.len() - len..tokens.len(), cfg)?;
    Ok(SegmentMetrics {
        first: first.value,
        last: last.value,
        delta: last.value - first.value,
        segment_len: len,
    })
}

pub fn fill_metrics(result: &mut TransitionResult, segment_len: usize, cfg: &ToyConfig) -> Result<()> {
    result.metrics = Some(segment_metrics(&result.tokens, segment_len, cfg)?);
    Ok(())
}

/// Expected per-step readout and token ids from the scalar recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    /// Pre-quantization attribute of each generated token.
    pub readout: Vec<f64>,
    pub ids: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Row {
    committed: bool,
    value: f64,
}

/// Scalar model of the toy decoder. Slot `s` (1-based) is the cache row at
/// position `n_text + s`; it holds the style value for `s ≤ m` and the
/// attribute of token `s − 1` otherwise.
struct Recurrence<'a> {
    cfg: &'a ToyConfig,
    n_text: usize,
    rows: Vec<Row>,
    readout: Vec<f64>,
    ids: Vec<usize>,
}

impl<'a> Recurrence<'a> {
    fn new(cfg: &'a ToyConfig, n_text: usize) -> Self {
        Self {
            cfg,
            n_text,
            rows: Vec::new(),
            readout: Vec::new(),
            ids: Vec::new(),
        }
    }

    /// `window = None` is full causal; otherwise `(n, w)` of the sliding mask.
    fn step(&mut self, style: f64, window: Option<(usize, usize)>) {
        let s = self.rows.len() + 1;
        let row = if s <= self.cfg.commit_len {
            Row {
                committed: true,
                value: style,
            }
        } else {
            Row {
                committed: false,
                value: self.cfg.token_attribute(self.ids[s - 2]),
            }
        };
        self.rows.push(row);

        let i = self.n_text + s;
        let bonus = libm::exp(self.cfg.commit_bias as f64);
        let (mut num, mut den) = (0.0, 0.0);
        for (slot, r) in self.rows.iter().enumerate() {
            let j = self.n_text + slot + 1;
            let visible = match window {
                None => true,
                Some((n, w)) => j <= n || j + w >= i,
            };
            if visible {
                let weight = if r.committed { bonus } else { 1.0 };
                num += weight * r.value;
                den += weight;
            }
        }
        let a = num / den;
        self.readout.push(a);
        self.ids.push(self.cfg.quantize(a));
    }
}

fn window_of(window: Window, n: usize) -> Option<(usize, usize)> {
    match window {
        Window::Size(w) => Some((n, w)),
        Window::Full => None,
    }
}

/// Trajectory of a plain run conditioned on a style with attribute `a` throughout.
pub fn oracle_constant(cfg: &ToyConfig, n_text: usize, steps: usize, window: Option<(usize, usize)>, a: f64) -> OracleTrajectory {
    let mut rec = Recurrence::new(cfg, n_text);
    for _ in 0..steps {
        rec.step(a, window);
    }
    OracleTrajectory {
        readout: rec.readout,
        ids: rec.ids,
    }
}

/// Trajectory of the full transition: source style until `t*`, then the
/// committed prefix `n = n_text + k` replaced by Decoder-B's rows built under
/// `a_tgt_effective`.
pub fn oracle_trajectory(
    plan: &TransitionPlan,
    cfg: &ToyConfig,
    n_text: usize,
    a_src: f64,
    a_tgt_effective: f64,
) -> Result<OracleTrajectory> {
    simulate(plan, cfg, n_text, a_src, a_tgt_effective, true)
}

/// Trajectory of the style-replacement-only baseline.
pub fn oracle_naive(
    plan: &TransitionPlan,
    cfg: &ToyConfig,
    n_text: usize,
    a_src: f64,
    a_tgt_effective: f64,
) -> Result<OracleTrajectory> {
    simulate(plan, cfg, n_text, a_src, a_tgt_effective, false)
}

fn simulate(
    plan: &TransitionPlan,
    cfg: &ToyConfig,
    n_text: usize,
    a_src: f64,
    a_tgt: f64,
    swap: bool,
) -> Result<OracleTrajectory> {
    cfg.validate()?;
    let n = crate::transition::validate_plan(plan, n_text)?;
    let after = window_of(plan.window, n);
    let before = if plan.window_before_transition { after } else { None };

    let mut a = Recurrence::new(cfg, n_text);
    for _ in 0..plan.t_star {
        a.step(a_src, before);
    }
    if swap {
        let mut b = Recurrence::new(cfg, n_text);
        for _ in 0..plan.k {
            b.step(a_tgt, before);
        }
        a.rows[..plan.k].copy_from_slice(&b.rows[..plan.k]);
    }
    for _ in plan.t_star..plan.steps {
        a.step(a_tgt, after);
    }
    Ok(OracleTrajectory {
        readout: a.readout,
        ids: a.ids,
    })
}
