//! Mid-utterance style transition with two decoders.
//!
//! Decoder-B is conditioned on the interpolated style `E′` and run just long
//! enough to cache `n = n_text + k` positions. Decoder-A generates under the
//! source style until `t*`, then its first `n` cache rows are overwritten by
//! Decoder-B's, its style memory is replaced by `E′`, and it continues under
//! the sliding-window mask so the source-style rows between `n` and `t*`
//! drop out of view.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::attention::{self, MaskSpec};
use crate::decoder::{self, DecoderState, DecoderWeights, GenerationTrace};
use crate::embedding::{self, PromptEmbedding};
use crate::sampler::{Sampler, TokenSampler};
use crate::{Error, Result};

/// Self-attention window used around the transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Window {
    Size(usize),
    /// Standard causal attention, no window.
    Full,
}

impl Window {
    /// The mask for a swapped region of `n` rows.
    pub fn mask(self, n: usize) -> MaskSpec {
        match self {
            Window::Size(w) => MaskSpec::Sliding { n, w },
            Window::Full => MaskSpec::FullCausal,
        }
    }
}

impl core::fmt::Display for Window {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Window::Size(w) => write!(f, "{w}"),
            Window::Full => f.write_str("full"),
        }
    }
}

impl core::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(Window::Full);
        }
        match s.parse::<usize>() {
            Ok(w) if w >= 1 => Ok(Window::Size(w)),
            _ => Err(Error::InvalidPlan(format!(
                "window must be a positive integer or `full`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitionPlan {
    /// Number of tokens generated under the source style.
    pub t_star: usize,
    /// Generated positions swapped beyond the text prompt.
    pub k: usize,
    pub window: Window,
    pub alpha: f32,
    /// Strength for non-attribute positions; `None` moves attribute positions only.
    pub beta: Option<f32>,
    pub steps: usize,
    pub sampler: Sampler,
    /// Apply the window before `t*` as well (otherwise full causal until the swap).
    pub window_before_transition: bool,
}

impl Default for TransitionPlan {
    fn default() -> Self {
        Self {
            t_star: 64,
            k: 4,
            window: Window::Size(8),
            alpha: 2.0,
            beta: None,
            steps: 128,
            sampler: Sampler::Greedy,
            window_before_transition: true,
        }
    }
}

impl TransitionPlan {
    fn mask_before(&self, n: usize) -> MaskSpec {
        if self.window_before_transition {
            self.window.mask(n)
        } else {
            MaskSpec::FullCausal
        }
    }
}

/// Checks the plan against a text prompt of `n_text` tokens and returns `n = n_text + k`.
pub fn validate_plan(plan: &TransitionPlan, n_text: usize) -> Result<usize> {
    let n = n_text + plan.k;
    if plan.t_star <= n {
        return Err(Error::InvalidPlan(format!(
            "transition precedes committed prefix (t_star = {} must exceed n = n_text + k = {n})",
            plan.t_star
        )));
    }
    if plan.steps <= plan.t_star {
        return Err(Error::InvalidPlan(format!(
            "steps ({}) must exceed t_star ({})",
            plan.steps, plan.t_star
        )));
    }
    if plan.window == Window::Size(0) {
        return Err(Error::InvalidPlan("window size must be >= 1".into()));
    }
    if !plan.alpha.is_finite() || plan.beta.is_some_and(|b| !b.is_finite()) {
        return Err(Error::InvalidPlan("alpha and beta must be finite".into()));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapRecord {
    pub n: usize,
    pub t_star: usize,
    pub performed: bool,
}

/// First/last segment readings attached by the toy model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentMetrics {
    pub first: f32,
    pub last: f32,
    pub delta: f32,
    pub segment_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionResult {
    pub tokens: Vec<usize>,
    pub trace_a: GenerationTrace,
    pub swap: SwapRecord,
    pub metrics: Option<SegmentMetrics>,
}

/// The interpolated style `E′` for a plan.
pub fn interpolated_style(
    src: &PromptEmbedding,
    tgt: &PromptEmbedding,
    attr_positions: &BTreeSet<usize>,
    plan: &TransitionPlan,
) -> Result<PromptEmbedding> {
    match plan.beta {
        Some(beta) => embedding::interpolate_full(src, tgt, plan.alpha, beta, attr_positions),
        None => {
            let dir = embedding::compute_direction(src, tgt, attr_positions)?;
            embedding::interpolate(src, &dir, plan.alpha)
        }
    }
}

/// Decoder-A after generating tokens `1..=t*` under the source style.
#[derive(Debug, Clone)]
pub struct SourceRun<'w> {
    pub state: DecoderState<'w>,
    pub tokens: Vec<usize>,
    pub trace: GenerationTrace,
    pub sampler: TokenSampler,
}

/// Phase 1: Decoder-B conditioned on `e_prime`, stepped until its caches hold `n` rows.
pub fn precompute_target<'w>(
    weights: &'w DecoderWeights,
    text_ids: &[usize],
    e_prime: &PromptEmbedding,
    plan: &TransitionPlan,
) -> Result<DecoderState<'w>> {
    let n = validate_plan(plan, text_ids.len())?;
    let mut b = decoder::prefill(weights, text_ids, e_prime)?;
    let mut sampler = TokenSampler::new(plan.sampler);
    decoder::continue_generation(&mut b, n - text_ids.len(), plan.mask_before(n), &mut sampler)?;
    if b.position() < n {
        return Err(Error::SwapOutOfRange {
            n,
            dst_len: n,
            src_len: b.position(),
        });
    }
    Ok(b)
}

/// Phase 2: Decoder-A generates tokens `1..=t*` under the source style.
pub fn run_source<'w>(
    weights: &'w DecoderWeights,
    text_ids: &[usize],
    src: &PromptEmbedding,
    plan: &TransitionPlan,
) -> Result<SourceRun<'w>> {
    let n = validate_plan(plan, text_ids.len())?;
    let mut state = decoder::prefill(weights, text_ids, src)?;
    let mut sampler = TokenSampler::new(plan.sampler);
    let (tokens, trace) =
        decoder::continue_generation(&mut state, plan.t_star, plan.mask_before(n), &mut sampler)?;
    Ok(SourceRun {
        state,
        tokens,
        trace,
        sampler,
    })
}

/// Phases 3 and 4: swap the first `n` rows from Decoder-B (when given), switch
/// Decoder-A to `e_prime`, and generate the remaining tokens.
pub fn finish_transition(
    mut source: SourceRun<'_>,
    target: Option<&DecoderState<'_>>,
    e_prime: PromptEmbedding,
    plan: &TransitionPlan,
) -> Result<TransitionResult> {
    let n_text = source.state.n_text();
    let n = validate_plan(plan, n_text)?;
    if let Some(b) = target {
        attention::swap_prefix(source.state.cache_mut(), b.cache(), n)?;
    }
    source.state.replace_style(e_prime)?;
    let (tail, trace) = decoder::continue_generation(
        &mut source.state,
        plan.steps - plan.t_star,
        plan.window.mask(n),
        &mut source.sampler,
    )?;
    let mut tokens = source.tokens;
    tokens.extend(tail);
    let mut trace_a = source.trace;
    trace_a.extend(trace);
    Ok(TransitionResult {
        tokens,
        trace_a,
        swap: SwapRecord {
            n,
            t_star: plan.t_star,
            performed: target.is_some(),
        },
        metrics: None,
    })
}

/// Full method: interpolation, dual decoders, KV prefix swap and windowed attention.
pub fn run_transition(
    weights: &DecoderWeights,
    text_ids: &[usize],
    src_prompt: &PromptEmbedding,
    tgt_prompt: &PromptEmbedding,
    attr_positions: &BTreeSet<usize>,
    plan: &TransitionPlan,
) -> Result<TransitionResult> {
    validate_plan(plan, text_ids.len())?;
    let e_prime = interpolated_style(src_prompt, tgt_prompt, attr_positions, plan)?;
    let target = precompute_target(weights, text_ids, &e_prime, plan)?;
    let source = run_source(weights, text_ids, src_prompt, plan)?;
    finish_transition(source, Some(&target), e_prime, plan)
}

/// Baseline: only the style memory is replaced at `t*`; no cache swap.
pub fn run_naive_swap(
    weights: &DecoderWeights,
    text_ids: &[usize],
    src_prompt: &PromptEmbedding,
    tgt_prompt: &PromptEmbedding,
    attr_positions: &BTreeSet<usize>,
    plan: &TransitionPlan,
) -> Result<TransitionResult> {
    validate_plan(plan, text_ids.len())?;
    let e_prime = interpolated_style(src_prompt, tgt_prompt, attr_positions, plan)?;
    let source = run_source(weights, text_ids, src_prompt, plan)?;
    finish_transition(source, None, e_prime, plan)
}
