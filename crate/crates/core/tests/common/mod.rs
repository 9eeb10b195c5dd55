//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use stylekv_core::attention::KvCache;
use stylekv_core::decoder::{self, DecoderDims, DecoderState, DecoderWeights};
use stylekv_core::sampler::TokenSampler;
use stylekv_core::transition::TransitionPlan;
use stylekv_core::embedding::PromptEmbedding;
use stylekv_core::numerics::Matrix;

pub fn seeded_weights() -> DecoderWeights {
    DecoderWeights::seeded(
        DecoderDims {
            layers: 2,
            d_model: 16,
            vocab: 24,
            text_vocab: 12,
            max_len: 256,
            ffn: 32,
            style_dim: 16,
        },
        2024,
    )
    .unwrap()
}

/// `None` is full causal; `Some((n, w))` keeps `j ≤ n` plus the last `w + 1` rows.
pub fn visible(i: usize, j: usize, window: Option<(usize, usize)>) -> bool {
    if j > i {
        return false;
    }
    match window {
        None => true,
        Some((n, w)) => j <= n || i <= j + w,
    }
}

fn project(x: &[f32], m: &Matrix) -> Vec<f32> {
    (0..m.cols())
        .map(|c| x.iter().enumerate().fold(0.0f32, |acc, (r, &v)| acc + v * m.get(r, c)))
        .collect()
}

fn softmax(scores: &[(usize, f32)]) -> Vec<(usize, f32)> {
    let max = scores.iter().map(|s| s.1).fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = scores.iter().map(|s| ((s.1 - max) as f64).exp()).collect();
    let total: f64 = exps.iter().sum();
    scores
        .iter()
        .zip(&exps)
        .map(|(s, e)| (s.0, (e / total) as f32))
        .collect()
}

pub struct Forward {
    pub logits: Vec<f32>,
    /// `keys[layer][position - 1]`
    pub keys: Vec<Vec<Vec<f32>>>,
    pub values: Vec<Vec<Vec<f32>>>,
}

/// Recomputes every position from scratch. Generated inputs are `None` for
/// the start embedding, otherwise a token id. Returns logits of the last row.
pub fn batch_forward(
    w: &DecoderWeights,
    text: &[usize],
    style: &PromptEmbedding,
    inputs: &[Option<usize>],
    window: Option<(usize, usize)>,
) -> Forward {
    let mut hidden: Vec<Vec<f32>> = Vec::new();
    for (p, &id) in text.iter().enumerate() {
        hidden.push(
            w.text_embedding
                .row(id)
                .iter()
                .zip(w.positional.row(p))
                .map(|(a, b)| a + b)
                .collect(),
        );
    }
    for (s, input) in inputs.iter().enumerate() {
        let base: &[f32] = match input {
            None => &w.start_embedding,
            Some(id) => w.token_embedding.row(*id),
        };
        let p = text.len() + s;
        hidden.push(base.iter().zip(w.positional.row(p)).map(|(a, b)| a + b).collect());
    }
    let d = w.positional.cols();
    let scale = 1.0 / (d as f32).sqrt();
    let mut keys = Vec::new();
    let mut values = Vec::new();
    for layer in &w.layers {
        let q: Vec<Vec<f32>> = hidden.iter().map(|h| project(h, &layer.self_q)).collect();
        let k: Vec<Vec<f32>> = hidden.iter().map(|h| project(h, &layer.self_k)).collect();
        let v: Vec<Vec<f32>> = hidden.iter().map(|h| project(h, &layer.self_v)).collect();
        let style_k: Vec<Vec<f32>> = (0..style.len()).map(|s| project(style.vector(s), &layer.cross_k)).collect();
        let style_v: Vec<Vec<f32>> = (0..style.len()).map(|s| project(style.vector(s), &layer.cross_v)).collect();
        let mut next = Vec::with_capacity(hidden.len());
        for (row, h) in hidden.iter().enumerate() {
            let i = row + 1;
            let scores: Vec<(usize, f32)> = (1..=i)
                .filter(|&j| j <= text.len() && i <= text.len() || visible(i, j, window))
                .map(|j| {
                    let s = q[row].iter().zip(&k[j - 1]).fold(0.0f32, |a, (x, y)| a + x * y);
                    (j, s * scale)
                })
                .collect();
            let mut ctx = vec![0.0f32; d];
            for (j, a) in softmax(&scores) {
                for (c, x) in ctx.iter_mut().zip(&v[j - 1]) {
                    *c += a * x;
                }
            }
            let mut x: Vec<f32> = h.iter().zip(project(&ctx, &layer.self_o)).map(|(a, b)| a + b).collect();

            let cq = project(&x, &layer.cross_q);
            let cscale = 1.0 / (cq.len() as f32).sqrt();
            let cscores: Vec<(usize, f32)> = style_k
                .iter()
                .enumerate()
                .map(|(s, key)| (s, cq.iter().zip(key).fold(0.0f32, |a, (p, r)| a + p * r) * cscale))
                .collect();
            let mut cctx = vec![0.0f32; style_v[0].len()];
            for (s, a) in softmax(&cscores) {
                for (c, val) in cctx.iter_mut().zip(&style_v[s]) {
                    *c += a * val;
                }
            }
            for (xi, o) in x.iter_mut().zip(project(&cctx, &layer.cross_o)) {
                *xi += o;
            }

            let mut inner = project(&x, &layer.ff_in);
            for (u, b) in inner.iter_mut().zip(&layer.ff_in_bias) {
                *u = (*u + b).max(0.0);
            }
            for ((xi, o), b) in x.iter_mut().zip(project(&inner, &layer.ff_out)).zip(&layer.ff_out_bias) {
                *xi += o + b;
            }
            next.push(x);
        }
        keys.push(k);
        values.push(v);
        hidden = next;
    }
    Forward {
        logits: project(hidden.last().unwrap(), &w.head),
        keys,
        values,
    }
}

pub fn max_abs_diff(a: &[f32], b: &[f32]) -> f32 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

/// Builds Decoder-A's post-swap state by hand: rows `1..=n` copied from a
/// separately run Decoder-B, later rows from a separately run Decoder-A.
pub fn splice_oracle_logits(
    w: &DecoderWeights,
    text: &[usize],
    src: &PromptEmbedding,
    e_prime: &PromptEmbedding,
    plan: &TransitionPlan,
) -> Vec<Vec<f32>> {
    let n = text.len() + plan.k;
    let before = plan.window.mask(n);
    let mut b = decoder::prefill(w, text, e_prime).unwrap();
    let mut sb = TokenSampler::new(plan.sampler);
    decoder::continue_generation(&mut b, plan.k, before, &mut sb).unwrap();
    let mut a = decoder::prefill(w, text, src).unwrap();
    let mut sa = TokenSampler::new(plan.sampler);
    let (tokens, _) = decoder::continue_generation(&mut a, plan.t_star, before, &mut sa).unwrap();

    let layers = w.layers.len();
    let d = w.positional.cols();
    let mut spliced = KvCache::new(layers, d, d);
    for layer in 0..layers {
        for p in 1..=a.position() {
            let from = if p <= n { b.cache() } else { a.cache() };
            spliced.append(layer, from.key(layer, p), from.value(layer, p)).unwrap();
        }
    }
    let mut state =
        DecoderState::from_parts(w, spliced, e_prime.clone(), text.len(), tokens.last().copied()).unwrap();
    let mut logits = Vec::new();
    for _ in plan.t_star..plan.steps {
        let out = state.step(plan.window.mask(n)).unwrap();
        let tok = sa.sample(&out.logits);
        state.accept(tok).unwrap();
        logits.push(out.logits);
    }
    logits
}

