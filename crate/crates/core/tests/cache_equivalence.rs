mod common;

use std::collections::BTreeSet;

use common::{batch_forward, max_abs_diff, seeded_weights};
use stylekv_core::attention::MaskSpec;
use stylekv_core::decoder::{self, DecoderWeights};
use stylekv_core::embedding::PromptEmbedding;
use stylekv_core::numerics::Matrix;
use stylekv_core::sampler::TokenSampler;
use stylekv_core::sampler::Sampler;
use stylekv_core::toymodel::{ToyConfig, ToyModel};

const STEPS: usize = 128;

fn seeded_style() -> PromptEmbedding {
    let data = (0..5 * 16).map(|i| ((i as f32) * 0.37).sin() * 0.8).collect();
    PromptEmbedding::new(Matrix::new(5, 16, data).unwrap(), BTreeSet::from([1])).unwrap()
}

fn check(w: &DecoderWeights, text: &[usize], style: &PromptEmbedding, spec: MaskSpec, sampler: Sampler) {
    let window = match spec {
        MaskSpec::FullCausal => None,
        MaskSpec::Sliding { n, w } => Some((n, w)),
    };
    let mut state = decoder::prefill(w, text, style).unwrap();
    let mut sampler = TokenSampler::new(sampler);
    let mut inputs = vec![None];
    let mut worst = 0.0f32;
    for t in 1..=STEPS {
        let out = state.step(spec).unwrap();
        let reference = batch_forward(w, text, style, &inputs, window);
        let diff = max_abs_diff(&out.logits, &reference.logits);
        assert!(diff <= 1e-5, "step {t}: max-abs logit diff {diff}");
        worst = worst.max(diff);
        let token = sampler.sample(&out.logits);
        state.accept(token).unwrap();
        inputs.push(Some(token));
    }
    assert!(worst <= 1e-5);
}

#[test]
fn toy_full_causal_matches_batch_recompute() {
    let toy = ToyModel::build(ToyConfig::default()).unwrap();
    let style = toy.encode_style(-0.5).unwrap();
    check(&toy.decoder, &toy.default_text(), &style, MaskSpec::FullCausal, Sampler::Greedy);
}

#[test]
fn toy_sliding_matches_batch_recompute() {
    let toy = ToyModel::build(ToyConfig::default()).unwrap();
    let style = toy.encode_style(0.75).unwrap();
    check(&toy.decoder, &toy.default_text(), &style, MaskSpec::Sliding { n: 12, w: 8 }, Sampler::Greedy);
}

#[test]
fn seeded_full_causal_matches_batch_recompute() {
    let w = seeded_weights();
    let sampler = Sampler::Temperature { temperature: 1.0, seed: 9 };
    check(&w, &[3, 1, 4, 1, 5, 9], &seeded_style(), MaskSpec::FullCausal, sampler);
}

#[test]
fn seeded_sliding_matches_batch_recompute() {
    let w = seeded_weights();
    let sampler = Sampler::Temperature { temperature: 1.0, seed: 11 };
    check(&w, &[2, 7, 1, 8], &seeded_style(), MaskSpec::Sliding { n: 6, w: 4 }, sampler);
}

#[test]
fn prefill_rows_match_batch_keys_and_values() {
    let w = seeded_weights();
    let text = [0, 5, 10, 11, 3, 3, 7];
    let state = decoder::prefill(&w, &text, &seeded_style()).unwrap();
    let reference = batch_forward(&w, &text, &seeded_style(), &[], None);
    for layer in 0..2 {
        for p in 1..=text.len() {
            assert!(max_abs_diff(state.cache().key(layer, p), &reference.keys[layer][p - 1]) <= 1e-6);
            assert!(max_abs_diff(state.cache().value(layer, p), &reference.values[layer][p - 1]) <= 1e-6);
        }
    }
}
