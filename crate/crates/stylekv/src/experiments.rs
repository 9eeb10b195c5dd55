//! Experiment runners over a toy model.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{anyhow, ensure, Result};
use serde::{Deserialize, Serialize};
use stylekv_core::attention::MaskSpec;
use stylekv_core::decoder;
use stylekv_core::diagnostics;
use stylekv_core::embedding::PromptEmbedding;
use stylekv_core::sampler::Sampler;
use stylekv_core::toymodel::{self, SignClass, ToyModel};
use stylekv_core::transition::{self, TransitionPlan, TransitionResult, Window};

use crate::record::{RunRecord, RunSettings, SegmentReadings, VarianceSummary};

/// Source and target attributes of transition and grid runs.
pub const TRANSITION_STYLES: (f32, f32) = (-1.0, 1.0);
/// Source and target attributes of the interpolation sweep.
pub const SWEEP_STYLES: (f32, f32) = (-0.5, 0.5);
pub const SWEEP_STEPS: usize = 128;
pub const SEGMENT_LEN: usize = 32;

/// Transition with Decoder-B (Phase 1) and Decoder-A (Phase 2) on separate threads.
pub fn run_transition_concurrent(
    model: &ToyModel,
    text: &[usize],
    src: &PromptEmbedding,
    tgt: &PromptEmbedding,
    plan: &TransitionPlan,
    naive: bool,
) -> Result<TransitionResult> {
    let attrs = model.attr_positions();
    transition::validate_plan(plan, text.len())?;
    let e_prime = transition::interpolated_style(src, tgt, &attrs, plan)?;
    let w = &model.decoder;
    let (target, source) = thread::scope(|s| {
        let target = (!naive).then(|| s.spawn(|| transition::precompute_target(w, text, &e_prime, plan)));
        let source = transition::run_source(w, text, src, plan);
        let target = target.map(|h| h.join().expect("decoder-B thread panicked"));
        (target, source)
    });
    let target = target.transpose()?;
    Ok(transition::finish_transition(source?, target.as_ref(), e_prime, plan)?)
}

pub fn transition_record(model: &ToyModel, settings: &RunSettings) -> Result<RunRecord> {
    ensure!(settings.segment_len >= 1, "segment length must be >= 1");
    let plan = settings.plan();
    let text = model.default_text();
    let src = model.encode_style(settings.source_attribute)?;
    let tgt = model.encode_style(settings.target_attribute)?;
    let mut result = run_transition_concurrent(model, &text, &src, &tgt, &plan, settings.naive)?;
    toymodel::fill_metrics(&mut result, settings.segment_len, &model.config)?;
    let metrics = result.metrics.ok_or_else(|| anyhow!("missing segment metrics"))?;
    let n = result.tokens.len();
    let last = toymodel::attribute_of(&result.tokens, n - metrics.segment_len..n, &model.config)?;
    let variance = diagnostics::attention_variance(&result.trace_a)?;
    Ok(RunRecord {
        engine_version: stylekv_core::VERSION.to_string(),
        settings: settings.clone(),
        model: model.config,
        tokens: result.tokens,
        segments: SegmentReadings {
            first: metrics.first,
            last: metrics.last,
            delta: metrics.delta,
            segment_len: metrics.segment_len,
            sign_class: toymodel::sign_class(&last, settings.target_attribute),
        },
        swap: result.swap,
        variance: VarianceSummary::from_series(&variance, model.config.commit_len),
        trace: Some(result.trace_a),
    })
}

/// Re-runs the echoed settings and returns the token sequence.
pub fn replay(model: &ToyModel, record: &RunRecord) -> Result<Vec<usize>> {
    ensure!(record.model == model.config, "run record was produced by a different model configuration");
    Ok(transition_record(model, &record.settings)?.tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f32,
    pub attribute_mean: f32,
    pub sign_class: SignClass,
}

/// Whole utterances conditioned on the interpolated style, one per `alpha`.
pub fn interp_sweep(model: &ToyModel, alphas: &[f32]) -> Result<Vec<SweepRow>> {
    ensure!(!alphas.is_empty(), "alpha list is empty");
    let (a_s, a_t) = SWEEP_STYLES;
    let src = model.encode_style(a_s)?;
    let tgt = model.encode_style(a_t)?;
    let attrs = model.attr_positions();
    let text = model.default_text();
    alphas
        .iter()
        .map(|&alpha| {
            let plan = TransitionPlan {
                alpha,
                ..TransitionPlan::default()
            };
            let e_prime = transition::interpolated_style(&src, &tgt, &attrs, &plan)?;
            let (tokens, _) = decoder::generate(
                &model.decoder,
                &text,
                &e_prime,
                SWEEP_STEPS,
                MaskSpec::FullCausal,
                Sampler::Greedy,
            )?;
            let reading = toymodel::attribute_of(&tokens, 0..tokens.len(), &model.config)?;
            Ok(SweepRow {
                alpha,
                attribute_mean: reading.value,
                sign_class: toymodel::sign_class(&reading, a_t),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub window: Window,
    pub k: usize,
    pub delta_attribute: f32,
    pub sign_class: SignClass,
}

fn window_order(w: Window) -> usize {
    match w {
        Window::Size(w) => w,
        Window::Full => usize::MAX,
    }
}

/// One full-method run per `(window, k)` cell, evaluated on worker threads.
/// Rows come back sorted by window (numeric sizes, then `full`) and then `k`.
pub fn grid(model: &ToyModel, windows: &[Window], ks: &[usize], alpha: f32) -> Result<Vec<GridRow>> {
    ensure!(!windows.is_empty() && !ks.is_empty(), "window and k lists must be non-empty");
    let cells: Vec<(Window, usize)> = windows
        .iter()
        .flat_map(|&w| ks.iter().map(move |&k| (w, k)))
        .collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(cells.len()));
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(window, k)) = cells.get(i) else { break };
                let settings = RunSettings {
                    window,
                    k,
                    alpha,
                    ..RunSettings::default()
                };
                let row = transition_record(model, &settings).map(|r| GridRow {
                    window,
                    k,
                    delta_attribute: r.segments.delta,
                    sign_class: r.segments.sign_class,
                });
                results.lock().expect("grid results poisoned").push((i, row));
            });
        }
    });
    let mut rows = Vec::with_capacity(cells.len());
    for (_, row) in results.into_inner().expect("grid results poisoned") {
        rows.push(row?);
    }
    rows.sort_by_key(|r| (window_order(r.window), r.k));
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,attribute_mean,sign_class\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.alpha, r.attribute_mean, r.sign_class.as_str()));
    }
    out
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("window,k,delta_attribute,sign_class\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.window, r.k, r.delta_attribute, r.sign_class.as_str()));
    }
    out
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
