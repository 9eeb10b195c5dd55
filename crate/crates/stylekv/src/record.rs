//! Self-contained run records.

use serde::{Deserialize, Serialize};
use stylekv_core::decoder::GenerationTrace;
use stylekv_core::diagnostics::VarianceSeries;
use stylekv_core::sampler::Sampler;
use stylekv_core::toymodel::{SignClass, ToyConfig};
use stylekv_core::transition::{SwapRecord, TransitionPlan, Window};

/// Everything needed to reproduce a transition run on a given model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub t_star: usize,
    pub k: usize,
    #[serde(with = "window_text")]
    pub window: Window,
    pub alpha: f32,
    pub beta: Option<f32>,
    pub steps: usize,
    pub naive: bool,
    pub seed: u64,
    /// Sampling temperature; greedy decoding when absent.
    pub temperature: Option<f32>,
    pub window_before_transition: bool,
    pub segment_len: usize,
    pub source_attribute: f32,
    pub target_attribute: f32,
}

impl Default for RunSettings {
    fn default() -> Self {
        let plan = TransitionPlan::default();
        Self {
            t_star: plan.t_star,
            k: plan.k,
            window: plan.window,
            alpha: plan.alpha,
            beta: plan.beta,
            steps: plan.steps,
            naive: false,
            seed: 0,
            temperature: None,
            window_before_transition: plan.window_before_transition,
            segment_len: crate::experiments::SEGMENT_LEN,
            source_attribute: crate::experiments::TRANSITION_STYLES.0,
            target_attribute: crate::experiments::TRANSITION_STYLES.1,
        }
    }
}

impl RunSettings {
    pub fn plan(&self) -> TransitionPlan {
        TransitionPlan {
            t_star: self.t_star,
            k: self.k,
            window: self.window,
            alpha: self.alpha,
            beta: self.beta,
            steps: self.steps,
            sampler: match self.temperature {
                Some(temperature) => Sampler::Temperature {
                    temperature,
                    seed: self.seed,
                },
                None => Sampler::Greedy,
            },
            window_before_transition: self.window_before_transition,
        }
    }
}

mod window_text {
    use serde::{Deserialize, Deserializer, Serializer};
    use stylekv_core::transition::Window;

    pub fn serialize<S: Serializer>(w: &Window, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(w)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Window, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentReadings {
    pub first: f32,
    pub last: f32,
    pub delta: f32,
    pub segment_len: usize,
    pub sign_class: SignClass,
}

/// Per-layer extremes of the cross-attention variance around the commit phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub commit_len: usize,
    pub commit_phase_min: Vec<f64>,
    pub late_phase_max: Vec<f64>,
}

impl VarianceSummary {
    pub fn from_series(series: &VarianceSeries, commit_len: usize) -> Self {
        let layers = series.layers();
        let end = series.len() + 1;
        Self {
            commit_len,
            commit_phase_min: (0..layers)
                .map(|l| series.min_over(l, 1..commit_len + 1).unwrap_or(f64::NAN))
                .collect(),
            late_phase_max: (0..layers)
                .map(|l| series.max_over(l, commit_len + 1..end).unwrap_or(f64::NAN))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub engine_version: String,
    pub settings: RunSettings,
    pub model: ToyConfig,
    pub tokens: Vec<usize>,
    pub segments: SegmentReadings,
    pub swap: SwapRecord,
    pub variance: VarianceSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<GenerationTrace>,
}
