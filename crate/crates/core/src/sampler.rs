//! Token selection from logits.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// How the next token is picked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sampler {
    /// Highest logit; ties go to the lowest id.
    #[default]
    Greedy,
    /// Softmax sampling at `temperature` from a ChaCha8 stream seeded with `seed`.
    Temperature { temperature: f32, seed: u64 },
}

/// A sampler together with its random stream.
#[derive(Debug, Clone)]
pub struct TokenSampler {
    kind: Sampler,
    rng: ChaCha8Rng,
}

impl TokenSampler {
    pub fn new(kind: Sampler) -> Self {
        let seed = match kind {
            Sampler::Greedy => 0,
            Sampler::Temperature { seed, .. } => seed,
        };
        Self {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kind(&self) -> Sampler {
        self.kind
    }

    pub fn sample(&mut self, logits: &[f32]) -> usize {
        match self.kind {
            Sampler::Greedy => argmax(logits),
            Sampler::Temperature { temperature, .. } if temperature <= 0.0 => argmax(logits),
            Sampler::Temperature { temperature, .. } => {
                let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
                let t = temperature as f64;
                let weights: alloc::vec::Vec<f64> = logits
                    .iter()
                    .map(|&l| libm::exp((l as f64 - max) / t))
                    .collect();
                let total: f64 = weights.iter().sum();
                // 53 random bits -> uniform in [0, 1)
                let u = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * total;
                let mut acc = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return i;
                    }
                }
                logits.len() - 1
            }
        }
    }
}

pub fn argmax(logits: &[f32]) -> usize {
    let mut best = 0;
    for (i, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_prefers_first_maximum() {
        assert_eq!(argmax(&[0.0, 3.0, 3.0, -1.0]), 1);
        let mut s = TokenSampler::new(Sampler::Greedy);
        assert_eq!(s.sample(&[1.0, 2.0, 0.5]), 1);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let logits = [0.1, 0.5, 0.2, 0.9, -0.3];
        let kind = Sampler::Temperature {
            temperature: 1.0,
            seed: 42,
        };
        let mut a = TokenSampler::new(kind);
        let mut b = TokenSampler::new(kind);
        let xs: alloc::vec::Vec<usize> = (0..64).map(|_| a.sample(&logits)).collect();
        let ys: alloc::vec::Vec<usize> = (0..64).map(|_| b.sample(&logits)).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().any(|&x| x != xs[0]));
    }
}
