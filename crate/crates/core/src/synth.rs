//! Synthetic MQM-like human score matrices.
//!
//! Each translation collects minor (-1) and major (-5) errors from Poisson
//! counts whose rates scale with a per-system quality factor and a
//! per-segment difficulty factor. A small fraction are non-translations and
//! score exactly -25. Scores are clamped to [-100, 0].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::scalar::Scalar;

pub const MINOR_PENALTY: f64 = 1.0;
pub const MAJOR_PENALTY: f64 = 5.0;
pub const NON_TRANSLATION_PENALTY: f64 = 25.0;
pub const SCORE_FLOOR: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub minor_rate: f64,
    pub major_rate: f64,
    pub non_translation_prob: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            minor_rate: 1.2,
            major_rate: 0.35,
            non_translation_prob: 0.01,
        }
    }
}

/// Generates a fully present `systems x segments` matrix, deterministic in `seed`.
pub fn synthetic_mqm<T: Scalar>(systems: usize, segments: usize, seed: u64) -> Result<ScoreMatrix<T>> {
    synthetic_mqm_with(systems, segments, seed, SynthParams::default())
}

pub fn synthetic_mqm_with<T: Scalar>(
    systems: usize,
    segments: usize,
    seed: u64,
    params: SynthParams,
) -> Result<ScoreMatrix<T>> {
    if systems == 0 || segments == 0 {
        return Err(Error::InvalidArgument(
            "system and segment counts must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quality: Vec<f64> = (0..systems).map(|_| rng.random_range(0.4..1.6)).collect();
    let difficulty: Vec<f64> = (0..segments).map(|_| rng.random_range(0.3..1.7)).collect();

    let mut values = Vec::with_capacity(systems * segments);
    for &q in &quality {
        for &d in &difficulty {
            let score = if rng.random_bool(params.non_translation_prob) {
                -NON_TRANSLATION_PENALTY
            } else {
                let minor = poisson(&mut rng, params.minor_rate * q * d);
                let major = poisson(&mut rng, params.major_rate * q * d);
                -(minor * MINOR_PENALTY + major * MAJOR_PENALTY)
            };
            values.push(Some(T::lit(score.max(SCORE_FLOOR))));
        }
    }
    ScoreMatrix::new(
        (0..systems).map(|i| format!("sys{i}")).collect(),
        (0..segments).map(|i| format!("seg{i}")).collect(),
        values,
    )
}

fn poisson(rng: &mut impl Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng)
}
