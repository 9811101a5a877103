//! Process reward model: grounding similarity and margin-based reward
//! shaping.
//!
//! `similarity` is an exact oracle over the closed world: it rewards
//! grounded mentions and salience-weighted coverage and penalizes
//! hallucinated mentions, clamped to [0, 1]. `margin_reward` turns a
//! similarity into a shaped reward around a calibrated threshold tau:
//! scores at or above tau pass through; scores below it draw a penalty
//! proportional to the gap. Two penalty conventions exist in the wild, so
//! both are implemented:
//!
//! - `signed` (default): reward = -(tau - delta), an actual penalty.
//! - `literal`: reward = tau - delta, which is positive below the
//!   threshold and thus *decreasing* in delta there.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::world::{Corpus, Scene, Sentence};

/// A grounding similarity in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub delta: f64,
}

/// Weights of the similarity oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleWeights {
    pub grounded: f64,
    pub coverage: f64,
    pub hallucination: f64,
}

impl Default for OracleWeights {
    fn default() -> Self {
        // Calibrated so ground-truth sentences dominate every toy-policy
        // sentence and delta spreads over most of [0, 1].
        Self {
            grounded: 0.5,
            coverage: 0.4,
            hallucination: 0.6,
        }
    }
}

impl OracleWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grounded", self.grounded),
            ("coverage", self.coverage),
            ("hallucination", self.hallucination),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::Config(format!(
                    "oracle weight {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The oracle's maximum: a fully grounded, fully covering sentence.
    pub fn max_delta(&self) -> f64 {
        (self.grounded + self.coverage).min(1.0)
    }
}

/// Grounding similarity between a sentence and a scene:
/// `delta = w_g * grounded_fraction + w_c * coverage - w_h * hallucinated_fraction`,
/// clamped to [0, 1]. Coverage is the salience-weighted fraction of scene
/// objects the sentence mentions. The EOS sentinel scores zero.
pub fn similarity(sentence: &Sentence, scene: &Scene, weights: &OracleWeights) -> SimilarityScore {
    let mentions = sentence.mentions();
    let (grounded, hallucinated) = scene.split_mentions(mentions.iter().map(String::as_str));
    let mention_count = mentions.len();
    let (grounded_frac, halluc_frac) = if mention_count == 0 {
        (0.0, 0.0)
    } else {
        (
            grounded.len() as f64 / mention_count as f64,
            hallucinated.len() as f64 / mention_count as f64,
        )
    };
    let coverage = scene.salience_weighted_coverage(grounded.iter().copied());
    let raw = weights.grounded * grounded_frac + weights.coverage * coverage
        - weights.hallucination * halluc_frac;
    SimilarityScore {
        delta: raw.clamp(0.0, 1.0),
    }
}

/// How sub-threshold similarities map to rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    /// Reward is `-(tau - delta)` below the threshold.
    #[default]
    Signed,
    /// Reward is `tau - delta` below the threshold, exactly as printed.
    Literal,
}

/// Margin reward configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarginConfig {
    pub tau: f64,
    pub penalty_mode: PenaltyMode,
}

impl Default for MarginConfig {
    fn default() -> Self {
        Self {
            tau: 0.16,
            penalty_mode: PenaltyMode::Signed,
        }
    }
}

impl MarginConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(CoreError::Config(format!(
                "tau must be in (0,1), got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Margin-adjusted reward of a similarity score.
pub fn margin_reward(delta: f64, cfg: &MarginConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(CoreError::Domain(format!(
            "delta must be in [0,1], got {delta}"
        )));
    }
    Ok(if delta >= cfg.tau {
        delta
    } else {
        match cfg.penalty_mode {
            PenaltyMode::Literal => cfg.tau - delta,
            PenaltyMode::Signed => -(cfg.tau - delta),
        }
    })
}

/// Summary of the empirical delta distribution used to pick tau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub p10: f64,
    pub p20: f64,
    pub p80: f64,
    pub p90: f64,
    pub percentile: f64,
    pub tau: f64,
}

/// Calibrates tau as the given percentile of the empirical delta
/// distribution over every sentence/scene pair in the corpus.
pub fn calibrate_tau(
    corpus: &Corpus,
    percentile: f64,
    weights: &OracleWeights,
) -> Result<CalibrationReport> {
    if !(0.0 < percentile && percentile < 100.0) {
        return Err(CoreError::Domain(format!(
            "percentile must be in (0,100), got {percentile}"
        )));
    }
    let mut deltas: Vec<f64> = corpus
        .sentence_scene_pairs()
        .map(|(sentence, scene)| similarity(sentence, scene, weights).delta)
        .collect();
    if deltas.is_empty() {
        return Err(CoreError::Data(
            "corpus has no sentences to calibrate on".into(),
        ));
    }
    deltas.sort_by(f64::total_cmp);

    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    Ok(CalibrationReport {
        samples: deltas.len(),
        min: deltas[0],
        max: deltas[deltas.len() - 1],
        mean,
        p10: percentile_of(&deltas, 10.0),
        p20: percentile_of(&deltas, 20.0),
        p80: percentile_of(&deltas, 80.0),
        p90: percentile_of(&deltas, 90.0),
        percentile,
        tau: percentile_of(&deltas, percentile),
    })
}

/// Linear-interpolation percentile of a sorted slice.
fn percentile_of(sorted: &[f64], percentile: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let rank = percentile / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
