//! Feature extraction for the linear value head.
//!
//! Both units of scoring share one fixed-length feature vector:
//! sentence-in-context (stepwise search, TD training) and whole-caption
//! (coarse selection). The features are exact statistics of the closed
//! world, so every value-model test is analytic.

use serde::{Deserialize, Serialize};

use crate::world::{Caption, Scene, Sentence};

/// Version tag of the feature layout below; serialized with trained
/// parameters and checked before prediction.
pub const FEATURE_SPEC_VERSION: &str = "linear-v1";

pub const FEATURE_DIM: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "grounded_fraction",
    "hallucinated_fraction",
    "coverage",
    "novelty",
    "length_norm",
    "bias",
];

/// Sentence length that normalizes to 1.0.
const LENGTH_NORM_TOKENS: f64 = 12.0;

/// A fixed-length, finite feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Features(pub Vec<f64>);

impl Features {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(f, w)| f * w).sum()
    }
}

/// Features of a sentence in the context of its prefix.
///
/// `coverage` is the salience-weighted coverage of the prefix alone (how
/// much of the scene was already described before this sentence);
/// `novelty` is the coverage the sentence adds over that prefix. Keeping
/// the state component and the gain component in separate slots lets one
/// weight vector serve both scoring modes: a whole caption is the gain it
/// achieves over an empty prefix.
pub fn sentence_features(sentence: &Sentence, scene: &Scene, prefix: &[Sentence]) -> Features {
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

    let prefix_mentions: Vec<&str> = prefix
        .iter()
        .flat_map(|s| s.mentions().iter().map(String::as_str))
        .collect();
    let coverage_before = scene.salience_weighted_coverage(prefix_mentions.iter().copied());
    let coverage_after = scene.salience_weighted_coverage(
        prefix_mentions
            .iter()
            .copied()
            .chain(mentions.iter().map(String::as_str)),
    );

    let length_norm = if sentence.is_eos() {
        0.0
    } else {
        (sentence.tokens().len() as f64 / LENGTH_NORM_TOKENS).min(1.0)
    };

    Features(vec![
        grounded_frac,
        halluc_frac,
        coverage_before,
        coverage_after - coverage_before,
        length_norm,
        1.0,
    ])
}

/// Whole-caption features: the same statistics over the union of the
/// caption's mentions. The caption is treated as one step from an empty
/// prefix, so prefix coverage is zero and novelty is the caption's total
/// coverage.
pub fn caption_features(caption: &Caption, scene: &Scene) -> Features {
    let union = caption.mention_union();
    let (grounded, hallucinated) = scene.split_mentions(union.iter().copied());
    let count = union.len();
    let (grounded_frac, halluc_frac) = if count == 0 {
        (0.0, 0.0)
    } else {
        (
            grounded.len() as f64 / count as f64,
            hallucinated.len() as f64 / count as f64,
        )
    };
    let coverage = scene.salience_weighted_coverage(grounded.iter().copied());
    let mean_tokens = caption
        .sentences()
        .iter()
        .map(|s| s.tokens().len())
        .sum::<usize>() as f64
        / caption.len() as f64;
    let length_norm = (mean_tokens / LENGTH_NORM_TOKENS).min(1.0);

    Features(vec![
        grounded_frac,
        halluc_frac,
        0.0,
        coverage,
        length_norm,
        1.0,
    ])
}
