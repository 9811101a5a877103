//! The value model: a linear head over exact world features, trained with
//! TD(0) on margin-adjusted rewards.
//!
//! Training follows the semi-gradient convention: the target
//! `r + gamma * V(next)` is treated as a constant, and the terminal
//! transition bootstraps to zero (`target = r`).

mod features;
mod oracle;

pub use features::{
    caption_features, sentence_features, Features, FEATURE_DIM, FEATURE_NAMES, FEATURE_SPEC_VERSION,
};
pub use oracle::{evaluate as value_oracle, ExplicitMdp};

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::prm::{margin_reward, similarity, MarginConfig, OracleWeights, PenaltyMode};
use crate::rng::StreamKey;
use crate::world::{ns, Caption, Corpus, Scene, Sentence};

/// One TD training unit: a sentence, its successor (or the terminal
/// marker), the scene, and the cached margin reward of the current
/// sentence.
#[derive(Debug, Clone)]
pub struct TrainingTriplet {
    pub scene: Arc<Scene>,
    /// Sentences before `current` in its caption.
    pub prefix: Vec<Sentence>,
    pub current: Sentence,
    /// `None` marks the terminal transition.
    pub next: Option<Sentence>,
    pub reward: f64,
}

impl TrainingTriplet {
    pub fn is_terminal(&self) -> bool {
        self.next.is_none()
    }

    pub fn current_features(&self) -> Features {
        sentence_features(&self.current, &self.scene, &self.prefix)
    }

    pub fn next_features(&self) -> Option<Features> {
        self.next.as_ref().map(|next| {
            let mut prefix = self.prefix.clone();
            prefix.push(self.current.clone());
            sentence_features(next, &self.scene, &prefix)
        })
    }

    /// Re-derives the cached reward from the reward model.
    pub fn verify_reward(&self, margin: &MarginConfig, weights: &OracleWeights) -> Result<()> {
        let delta = similarity(&self.current, &self.scene, weights).delta;
        let expected = margin_reward(delta, margin)?;
        if (expected - self.reward).abs() > 1e-12 {
            return Err(CoreError::Integrity(format!(
                "cached reward {} disagrees with recomputed {}",
                self.reward, expected
            )));
        }
        Ok(())
    }
}

/// Builds the full triplet set: for a caption of m sentences, m-1 successor
/// triplets plus one terminal triplet. A single-sentence caption yields only
/// its terminal triplet.
pub fn build_triplets(
    corpus: &Corpus,
    margin: &MarginConfig,
    weights: &OracleWeights,
) -> Result<Vec<TrainingTriplet>> {
    margin.validate()?;
    weights.validate()?;
    let mut out = Vec::new();
    for record in &corpus.records {
        let scene = Arc::new(record.scene.clone());
        for caption in record.all_captions() {
            let sentences = caption.sentences();
            for i in 0..sentences.len() {
                let delta = similarity(&sentences[i], &scene, weights).delta;
                out.push(TrainingTriplet {
                    scene: Arc::clone(&scene),
                    prefix: sentences[..i].to_vec(),
                    current: sentences[i].clone(),
                    next: sentences.get(i + 1).cloned(),
                    reward: margin_reward(delta, margin)?,
                });
            }
        }
    }
    Ok(out)
}

/// A feature-space TD transition, the unit the low-level trainer consumes.
#[derive(Debug, Clone)]
pub struct TdTransition {
    pub features: Features,
    pub next: Option<Features>,
    pub reward: f64,
}

/// One semi-gradient TD(0) update. Returns the new weights and the squared
/// TD error; the target is held constant during differentiation.
pub fn td_update(
    weights: &[f64],
    gamma: f64,
    transition: &TdTransition,
    lr: f64,
) -> Result<(Vec<f64>, f64)> {
    if lr <= 0.0 {
        return Err(CoreError::Domain(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if transition.features.dim() != weights.len() {
        return Err(CoreError::Integrity(format!(
            "feature dimension {} does not match weight dimension {}",
            transition.features.dim(),
            weights.len()
        )));
    }
    let target = match &transition.next {
        Some(next) => {
            if next.dim() != weights.len() {
                return Err(CoreError::Integrity(
                    "next-state feature dimension mismatch".into(),
                ));
            }
            transition.reward + gamma * next.dot(weights)
        }
        None => transition.reward,
    };
    let prediction = transition.features.dot(weights);
    let error = target - prediction;
    let loss = error * error;
    if !loss.is_finite() {
        return Err(CoreError::TrainingDiverged(format!(
            "non-finite loss (target {target}, prediction {prediction})"
        )));
    }
    let new_weights: Vec<f64> = weights
        .iter()
        .zip(&transition.features.0)
        .map(|(w, f)| w + 2.0 * lr * error * f)
        .collect();
    Ok((new_weights, loss))
}

/// Metadata recorded with trained parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMetadata {
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_loss: f64,
    pub tau: f64,
    pub penalty_mode: PenaltyMode,
    /// 25th percentile of per-sentence trained values over the training
    /// corpus; the default refinement threshold.
    pub refine_threshold: Option<f64>,
}

impl Default for TrainMetadata {
    fn default() -> Self {
        Self {
            epochs: 0,
            learning_rate: 0.0,
            final_loss: 0.0,
            tau: MarginConfig::default().tau,
            penalty_mode: PenaltyMode::default(),
            refine_threshold: None,
        }
    }
}

/// Trained value-model parameters: a weight vector over the versioned
/// feature spec plus the discount used to fit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueParams {
    pub weights: Vec<f64>,
    pub feature_spec_version: String,
    pub gamma: f64,
    pub metadata: TrainMetadata,
}

impl ValueParams {
    pub fn zeros(gamma: f64) -> Self {
        Self {
            weights: vec![0.0; FEATURE_DIM],
            feature_spec_version: FEATURE_SPEC_VERSION.to_string(),
            gamma,
            metadata: TrainMetadata::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CoreError::Domain(format!(
                "gamma {} outside [0,1]",
                self.gamma
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(CoreError::Integrity("non-finite weight".into()));
        }
        Ok(())
    }

    /// Checks that these parameters were trained against the engine's
    /// feature spec.
    pub fn check_feature_spec(&self) -> Result<()> {
        if self.feature_spec_version != FEATURE_SPEC_VERSION {
            return Err(CoreError::Integrity(format!(
                "feature spec mismatch: params carry {:?}, engine expects {:?}",
                self.feature_spec_version, FEATURE_SPEC_VERSION
            )));
        }
        if self.weights.len() != FEATURE_DIM {
            return Err(CoreError::Integrity(format!(
                "weight dimension {} does not match feature dimension {FEATURE_DIM}",
                self.weights.len()
            )));
        }
        Ok(())
    }

    pub fn predict_features(&self, features: &Features) -> Result<f64> {
        if features.dim() != self.weights.len() {
            return Err(CoreError::Integrity(format!(
                "feature dimension {} does not match weight dimension {}",
                features.dim(),
                self.weights.len()
            )));
        }
        Ok(features.dot(&self.weights))
    }

    /// Value of a sentence in the context of its prefix.
    pub fn predict_sentence(
        &self,
        sentence: &Sentence,
        scene: &Scene,
        prefix: &[Sentence],
    ) -> Result<f64> {
        self.check_feature_spec()?;
        self.predict_features(&sentence_features(sentence, scene, prefix))
    }

    /// Holistic value of a full caption (coarse-selection mode).
    pub fn predict_caption(&self, caption: &Caption, scene: &Scene) -> Result<f64> {
        self.check_feature_spec()?;
        self.predict_features(&caption_features(caption, scene))
    }
}

/// Domain-level TD step over a training triplet.
pub fn td_step(
    params: &ValueParams,
    triplet: &TrainingTriplet,
    lr: f64,
) -> Result<(ValueParams, f64)> {
    let transition = TdTransition {
        features: triplet.current_features(),
        next: triplet.next_features(),
        reward: triplet.reward,
    };
    let (weights, loss) = td_update(&params.weights, params.gamma, &transition, lr)?;
    let mut out = params.clone();
    out.weights = weights;
    Ok((out, loss))
}

/// Training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub shuffle_seed: u64,
    pub margin: MarginConfig,
    pub oracle: OracleWeights,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            learning_rate: 0.05,
            gamma: 0.9,
            shuffle_seed: 0,
            margin: MarginConfig::default(),
            oracle: OracleWeights::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(CoreError::Config("epochs must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(CoreError::Config("learning_rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CoreError::Config(format!(
                "gamma {} outside [0,1]",
                self.gamma
            )));
        }
        self.margin.validate()?;
        self.oracle.validate()
    }
}

/// A finished training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ValueParams,
    /// Mean squared TD error per epoch.
    pub loss_curve: Vec<f64>,
}

/// Online per-transition SGD with epoch-level seeded shuffling.
/// Deterministic in its inputs. Returns final weights and the epoch-mean
/// loss curve.
pub fn train_transitions(
    transitions: &[TdTransition],
    dim: usize,
    gamma: f64,
    epochs: usize,
    lr: f64,
    shuffle_seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if transitions.is_empty() {
        return Err(CoreError::Data("no transitions to train on".into()));
    }
    let mut weights = vec![0.0; dim];
    let mut curve = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let order = shuffled_indices(transitions.len(), shuffle_seed, epoch as u64);
        let mut total = 0.0;
        for idx in order {
            let (next_weights, loss) = td_update(&weights, gamma, &transitions[idx], lr)?;
            weights = next_weights;
            total += loss;
        }
        curve.push(total / transitions.len() as f64);
    }
    Ok((weights, curve))
}

fn shuffled_indices(n: usize, shuffle_seed: u64, epoch: u64) -> Vec<usize> {
    let mut rng = StreamKey::root(shuffle_seed)
        .descend(&[ns::SHUFFLE, epoch])
        .rng();
    let mut order: Vec<usize> = (0..n).collect();
    // Fisher-Yates.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// Trains the value model on a corpus. On divergence the learning rate is
/// halved and training restarts from zero weights, up to three times.
pub fn train(corpus: &Corpus, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let triplets = build_triplets(corpus, &cfg.margin, &cfg.oracle)?;
    let transitions: Vec<TdTransition> = triplets
        .iter()
        .map(|t| TdTransition {
            features: t.current_features(),
            next: t.next_features(),
            reward: t.reward,
        })
        .collect();

    let mut lr = cfg.learning_rate;
    let mut last_err = None;
    for _attempt in 0..4 {
        match train_transitions(
            &transitions,
            FEATURE_DIM,
            cfg.gamma,
            cfg.epochs,
            lr,
            cfg.shuffle_seed,
        ) {
            Ok((weights, curve)) => {
                let params = ValueParams {
                    weights,
                    feature_spec_version: FEATURE_SPEC_VERSION.to_string(),
                    gamma: cfg.gamma,
                    metadata: TrainMetadata {
                        epochs: cfg.epochs,
                        learning_rate: lr,
                        final_loss: *curve.last().expect("epochs >= 1"),
                        tau: cfg.margin.tau,
                        penalty_mode: cfg.margin.penalty_mode,
                        // Filled by the search-level calibration pass.
                        refine_threshold: None,
                    },
                };
                return Ok(TrainOutcome {
                    params,
                    loss_curve: curve,
                });
            }
            Err(CoreError::TrainingDiverged(msg)) => {
                lr /= 2.0;
                last_err = Some(CoreError::TrainingDiverged(msg));
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| CoreError::TrainingDiverged("unknown".into())))
}
