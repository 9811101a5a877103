//! Decoding strategies with exact scorer-call accounting.
//!
//! Five strategies share one candidate machinery: unguided greedy decoding,
//! best-of-N over full captions, stepwise search guided by the grounding
//! similarity, stepwise search guided by the value model, and the two-stage
//! search (coarse caption selection, then targeted refinement of audited
//! gaps). Every policy, reward, and value-model invocation made while
//! ranking candidates is counted in a [`BudgetReport`]; closed-form
//! predictions for those counts live in [`BudgetReport::closed_form`].

mod audit;
mod strategies;

pub use audit::{audit_grounding, RefinementSite};
pub use strategies::{
    calibrate_refine_threshold, decode, decode_bon, decode_greedy, decode_prm_step,
    decode_step_guided, decode_two_stage, decode_two_stage_with, decode_value_step, ScoreKind,
    StrategyScorers,
};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::prm::{similarity, OracleWeights};
use crate::value::ValueParams;
use crate::world::{Caption, Prefix, Scene, Sentence, DEFAULT_TEMPERATURES};

/// Scores one candidate sentence in the context of its prefix.
pub trait SentenceScorer: Sync {
    fn score_sentence(&self, scene: &Scene, prefix: &Prefix, sentence: &Sentence) -> Result<f64>;
}

/// Scores one full candidate caption.
pub trait CaptionScorer: Sync {
    fn score_caption(&self, scene: &Scene, caption: &Caption) -> Result<f64>;
}

impl SentenceScorer for ValueParams {
    fn score_sentence(&self, scene: &Scene, prefix: &Prefix, sentence: &Sentence) -> Result<f64> {
        self.predict_sentence(sentence, scene, prefix.sentences())
    }
}

impl CaptionScorer for ValueParams {
    fn score_caption(&self, scene: &Scene, caption: &Caption) -> Result<f64> {
        self.predict_caption(caption, scene)
    }
}

/// The grounding similarity as a stepwise scorer (prefix-blind).
#[derive(Debug, Clone, Default)]
pub struct DeltaScorer {
    pub weights: OracleWeights,
}

impl SentenceScorer for DeltaScorer {
    fn score_sentence(&self, scene: &Scene, _prefix: &Prefix, sentence: &Sentence) -> Result<f64> {
        Ok(similarity(sentence, scene, &self.weights).delta)
    }
}

/// Which decoding strategy to run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Bon,
    PrmStep,
    ValueStep,
    #[default]
    TwoStage,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Greedy,
        Strategy::Bon,
        Strategy::PrmStep,
        Strategy::ValueStep,
        Strategy::TwoStage,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Bon => "bon",
            Strategy::PrmStep => "prm_step",
            Strategy::ValueStep => "value_step",
            Strategy::TwoStage => "two_stage",
        }
    }

    pub fn needs_value_model(&self) -> bool {
        matches!(self, Strategy::ValueStep | Strategy::TwoStage)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "bon" => Ok(Strategy::Bon),
            "prm_step" => Ok(Strategy::PrmStep),
            "value_step" => Ok(Strategy::ValueStep),
            "two_stage" => Ok(Strategy::TwoStage),
            other => Err(CoreError::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Search configuration shared by all strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub strategy: Strategy,
    /// The N decoding temperatures.
    pub temperatures: Vec<f64>,
    /// K candidates per temperature.
    pub k_per_temp: usize,
    /// Sentences whose predicted value falls below this are flagged for
    /// refinement.
    pub refine_threshold: f64,
    /// Hard cap on refinement rounds.
    pub max_refinements: usize,
    /// Objects at or above this salience must be mentioned, or the audit
    /// flags missing content.
    pub salience_cutoff: f64,
    /// Record every candidate pool in the decode result.
    pub log_candidates: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::TwoStage,
            temperatures: DEFAULT_TEMPERATURES.to_vec(),
            k_per_temp: 6,
            refine_threshold: 0.0,
            max_refinements: 3,
            salience_cutoff: 0.5,
            log_candidates: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() {
            return Err(CoreError::Config(
                "temperature list must be non-empty".into(),
            ));
        }
        if self.temperatures.iter().any(|t| *t <= 0.0) {
            return Err(CoreError::Config("temperatures must be positive".into()));
        }
        if self.k_per_temp == 0 {
            return Err(CoreError::Config("k_per_temp must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.salience_cutoff) {
            return Err(CoreError::Config("salience_cutoff must be in [0,1]".into()));
        }
        if self.refine_threshold.is_nan() || self.refine_threshold == f64::INFINITY {
            return Err(CoreError::Config(
                "refine_threshold must not be NaN or +inf".into(),
            ));
        }
        Ok(())
    }

    /// N * K, the candidate pool size.
    pub fn pool_size(&self) -> u64 {
        (self.temperatures.len() * self.k_per_temp) as u64
    }
}

/// Exact counts of scorer and policy invocations for one decode.
///
/// `sentences_in_output` is the final caption's sentence count S;
/// `refinement_rounds` is the number of scored refinement pools m. Counters
/// cover candidate generation and ranking only; derived bookkeeping (the
/// refinement audit, final per-sentence values) is not part of the budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub policy_sentence_calls: u64,
    pub policy_caption_calls: u64,
    pub reward_calls: u64,
    pub value_calls: u64,
    pub sentences_in_output: u64,
    pub refinement_rounds: u64,
}

impl BudgetReport {
    /// Closed-form counts implied by the strategy and the observed
    /// (S, m): what the instrumented counters must equal.
    pub fn closed_form(strategy: Strategy, pool: u64, s: u64, m: u64) -> BudgetReport {
        match strategy {
            Strategy::Greedy => BudgetReport {
                policy_caption_calls: 1,
                sentences_in_output: s,
                ..BudgetReport::default()
            },
            Strategy::Bon => BudgetReport {
                policy_caption_calls: pool,
                reward_calls: pool,
                sentences_in_output: s,
                ..BudgetReport::default()
            },
            Strategy::PrmStep => BudgetReport {
                policy_sentence_calls: pool * s,
                reward_calls: pool * s,
                sentences_in_output: s,
                ..BudgetReport::default()
            },
            Strategy::ValueStep => BudgetReport {
                policy_sentence_calls: pool * s,
                value_calls: pool * s,
                sentences_in_output: s,
                ..BudgetReport::default()
            },
            Strategy::TwoStage => BudgetReport {
                policy_caption_calls: pool,
                policy_sentence_calls: pool * m,
                value_calls: pool * (1 + m),
                sentences_in_output: s,
                refinement_rounds: m,
                ..BudgetReport::default()
            },
        }
    }

    pub fn accumulate(&mut self, other: &BudgetReport) {
        self.policy_sentence_calls += other.policy_sentence_calls;
        self.policy_caption_calls += other.policy_caption_calls;
        self.reward_calls += other.reward_calls;
        self.value_calls += other.value_calls;
        self.sentences_in_output += other.sentences_in_output;
        self.refinement_rounds += other.refinement_rounds;
    }
}

/// What kind of pool a logged candidate set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "stage")]
pub enum PoolKind {
    /// Full-caption candidates (best-of-N, or two-stage stage 1).
    CaptionPool,
    /// Stepwise sentence candidates at a given output step.
    SentenceStep { step: usize },
    /// Refinement-round sentence candidates.
    RefinementRound { round: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateContent {
    Caption(Caption),
    Sentence(Sentence),
}

/// One logged candidate with its score and selection flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub score: f64,
    pub selected: bool,
    pub content: CandidateContent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub kind: PoolKind,
    pub candidates: Vec<Candidate>,
}

/// Every candidate pool a decode evaluated, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub pools: Vec<CandidatePool>,
}

/// The output of one decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub strategy: Strategy,
    pub seed: u64,
    pub caption: Caption,
    pub budget: BudgetReport,
    /// Value-model prediction per output sentence, present when a value
    /// model guided or audited the decode.
    pub per_sentence_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<DecodeTrace>,
}

/// First index of the maximal score; ties break to the lowest candidate
/// index (generation order).
pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}
