//! The run configuration: one file, one section per subsystem, one
//! reproducibility artifact per experiment. Unknown keys are rejected
//! everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use capsearch_core::error::{CoreError, Result};
use capsearch_core::policy::{
    Policy, ToyDescriber, ToyDescriberConfig, VagueDescriber, VagueDescriberConfig,
};
use capsearch_core::prm::{MarginConfig, OracleWeights, PenaltyMode};
use capsearch_core::search::{SearchConfig, Strategy};
use capsearch_core::value::TrainConfig;
use capsearch_core::world::{CorpusConfig, WorldConfig, DEFAULT_TEMPERATURES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads for scene-parallel stages; 0 uses the runtime
    /// default. Outputs are identical for any worker count.
    pub workers: usize,
    pub world: WorldSection,
    pub policy: PolicySection,
    pub prm: PrmSection,
    pub value: ValueSection,
    pub search: SearchSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 7,
            output_dir: PathBuf::from("out"),
            workers: 0,
            world: WorldSection::default(),
            policy: PolicySection::default(),
            prm: PrmSection::default(),
            value: ValueSection::default(),
            search: SearchSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CoreError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CoreError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.world.to_corpus_config().validate()?;
        self.policy.validate()?;
        self.prm.validate()?;
        self.value.validate()?;
        self.search.to_search_config(None).validate()?;
        self.eval.validate()?;
        Ok(())
    }

    /// Hash of the experiment configuration. Execution-only fields
    /// (worker count, output directory) are normalized out so reruns of
    /// the same experiment carry the same hash.
    pub fn hash(&self) -> Result<String> {
        let mut normalized = self.clone();
        normalized.workers = 0;
        normalized.output_dir = PathBuf::new();
        capsearch_core::io::config_hash(&normalized)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldSection {
    pub scenes: usize,
    pub captions_per_scene: usize,
    pub temperatures: Vec<f64>,
    pub scene: WorldConfig,
}

impl Default for WorldSection {
    fn default() -> Self {
        let base = CorpusConfig::default();
        Self {
            scenes: base.scenes,
            captions_per_scene: base.captions_per_scene,
            temperatures: base.temperatures,
            scene: base.world,
        }
    }
}

impl WorldSection {
    pub fn to_corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            scenes: self.scenes,
            captions_per_scene: self.captions_per_scene,
            temperatures: self.temperatures.clone(),
            world: self.scene.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[default]
    Toy,
    Vague,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub kind: PolicyKind,
    pub hallucination_rate: f64,
    pub omission_bias: f64,
    pub max_sentences: usize,
    pub stop_prob: f64,
    pub greedy_temperature: f64,
    /// Only used by the `vague` policy.
    pub vague_rate: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        let base = ToyDescriberConfig::default();
        Self {
            kind: PolicyKind::Toy,
            hallucination_rate: base.hallucination_rate,
            omission_bias: base.omission_bias,
            max_sentences: base.max_sentences,
            stop_prob: base.stop_prob,
            greedy_temperature: base.greedy_temperature,
            vague_rate: VagueDescriberConfig::default().vague_rate,
        }
    }
}

impl PolicySection {
    fn toy_config(&self) -> ToyDescriberConfig {
        ToyDescriberConfig {
            hallucination_rate: self.hallucination_rate,
            omission_bias: self.omission_bias,
            max_sentences: self.max_sentences,
            stop_prob: self.stop_prob,
            greedy_temperature: self.greedy_temperature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.toy_config().validate()?;
        if !(0.0..=1.0).contains(&self.vague_rate) {
            return Err(CoreError::Config("vague_rate must be in [0,1]".into()));
        }
        Ok(())
    }

    pub fn build(&self, world: &WorldConfig) -> Result<Box<dyn Policy>> {
        match self.kind {
            PolicyKind::Toy => Ok(Box::new(ToyDescriber::new(
                self.toy_config(),
                world.vocabulary.clone(),
            )?)),
            PolicyKind::Vague => Ok(Box::new(VagueDescriber::new(
                VagueDescriberConfig {
                    base: self.toy_config(),
                    vague_rate: self.vague_rate,
                },
                world.vocabulary.clone(),
            )?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrmSection {
    /// Pinned margin threshold; when absent, `train` calibrates it from
    /// the corpus at `percentile`.
    pub tau: Option<f64>,
    pub percentile: f64,
    pub penalty_mode: PenaltyMode,
    pub oracle: OracleWeights,
}

impl Default for PrmSection {
    fn default() -> Self {
        Self {
            tau: None,
            percentile: 17.0,
            penalty_mode: PenaltyMode::default(),
            oracle: OracleWeights::default(),
        }
    }
}

impl PrmSection {
    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        if let Some(tau) = self.tau {
            MarginConfig {
                tau,
                penalty_mode: self.penalty_mode,
            }
            .validate()?;
        }
        if !(0.0 < self.percentile && self.percentile < 100.0) {
            return Err(CoreError::Config("percentile must be in (0,100)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValueSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    /// Percentile of stage-1 per-sentence values used as the default
    /// refinement threshold.
    pub refine_percentile: f64,
}

impl Default for ValueSection {
    fn default() -> Self {
        let base = TrainConfig::default();
        Self {
            epochs: base.epochs,
            learning_rate: base.learning_rate,
            gamma: base.gamma,
            refine_percentile: 25.0,
        }
    }
}

impl ValueSection {
    pub fn validate(&self) -> Result<()> {
        self.to_train_config(MarginConfig::default(), OracleWeights::default(), 0)
            .validate()?;
        if !(0.0..=100.0).contains(&self.refine_percentile) {
            return Err(CoreError::Config(
                "refine_percentile must be in [0,100]".into(),
            ));
        }
        Ok(())
    }

    pub fn to_train_config(
        &self,
        margin: MarginConfig,
        oracle: OracleWeights,
        shuffle_seed: u64,
    ) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            gamma: self.gamma,
            shuffle_seed,
            margin,
            oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub strategy: Strategy,
    pub temperatures: Vec<f64>,
    pub k_per_temp: usize,
    /// Explicit refinement threshold; when absent, the trained parameters'
    /// calibrated default applies.
    pub refine_threshold: Option<f64>,
    pub max_refinements: usize,
    pub salience_cutoff: f64,
    pub log_candidates: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let base = SearchConfig::default();
        Self {
            strategy: base.strategy,
            temperatures: DEFAULT_TEMPERATURES.to_vec(),
            k_per_temp: base.k_per_temp,
            refine_threshold: None,
            max_refinements: base.max_refinements,
            salience_cutoff: base.salience_cutoff,
            log_candidates: base.log_candidates,
        }
    }
}

impl SearchSection {
    pub fn to_search_config(&self, calibrated_threshold: Option<f64>) -> SearchConfig {
        SearchConfig {
            strategy: self.strategy,
            temperatures: self.temperatures.clone(),
            k_per_temp: self.k_per_temp,
            refine_threshold: self
                .refine_threshold
                .or(calibrated_threshold)
                .unwrap_or(0.0),
            max_refinements: self.max_refinements,
            salience_cutoff: self.salience_cutoff,
            log_candidates: self.log_candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub judge_lambda: f64,
    pub tie_epsilon: f64,
    /// Strategy whose results serve as the win-rate baseline.
    pub baseline: Strategy,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            judge_lambda: 1.0,
            tie_epsilon: 1e-9,
            baseline: Strategy::Greedy,
        }
    }
}

impl EvalSection {
    pub fn validate(&self) -> Result<()> {
        if self.judge_lambda < 0.0 {
            return Err(CoreError::Config(
                "judge_lambda must be non-negative".into(),
            ));
        }
        if self.tie_epsilon < 0.0 {
            return Err(CoreError::Config("tie_epsilon must be non-negative".into()));
        }
        Ok(())
    }

    pub fn judge(&self) -> capsearch_core::eval::OracleJudge {
        capsearch_core::eval::OracleJudge {
            lambda: self.judge_lambda,
            tie_epsilon: self.tie_epsilon,
        }
    }
}
