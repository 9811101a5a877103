//! The synthetic captioning world: scenes, captions, and corpora.

mod caption;
mod corpus;
mod gen;
mod scene;
mod vocab;

pub use caption::{Caption, Prefix, Sentence};
pub use corpus::{gen_corpus, Corpus, CorpusSceneRecord, SampledCaption};
pub use gen::{gen_scene, render_gt_caption};
pub use scene::{ObjectSpec, Scene};
pub use vocab::{Vocabulary, EOS_TOKEN};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Stream namespace labels; one per kind of random decision.
pub(crate) mod ns {
    pub const SCENE: u64 = 1;
    pub const SAMPLE: u64 = 2;
    pub const GREEDY: u64 = 3;
    pub const DECODE: u64 = 4;
    pub const SHUFFLE: u64 = 5;
}

/// Default decoding/sampling temperatures.
pub const DEFAULT_TEMPERATURES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Shape of generated scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub objects_min: usize,
    pub objects_max: usize,
    pub attributes_min: usize,
    pub attributes_max: usize,
    pub salience_min: f64,
    pub salience_max: f64,
    /// Objects at or above this salience count as salient for scene
    /// invariants and the refinement audit.
    pub salient_cutoff: f64,
    pub prompt: String,
    pub vocabulary: Vocabulary,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            objects_min: 3,
            objects_max: 7,
            attributes_min: 1,
            attributes_max: 3,
            salience_min: 0.3,
            salience_max: 1.0,
            salient_cutoff: 0.5,
            prompt: "describe every object in the scene in detail".to_string(),
            vocabulary: Vocabulary::standard(),
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        self.vocabulary.validate()?;
        if self.objects_min == 0 || self.objects_min > self.objects_max {
            return Err(CoreError::Config(format!(
                "object count range {}..={} is empty",
                self.objects_min, self.objects_max
            )));
        }
        if self.objects_max > self.vocabulary.objects.len() {
            return Err(CoreError::Config(format!(
                "objects_max {} exceeds vocabulary size {}",
                self.objects_max,
                self.vocabulary.objects.len()
            )));
        }
        if self.attributes_min == 0 || self.attributes_min > self.attributes_max {
            return Err(CoreError::Config("attribute count range is empty".into()));
        }
        if self.attributes_max > self.vocabulary.attributes.len() {
            return Err(CoreError::Config(
                "attributes_max exceeds vocabulary".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.salience_min)
            || !(0.0..=1.0).contains(&self.salience_max)
            || self.salience_min > self.salience_max
        {
            return Err(CoreError::Config(
                "salience range must be within [0,1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.salient_cutoff) {
            return Err(CoreError::Config("salient_cutoff must be in [0,1]".into()));
        }
        Ok(())
    }
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub scenes: usize,
    pub captions_per_scene: usize,
    pub temperatures: Vec<f64>,
    pub world: WorldConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            scenes: 200,
            captions_per_scene: 5,
            temperatures: DEFAULT_TEMPERATURES.to_vec(),
            world: WorldConfig::default(),
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if self.scenes == 0 {
            return Err(CoreError::Config("corpus needs at least one scene".into()));
        }
        if self.captions_per_scene == 0 {
            return Err(CoreError::Config(
                "corpus needs at least one sampled caption per scene".into(),
            ));
        }
        if self.temperatures.is_empty() {
            return Err(CoreError::Config(
                "temperature list must be non-empty".into(),
            ));
        }
        if self.temperatures.iter().any(|t| *t <= 0.0) {
            return Err(CoreError::Config("temperatures must be positive".into()));
        }
        Ok(())
    }
}
