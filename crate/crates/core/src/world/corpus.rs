//! Corpus generation: one ground-truth caption plus temperature-sampled
//! captions per scene.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::caption::{Caption, Sentence};
use super::gen::{gen_scene, render_gt_caption};
use super::scene::Scene;
use super::{ns, CorpusConfig};
use crate::error::{CoreError, Result};
use crate::policy::Policy;
use crate::rng::StreamKey;

/// A policy-sampled caption with the temperature it was drawn at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCaption {
    pub caption: Caption,
    pub temperature: f64,
}

/// Everything the corpus holds for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSceneRecord {
    pub scene: Scene,
    pub gt_caption: Caption,
    pub samples: Vec<SampledCaption>,
}

impl CorpusSceneRecord {
    /// Ground truth first, then samples in draw order.
    pub fn all_captions(&self) -> impl Iterator<Item = &Caption> {
        std::iter::once(&self.gt_caption).chain(self.samples.iter().map(|s| &s.caption))
    }
}

/// A generated corpus, ordered by scene index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<CorpusSceneRecord>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn caption_count(&self) -> usize {
        self.records.iter().map(|r| 1 + r.samples.len()).sum()
    }

    pub fn sentence_count(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| r.all_captions())
            .map(Caption::len)
            .sum()
    }

    /// Number of ordered in-caption sentence pairs `(y_i, y_{i+1})`,
    /// i.e. sentence count minus one per caption.
    pub fn successor_pair_count(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| r.all_captions())
            .map(|c| c.len() - 1)
            .sum()
    }

    /// Every (sentence, scene) pair, caption order preserved.
    pub fn sentence_scene_pairs(&self) -> impl Iterator<Item = (&Sentence, &Scene)> {
        self.records.iter().flat_map(|r| {
            r.all_captions()
                .flat_map(move |c| c.sentences().iter().map(move |s| (s, &r.scene)))
        })
    }

    pub fn validate(&self, cfg: &CorpusConfig) -> Result<()> {
        for record in &self.records {
            if record.samples.len() != cfg.captions_per_scene {
                return Err(CoreError::Data(format!(
                    "scene {} has {} sampled captions, expected {}",
                    record.scene.id,
                    record.samples.len(),
                    cfg.captions_per_scene
                )));
            }
        }
        Ok(())
    }
}

/// Generates the full corpus, deterministic in `(cfg, policy, master_seed)`
/// and independent of worker-thread count: every caption draws from a stream
/// addressed by (master seed, scene index, caption index, temperature index,
/// candidate index), and records are assembled in scene-index order.
pub fn gen_corpus(cfg: &CorpusConfig, policy: &dyn Policy, master_seed: u64) -> Result<Corpus> {
    cfg.validate()?;
    let root = StreamKey::root(master_seed);

    let records: Vec<Result<CorpusSceneRecord>> = (0..cfg.scenes)
        .into_par_iter()
        .map(|i| build_scene_record(cfg, policy, root, master_seed, i))
        .collect();

    let mut out = Vec::with_capacity(cfg.scenes);
    let mut ids = BTreeSet::new();
    for record in records {
        let record = record?;
        if !ids.insert(record.scene.id) {
            return Err(CoreError::Data(format!(
                "scene id collision: {}",
                record.scene.id
            )));
        }
        out.push(record);
    }
    let corpus = Corpus { records: out };
    corpus.validate(cfg)?;
    Ok(corpus)
}

fn build_scene_record(
    cfg: &CorpusConfig,
    policy: &dyn Policy,
    root: StreamKey,
    master_seed: u64,
    index: usize,
) -> Result<CorpusSceneRecord> {
    let scene_seed = crate::rng::derive_seed(master_seed, &[ns::SCENE, index as u64]);
    let scene = gen_scene(scene_seed, &cfg.world)?;
    let gt_caption = render_gt_caption(&scene, &cfg.world);

    let mut samples = Vec::with_capacity(cfg.captions_per_scene);
    for j in 0..cfg.captions_per_scene {
        let temp_index = j % cfg.temperatures.len();
        let temperature = cfg.temperatures[temp_index];
        let key = root.descend(&[ns::SAMPLE, index as u64, j as u64, temp_index as u64, 0]);
        let caption = policy
            .sample_caption(&scene, temperature, &mut key.rng())
            .map_err(|e| CoreError::Policy {
                scene_id: scene.id,
                message: e.to_string(),
            })?;
        samples.push(SampledCaption {
            caption,
            temperature,
        });
    }

    Ok(CorpusSceneRecord {
        scene,
        gt_caption,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Policy;
    use crate::world::{Prefix, Sentence, WorldConfig};
    use rand::RngCore;

    /// A policy that fails on every draw; used to check error propagation.
    struct BrokenPolicy;

    impl Policy for BrokenPolicy {
        fn name(&self) -> &str {
            "broken"
        }

        fn max_sentences(&self) -> usize {
            4
        }

        fn finished(&self, _scene: &Scene, _prefix: &Prefix) -> bool {
            false
        }

        fn sample_sentence(
            &self,
            _scene: &Scene,
            _prefix: &Prefix,
            _temperature: f64,
            _rng: &mut dyn RngCore,
        ) -> Result<Sentence> {
            Err(CoreError::Data("backend unavailable".into()))
        }

        fn greedy_caption(&self, _scene: &Scene) -> Result<Caption> {
            Err(CoreError::Data("backend unavailable".into()))
        }
    }

    #[test]
    fn policy_failure_carries_the_scene_id() {
        let cfg = CorpusConfig {
            scenes: 3,
            world: WorldConfig::default(),
            ..CorpusConfig::default()
        };
        let err = gen_corpus(&cfg, &BrokenPolicy, 5).unwrap_err();
        match err {
            CoreError::Policy { scene_id, message } => {
                assert!(message.contains("backend unavailable"));
                assert!(scene_id > 0);
            }
            other => panic!("expected a policy error, got {other}"),
        }
    }
}
