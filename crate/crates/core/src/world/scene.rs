//! Scenes: the grounded "image" surrogate plus its prompt.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// One grounded object with attributes and an importance weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub attributes: Vec<String>,
    /// Importance weight in [0, 1]; drives coverage scoring and the
    /// refinement audit.
    pub salience: f64,
}

/// A synthetic scene: the prompt/image pair the captioner describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: u64,
    pub prompt: String,
    pub objects: Vec<ObjectSpec>,
}

impl Scene {
    /// Names of all grounded objects.
    pub fn object_names(&self) -> BTreeSet<&str> {
        self.objects.iter().map(|o| o.name.as_str()).collect()
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o.name == name)
    }

    pub fn salience_of(&self, name: &str) -> Option<f64> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.salience)
    }

    pub fn total_salience(&self) -> f64 {
        self.objects.iter().map(|o| o.salience).sum()
    }

    /// Salience-weighted fraction of scene objects present in `mentions`.
    pub fn salience_weighted_coverage<'a>(
        &self,
        mentions: impl IntoIterator<Item = &'a str>,
    ) -> f64 {
        let total = self.total_salience();
        if total <= 0.0 {
            return 0.0;
        }
        let mentioned: BTreeSet<&str> = mentions.into_iter().collect();
        let covered: f64 = self
            .objects
            .iter()
            .filter(|o| mentioned.contains(o.name.as_str()))
            .map(|o| o.salience)
            .sum();
        covered / total
    }

    /// Splits a mention set into (grounded, hallucinated) against this scene.
    pub fn split_mentions<'a>(
        &self,
        mentions: impl IntoIterator<Item = &'a str>,
    ) -> (Vec<&'a str>, Vec<&'a str>) {
        let mut grounded = Vec::new();
        let mut hallucinated = Vec::new();
        for m in mentions {
            if self.has_object(m) {
                grounded.push(m);
            } else {
                hallucinated.push(m);
            }
        }
        (grounded, hallucinated)
    }

    /// Structural invariants: unique names, salience range, at least one
    /// object at or above the salient cutoff, every object attributed.
    pub fn validate(&self, salient_cutoff: f64) -> Result<()> {
        if self.objects.is_empty() {
            return Err(CoreError::Data(format!("scene {} has no objects", self.id)));
        }
        let mut names = BTreeSet::new();
        for obj in &self.objects {
            if !names.insert(obj.name.as_str()) {
                return Err(CoreError::Data(format!(
                    "scene {} repeats object {:?}",
                    self.id, obj.name
                )));
            }
            if !(0.0..=1.0).contains(&obj.salience) {
                return Err(CoreError::Data(format!(
                    "scene {} object {:?} has salience {} outside [0,1]",
                    self.id, obj.name, obj.salience
                )));
            }
            if obj.attributes.is_empty() {
                return Err(CoreError::Data(format!(
                    "scene {} object {:?} has no attributes",
                    self.id, obj.name
                )));
            }
        }
        if !self.objects.iter().any(|o| o.salience >= salient_cutoff) {
            return Err(CoreError::Data(format!(
                "scene {} has no salient object (cutoff {salient_cutoff})",
                self.id
            )));
        }
        Ok(())
    }
}
