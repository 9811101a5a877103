//! Grounding audit: where a caption needs refinement.

use crate::error::Result;
use crate::value::ValueParams;
use crate::world::{Caption, Scene};

/// A place the refinement stage should address.
#[derive(Debug, Clone, PartialEq)]
pub enum RefinementSite {
    /// Sentence whose predicted value falls below the refinement threshold.
    LowValueSentence { index: usize, value: f64 },
    /// Salient scene objects the caption never mentions.
    MissingContent { objects: Vec<String> },
}

/// Audits a caption against its scene: flags (a) each sentence whose
/// predicted value is below `refine_threshold`, and (b) one missing-content
/// site when any object with salience at or above `salience_cutoff` is
/// unmentioned. An empty audit means no refinement is needed.
pub fn audit_grounding(
    caption: &Caption,
    scene: &Scene,
    value: &ValueParams,
    refine_threshold: f64,
    salience_cutoff: f64,
) -> Result<Vec<RefinementSite>> {
    let mut sites = Vec::new();
    let sentences = caption.sentences();
    for (index, sentence) in sentences.iter().enumerate() {
        let v = value.predict_sentence(sentence, scene, &sentences[..index])?;
        if v < refine_threshold {
            sites.push(RefinementSite::LowValueSentence { index, value: v });
        }
    }

    let mentioned = caption.mention_union();
    let missing: Vec<String> = scene
        .objects
        .iter()
        .filter(|o| o.salience >= salience_cutoff && !mentioned.contains(o.name.as_str()))
        .map(|o| o.name.clone())
        .collect();
    if !missing.is_empty() {
        sites.push(RefinementSite::MissingContent { objects: missing });
    }
    Ok(sites)
}
