//! Closed token vocabularies.
//!
//! Mention extraction, grounding similarity, and hallucination metrics are
//! exact because every token is drawn from one of three disjoint closed sets:
//! object names, attributes, and filler words.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Distinguished terminal token; never part of any vocabulary.
pub const EOS_TOKEN: &str = "<eos>";

const OBJECTS: [&str; 64] = [
    "dog", "cat", "umbrella", "bench", "bicycle", "lamp", "kite", "boat", "tree", "fence", "car",
    "truck", "horse", "sheep", "cow", "bird", "chair", "table", "bottle", "cup", "fork", "knife",
    "spoon", "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot", "pizza",
    "donut", "cake", "sofa", "plant", "bed", "mirror", "window", "door", "clock", "vase",
    "scissors", "teddy", "hat", "backpack", "shoe", "glove", "ball", "glass", "book", "phone",
    "laptop", "keyboard", "guitar", "drum", "candle", "basket", "ladder", "bucket", "rope", "sign",
    "wheel", "box", "rug",
];

const ATTRIBUTES: [&str; 32] = [
    "red", "blue", "green", "yellow", "purple", "amber", "black", "white", "gray", "brown", "pink",
    "teal", "striped", "spotted", "shiny", "dull", "large", "small", "tall", "short", "round",
    "square", "wooden", "metal", "plastic", "glassy", "woven", "rusty", "clean", "dirty", "bright",
    "faded",
];

const FILLERS: [&str; 16] = [
    "a", "the", "with", "is", "and", "near", "beside", "on", "under", "next", "to", "looks",
    "very", "quite", "there", "also",
];

/// The closed vocabularies of a world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub fillers: Vec<String>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    /// The built-in 64/32/16 vocabulary.
    pub fn standard() -> Self {
        Self {
            objects: OBJECTS.iter().map(|s| s.to_string()).collect(),
            attributes: ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
            fillers: FILLERS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Object names as a set, for mention extraction.
    pub fn object_set(&self) -> BTreeSet<&str> {
        self.objects.iter().map(String::as_str).collect()
    }

    pub fn is_object(&self, token: &str) -> bool {
        self.objects.iter().any(|o| o == token)
    }

    /// Checks emptiness, uniqueness, disjointness, and sentinel exclusion.
    pub fn validate(&self) -> Result<()> {
        if self.objects.is_empty() {
            return Err(CoreError::Config("vocabulary has no object names".into()));
        }
        if self.attributes.is_empty() {
            return Err(CoreError::Config("vocabulary has no attributes".into()));
        }
        let mut seen = BTreeSet::new();
        for token in self
            .objects
            .iter()
            .chain(self.attributes.iter())
            .chain(self.fillers.iter())
        {
            if token == EOS_TOKEN {
                return Err(CoreError::Config(format!(
                    "vocabulary token collides with sentinel {EOS_TOKEN:?}"
                )));
            }
            if !seen.insert(token.as_str()) {
                return Err(CoreError::Config(format!(
                    "vocabulary token {token:?} appears in more than one set"
                )));
            }
        }
        Ok(())
    }
}
