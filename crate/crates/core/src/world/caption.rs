//! Sentences, captions, and the mutable prefix used while generating.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::vocab::{Vocabulary, EOS_TOKEN};
use crate::error::{CoreError, Result};

/// An ordered list of vocabulary tokens plus the object mentions it asserts.
///
/// `mentions` is derived at construction: exactly the object-vocabulary
/// tokens occurring in `tokens`. It is stored so downstream metrics never
/// need the vocabulary, and stays recomputable for integrity checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    tokens: Vec<String>,
    mentions: BTreeSet<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, vocab: &Vocabulary) -> Self {
        let mentions = extract_mentions(&tokens, vocab);
        Self { tokens, mentions }
    }

    /// The distinguished terminal sentinel.
    pub fn eos() -> Self {
        Self {
            tokens: vec![EOS_TOKEN.to_string()],
            mentions: BTreeSet::new(),
        }
    }

    pub fn is_eos(&self) -> bool {
        self.tokens.len() == 1 && self.tokens[0] == EOS_TOKEN
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn mentions(&self) -> &BTreeSet<String> {
        &self.mentions
    }

    /// Recomputes the mention set from tokens; must equal `mentions()`.
    pub fn recomputed_mentions(&self, vocab: &Vocabulary) -> BTreeSet<String> {
        extract_mentions(&self.tokens, vocab)
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

fn extract_mentions(tokens: &[String], vocab: &Vocabulary) -> BTreeSet<String> {
    tokens
        .iter()
        .filter(|t| vocab.is_object(t))
        .cloned()
        .collect()
}

/// A finished multi-sentence caption.
///
/// Always holds at least one sentence and never contains the EOS sentinel;
/// `terminated` records that generation emitted EOS (or hit its hard length
/// cap). A terminated caption refuses further appends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caption {
    sentences: Vec<Sentence>,
    terminated: bool,
}

impl Caption {
    pub fn new(sentences: Vec<Sentence>, terminated: bool) -> Result<Self> {
        if sentences.is_empty() {
            return Err(CoreError::Data(
                "caption must have at least one sentence".into(),
            ));
        }
        if sentences.iter().any(Sentence::is_eos) {
            return Err(CoreError::Data(
                "caption sentences must not contain the EOS sentinel".into(),
            ));
        }
        Ok(Self {
            sentences,
            terminated,
        })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Returns a copy with one more sentence. Appending the sentinel
    /// terminates the caption instead of storing it. Terminated captions are
    /// immutable: appending to one is a state error.
    pub fn extended(&self, sentence: Sentence) -> Result<Self> {
        if self.terminated {
            return Err(CoreError::State(
                "cannot append to a terminated caption".into(),
            ));
        }
        let mut sentences = self.sentences.clone();
        let terminated = if sentence.is_eos() {
            true
        } else {
            sentences.push(sentence);
            false
        };
        Ok(Self {
            sentences,
            terminated,
        })
    }

    /// Union of object mentions across all sentences.
    pub fn mention_union(&self) -> BTreeSet<&str> {
        self.sentences
            .iter()
            .flat_map(|s| s.mentions().iter().map(String::as_str))
            .collect()
    }

    /// Distinct mentioned objects that are not in the scene.
    pub fn hallucinated_mentions<'a>(&'a self, scene: &Scene) -> BTreeSet<&'a str> {
        self.mention_union()
            .into_iter()
            .filter(|m| !scene.has_object(m))
            .collect()
    }
}

/// The generation prefix `y_<i`: possibly empty, grows sentence by sentence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Prefix {
    sentences: Vec<Sentence>,
    terminated: bool,
}

impl Prefix {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Prefix view of a caption, keeping its terminated flag.
    pub fn from_caption(caption: &Caption) -> Self {
        Self {
            sentences: caption.sentences().to_vec(),
            terminated: caption.terminated(),
        }
    }

    /// Prefix view of a caption with the terminated flag cleared, so a
    /// refinement stage can extend a finished caption explicitly.
    pub fn reopened(caption: &Caption) -> Self {
        Self {
            sentences: caption.sentences().to_vec(),
            terminated: false,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Appends a sentence; the sentinel terminates instead of being stored.
    pub fn push(&mut self, sentence: Sentence) -> Result<()> {
        if self.terminated {
            return Err(CoreError::State("cannot extend a terminated prefix".into()));
        }
        if sentence.is_eos() {
            self.terminated = true;
        } else {
            self.sentences.push(sentence);
        }
        Ok(())
    }

    pub fn mention_union(&self) -> BTreeSet<&str> {
        self.sentences
            .iter()
            .flat_map(|s| s.mentions().iter().map(String::as_str))
            .collect()
    }

    /// Number of scene objects mentioned so far.
    pub fn covered_count(&self, scene: &Scene) -> usize {
        let mentioned = self.mention_union();
        scene
            .objects
            .iter()
            .filter(|o| mentioned.contains(o.name.as_str()))
            .count()
    }

    /// Converts into a finished caption; errors on an empty prefix.
    pub fn into_caption(self, terminated: bool) -> Result<Caption> {
        Caption::new(self.sentences, terminated)
    }
}
