//! Value-guided caption search over synthetic grounded scenes.
//!
//! The crate builds a small, fully deterministic captioning world: scenes are
//! sets of grounded objects, policies sample multi-sentence captions with
//! controllable hallucination, a grounding oracle scores each sentence, and a
//! margin-adjusted temporal-difference value model guides several decoding
//! strategies. Budget accounting counts every policy, reward, and value-model
//! call so that strategies can be compared on quality per scorer call.
//!
//! Module map:
//! - [`world`] — scenes, sentences, captions, corpus generation
//! - [`policy`] — pluggable caption/sentence samplers
//! - [`prm`] — grounding similarity and margin reward shaping
//! - [`value`] — feature extraction, TD(0) training, value prediction
//! - [`search`] — decoding strategies and budget reports
//! - [`eval`] — hallucination metrics, pairwise judging, reports
//! - [`io`] — JSONL/CSV persistence for every artifact

pub mod error;
pub mod eval;
pub mod io;
pub mod policy;
pub mod prm;
pub mod rng;
pub mod search;
pub mod value;
pub mod world;

pub use error::CoreError;
