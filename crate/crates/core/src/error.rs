//! Error types shared across the engine.

use thiserror::Error;

/// Top-level error for all library operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A configuration value is invalid before any work starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input value is outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called in a state that forbids it.
    #[error("state error: {0}")]
    State(String),

    /// Input data is missing or inconsistent.
    #[error("data error: {0}")]
    Data(String),

    /// Persisted artifacts disagree with the running engine.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Value-model training produced a non-finite loss.
    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    /// The policy failed while generating for a scene.
    #[error("policy failure on scene {scene_id}: {message}")]
    Policy { scene_id: u64, message: String },

    /// A fixed-point solver did not converge within its iteration cap.
    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
