//! Library surface of the command-line driver: the run configuration and
//! the subcommand implementations, callable directly from tests.

pub mod commands;
pub mod config;

pub use commands::{
    run_bench, run_calibrate, run_decode, run_eval, run_gen, run_train, BenchRecord, EvalOutputs,
    PairwiseRecord, TrainOutputs,
};
pub use config::RunConfig;
