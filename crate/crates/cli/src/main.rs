//! Command-line driver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use capsearch_cli::{commands, RunConfig};
use capsearch_core::error::CoreError;
use capsearch_core::search::Strategy;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "capsearch",
    about = "Value-guided caption search over synthetic grounded scenes",
    version
)]
struct Cli {
    /// Run configuration file (JSON).
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,

    /// Override the configured worker-thread count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct SearchOverrides {
    /// Override search.k_per_temp.
    #[arg(long)]
    k_per_temp: Option<usize>,
    /// Override search.temperatures (comma separated).
    #[arg(long, value_delimiter = ',')]
    temperatures: Option<Vec<f64>>,
    /// Override search.max_refinements.
    #[arg(long)]
    max_refinements: Option<usize>,
    /// Override search.refine_threshold.
    #[arg(long)]
    refine_threshold: Option<f64>,
    /// Override search.salience_cutoff.
    #[arg(long)]
    salience_cutoff: Option<f64>,
    /// Log every candidate pool into the results.
    #[arg(long)]
    log_candidates: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus.
    Gen {
        /// Output corpus path (default: <output_dir>/corpus.jsonl).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate the margin threshold from a corpus.
    Calibrate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the value model (calibrates tau first unless pinned).
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Output parameters path (default: <output_dir>/params.jsonl).
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Decode every corpus scene with one strategy.
    Decode {
        #[arg(long)]
        corpus: PathBuf,
        /// Trained parameters (required for value-guided strategies).
        #[arg(long)]
        params: Option<PathBuf>,
        /// greedy | bon | prm_step | value_step | two_stage.
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchOverrides,
    },
    /// Compare results files: CHAIR, coverage, win rates, budgets.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Results files; repeat the flag for several strategies.
        #[arg(long = "results", required = true)]
        results: Vec<PathBuf>,
        /// Accept results whose config hash differs from the corpus.
        #[arg(long)]
        allow_mixed_hash: bool,
        /// Also export <scene, prompt, response> fine-tuning data from the
        /// first results file.
        #[arg(long)]
        export_sft: Option<PathBuf>,
    },
    /// Re-emit budget closed forms next to measured counters.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Strategies to bench (default: all that the inputs allow).
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchOverrides,
    },
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli, search: Option<&SearchOverrides>) {
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(s) = search {
        if let Some(k) = s.k_per_temp {
            cfg.search.k_per_temp = k;
        }
        if let Some(t) = &s.temperatures {
            cfg.search.temperatures = t.clone();
        }
        if let Some(m) = s.max_refinements {
            cfg.search.max_refinements = m;
        }
        if let Some(r) = s.refine_threshold {
            cfg.search.refine_threshold = Some(r);
        }
        if let Some(c) = s.salience_cutoff {
            cfg.search.salience_cutoff = c;
        }
        if s.log_candidates {
            cfg.search.log_candidates = true;
        }
    }
}

fn run(cli: Cli) -> Result<(), CoreError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    match &cli.command {
        Command::Gen { out } => {
            apply_overrides(&mut cfg, &cli, None);
            let path = commands::run_gen(&cfg, out.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Calibrate { corpus, out } => {
            apply_overrides(&mut cfg, &cli, None);
            let path = commands::run_calibrate(&cfg, corpus, out.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Train { corpus, params_out } => {
            apply_overrides(&mut cfg, &cli, None);
            let outputs = commands::run_train(&cfg, corpus, params_out.as_deref())?;
            println!("wrote {}", outputs.params.display());
            println!("wrote {}", outputs.loss_curve.display());
            if let Some(c) = outputs.calibration {
                println!("wrote {}", c.display());
            }
        }
        Command::Decode {
            corpus,
            params,
            strategy,
            out,
            search,
        } => {
            apply_overrides(&mut cfg, &cli, Some(search));
            let path =
                commands::run_decode(&cfg, corpus, params.as_deref(), *strategy, out.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Eval {
            corpus,
            results,
            allow_mixed_hash,
            export_sft,
        } => {
            apply_overrides(&mut cfg, &cli, None);
            let outputs = commands::run_eval(
                &cfg,
                corpus,
                results,
                *allow_mixed_hash,
                export_sft.as_deref(),
            )?;
            println!("wrote {}", outputs.report_csv.display());
            println!("wrote {}", outputs.report_jsonl.display());
            if let Some(w) = outputs.winrate {
                println!("wrote {}", w.display());
            }
            if let Some(s) = outputs.sft {
                println!("wrote {}", s.display());
            }
        }
        Command::Bench {
            corpus,
            params,
            strategies,
            out,
            search,
        } => {
            apply_overrides(&mut cfg, &cli, Some(search));
            let path =
                commands::run_bench(&cfg, corpus, params.as_deref(), strategies, out.as_deref())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CoreError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
