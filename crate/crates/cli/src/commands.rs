//! The subcommand implementations, seed derivations, and artifact layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use capsearch_core::error::{CoreError, Result};
use capsearch_core::eval::{export_sft, strategy_report_row, StrategyReportRow, WinRateReport};
use capsearch_core::io::{
    self, FileHeader, Manifest, SceneDecodeRecord, BENCH_FORMAT, CALIBRATION_FORMAT, CORPUS_FORMAT,
    PARAMS_FORMAT, REPORT_FORMAT, RESULTS_FORMAT, SFT_FORMAT,
};
use capsearch_core::policy::Policy;
use capsearch_core::prm::{calibrate_tau, MarginConfig};
use capsearch_core::rng::derive_seed;
use capsearch_core::search::{
    calibrate_refine_threshold, decode, BudgetReport, DecodeResult, DeltaScorer, SearchConfig,
    Strategy, StrategyScorers,
};
use capsearch_core::value::{train, ValueParams};
use capsearch_core::world::{gen_corpus, Corpus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

// Seed-derivation namespaces for the pipeline stages.
const NS_TRAIN_SHUFFLE: u64 = 31;
const NS_THETA_CALIBRATION: u64 = 32;
const NS_DECODE_SCENE: u64 = 33;

/// Runs a closure inside a worker pool of the configured size; zero means
/// the runtime default. Outputs do not depend on the pool size.
fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CoreError::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn ensure_output_dir(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(())
}

fn default_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "artifact".to_string());
    name.push_str(".manifest.jsonl");
    artifact.with_file_name(name)
}

/// `gen`: generate the corpus and its manifest.
pub fn run_gen(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    let corpus_cfg = cfg.world.to_corpus_config();
    let policy = cfg.policy.build(&cfg.world.scene)?;
    let corpus = with_pool(cfg.workers, || {
        gen_corpus(&corpus_cfg, policy.as_ref(), cfg.master_seed)
    })??;

    let hash = cfg.hash()?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_path(cfg, "corpus.jsonl"));
    let header = FileHeader::new(CORPUS_FORMAT, &hash, cfg.master_seed)
        .with_count("scenes", corpus.len() as u64)
        .with_count("captions", corpus.caption_count() as u64)
        .with_count("sentences", corpus.sentence_count() as u64);
    io::write_corpus(&out, &corpus, &header)?;

    let manifest = Manifest {
        command: "gen".to_string(),
        config_hash: hash,
        master_seed: cfg.master_seed,
        counts: header.counts.clone(),
    };
    io::write_manifest(&manifest_path(&out), &manifest)?;
    Ok(out)
}

/// `calibrate`: margin-threshold calibration report from a corpus.
pub fn run_calibrate(cfg: &RunConfig, corpus_path: &Path, out: Option<&Path>) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    let (_, corpus) = io::read_corpus(corpus_path)?;
    let report = calibrate_tau(&corpus, cfg.prm.percentile, &cfg.prm.oracle)?;
    let hash = cfg.hash()?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_path(cfg, "calibration.jsonl"));
    let header = FileHeader::new(CALIBRATION_FORMAT, &hash, cfg.master_seed)
        .with_count("samples", report.samples as u64);
    io::write_calibration(&out, &report, &header)?;
    io::write_manifest(
        &manifest_path(&out),
        &Manifest {
            command: "calibrate".to_string(),
            config_hash: hash,
            master_seed: cfg.master_seed,
            counts: header.counts.clone(),
        },
    )?;
    Ok(out)
}

/// Outputs of `train`.
#[derive(Debug)]
pub struct TrainOutputs {
    pub params: PathBuf,
    pub loss_curve: PathBuf,
    pub calibration: Option<PathBuf>,
}

/// `train`: calibrate tau (unless pinned), build triplets, run TD training,
/// calibrate the refinement threshold, and write the artifacts.
pub fn run_train(
    cfg: &RunConfig,
    corpus_path: &Path,
    params_out: Option<&Path>,
) -> Result<TrainOutputs> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    let (_, corpus) = io::read_corpus(corpus_path)?;
    let hash = cfg.hash()?;

    let mut calibration_path = None;
    let tau = match cfg.prm.tau {
        Some(tau) => tau,
        None => {
            let report = calibrate_tau(&corpus, cfg.prm.percentile, &cfg.prm.oracle)?;
            let path = default_path(cfg, "calibration.jsonl");
            let header = FileHeader::new(CALIBRATION_FORMAT, &hash, cfg.master_seed)
                .with_count("samples", report.samples as u64);
            io::write_calibration(&path, &report, &header)?;
            calibration_path = Some(path);
            report.tau
        }
    };

    let margin = MarginConfig {
        tau,
        penalty_mode: cfg.prm.penalty_mode,
    };
    if cfg.prm.tau.is_none() {
        margin.validate().map_err(|_| {
            CoreError::Config(format!(
                "calibrated tau {tau} at percentile {} is outside (0,1); \
                 pin prm.tau or raise prm.percentile",
                cfg.prm.percentile
            ))
        })?;
    }
    let train_cfg = cfg.value.to_train_config(
        margin,
        cfg.prm.oracle.clone(),
        derive_seed(cfg.master_seed, &[NS_TRAIN_SHUFFLE]),
    );
    let outcome = train(&corpus, &train_cfg)?;

    // Refinement threshold: percentile of stage-1 per-sentence values.
    let policy = cfg.policy.build(&cfg.world.scene)?;
    let search_cfg = cfg.search.to_search_config(None);
    let theta = calibrate_refine_threshold(
        &corpus,
        policy.as_ref(),
        &outcome.params,
        &search_cfg,
        derive_seed(cfg.master_seed, &[NS_THETA_CALIBRATION]),
        cfg.value.refine_percentile,
    )?;
    let mut params = outcome.params;
    params.metadata.refine_threshold = Some(theta);

    let params_path = params_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_path(cfg, "params.jsonl"));
    let header = FileHeader::new(PARAMS_FORMAT, &hash, cfg.master_seed)
        .with_count("epochs", params.metadata.epochs as u64)
        .with_count("triplets", corpus.sentence_count() as u64);
    io::write_params(&params_path, &params, &header)?;

    let curve_path = default_path(cfg, "loss_curve.csv");
    io::write_loss_curve_csv(&curve_path, &outcome.loss_curve)?;

    let manifest = Manifest {
        command: "train".to_string(),
        config_hash: hash,
        master_seed: cfg.master_seed,
        counts: header.counts.clone(),
    };
    io::write_manifest(&manifest_path(&params_path), &manifest)?;

    Ok(TrainOutputs {
        params: params_path,
        loss_curve: curve_path,
        calibration: calibration_path,
    })
}

fn load_params_if_needed(
    strategy: Strategy,
    params_path: Option<&Path>,
) -> Result<Option<ValueParams>> {
    match (strategy.needs_value_model(), params_path) {
        (true, None) => Err(CoreError::Config(format!(
            "strategy {strategy} requires --params"
        ))),
        (_, Some(path)) => {
            let (_, params) = io::read_params(path)?;
            Ok(Some(params))
        }
        (false, None) => Ok(None),
    }
}

/// Decodes every corpus scene with one strategy, in scene order.
fn decode_corpus(
    cfg: &RunConfig,
    corpus: &Corpus,
    policy: &dyn Policy,
    params: Option<&ValueParams>,
    search_cfg: &SearchConfig,
) -> Result<Vec<SceneDecodeRecord>> {
    let judge = cfg.eval.judge();
    let delta = DeltaScorer {
        weights: cfg.prm.oracle.clone(),
    };
    let master = cfg.master_seed;
    let records: Vec<Result<SceneDecodeRecord>> = with_pool(cfg.workers, || {
        corpus
            .records
            .par_iter()
            .enumerate()
            .map(|(i, record)| {
                let seed = derive_seed(master, &[NS_DECODE_SCENE, i as u64]);
                let scorers = StrategyScorers {
                    judge: &judge,
                    delta: &delta,
                    value: params,
                };
                let result = decode(&record.scene, policy, &scorers, search_cfg, seed)?;
                Ok(SceneDecodeRecord {
                    scene_id: record.scene.id,
                    result,
                })
            })
            .collect()
    })?;
    records.into_iter().collect()
}

fn aggregate_budget(records: &[SceneDecodeRecord]) -> BudgetReport {
    let mut total = BudgetReport::default();
    for record in records {
        total.accumulate(&record.result.budget);
    }
    total
}

fn budget_counts(budget: &BudgetReport) -> BTreeMap<String, u64> {
    BTreeMap::from([
        (
            "policy_caption_calls".to_string(),
            budget.policy_caption_calls,
        ),
        (
            "policy_sentence_calls".to_string(),
            budget.policy_sentence_calls,
        ),
        ("reward_calls".to_string(), budget.reward_calls),
        ("value_calls".to_string(), budget.value_calls),
        (
            "sentences_in_output".to_string(),
            budget.sentences_in_output,
        ),
        ("refinement_rounds".to_string(), budget.refinement_rounds),
    ])
}

/// `decode`: one results file for the selected strategy.
pub fn run_decode(
    cfg: &RunConfig,
    corpus_path: &Path,
    params_path: Option<&Path>,
    strategy_override: Option<Strategy>,
    out: Option<&Path>,
) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    let (_, corpus) = io::read_corpus(corpus_path)?;
    let strategy = strategy_override.unwrap_or(cfg.search.strategy);
    let params = load_params_if_needed(strategy, params_path)?;

    let mut search_cfg = cfg
        .search
        .to_search_config(params.as_ref().and_then(|p| p.metadata.refine_threshold));
    search_cfg.strategy = strategy;
    search_cfg.validate()?;

    let policy = cfg.policy.build(&cfg.world.scene)?;
    let records = decode_corpus(cfg, &corpus, policy.as_ref(), params.as_ref(), &search_cfg)?;

    let hash = cfg.hash()?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_path(cfg, &format!("results-{strategy}.jsonl")));
    let budget = aggregate_budget(&records);
    let mut header = FileHeader::new(RESULTS_FORMAT, &hash, cfg.master_seed)
        .with_count("scenes", records.len() as u64);
    header.counts.extend(budget_counts(&budget));
    io::write_results(&out, &records, &header)?;

    let manifest = Manifest {
        command: format!("decode:{strategy}"),
        config_hash: hash,
        master_seed: cfg.master_seed,
        counts: header.counts.clone(),
    };
    io::write_manifest(&manifest_path(&out), &manifest)?;
    Ok(out)
}

/// Outputs of `eval`.
#[derive(Debug)]
pub struct EvalOutputs {
    pub report_csv: PathBuf,
    pub report_jsonl: PathBuf,
    pub winrate: Option<PathBuf>,
    pub sft: Option<PathBuf>,
}

/// Pairwise win-rate record for the first two results files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseRecord {
    pub strategy_a: Strategy,
    pub strategy_b: Strategy,
    pub report: WinRateReport,
}

/// `eval`: comparison table over one or more results files, plus the
/// pairwise win-rate report when exactly two are given.
pub fn run_eval(
    cfg: &RunConfig,
    corpus_path: &Path,
    results_paths: &[PathBuf],
    allow_mixed_hash: bool,
    sft_out: Option<&Path>,
) -> Result<EvalOutputs> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    if results_paths.is_empty() {
        return Err(CoreError::Config(
            "eval needs at least one results file".into(),
        ));
    }
    let (corpus_header, corpus) = io::read_corpus(corpus_path)?;

    let mut loaded: Vec<(Strategy, Vec<(u64, DecodeResult)>)> = Vec::new();
    for path in results_paths {
        let (header, records) = io::read_results(path)?;
        if header.config_hash != corpus_header.config_hash && !allow_mixed_hash {
            return Err(CoreError::Data(format!(
                "{}: config hash {} does not match corpus hash {} (pass --allow-mixed-hash to override)",
                path.display(),
                header.config_hash,
                corpus_header.config_hash
            )));
        }
        let strategy = records
            .first()
            .map(|r| r.result.strategy)
            .ok_or_else(|| CoreError::Data(format!("{}: no decode records", path.display())))?;
        loaded.push((
            strategy,
            records
                .into_iter()
                .map(|r| (r.scene_id, r.result))
                .collect(),
        ));
    }

    let judge = cfg.eval.judge();
    let baseline = loaded
        .iter()
        .find(|(s, _)| *s == cfg.eval.baseline)
        .map(|(_, r)| r.clone());

    let mut rows: Vec<StrategyReportRow> = Vec::new();
    for (strategy, results) in &loaded {
        let base = if *strategy == cfg.eval.baseline {
            None
        } else {
            baseline.as_deref()
        };
        rows.push(strategy_report_row(
            *strategy, &corpus, results, base, &judge,
        )?);
    }

    let hash = cfg.hash()?;
    let report_csv = default_path(cfg, "report.csv");
    let report_jsonl = default_path(cfg, "report.jsonl");
    io::write_report_csv(&report_csv, &rows)?;
    let header = FileHeader::new(REPORT_FORMAT, &hash, cfg.master_seed)
        .with_count("rows", rows.len() as u64);
    io::write_report_jsonl(&report_jsonl, &rows, &header)?;
    io::write_manifest(
        &manifest_path(&report_jsonl),
        &Manifest {
            command: "eval".to_string(),
            config_hash: hash.clone(),
            master_seed: cfg.master_seed,
            counts: header.counts.clone(),
        },
    )?;

    let winrate = if loaded.len() == 2 {
        let (sa, ra) = &loaded[0];
        let (sb, rb) = &loaded[1];
        let mut triples = Vec::with_capacity(ra.len());
        for (scene_id, result_a) in ra {
            let result_b = rb
                .iter()
                .find(|(id, _)| id == scene_id)
                .map(|(_, r)| r)
                .ok_or_else(|| {
                    CoreError::Data(format!("second results file missing scene {scene_id}"))
                })?;
            let scene = corpus
                .records
                .iter()
                .map(|r| &r.scene)
                .find(|s| s.id == *scene_id)
                .ok_or_else(|| CoreError::Data(format!("scene {scene_id} not in corpus")))?;
            triples.push((&result_a.caption, &result_b.caption, scene));
        }
        let report = capsearch_core::eval::win_rate(&judge, triples)?;
        let record = PairwiseRecord {
            strategy_a: *sa,
            strategy_b: *sb,
            report,
        };
        let path = default_path(cfg, "winrate.jsonl");
        let header = FileHeader::new(REPORT_FORMAT, &hash, cfg.master_seed)
            .with_count("comparisons", report.comparisons);
        write_pairwise(&path, &header, std::slice::from_ref(&record))?;
        Some(path)
    } else {
        None
    };

    let sft = match sft_out {
        None => None,
        Some(path) => {
            let (_, first) = &loaded[0];
            let records = export_sft(&corpus, first)?;
            let header = FileHeader::new(SFT_FORMAT, &hash, cfg.master_seed)
                .with_count("examples", records.len() as u64);
            io::write_sft(path, &records, &header)?;
            Some(path.to_path_buf())
        }
    };

    Ok(EvalOutputs {
        report_csv,
        report_jsonl,
        winrate,
        sft,
    })
}

fn write_pairwise(path: &Path, header: &FileHeader, records: &[PairwiseRecord]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    #[derive(Serialize)]
    #[serde(tag = "kind", rename_all = "snake_case")]
    enum Line<'a> {
        Header(&'a FileHeader),
        Record(&'a PairwiseRecord),
    }
    writeln!(out, "{}", serde_json::to_string(&Line::Header(header))?)?;
    for record in records {
        writeln!(out, "{}", serde_json::to_string(&Line::Record(record))?)?;
    }
    out.flush()?;
    Ok(())
}

/// One bench row: measured counters next to the closed-form prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub strategy: Strategy,
    pub scene_id: u64,
    pub measured: BudgetReport,
    pub predicted: BudgetReport,
    pub exact: bool,
}

/// `bench`: decode with each strategy and re-emit budget closed forms next
/// to the measured counters.
pub fn run_bench(
    cfg: &RunConfig,
    corpus_path: &Path,
    params_path: Option<&Path>,
    strategies: &[Strategy],
    out: Option<&Path>,
) -> Result<PathBuf> {
    cfg.validate()?;
    ensure_output_dir(cfg)?;
    let (_, corpus) = io::read_corpus(corpus_path)?;
    let policy = cfg.policy.build(&cfg.world.scene)?;

    let strategies: Vec<Strategy> = if strategies.is_empty() {
        if params_path.is_some() {
            Strategy::ALL.to_vec()
        } else {
            vec![Strategy::Greedy, Strategy::Bon, Strategy::PrmStep]
        }
    } else {
        strategies.to_vec()
    };

    let mut records = Vec::new();
    let mut mismatches = 0u64;
    for strategy in strategies {
        let params = load_params_if_needed(strategy, params_path)?;
        let mut search_cfg = cfg
            .search
            .to_search_config(params.as_ref().and_then(|p| p.metadata.refine_threshold));
        search_cfg.strategy = strategy;
        let decoded = decode_corpus(cfg, &corpus, policy.as_ref(), params.as_ref(), &search_cfg)?;
        for record in decoded {
            let budget = record.result.budget;
            let pool = if strategy == Strategy::Greedy {
                1
            } else {
                search_cfg.pool_size()
            };
            let predicted = BudgetReport::closed_form(
                strategy,
                pool,
                budget.sentences_in_output,
                budget.refinement_rounds,
            );
            let exact = predicted == budget;
            if !exact {
                mismatches += 1;
            }
            records.push(BenchRecord {
                strategy,
                scene_id: record.scene_id,
                measured: budget,
                predicted,
                exact,
            });
        }
    }

    let hash = cfg.hash()?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_path(cfg, "bench.jsonl"));
    let header = FileHeader::new(BENCH_FORMAT, &hash, cfg.master_seed)
        .with_count("rows", records.len() as u64)
        .with_count("mismatches", mismatches);
    write_bench(&out, &header, &records)?;
    io::write_manifest(
        &manifest_path(&out),
        &Manifest {
            command: "bench".to_string(),
            config_hash: hash,
            master_seed: cfg.master_seed,
            counts: header.counts.clone(),
        },
    )?;
    Ok(out)
}

fn write_bench(path: &Path, header: &FileHeader, records: &[BenchRecord]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    #[derive(Serialize)]
    #[serde(tag = "kind", rename_all = "snake_case")]
    enum Line<'a> {
        Header(&'a FileHeader),
        Record(&'a BenchRecord),
    }
    writeln!(out, "{}", serde_json::to_string(&Line::Header(header))?)?;
    for record in records {
        writeln!(out, "{}", serde_json::to_string(&Line::Record(record))?)?;
    }
    out.flush()?;
    Ok(())
}
