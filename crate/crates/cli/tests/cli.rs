//! Command contracts: artifact shapes, hash discipline, exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use capsearch_cli::{commands, RunConfig};
use capsearch_core::error::CoreError;
use capsearch_core::eval::chair;
use capsearch_core::io;
use capsearch_core::search::Strategy;

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("capsearch-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig {
        master_seed: 2024,
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    };
    cfg.world.scenes = 15;
    cfg.policy.hallucination_rate = 0.3;
    cfg.policy.omission_bias = 0.5;
    cfg.value.epochs = 8;
    cfg.value.gamma = 0.5;
    cfg
}

#[test]
fn gen_manifest_counts_match_config_arithmetic() {
    let dir = temp_dir("gen");
    let cfg = small_config(&dir);
    let corpus_path = commands::run_gen(&cfg, None).unwrap();
    let manifest = io::read_manifest(&dir.join("corpus.manifest.jsonl")).unwrap();
    assert_eq!(manifest.counts["scenes"], 15);
    assert_eq!(
        manifest.counts["captions"],
        15 * (1 + cfg.world.captions_per_scene as u64)
    );
    assert_eq!(manifest.config_hash, cfg.hash().unwrap());

    // Same config twice: byte-identical corpus files.
    let second = dir.join("corpus2.jsonl");
    commands::run_gen(&cfg, Some(&second)).unwrap();
    assert_eq!(
        std::fs::read(&corpus_path).unwrap(),
        std::fs::read(&second).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn train_records_pinned_tau_verbatim_and_noiseless_gamma0_converges() {
    let dir = temp_dir("train");
    let mut cfg = small_config(&dir);
    // Noiseless corpus: no hallucination, no omission; tau pinned below
    // the minimum similarity so the margin never kinks.
    cfg.policy.hallucination_rate = 0.0;
    cfg.policy.omission_bias = 0.0;
    cfg.prm.tau = Some(0.16);
    cfg.value.gamma = 0.0;
    cfg.value.epochs = 60;

    let corpus_path = commands::run_gen(&cfg, None).unwrap();
    let outputs = commands::run_train(&cfg, &corpus_path, None).unwrap();
    assert!(
        outputs.calibration.is_none(),
        "pinned tau skips calibration"
    );

    let (_, params) = io::read_params(&outputs.params).unwrap();
    assert_eq!(params.metadata.tau, 0.16);
    assert_eq!(params.gamma, 0.0);
    assert!(params.metadata.refine_threshold.is_some());

    // Loss curve: non-increasing epoch means, final below 1e-3.
    let text = std::fs::read_to_string(&outputs.loss_curve).unwrap();
    let losses: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 60);
    for pair in losses.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "loss curve rose: {} -> {}",
            pair[0],
            pair[1]
        );
    }
    assert!(
        *losses.last().unwrap() < 1e-3,
        "final loss {} not below 1e-3",
        losses.last().unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn degenerate_calibration_gives_an_actionable_config_error() {
    // The vague policy puts well over 17% of sentences at zero similarity,
    // so the calibrated tau lands on 0 and violates its (0,1) contract.
    let dir = temp_dir("degenerate-tau");
    let mut cfg = small_config(&dir);
    cfg.policy.kind = capsearch_cli::config::PolicyKind::Vague;
    cfg.policy.vague_rate = 0.6;
    let corpus_path = commands::run_gen(&cfg, None).unwrap();

    let err = commands::run_train(&cfg, &corpus_path, None).unwrap_err();
    match err {
        CoreError::Config(msg) => {
            assert!(msg.contains("pin prm.tau"), "unhelpful message: {msg}");
        }
        other => panic!("expected a config error, got {other}"),
    }

    // Pinning tau unblocks training on the same corpus.
    cfg.prm.tau = Some(0.16);
    commands::run_train(&cfg, &corpus_path, None).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn decode_contracts() {
    let dir = temp_dir("decode");
    let cfg = small_config(&dir);
    let corpus_path = commands::run_gen(&cfg, None).unwrap();

    // Greedy needs no params file.
    let greedy =
        commands::run_decode(&cfg, &corpus_path, None, Some(Strategy::Greedy), None).unwrap();
    assert!(greedy.exists());

    // Value strategies refuse to run without params.
    let err =
        commands::run_decode(&cfg, &corpus_path, None, Some(Strategy::TwoStage), None).unwrap_err();
    assert!(matches!(err, CoreError::Config(_)));

    let trained = commands::run_train(&cfg, &corpus_path, None).unwrap();
    let two_stage = commands::run_decode(
        &cfg,
        &corpus_path,
        Some(trained.params.as_path()),
        Some(Strategy::TwoStage),
        None,
    )
    .unwrap();

    // Aggregate value calls equal the sum of per-scene closed forms
    // N*K*(1+m), recounted from the records.
    let (header, records) = io::read_results(&two_stage).unwrap();
    let nk = 30u64;
    let expected: u64 = records
        .iter()
        .map(|r| nk * (1 + r.result.budget.refinement_rounds))
        .sum();
    assert_eq!(header.counts["value_calls"], expected);

    // Re-running with the same seed produces a byte-identical file.
    let again = dir.join("again.jsonl");
    commands::run_decode(
        &cfg,
        &corpus_path,
        Some(trained.params.as_path()),
        Some(Strategy::TwoStage),
        Some(&again),
    )
    .unwrap();
    assert_eq!(
        std::fs::read(&two_stage).unwrap(),
        std::fs::read(&again).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn eval_contracts() {
    let dir = temp_dir("eval");
    let cfg = small_config(&dir);
    let corpus_path = commands::run_gen(&cfg, None).unwrap();
    let trained = commands::run_train(&cfg, &corpus_path, None).unwrap();
    let greedy =
        commands::run_decode(&cfg, &corpus_path, None, Some(Strategy::Greedy), None).unwrap();
    let two_stage = commands::run_decode(
        &cfg,
        &corpus_path,
        Some(trained.params.as_path()),
        Some(Strategy::TwoStage),
        None,
    )
    .unwrap();

    // A file against itself: zero wins, all ties.
    let self_eval = commands::run_eval(
        &cfg,
        &corpus_path,
        &[greedy.clone(), greedy.clone()],
        false,
        None,
    )
    .unwrap();
    let text = std::fs::read_to_string(self_eval.winrate.unwrap()).unwrap();
    let record: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(record["report"]["wins"], 0);
    assert_eq!(record["report"]["losses"], 0);
    assert_eq!(record["report"]["ties"], 15);

    // One row per strategy present; CHAIR columns match a standalone
    // recomputation.
    let outputs = commands::run_eval(
        &cfg,
        &corpus_path,
        &[two_stage.clone(), greedy.clone()],
        false,
        Some(&dir.join("sft.jsonl")),
    )
    .unwrap();
    let (_, rows) = io::read_report_jsonl(&outputs.report_jsonl).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].strategy, Strategy::TwoStage);
    assert_eq!(rows[1].strategy, Strategy::Greedy);

    let (_, corpus) = io::read_corpus(&corpus_path).unwrap();
    let (_, greedy_records) = io::read_results(&greedy).unwrap();
    let pairs: Vec<_> = greedy_records
        .iter()
        .map(|r| {
            let scene = corpus
                .records
                .iter()
                .map(|c| &c.scene)
                .find(|s| s.id == r.scene_id)
                .unwrap();
            (&r.result.caption, scene)
        })
        .collect();
    let recomputed = chair(pairs).unwrap();
    assert_eq!(rows[1].chair_s, recomputed.chair_s);
    assert_eq!(rows[1].chair_i, recomputed.chair_i);

    // SFT export: one record per scene, prompts preserved.
    let (_, sft) = io::read_sft(&outputs.sft.unwrap()).unwrap();
    assert_eq!(sft.len(), 15);

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn eval_refuses_mixed_hashes_unless_overridden() {
    let dir = temp_dir("mixed");
    let cfg = small_config(&dir);
    let corpus_path = commands::run_gen(&cfg, None).unwrap();
    let greedy =
        commands::run_decode(&cfg, &corpus_path, None, Some(Strategy::Greedy), None).unwrap();

    // Same corpus decoded under a different experiment config.
    let mut other = cfg.clone();
    other.master_seed += 1;
    let foreign = dir.join("foreign.jsonl");
    commands::run_decode(
        &other,
        &corpus_path,
        None,
        Some(Strategy::Greedy),
        Some(&foreign),
    )
    .unwrap();

    let err = commands::run_eval(
        &cfg,
        &corpus_path,
        &[greedy.clone(), foreign.clone()],
        false,
        None,
    )
    .unwrap_err();
    assert!(
        matches!(err, CoreError::Data(_)),
        "mixed hashes must be refused"
    );

    commands::run_eval(&cfg, &corpus_path, &[greedy, foreign], true, None).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn binary_exit_codes_follow_the_contract() {
    let exe = env!("CARGO_BIN_EXE_capsearch");
    let dir = temp_dir("exit");

    // Invalid config key: exit 2, offending key named on stderr.
    let bad_config = dir.join("bad.json");
    std::fs::write(&bad_config, r#"{ "master_sede": 3 }"#).unwrap();
    let output = Command::new(exe)
        .args(["--config", bad_config.to_str().unwrap(), "gen"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("master_sede"),
        "stderr must name the key: {stderr}"
    );

    // Runtime failure (missing corpus): exit 1.
    let good_config = dir.join("good.json");
    let mut cfg = small_config(&dir);
    cfg.world.scenes = 3;
    std::fs::write(&good_config, serde_json::to_string(&cfg).unwrap()).unwrap();
    let output = Command::new(exe)
        .args([
            "--config",
            good_config.to_str().unwrap(),
            "calibrate",
            "--corpus",
            dir.join("missing.jsonl").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Success: exit 0.
    let output = Command::new(exe)
        .args(["--config", good_config.to_str().unwrap(), "gen"])
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let _ = std::fs::remove_dir_all(&dir);
}
