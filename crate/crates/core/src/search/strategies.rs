//! The decoding strategies.

use super::audit::audit_grounding;
use super::{
    argmax_first, BudgetReport, Candidate, CandidateContent, CandidatePool, CaptionScorer,
    DecodeResult, DecodeTrace, DeltaScorer, PoolKind, SearchConfig, SentenceScorer, Strategy,
};
use crate::error::{CoreError, Result};
use crate::policy::Policy;
use crate::rng::StreamKey;
use crate::value::ValueParams;
use crate::world::{ns, Caption, Prefix, Scene, Sentence};

// Stream labels under the per-decode root.
const L_CAPTION_POOL: u64 = 0;
const L_STEP: u64 = 1;
const L_REFINE: u64 = 2;

/// Which budget counter a stepwise scorer draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Reward,
    Value,
}

/// Unguided deterministic decode.
pub fn decode_greedy(scene: &Scene, policy: &dyn Policy) -> Result<DecodeResult> {
    let caption = policy
        .greedy_caption(scene)
        .map_err(|e| policy_err(scene, e))?;
    let budget = BudgetReport {
        policy_caption_calls: 1,
        sentences_in_output: caption.len() as u64,
        ..BudgetReport::default()
    };
    Ok(DecodeResult {
        strategy: Strategy::Greedy,
        seed: scene.id,
        caption,
        budget,
        per_sentence_values: Vec::new(),
        trace: None,
    })
}

/// Best-of-N: sample N*K full captions, return the judge-argmax. Judge
/// invocations are the strategy's reward calls.
pub fn decode_bon(
    scene: &Scene,
    policy: &dyn Policy,
    judge: &dyn CaptionScorer,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    cfg.validate()?;
    let root = StreamKey::root(seed).child(ns::DECODE);
    let mut budget = BudgetReport::default();

    let captions = sample_caption_pool(scene, policy, cfg, root, &mut budget)?;
    let mut scores = Vec::with_capacity(captions.len());
    for caption in &captions {
        scores.push(judge.score_caption(scene, caption)?);
        budget.reward_calls += 1;
    }
    let best = argmax_first(&scores);

    let trace = cfg.log_candidates.then(|| DecodeTrace {
        pools: vec![caption_pool_log(&captions, &scores, best)],
    });

    let caption = captions.into_iter().nth(best).expect("pool is non-empty");
    budget.sentences_in_output = caption.len() as u64;
    Ok(DecodeResult {
        strategy: Strategy::Bon,
        seed,
        caption,
        budget,
        per_sentence_values: Vec::new(),
        trace,
    })
}

/// Stepwise search guided by the grounding similarity.
pub fn decode_prm_step(
    scene: &Scene,
    policy: &dyn Policy,
    delta: &DeltaScorer,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    decode_step_guided(
        scene,
        policy,
        delta,
        ScoreKind::Reward,
        Strategy::PrmStep,
        cfg,
        seed,
    )
}

/// Stepwise search guided by the value model: identical control flow to
/// [`decode_prm_step`] with the argmax taken over value predictions.
pub fn decode_value_step(
    scene: &Scene,
    policy: &dyn Policy,
    value: &ValueParams,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    value.check_feature_spec()?;
    decode_step_guided(
        scene,
        policy,
        value,
        ScoreKind::Value,
        Strategy::ValueStep,
        cfg,
        seed,
    )
}

/// Shared stepwise loop: at each output step sample N*K candidate
/// sentences, keep the scorer argmax, and repeat until the policy finishes
/// or the selected candidate is the EOS sentinel.
pub fn decode_step_guided(
    scene: &Scene,
    policy: &dyn Policy,
    scorer: &dyn SentenceScorer,
    kind: ScoreKind,
    strategy: Strategy,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    cfg.validate()?;
    let root = StreamKey::root(seed).child(ns::DECODE);
    let mut budget = BudgetReport::default();
    let mut trace = cfg.log_candidates.then(DecodeTrace::default);
    let mut prefix = Prefix::empty();
    let mut per_sentence_values = Vec::new();

    let mut step = 0usize;
    while !policy.finished(scene, &prefix) {
        let candidates = sample_sentence_pool(
            scene,
            policy,
            &prefix,
            cfg,
            root.child(L_STEP),
            step,
            &mut budget,
        )?;
        let mut scores = Vec::with_capacity(candidates.len());
        for candidate in &candidates {
            scores.push(scorer.score_sentence(scene, &prefix, candidate)?);
            match kind {
                ScoreKind::Reward => budget.reward_calls += 1,
                ScoreKind::Value => budget.value_calls += 1,
            }
        }
        let best = argmax_first(&scores);
        if let Some(trace) = trace.as_mut() {
            trace.pools.push(sentence_pool_log(
                PoolKind::SentenceStep { step },
                &candidates,
                &scores,
                best,
            ));
        }
        let chosen = candidates[best].clone();
        let eos = chosen.is_eos();
        if !eos && kind == ScoreKind::Value {
            per_sentence_values.push(scores[best]);
        }
        prefix.push(chosen)?;
        if eos {
            break;
        }
        step += 1;
    }

    budget.sentences_in_output = prefix.len() as u64;
    let caption = prefix.into_caption(true)?;
    Ok(DecodeResult {
        strategy,
        seed,
        caption,
        budget,
        per_sentence_values,
        trace,
    })
}

/// Two-stage search with the trained value model scoring both stages and
/// driving the audit.
pub fn decode_two_stage(
    scene: &Scene,
    policy: &dyn Policy,
    value: &ValueParams,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    value.check_feature_spec()?;
    decode_two_stage_with(scene, policy, value, value, value, cfg, seed)
}

/// Two-stage search with the scorers split out.
///
/// Stage 1 samples N*K full captions, scores each once in caption mode, and
/// keeps the argmax. Stage 2 repeatedly audits the current caption and,
/// while the audit is non-empty, samples N*K candidate next sentences and
/// appends the sentence-scorer argmax; refinement stops on an empty audit,
/// a selected EOS sentinel, or the round cap, and every scored pool counts
/// toward the refinement-round total m. The audit itself uses `audit_value`
/// and is bookkeeping, not a counted candidate evaluation.
pub fn decode_two_stage_with(
    scene: &Scene,
    policy: &dyn Policy,
    caption_scorer: &dyn CaptionScorer,
    sentence_scorer: &dyn SentenceScorer,
    audit_value: &ValueParams,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    cfg.validate()?;
    let root = StreamKey::root(seed).child(ns::DECODE);
    let mut budget = BudgetReport::default();
    let mut trace = cfg.log_candidates.then(DecodeTrace::default);

    // Stage 1: coarse selection over full captions.
    let captions = sample_caption_pool(scene, policy, cfg, root, &mut budget)?;
    let mut scores = Vec::with_capacity(captions.len());
    for caption in &captions {
        scores.push(caption_scorer.score_caption(scene, caption)?);
        budget.value_calls += 1;
    }
    let best = argmax_first(&scores);
    if let Some(trace) = trace.as_mut() {
        trace.pools.push(caption_pool_log(&captions, &scores, best));
    }
    let base = captions.into_iter().nth(best).expect("pool is non-empty");

    // Stage 2: targeted refinement, append-only.
    let mut sentences: Vec<Sentence> = base.sentences().to_vec();
    let mut rounds = 0u64;
    for round in 0..cfg.max_refinements {
        let current = Caption::new(sentences.clone(), false)?;
        let sites = audit_grounding(
            &current,
            scene,
            audit_value,
            cfg.refine_threshold,
            cfg.salience_cutoff,
        )?;
        if sites.is_empty() {
            break;
        }
        let prefix = Prefix::reopened(&current);
        let candidates = sample_sentence_pool(
            scene,
            policy,
            &prefix,
            cfg,
            root.child(L_REFINE),
            round,
            &mut budget,
        )?;
        let mut scores = Vec::with_capacity(candidates.len());
        for candidate in &candidates {
            scores.push(sentence_scorer.score_sentence(scene, &prefix, candidate)?);
            budget.value_calls += 1;
        }
        rounds += 1;
        let best = argmax_first(&scores);
        if let Some(trace) = trace.as_mut() {
            trace.pools.push(sentence_pool_log(
                PoolKind::RefinementRound { round },
                &candidates,
                &scores,
                best,
            ));
        }
        let chosen = candidates[best].clone();
        if chosen.is_eos() {
            break;
        }
        sentences.push(chosen);
    }

    let caption = Caption::new(sentences, true)?;
    budget.sentences_in_output = caption.len() as u64;
    budget.refinement_rounds = rounds;

    // Final per-sentence values, derived for reporting.
    let out_sentences = caption.sentences();
    let mut per_sentence_values = Vec::with_capacity(out_sentences.len());
    for i in 0..out_sentences.len() {
        per_sentence_values.push(audit_value.predict_sentence(
            &out_sentences[i],
            scene,
            &out_sentences[..i],
        )?);
    }

    Ok(DecodeResult {
        strategy: Strategy::TwoStage,
        seed,
        caption,
        budget,
        per_sentence_values,
        trace,
    })
}

/// Calibrates the refinement threshold: runs stage-1 selection on every
/// corpus scene and returns the requested percentile of the selected base
/// captions' per-sentence values. Decodes derive their streams from
/// `(calibration_seed, scene index)`.
pub fn calibrate_refine_threshold(
    corpus: &crate::world::Corpus,
    policy: &dyn Policy,
    value: &ValueParams,
    cfg: &SearchConfig,
    calibration_seed: u64,
    percentile: f64,
) -> Result<f64> {
    if !(0.0..=100.0).contains(&percentile) {
        return Err(CoreError::Domain(format!(
            "percentile must be in [0,100], got {percentile}"
        )));
    }
    let mut stage1_cfg = cfg.clone();
    stage1_cfg.max_refinements = 0;
    stage1_cfg.log_candidates = false;
    let mut values = Vec::new();
    for (i, record) in corpus.records.iter().enumerate() {
        let seed = crate::rng::derive_seed(calibration_seed, &[ns::DECODE, i as u64]);
        let result = decode_two_stage(&record.scene, policy, value, &stage1_cfg, seed)?;
        values.extend(result.per_sentence_values);
    }
    if values.is_empty() {
        return Err(CoreError::Data(
            "no stage-1 sentence values to calibrate on".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    let rank = percentile / 100.0 * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Ok(if lo == hi {
        values[lo]
    } else {
        values[lo] + (values[hi] - values[lo]) * (rank - lo as f64)
    })
}

/// Everything the strategy dispatcher might need.
pub struct StrategyScorers<'a> {
    pub judge: &'a dyn CaptionScorer,
    pub delta: &'a DeltaScorer,
    pub value: Option<&'a ValueParams>,
}

/// Runs the strategy selected in the config.
pub fn decode(
    scene: &Scene,
    policy: &dyn Policy,
    scorers: &StrategyScorers<'_>,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<DecodeResult> {
    let value = || {
        scorers.value.ok_or_else(|| {
            CoreError::Config(format!(
                "strategy {} requires a trained value model",
                cfg.strategy
            ))
        })
    };
    match cfg.strategy {
        Strategy::Greedy => decode_greedy(scene, policy),
        Strategy::Bon => decode_bon(scene, policy, scorers.judge, cfg, seed),
        Strategy::PrmStep => decode_prm_step(scene, policy, scorers.delta, cfg, seed),
        Strategy::ValueStep => decode_value_step(scene, policy, value()?, cfg, seed),
        Strategy::TwoStage => decode_two_stage(scene, policy, value()?, cfg, seed),
    }
}

fn sample_caption_pool(
    scene: &Scene,
    policy: &dyn Policy,
    cfg: &SearchConfig,
    root: StreamKey,
    budget: &mut BudgetReport,
) -> Result<Vec<Caption>> {
    let mut captions = Vec::with_capacity(cfg.temperatures.len() * cfg.k_per_temp);
    for (ti, &temperature) in cfg.temperatures.iter().enumerate() {
        for k in 0..cfg.k_per_temp {
            let key = root.descend(&[L_CAPTION_POOL, ti as u64, k as u64]);
            let caption = policy
                .sample_caption(scene, temperature, &mut key.rng())
                .map_err(|e| policy_err(scene, e))?;
            budget.policy_caption_calls += 1;
            captions.push(caption);
        }
    }
    Ok(captions)
}

fn sample_sentence_pool(
    scene: &Scene,
    policy: &dyn Policy,
    prefix: &Prefix,
    cfg: &SearchConfig,
    root: StreamKey,
    step: usize,
    budget: &mut BudgetReport,
) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::with_capacity(cfg.temperatures.len() * cfg.k_per_temp);
    for (ti, &temperature) in cfg.temperatures.iter().enumerate() {
        for k in 0..cfg.k_per_temp {
            let key = root.descend(&[step as u64, ti as u64, k as u64]);
            let sentence = policy
                .sample_sentence(scene, prefix, temperature, &mut key.rng())
                .map_err(|e| policy_err(scene, e))?;
            budget.policy_sentence_calls += 1;
            sentences.push(sentence);
        }
    }
    Ok(sentences)
}

fn caption_pool_log(captions: &[Caption], scores: &[f64], best: usize) -> CandidatePool {
    CandidatePool {
        kind: PoolKind::CaptionPool,
        candidates: captions
            .iter()
            .enumerate()
            .map(|(index, c)| Candidate {
                index,
                score: scores[index],
                selected: index == best,
                content: CandidateContent::Caption(c.clone()),
            })
            .collect(),
    }
}

fn sentence_pool_log(
    kind: PoolKind,
    sentences: &[Sentence],
    scores: &[f64],
    best: usize,
) -> CandidatePool {
    CandidatePool {
        kind,
        candidates: sentences
            .iter()
            .enumerate()
            .map(|(index, s)| Candidate {
                index,
                score: scores[index],
                selected: index == best,
                content: CandidateContent::Sentence(s.clone()),
            })
            .collect(),
    }
}

fn policy_err(scene: &Scene, e: CoreError) -> CoreError {
    match e {
        e @ CoreError::Policy { .. } => e,
        other => CoreError::Policy {
            scene_id: scene.id,
            message: other.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{ToyDescriber, ToyDescriberConfig};
    use crate::prm::OracleWeights;
    use crate::value::{FEATURE_DIM, FEATURE_SPEC_VERSION};
    use crate::world::{gen_scene, Vocabulary, WorldConfig};

    fn toy(hallucination_rate: f64) -> ToyDescriber {
        ToyDescriber::new(
            ToyDescriberConfig {
                hallucination_rate,
                omission_bias: 0.25,
                ..ToyDescriberConfig::default()
            },
            Vocabulary::standard(),
        )
        .unwrap()
    }

    /// Hand-weighted value model: grounded and covering sentences good,
    /// hallucinations bad.
    fn hand_value() -> ValueParams {
        ValueParams {
            weights: vec![0.5, -0.8, 0.4, 0.3, 0.05, 0.0],
            feature_spec_version: FEATURE_SPEC_VERSION.to_string(),
            gamma: 0.9,
            metadata: Default::default(),
        }
    }

    #[test]
    fn greedy_counts_one_caption_call() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(4, &cfg).unwrap();
        let policy = toy(0.3);
        let result = decode_greedy(&scene, &policy).unwrap();
        assert_eq!(result.budget.policy_caption_calls, 1);
        assert_eq!(result.budget.value_calls, 0);
        assert_eq!(
            result.budget.sentences_in_output,
            result.caption.len() as u64
        );
        let again = decode_greedy(&scene, &policy).unwrap();
        assert_eq!(result, again);
    }

    #[test]
    fn bon_returns_the_judge_argmax() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(6, &cfg).unwrap();
        let policy = toy(0.3);
        let search = SearchConfig {
            log_candidates: true,
            ..SearchConfig::default()
        };
        // Judge by caption-mode hand value.
        let judge = hand_value();
        let result = decode_bon(&scene, &policy, &judge, &search, 11).unwrap();
        assert_eq!(result.budget.policy_caption_calls, search.pool_size());
        assert_eq!(result.budget.reward_calls, search.pool_size());

        // Brute-force rescoring: the returned caption scores maximally.
        let trace = result.trace.as_ref().unwrap();
        let pool = &trace.pools[0];
        let best_score = pool
            .candidates
            .iter()
            .map(|c| c.score)
            .fold(f64::NEG_INFINITY, f64::max);
        let returned = judge.score_caption(&scene, &result.caption).unwrap();
        assert_eq!(returned, best_score);
    }

    #[test]
    fn degenerate_pool_returns_the_single_candidate() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(12, &cfg).unwrap();
        let policy = toy(0.0);
        let search = SearchConfig {
            temperatures: vec![0.2],
            k_per_temp: 1,
            ..SearchConfig::default()
        };
        let result = decode_bon(&scene, &policy, &hand_value(), &search, 3).unwrap();
        assert_eq!(result.budget.policy_caption_calls, 1);
        // N=1, K=1 stepwise reduces to plain temperature sampling.
        let step = decode_prm_step(
            &scene,
            &policy,
            &DeltaScorer {
                weights: OracleWeights::default(),
            },
            &search,
            3,
        )
        .unwrap();
        assert_eq!(
            step.budget.policy_sentence_calls,
            step.budget.sentences_in_output
        );
    }

    #[test]
    fn stepwise_budget_matches_closed_form() {
        let cfg = WorldConfig::default();
        let policy = toy(0.3);
        let delta = DeltaScorer {
            weights: OracleWeights::default(),
        };
        let search = SearchConfig::default();
        for seed in 0..10 {
            let scene = gen_scene(seed, &cfg).unwrap();
            let result = decode_prm_step(&scene, &policy, &delta, &search, seed).unwrap();
            let s = result.budget.sentences_in_output;
            assert_eq!(
                result.budget,
                BudgetReport::closed_form(Strategy::PrmStep, search.pool_size(), s, 0)
            );
        }
    }

    #[test]
    fn prm_step_keeps_the_delta_argmax_each_step() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(21, &cfg).unwrap();
        let policy = toy(0.4);
        let delta = DeltaScorer {
            weights: OracleWeights::default(),
        };
        let search = SearchConfig {
            log_candidates: true,
            ..SearchConfig::default()
        };
        let result = decode_prm_step(&scene, &policy, &delta, &search, 17).unwrap();
        let trace = result.trace.as_ref().unwrap();
        assert!(!trace.pools.is_empty());
        for pool in &trace.pools {
            let selected = pool.candidates.iter().find(|c| c.selected).unwrap();
            let max = pool
                .candidates
                .iter()
                .map(|c| c.score)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(selected.score, max);
            // Lowest-index tie-break.
            let first_max = pool.candidates.iter().find(|c| c.score == max).unwrap();
            assert_eq!(first_max.index, selected.index);
        }
    }

    #[test]
    fn value_step_with_delta_projected_weights_matches_prm_step() {
        // On an empty prefix a sentence's novelty equals its own coverage,
        // so weights (w_g, -w_h, 0, w_c, 0, 0) reproduce unclamped delta
        // exactly and the two searches select identically. Single-sentence
        // captions keep every step on the empty prefix.
        let cfg = WorldConfig::default();
        let policy = ToyDescriber::new(
            ToyDescriberConfig {
                hallucination_rate: 0.3,
                max_sentences: 1,
                ..ToyDescriberConfig::default()
            },
            Vocabulary::standard(),
        )
        .unwrap();
        let w = OracleWeights::default();
        let delta_weights = ValueParams {
            weights: vec![w.grounded, -w.hallucination, 0.0, w.coverage, 0.0, 0.0],
            feature_spec_version: FEATURE_SPEC_VERSION.to_string(),
            gamma: 0.9,
            metadata: Default::default(),
        };
        let delta = DeltaScorer { weights: w };
        let search = SearchConfig::default();
        for seed in 40..52 {
            let scene = gen_scene(seed, &cfg).unwrap();
            let a = decode_prm_step(&scene, &policy, &delta, &search, seed).unwrap();
            let b = decode_value_step(&scene, &policy, &delta_weights, &search, seed).unwrap();
            assert_eq!(a.caption, b.caption, "seed {seed}");
        }
    }

    #[test]
    fn two_stage_with_no_refinement_budget_returns_stage1() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(33, &cfg).unwrap();
        let policy = toy(0.3);
        let value = hand_value();
        let search = SearchConfig {
            max_refinements: 0,
            ..SearchConfig::default()
        };
        let result = decode_two_stage(&scene, &policy, &value, &search, 5).unwrap();
        assert_eq!(result.budget.refinement_rounds, 0);
        assert_eq!(result.budget.value_calls, search.pool_size());
        assert_eq!(result.budget.policy_sentence_calls, 0);
        assert_eq!(
            result.budget,
            BudgetReport::closed_form(
                Strategy::TwoStage,
                search.pool_size(),
                result.budget.sentences_in_output,
                0
            )
        );
    }

    #[test]
    fn two_stage_budget_matches_closed_form_with_refinement() {
        let cfg = WorldConfig::default();
        let policy = toy(0.3);
        let value = hand_value();
        let search = SearchConfig {
            refine_threshold: f64::NEG_INFINITY,
            ..SearchConfig::default()
        };
        for seed in 0..10 {
            let scene = gen_scene(100 + seed, &cfg).unwrap();
            let result = decode_two_stage(&scene, &policy, &value, &search, seed).unwrap();
            assert_eq!(
                result.budget,
                BudgetReport::closed_form(
                    Strategy::TwoStage,
                    search.pool_size(),
                    result.budget.sentences_in_output,
                    result.budget.refinement_rounds
                ),
                "seed {seed}"
            );
            assert_eq!(
                result.per_sentence_values.len(),
                result.caption.len(),
                "per-sentence values cover the output"
            );
        }
    }

    #[test]
    fn two_stage_appends_are_the_pool_argmax() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(55, &cfg).unwrap();
        let policy = toy(0.4);
        let value = hand_value();
        let search = SearchConfig {
            log_candidates: true,
            refine_threshold: f64::NEG_INFINITY,
            ..SearchConfig::default()
        };
        let result = decode_two_stage(&scene, &policy, &value, &search, 9).unwrap();
        for pool in &result.trace.as_ref().unwrap().pools {
            let selected = pool.candidates.iter().find(|c| c.selected).unwrap();
            let max = pool
                .candidates
                .iter()
                .map(|c| c.score)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(selected.score, max);
        }
    }

    #[test]
    fn decode_is_deterministic_in_seed() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(60, &cfg).unwrap();
        let policy = toy(0.3);
        let value = hand_value();
        let search = SearchConfig::default();
        let a = decode_two_stage(&scene, &policy, &value, &search, 42).unwrap();
        let b = decode_two_stage(&scene, &policy, &value, &search, 42).unwrap();
        assert_eq!(a, b);
        let c = decode_two_stage(&scene, &policy, &value, &search, 43).unwrap();
        assert_ne!(a.seed, c.seed);
    }

    #[test]
    fn value_strategies_require_params() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(2, &cfg).unwrap();
        let policy = toy(0.0);
        let delta = DeltaScorer {
            weights: OracleWeights::default(),
        };
        let judge = hand_value();
        let scorers = StrategyScorers {
            judge: &judge,
            delta: &delta,
            value: None,
        };
        let search = SearchConfig {
            strategy: Strategy::ValueStep,
            ..SearchConfig::default()
        };
        assert!(matches!(
            decode(&scene, &policy, &scorers, &search, 1),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn feature_spec_mismatch_is_refused() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(2, &cfg).unwrap();
        let policy = toy(0.0);
        let mut bad = hand_value();
        bad.feature_spec_version = "other".to_string();
        assert!(matches!(
            decode_value_step(&scene, &policy, &bad, &SearchConfig::default(), 1),
            Err(CoreError::Integrity(_))
        ));
        let mut short = hand_value();
        short.weights = vec![0.0; FEATURE_DIM - 1];
        assert!(decode_two_stage(&scene, &policy, &short, &SearchConfig::default(), 1).is_err());
    }
}
