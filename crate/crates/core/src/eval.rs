//! Evaluation: hallucination metrics, coverage, pairwise judging, win
//! rates, SFT export, and the per-strategy comparison report.
//!
//! An object counts as hallucinated when a caption mentions it and the
//! scene does not contain it. Counts are over distinct objects per caption:
//! repeating a hallucinated mention does not count twice.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::search::{BudgetReport, CaptionScorer, DecodeResult, Strategy};
use crate::world::{Caption, Corpus, Scene};

/// Aggregated hallucination counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChairCounts {
    pub hallucinated_objects: u64,
    pub mentioned_objects: u64,
    pub hallucinated_captions: u64,
    pub total_captions: u64,
}

/// CHAIR scores over a set of (caption, scene) pairs:
/// instance level `chair_i = hallucinated / mentioned` and sentence level
/// `chair_s = captions with any hallucination / captions`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChairScores {
    pub chair_s: f64,
    pub chair_i: f64,
    pub counts: ChairCounts,
}

/// Computes CHAIR over the given pairs; errors on an empty list.
pub fn chair<'a>(pairs: impl IntoIterator<Item = (&'a Caption, &'a Scene)>) -> Result<ChairScores> {
    let mut counts = ChairCounts::default();
    for (caption, scene) in pairs {
        let mentioned = caption.mention_union();
        let hallucinated = mentioned.iter().filter(|m| !scene.has_object(m)).count() as u64;
        counts.mentioned_objects += mentioned.len() as u64;
        counts.hallucinated_objects += hallucinated;
        counts.total_captions += 1;
        if hallucinated > 0 {
            counts.hallucinated_captions += 1;
        }
    }
    if counts.total_captions == 0 {
        return Err(CoreError::Data("chair needs at least one caption".into()));
    }
    Ok(ChairScores {
        chair_s: counts.hallucinated_captions as f64 / counts.total_captions as f64,
        chair_i: if counts.mentioned_objects == 0 {
            0.0
        } else {
            counts.hallucinated_objects as f64 / counts.mentioned_objects as f64
        },
        counts,
    })
}

/// Salience-weighted fraction of scene objects the caption mentions.
pub fn coverage(caption: &Caption, scene: &Scene) -> f64 {
    scene.salience_weighted_coverage(caption.mention_union())
}

/// Fraction of a caption's distinct mentions that are hallucinated.
pub fn hallucinated_fraction(caption: &Caption, scene: &Scene) -> f64 {
    let mentioned = caption.mention_union();
    if mentioned.is_empty() {
        return 0.0;
    }
    let hallucinated = mentioned.iter().filter(|m| !scene.has_object(m)).count();
    hallucinated as f64 / mentioned.len() as f64
}

/// Pairwise verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    A,
    B,
    Tie,
}

/// Deterministic stand-in for an external caption judge: composite score
/// `coverage - lambda * hallucinated_fraction`, higher wins, near-equal is
/// a tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleJudge {
    pub lambda: f64,
    pub tie_epsilon: f64,
}

impl Default for OracleJudge {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tie_epsilon: 1e-9,
        }
    }
}

impl OracleJudge {
    pub fn score(&self, caption: &Caption, scene: &Scene) -> f64 {
        coverage(caption, scene) - self.lambda * hallucinated_fraction(caption, scene)
    }

    /// Judges two captions of the same scene.
    pub fn judge_pairwise(&self, a: &Caption, b: &Caption, scene: &Scene) -> Verdict {
        let sa = self.score(a, scene);
        let sb = self.score(b, scene);
        if (sa - sb).abs() < self.tie_epsilon {
            Verdict::Tie
        } else if sa > sb {
            Verdict::A
        } else {
            Verdict::B
        }
    }
}

impl CaptionScorer for OracleJudge {
    fn score_caption(&self, scene: &Scene, caption: &Caption) -> Result<f64> {
        Ok(self.score(caption, scene))
    }
}

/// Pairwise win-rate tally of A against B.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WinRateReport {
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
    pub comparisons: u64,
    pub win_rate: f64,
}

/// Judges paired captions scene by scene; `a` and `b` must be aligned with
/// `scenes`.
pub fn win_rate<'a>(
    judge: &OracleJudge,
    pairs: impl IntoIterator<Item = (&'a Caption, &'a Caption, &'a Scene)>,
) -> Result<WinRateReport> {
    let mut report = WinRateReport::default();
    for (a, b, scene) in pairs {
        match judge.judge_pairwise(a, b, scene) {
            Verdict::A => report.wins += 1,
            Verdict::Tie => report.ties += 1,
            Verdict::B => report.losses += 1,
        }
        report.comparisons += 1;
    }
    if report.comparisons == 0 {
        return Err(CoreError::Data(
            "win rate needs at least one comparison".into(),
        ));
    }
    report.win_rate = report.wins as f64 / report.comparisons as f64;
    Ok(report)
}

/// One fine-tuning example: the scene's prompt paired with a decoded
/// response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub scene_id: u64,
    pub prompt: String,
    pub response: Caption,
}

/// Builds the SFT export: one record per corpus scene, in corpus order.
/// `results` must hold a decode for every scene.
pub fn export_sft(corpus: &Corpus, results: &[(u64, DecodeResult)]) -> Result<Vec<SftRecord>> {
    let mut out = Vec::with_capacity(corpus.len());
    for record in &corpus.records {
        let (_, decoded) = results
            .iter()
            .find(|(scene_id, _)| *scene_id == record.scene.id)
            .ok_or_else(|| {
                CoreError::Data(format!("no decode result for scene {}", record.scene.id))
            })?;
        out.push(SftRecord {
            scene_id: record.scene.id,
            prompt: record.scene.prompt.clone(),
            response: decoded.caption.clone(),
        });
    }
    Ok(out)
}

/// One row of the strategy comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReportRow {
    pub strategy: Strategy,
    pub scenes: u64,
    pub chair_s: f64,
    pub chair_i: f64,
    pub mean_coverage: f64,
    /// Win rate against the baseline strategy; absent for the baseline row.
    pub win_rate_vs_baseline: Option<f64>,
    pub policy_caption_calls: u64,
    pub policy_sentence_calls: u64,
    pub reward_calls: u64,
    pub value_calls: u64,
}

/// Builds the comparison row for one strategy's decodes over a corpus.
pub fn strategy_report_row(
    strategy: Strategy,
    corpus: &Corpus,
    results: &[(u64, DecodeResult)],
    baseline: Option<&[(u64, DecodeResult)]>,
    judge: &OracleJudge,
) -> Result<StrategyReportRow> {
    if results.is_empty() {
        return Err(CoreError::Data("no decode results to report on".into()));
    }
    let scene_of = |id: u64| -> Result<&Scene> {
        corpus
            .records
            .iter()
            .map(|r| &r.scene)
            .find(|s| s.id == id)
            .ok_or_else(|| CoreError::Data(format!("scene {id} not in corpus")))
    };

    let mut pairs = Vec::with_capacity(results.len());
    let mut coverage_total = 0.0;
    let mut budget = BudgetReport::default();
    for (scene_id, result) in results {
        let scene = scene_of(*scene_id)?;
        pairs.push((&result.caption, scene));
        coverage_total += coverage(&result.caption, scene);
        budget.accumulate(&result.budget);
    }
    let scores = chair(pairs.iter().copied())?;

    let win_rate_vs_baseline = match baseline {
        None => None,
        Some(base) => {
            let mut triples = Vec::with_capacity(results.len());
            for (scene_id, result) in results {
                let (_, base_result) = base
                    .iter()
                    .find(|(id, _)| id == scene_id)
                    .ok_or_else(|| CoreError::Data(format!("baseline missing scene {scene_id}")))?;
                triples.push((&result.caption, &base_result.caption, scene_of(*scene_id)?));
            }
            Some(win_rate(judge, triples)?.win_rate)
        }
    };

    Ok(StrategyReportRow {
        strategy,
        scenes: results.len() as u64,
        chair_s: scores.chair_s,
        chair_i: scores.chair_i,
        mean_coverage: coverage_total / results.len() as f64,
        win_rate_vs_baseline,
        policy_caption_calls: budget.policy_caption_calls,
        policy_sentence_calls: budget.policy_sentence_calls,
        reward_calls: budget.reward_calls,
        value_calls: budget.value_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{gen_scene, render_gt_caption, Sentence, Vocabulary, WorldConfig};

    fn caption_of(words: &[&str]) -> Caption {
        let s = Sentence::new(
            words.iter().map(|w| w.to_string()).collect(),
            &Vocabulary::standard(),
        );
        Caption::new(vec![s], true).unwrap()
    }

    #[test]
    fn fully_grounded_captions_score_zero() {
        let cfg = WorldConfig::default();
        let pairs: Vec<(Caption, Scene)> = (0..10)
            .map(|seed| {
                let scene = gen_scene(seed, &cfg).unwrap();
                let gt = render_gt_caption(&scene, &cfg);
                (gt, scene)
            })
            .collect();
        let scores = chair(pairs.iter().map(|(c, s)| (c, s))).unwrap();
        assert_eq!(scores.chair_s, 0.0);
        assert_eq!(scores.chair_i, 0.0);
    }

    #[test]
    fn single_caption_counts_match_hand_arithmetic() {
        // 4 distinct mentions, 1 hallucinated: chair_i 0.25, chair_s 1.0.
        let cfg = WorldConfig {
            objects_min: 3,
            objects_max: 3,
            ..WorldConfig::default()
        };
        let scene = gen_scene(5, &cfg).unwrap();
        let names: Vec<&str> = scene.objects.iter().map(|o| o.name.as_str()).collect();
        let outside = Vocabulary::standard()
            .objects
            .iter()
            .find(|o| !scene.has_object(o))
            .unwrap()
            .clone();
        let caption = caption_of(&[names[0], names[1], names[2], &outside]);
        let scores = chair([(&caption, &scene)]).unwrap();
        assert_eq!(scores.counts.mentioned_objects, 4);
        assert_eq!(scores.counts.hallucinated_objects, 1);
        assert_eq!(scores.chair_i, 0.25);
        assert_eq!(scores.chair_s, 1.0);
    }

    #[test]
    fn empty_input_is_a_data_error() {
        assert!(chair(std::iter::empty()).is_err());
    }

    #[test]
    fn repeated_hallucinated_mention_counts_once() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(9, &cfg).unwrap();
        let outside = Vocabulary::standard()
            .objects
            .iter()
            .find(|o| !scene.has_object(o))
            .unwrap()
            .clone();
        let caption = caption_of(&[&outside, "and", &outside]);
        let scores = chair([(&caption, &scene)]).unwrap();
        assert_eq!(scores.counts.hallucinated_objects, 1);
    }

    #[test]
    fn gt_coverage_is_one_and_empty_is_zero() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(14, &cfg).unwrap();
        let gt = render_gt_caption(&scene, &cfg);
        assert!((coverage(&gt, &scene) - 1.0).abs() < 1e-12);
        let empty = caption_of(&["there", "is"]);
        assert_eq!(coverage(&empty, &scene), 0.0);
    }

    #[test]
    fn coverage_is_salience_weighted() {
        let vocab = Vocabulary::standard();
        let scene = Scene {
            id: 1,
            prompt: String::new(),
            objects: vec![
                crate::world::ObjectSpec {
                    name: "dog".into(),
                    attributes: vec!["red".into()],
                    salience: 1.0,
                },
                crate::world::ObjectSpec {
                    name: "cat".into(),
                    attributes: vec!["blue".into()],
                    salience: 0.5,
                },
            ],
        };
        let caption = Caption::new(
            vec![Sentence::new(vec!["a".into(), "dog".into()], &vocab)],
            true,
        )
        .unwrap();
        assert!((coverage(&caption, &scene) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_captions_tie_and_swap_inverts() {
        let cfg = WorldConfig::default();
        let scene = gen_scene(20, &cfg).unwrap();
        let gt = render_gt_caption(&scene, &cfg);
        let outside = Vocabulary::standard()
            .objects
            .iter()
            .find(|o| !scene.has_object(o))
            .unwrap()
            .clone();
        let worse = caption_of(&["a", &outside]);
        let judge = OracleJudge::default();
        assert_eq!(judge.judge_pairwise(&gt, &gt, &scene), Verdict::Tie);
        assert_eq!(judge.judge_pairwise(&gt, &worse, &scene), Verdict::A);
        assert_eq!(judge.judge_pairwise(&worse, &gt, &scene), Verdict::B);
    }

    #[test]
    fn win_rate_tally_adds_up() {
        let cfg = WorldConfig::default();
        let judge = OracleJudge::default();
        let mut triples = Vec::new();
        let scenes: Vec<Scene> = (30..40).map(|s| gen_scene(s, &cfg).unwrap()).collect();
        let captions: Vec<(Caption, Caption)> = scenes
            .iter()
            .map(|scene| {
                let gt = render_gt_caption(scene, &cfg);
                let partial = caption_of(&["the", &scene.objects[0].name]);
                (gt, partial)
            })
            .collect();
        for (scene, (a, b)) in scenes.iter().zip(&captions) {
            triples.push((a, b, scene));
        }
        let report = win_rate(&judge, triples).unwrap();
        assert_eq!(
            report.wins + report.ties + report.losses,
            report.comparisons
        );
        assert_eq!(report.comparisons, 10);
        assert_eq!(
            report.win_rate,
            report.wins as f64 / report.comparisons as f64
        );
    }

    #[test]
    fn export_round_trips_and_errors_on_missing() {
        use crate::policy::{ToyDescriber, ToyDescriberConfig};
        use crate::search::decode_greedy;
        use crate::world::{gen_corpus, CorpusConfig};

        let corpus_cfg = CorpusConfig {
            scenes: 10,
            ..CorpusConfig::default()
        };
        let policy =
            ToyDescriber::new(ToyDescriberConfig::default(), Vocabulary::standard()).unwrap();
        let corpus = gen_corpus(&corpus_cfg, &policy, 3).unwrap();
        let results: Vec<(u64, DecodeResult)> = corpus
            .records
            .iter()
            .map(|r| (r.scene.id, decode_greedy(&r.scene, &policy).unwrap()))
            .collect();
        let records = export_sft(&corpus, &results).unwrap();
        assert_eq!(records.len(), 10);
        for (record, corpus_record) in records.iter().zip(&corpus.records) {
            assert_eq!(record.scene_id, corpus_record.scene.id);
            assert_eq!(record.prompt, corpus_record.scene.prompt);
        }

        let partial = &results[..9];
        assert!(export_sft(&corpus, partial).is_err());
    }
}
