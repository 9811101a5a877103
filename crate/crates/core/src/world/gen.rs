//! Scene generation and ground-truth caption rendering.

use rand::Rng;

use super::caption::{Caption, Sentence};
use super::scene::{ObjectSpec, Scene};
use super::WorldConfig;
use crate::error::Result;
use crate::rng::StreamKey;

/// Generates one scene, deterministic in `(seed, cfg)`.
pub fn gen_scene(seed: u64, cfg: &WorldConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = StreamKey::root(seed).child(super::ns::SCENE).rng();

    let count = rng.random_range(cfg.objects_min..=cfg.objects_max);
    let name_indices = draw_distinct(&mut rng, cfg.vocabulary.objects.len(), count);

    let mut objects = Vec::with_capacity(count);
    for idx in name_indices {
        let attr_count = rng.random_range(cfg.attributes_min..=cfg.attributes_max);
        let attr_indices = draw_distinct(&mut rng, cfg.vocabulary.attributes.len(), attr_count);
        let salience =
            cfg.salience_min + rng.random::<f64>() * (cfg.salience_max - cfg.salience_min);
        objects.push(ObjectSpec {
            name: cfg.vocabulary.objects[idx].clone(),
            attributes: attr_indices
                .into_iter()
                .map(|a| cfg.vocabulary.attributes[a].clone())
                .collect(),
            salience,
        });
    }

    // Guarantee at least one salient object.
    let any_salient = objects.iter().any(|o| o.salience >= cfg.salient_cutoff);
    if !any_salient {
        let top = objects
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.salience.total_cmp(&b.1.salience))
            .map(|(i, _)| i)
            .expect("object count >= 1");
        objects[top].salience = cfg.salient_cutoff;
    }

    let scene = Scene {
        id: seed,
        prompt: cfg.prompt.clone(),
        objects,
    };
    scene.validate(cfg.salient_cutoff)?;
    Ok(scene)
}

/// `count` distinct indices from `0..n`, in draw order.
fn draw_distinct(rng: &mut impl Rng, n: usize, count: usize) -> Vec<usize> {
    debug_assert!(count <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let at = rng.random_range(0..pool.len());
        picked.push(pool.swap_remove(at));
    }
    picked
}

/// Renders the reference caption: a single sentence naming every scene
/// object exactly once with its first attribute. By construction it attains
/// the grounding oracle's maximum (full grounding, full coverage, no
/// hallucination).
pub fn render_gt_caption(scene: &Scene, cfg: &WorldConfig) -> Caption {
    let mut tokens = Vec::new();
    for (i, obj) in scene.objects.iter().enumerate() {
        if i > 0 {
            tokens.push("and".to_string());
        }
        tokens.push("the".to_string());
        tokens.push(obj.name.clone());
        tokens.push("with".to_string());
        tokens.push(obj.attributes[0].clone());
    }
    let sentence = Sentence::new(tokens, &cfg.vocabulary);
    Caption::new(vec![sentence], true).expect("ground-truth caption is non-empty")
}
