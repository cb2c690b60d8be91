use super::config::{ExperimentConfig, ModelSpec, TransformSpec};
use crate::error::{Error, Result};
use crate::transforms::DEFAULT_MESH;

/// The two beta laws every figure is run under.
pub fn figure_models() -> [ModelSpec; 2] {
    [
        ModelSpec::new("beta", vec![3.0, 3.0]),
        ModelSpec::new("beta", vec![0.8, 1.5]),
    ]
}

/// `Δ` used by the Brownian-motion figures.
pub const FIGURE_DELTA: f64 = 0.1;

/// Preset experiments for figure `which` (1–4), one per model, labelled by
/// a file-name-safe model tag.
///
/// 1. standard-bridge transform, K–S statistic, `n = 200`;
/// 2. the same transform, `ω²` statistic, `n = 50`;
/// 3. the Brownian-motion transform with `η = 1_A/√Δ`, `A = [0, Δ]`, `n = 200`;
/// 4. the integrated Brownian-motion transform at `Δ`, `n = 200`.
///
/// Each model gets its own master seed derived from `seed`, so the two
/// runs are independent.
pub fn figure_configs(which: u8, reps: usize, seed: u64) -> Result<Vec<(String, ExperimentConfig)>> {
    let (transform, statistic, n) = match which {
        1 => (TransformSpec::new("standard-bridge"), "ks", 200),
        2 => (TransformSpec::new("standard-bridge"), "cvm", 50),
        3 => (
            TransformSpec::new("motion-uniform-eta").with("delta", FIGURE_DELTA),
            "motion-sup",
            200,
        ),
        4 => (
            TransformSpec::new("motion-integrated").with("delta", FIGURE_DELTA),
            "motion-sup",
            200,
        ),
        other => {
            return Err(Error::Config(format!(
                "figure must be 1, 2, 3 or 4, got {other}"
            )))
        }
    };
    Ok(figure_models()
        .into_iter()
        .enumerate()
        .map(|(i, model)| {
            let tag = format!(
                "fig{which}_{}",
                model
                    .to_string()
                    .replace(['(', ')'], "")
                    .replace(',', "_")
            );
            let config = ExperimentConfig {
                model,
                sample_model: None,
                transform: transform.clone(),
                statistic: statistic.to_string(),
                n,
                reps,
                seed: seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                mesh: DEFAULT_MESH,
            };
            (tag, config)
        })
        .collect())
}
