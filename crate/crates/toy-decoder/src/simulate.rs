use dab_core::{rebalance_tensor, RebalanceConfig};
use mihbench::{seed, Answer, PredictionRecord, QAInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::DecoderConfig;
use crate::error::Result;
use crate::forward::{forward, segments};
use crate::readout::{detect, mean_image_ratios, ReadoutModel};
use crate::scene::SyntheticScene;

/// Simulated answer to one instance plus the attention it was based on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub instance_id: String,
    pub raw_text: String,
    /// Mean attention ratio of each image over the readout rows.
    pub image_ratios: Vec<f64>,
    pub detected: Vec<bool>,
}

impl SimRecord {
    pub fn prediction(&self) -> PredictionRecord {
        PredictionRecord::new(self.instance_id.clone(), self.raw_text.clone())
    }
}

/// Runs one instance: forward pass, optional rebalancing, readout.
pub fn simulate_instance(
    instance: &QAInstance,
    config: &DecoderConfig,
    readout: &ReadoutModel,
    rebalance: Option<&RebalanceConfig>,
) -> Result<SimRecord> {
    let scene = SyntheticScene::from_instance(instance)?;
    let seg = segments(&scene, config)?;
    let mut tensor = forward(&scene, config)?;
    if let Some(cfg) = rebalance {
        tensor = rebalance_tensor(&tensor, &seg, cfg)?.adjusted;
    }
    let ratios = mean_image_ratios(&tensor, &seg, readout.layers)?;
    let detected = detect(
        &ratios,
        &scene,
        readout,
        seed::derive_seed(config.seed, &format!("readout/{}", instance.id)),
    )?;
    let answer = Answer::from_bool(detected.iter().all(|d| *d));
    Ok(SimRecord {
        instance_id: instance.id.clone(),
        raw_text: if answer.is_yes() { "Yes" } else { "No" }.to_string(),
        image_ratios: ratios,
        detected,
    })
}

/// Simulates every instance in parallel. Output order follows the input and
/// does not depend on scheduling. Only existence instances are accepted.
pub fn simulate_suite(
    instances: &[QAInstance],
    config: &DecoderConfig,
    readout: &ReadoutModel,
    rebalance: Option<&RebalanceConfig>,
) -> Result<Vec<SimRecord>> {
    config.validate()?;
    readout.validate()?;
    if let Some(cfg) = rebalance {
        cfg.validate()?;
    }
    instances
        .par_iter()
        .map(|inst| simulate_instance(inst, config, readout, rebalance))
        .collect()
}
