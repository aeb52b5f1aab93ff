use dab_core::{segment_ratios, AttentionTensor, SegmentMap};
use mihbench::{seed, Answer};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DecoderError, Result};
use crate::scene::SyntheticScene;

/// Maps an image's normalized attention share to a detection probability.
///
/// The input is `n * r_k / sum(r)`, capped at 1: 1 means the image got at
/// least its fair share of the visual attention, 0.5 half of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DetectionCurve {
    /// 1 at or above `decision_threshold`, 0 below.
    Step,
    /// The share itself.
    Linear,
    /// 1 for any attention at all.
    Certain,
}

/// Which layers of the tensor feed the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerSelection {
    #[default]
    Final,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadoutModel {
    pub curve: DetectionCurve,
    pub decision_threshold: f64,
    pub layers: LayerSelection,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            curve: DetectionCurve::Step,
            decision_threshold: 0.5,
            layers: LayerSelection::Final,
        }
    }
}

impl ReadoutModel {
    pub fn step() -> Self {
        Self::default()
    }

    pub fn with_curve(curve: DetectionCurve) -> Self {
        Self {
            curve,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(DecoderError::Readout(format!(
                "decision threshold must lie in (0, 1), got {}",
                self.decision_threshold
            )));
        }
        Ok(())
    }

    pub fn probability(&self, share: f64) -> f64 {
        let x = share.clamp(0.0, 1.0);
        match self.curve {
            DetectionCurve::Step => f64::from(u8::from(x >= self.decision_threshold)),
            DetectionCurve::Linear => x,
            DetectionCurve::Certain => f64::from(u8::from(x > 0.0)),
        }
    }
}

/// Mean attention ratio of each image over the text rows of the selected
/// layers and all heads.
pub fn mean_image_ratios(
    tensor: &AttentionTensor,
    segments: &SegmentMap,
    layers: LayerSelection,
) -> Result<Vec<f64>> {
    tensor.check_segments(segments)?;
    let first = match layers {
        LayerSelection::Final => tensor.layers() - 1,
        LayerSelection::All => 0,
    };
    let rows = tensor.text_query_rows(segments);
    let mut sums = vec![0.0; segments.num_images()];
    let mut count = 0usize;
    for l in first..tensor.layers() {
        for h in 0..tensor.heads() {
            for q in rows.clone() {
                let r = segment_ratios(tensor.row(l, h, q), segments)?;
                for (s, v) in sums.iter_mut().zip(&r.per_image) {
                    *s += v;
                }
                count += 1;
            }
        }
    }
    let count = count.max(1) as f64;
    Ok(sums.into_iter().map(|s| s / count).collect())
}

/// Each image's share of the visual attention relative to a fair share,
/// `n * r_k / sum(r)`. All zeros when no attention reaches the images.
pub fn normalized_shares(ratios: &[f64]) -> Vec<f64> {
    let total: f64 = ratios.iter().sum();
    let n = ratios.len() as f64;
    ratios
        .iter()
        .map(|r| if total > 0.0 { n * r / total } else { 0.0 })
        .collect()
}

/// Simulated yes/no answer to "is the object in every image?".
///
/// An image counts as showing the object only if it really does and a
/// seeded draw succeeds with the curve's probability, so absent objects are
/// never reported.
pub fn answer_existence(
    tensor: &AttentionTensor,
    segments: &SegmentMap,
    scene: &SyntheticScene,
    readout: &ReadoutModel,
    seed: u64,
) -> Result<Answer> {
    let ratios = mean_image_ratios(tensor, segments, readout.layers)?;
    detect(&ratios, scene, readout, seed).map(|d| Answer::from_bool(d.iter().all(|x| *x)))
}

/// Per-image detection outcomes given mean image ratios.
pub fn detect(
    ratios: &[f64],
    scene: &SyntheticScene,
    readout: &ReadoutModel,
    seed: u64,
) -> Result<Vec<bool>> {
    readout.validate()?;
    scene.validate()?;
    if ratios.len() != scene.images.len() {
        return Err(DecoderError::Scene(format!(
            "{} image ratios for a {}-image scene",
            ratios.len(),
            scene.images.len()
        )));
    }
    let mut rng = seed::rng_for(seed, "detect");
    Ok(normalized_shares(ratios)
        .into_iter()
        .zip(scene.truth())
        .map(|(share, present)| {
            let p = readout.probability(share);
            // one draw per image keeps later images' draws independent of
            // earlier outcomes
            let u: f64 = rng.random();
            present && u < p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_start_at_zero_and_are_monotone() {
        for curve in [
            DetectionCurve::Step,
            DetectionCurve::Linear,
            DetectionCurve::Certain,
        ] {
            let r = ReadoutModel::with_curve(curve);
            assert_eq!(r.probability(0.0), 0.0);
            assert!(r.probability(1.0) <= 1.0);
            let grid: Vec<f64> = (0..=100).map(|i| r.probability(i as f64 / 100.0)).collect();
            assert!(grid.windows(2).all(|w| w[0] <= w[1]), "{curve:?}");
        }
    }

    #[test]
    fn step_at_half_fair_share() {
        let r = ReadoutModel::step();
        assert_eq!(r.probability(0.5), 1.0);
        assert_eq!(r.probability(0.4999), 0.0);
    }

    #[test]
    fn shares() {
        assert_eq!(normalized_shares(&[0.2, 0.2]), vec![1.0, 1.0]);
        assert_eq!(normalized_shares(&[0.25, 0.75]), vec![0.5, 1.5]);
        assert_eq!(normalized_shares(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn threshold_range() {
        let mut r = ReadoutModel::step();
        r.decision_threshold = 1.0;
        assert!(r.validate().is_err());
    }
}
