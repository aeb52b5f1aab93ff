use serde::{Deserialize, Serialize};

use crate::config::RebalanceConfig;
use crate::error::{DabError, Result};
use crate::segments::SegmentMap;

/// Attention mass per image for one query row (or one head in aggregated
/// scope), the mean image mass, and each image's signed distance to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioVector {
    pub per_image: Vec<f64>,
    pub total_visual: f64,
    pub avg_ratio: f64,
    /// `avg_ratio - per_image[k]`; positive for under-attended images.
    pub deltas: Vec<f64>,
}

impl RatioVector {
    pub fn from_per_image(per_image: Vec<f64>) -> Self {
        let total_visual: f64 = per_image.iter().sum();
        let avg_ratio = total_visual / per_image.len() as f64;
        let deltas = per_image.iter().map(|r| avg_ratio - r).collect();
        Self {
            per_image,
            total_visual,
            avg_ratio,
            deltas,
        }
    }

    pub fn num_images(&self) -> usize {
        self.per_image.len()
    }

    /// Largest pairwise difference between per-image ratios.
    pub fn max_gap(&self) -> f64 {
        let max = self
            .per_image
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self.per_image.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub(crate) fn check_row(row: &[f64], segments: &SegmentMap) -> Result<()> {
    if row.len() != segments.keys() {
        return Err(DabError::Dimension(format!(
            "row has {} keys but segment map covers {}",
            row.len(),
            segments.keys()
        )));
    }
    if let Some((i, w)) = row
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
    {
        return Err(DabError::Domain(format!(
            "attention weight at key {i} is {w}; weights must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Per-image attention mass of a single key row.
pub fn segment_ratios(row: &[f64], segments: &SegmentMap) -> Result<RatioVector> {
    check_row(row, segments)?;
    let per_image = segments
        .image_spans()
        .iter()
        .map(|span| row[span.clone()].iter().sum())
        .collect();
    Ok(RatioVector::from_per_image(per_image))
}

/// Only rows that put more than `tau` of their mass on images are balanced.
/// The comparison is strict.
pub fn head_eligible(ratios: &RatioVector, config: &RebalanceConfig) -> bool {
    ratios.total_visual > config.tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> SegmentMap {
        SegmentMap::new(vec![0..2, 2..4], 4..5).unwrap()
    }

    #[test]
    fn worked_example() {
        let r = segment_ratios(&[0.10, 0.10, 0.30, 0.30, 0.20], &two_by_two()).unwrap();
        assert!((r.per_image[0] - 0.20).abs() < 1e-15);
        assert!((r.per_image[1] - 0.60).abs() < 1e-15);
        assert!((r.total_visual - 0.80).abs() < 1e-15);
        assert!((r.avg_ratio - 0.40).abs() < 1e-15);
        assert!((r.deltas[0] - 0.20).abs() < 1e-15);
        assert!((r.deltas[1] + 0.20).abs() < 1e-15);
        assert!(r.deltas.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn uniform_row_is_balanced() {
        let r = segment_ratios(&[0.2; 5], &two_by_two()).unwrap();
        assert!((r.per_image[0] - 0.4).abs() < 1e-15);
        assert_eq!(r.per_image[0], r.per_image[1]);
        assert_eq!(r.deltas, vec![0.0, 0.0]);
    }

    #[test]
    fn text_mass_is_excluded() {
        let r = segment_ratios(&[0.0, 0.0, 0.0, 0.0, 1.0], &two_by_two()).unwrap();
        assert_eq!(r.total_visual, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            segment_ratios(&[0.25; 4], &two_by_two()),
            Err(DabError::Dimension(_))
        ));
        assert!(matches!(
            segment_ratios(&[0.3, -0.1, 0.3, 0.3, 0.2], &two_by_two()),
            Err(DabError::Domain(_))
        ));
        assert!(matches!(
            segment_ratios(&[f64::NAN, 0.1, 0.3, 0.3, 0.2], &two_by_two()),
            Err(DabError::Domain(_))
        ));
    }

    #[test]
    fn eligibility_is_strict() {
        let cfg = RebalanceConfig::default();
        let at = |t: f64| RatioVector::from_per_image(vec![t / 2.0, t / 2.0]);
        assert!(head_eligible(&at(0.80), &cfg));
        assert!(!head_eligible(&at(0.15), &cfg));
        assert!(!head_eligible(
            &RatioVector::from_per_image(vec![0.2]),
            &cfg
        ));
    }
}
