use crate::config::{ClampMode, RebalanceConfig, Scope};
use crate::error::Result;
use crate::ratios::{check_row, head_eligible, segment_ratios, RatioVector};
use crate::segments::SegmentMap;
use crate::tensor::AttentionTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct RebalanceOutcome {
    pub adjusted: AttentionTensor,
    /// Eligible rows (per-row scope) or heads (aggregated scope).
    pub rows_touched: usize,
    pub rows_skipped_ineligible: usize,
    /// Tokens that had to be clamped at zero.
    pub clamp_events: usize,
    /// Largest `|sum(out_row) - sum(in_row)|` over all rows.
    pub max_row_sum_error: f64,
}

/// Balances one key row: every token of image `k` moves by
/// `alpha * delta_k / len_k`, so image `k`'s mass moves a fraction `alpha`
/// of the way toward the mean image mass. Text weights are left alone.
///
/// Returns the new row and the number of tokens that were clamped at zero.
/// Rows that put no more than `tau` of their mass on images come back
/// unchanged.
pub fn rebalance_row(
    row: &[f64],
    segments: &SegmentMap,
    config: &RebalanceConfig,
) -> Result<(Vec<f64>, usize)> {
    config.validate()?;
    let ratios = segment_ratios(row, segments)?;
    let mut out = row.to_vec();
    if config.alpha == 0.0 || !head_eligible(&ratios, config) {
        return Ok((out, 0));
    }
    let shifts = token_shifts(&ratios, segments, config.alpha);
    let clamps = apply_shifts(&mut out, &ratios, &shifts, segments, config.clamp_mode);
    Ok((out, clamps))
}

/// Applies [`rebalance_row`] semantics to every text-query row of every
/// (layer, head). The input is left untouched.
pub fn rebalance_tensor(
    tensor: &AttentionTensor,
    segments: &SegmentMap,
    config: &RebalanceConfig,
) -> Result<RebalanceOutcome> {
    config.validate()?;
    tensor.check_segments(segments)?;

    let keys = tensor.keys();
    let text_rows = tensor.text_query_rows(segments);
    let mut weights = tensor.weights().to_vec();
    let mut rows_touched = 0;
    let mut rows_skipped = 0;
    let mut clamp_events = 0;

    for layer in 0..tensor.layers() {
        for head in 0..tensor.heads() {
            match config.scope {
                Scope::PerRow => {
                    for q in text_rows.clone() {
                        let start = tensor.row_offset(layer, head, q);
                        let row = &mut weights[start..start + keys];
                        let ratios = segment_ratios(row, segments)?;
                        if !head_eligible(&ratios, config) {
                            rows_skipped += 1;
                            continue;
                        }
                        rows_touched += 1;
                        if config.alpha == 0.0 {
                            continue;
                        }
                        let shifts = token_shifts(&ratios, segments, config.alpha);
                        clamp_events +=
                            apply_shifts(row, &ratios, &shifts, segments, config.clamp_mode);
                    }
                }
                Scope::Aggregated => {
                    if text_rows.is_empty() {
                        rows_skipped += 1;
                        continue;
                    }
                    let mut row_ratios = Vec::with_capacity(text_rows.len());
                    let mut summed = vec![0.0; segments.num_images()];
                    for q in text_rows.clone() {
                        let r = segment_ratios(tensor.row(layer, head, q), segments)?;
                        for (acc, v) in summed.iter_mut().zip(&r.per_image) {
                            *acc += v;
                        }
                        row_ratios.push(r);
                    }
                    let n_text = text_rows.len() as f64;
                    let head_ratios = RatioVector::from_per_image(
                        summed.into_iter().map(|s| s / n_text).collect(),
                    );
                    if !head_eligible(&head_ratios, config) {
                        rows_skipped += 1;
                        continue;
                    }
                    rows_touched += 1;
                    if config.alpha == 0.0 {
                        continue;
                    }
                    let shifts = token_shifts(&head_ratios, segments, config.alpha);
                    for (q, ratios) in text_rows.clone().zip(&row_ratios) {
                        let start = tensor.row_offset(layer, head, q);
                        let row = &mut weights[start..start + keys];
                        clamp_events +=
                            apply_shifts(row, ratios, &shifts, segments, config.clamp_mode);
                    }
                }
            }
        }
    }

    let max_row_sum_error = tensor
        .weights()
        .chunks_exact(keys)
        .zip(weights.chunks_exact(keys))
        .map(|(a, b)| (a.iter().sum::<f64>() - b.iter().sum::<f64>()).abs())
        .fold(0.0, f64::max);

    let [l, h, q, k] = tensor.shape();
    Ok(RebalanceOutcome {
        adjusted: AttentionTensor::from_parts_unchecked(l, h, q, k, weights),
        rows_touched,
        rows_skipped_ineligible: rows_skipped,
        clamp_events,
        max_row_sum_error,
    })
}

/// Per-token additive shift for each image.
fn token_shifts(ratios: &RatioVector, segments: &SegmentMap, alpha: f64) -> Vec<f64> {
    ratios
        .deltas
        .iter()
        .zip(segments.image_spans())
        .map(|(delta, span)| alpha * delta / span.len() as f64)
        .collect()
}

/// Adds `shifts[k]` to every token of image `k` in `row`, repairing
/// negative results per `mode`. `ratios` must describe `row` as given.
fn apply_shifts(
    row: &mut [f64],
    ratios: &RatioVector,
    shifts: &[f64],
    segments: &SegmentMap,
    mode: ClampMode,
) -> usize {
    debug_assert!(check_row(row, segments).is_ok());
    match mode {
        ClampMode::ClampRedistribute => redistribute(row, ratios, shifts, segments),
        ClampMode::ClampRenormalize => renormalize(row, shifts, segments),
    }
}

fn redistribute(
    row: &mut [f64],
    ratios: &RatioVector,
    shifts: &[f64],
    segments: &SegmentMap,
) -> usize {
    let mut clamps = 0;
    let mut infeasible = false;

    for ((span, &shift), &mass) in segments
        .image_spans()
        .iter()
        .zip(shifts)
        .zip(&ratios.per_image)
    {
        let tokens = &mut row[span.clone()];
        if tokens.iter().all(|w| w + shift >= 0.0) {
            tokens.iter_mut().for_each(|w| *w += shift);
            continue;
        }

        let target = mass + shift * tokens.len() as f64;
        if target <= 0.0 {
            // Only reachable when the shift comes from another row's ratios
            // (aggregated scope). The span is emptied and visual mass is
            // restored below.
            clamps += tokens.iter().filter(|w| **w > 0.0).count();
            tokens.iter_mut().for_each(|w| *w = 0.0);
            infeasible |= target < 0.0;
            continue;
        }
        clamps += water_fill(tokens, target);
    }

    if infeasible {
        let before = ratios.total_visual;
        let after: f64 = segments
            .image_spans()
            .iter()
            .map(|s| row[s.clone()].iter().sum::<f64>())
            .sum();
        if after > 0.0 {
            let scale = before / after;
            for span in segments.image_spans() {
                row[span.clone()].iter_mut().for_each(|w| *w *= scale);
            }
        }
    }
    clamps
}

/// Lowers `tokens` by a common level so they sum to `target`, clamping at
/// zero any token the level would push negative and lowering the rest
/// further to absorb the shortfall. Returns the number of clamped tokens.
fn water_fill(tokens: &mut [f64], target: f64) -> usize {
    let mut active: Vec<usize> = (0..tokens.len()).collect();
    let mut clamped = 0;
    loop {
        let active_mass: f64 = active.iter().map(|&i| tokens[i]).sum();
        let level = (target - active_mass) / active.len() as f64;
        let (low, keep): (Vec<usize>, Vec<usize>) =
            active.iter().partition(|&&i| tokens[i] + level < 0.0);
        if low.is_empty() {
            for &i in &keep {
                tokens[i] += level;
            }
            return clamped;
        }
        clamped += low.len();
        for &i in &low {
            tokens[i] = 0.0;
        }
        if keep.is_empty() {
            return clamped;
        }
        active = keep;
    }
}

fn renormalize(row: &mut [f64], shifts: &[f64], segments: &SegmentMap) -> usize {
    let original: f64 = row.iter().sum();
    let mut clamps = 0;
    for (span, &shift) in segments.image_spans().iter().zip(shifts) {
        for w in &mut row[span.clone()] {
            *w += shift;
            if *w < 0.0 {
                *w = 0.0;
                clamps += 1;
            }
        }
    }
    if clamps > 0 {
        let now: f64 = row.iter().sum();
        if now > 0.0 {
            let scale = original / now;
            row.iter_mut().for_each(|w| *w *= scale);
        }
    }
    clamps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DabError;

    fn map() -> SegmentMap {
        SegmentMap::new(vec![0..2, 2..4], 4..5).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn half_alpha_worked_example() {
        let row = [0.10, 0.10, 0.30, 0.30, 0.20];
        let (out, clamps) = rebalance_row(&row, &map(), &RebalanceConfig::with_alpha(0.5)).unwrap();
        assert_eq!(clamps, 0);
        assert_close(&out, &[0.15, 0.15, 0.25, 0.25, 0.20], 1e-15);
        let after = segment_ratios(&out, &map()).unwrap();
        assert_close(&after.per_image, &[0.30, 0.50], 1e-15);
        assert!((after.max_gap() - 0.20).abs() < 1e-15);
        assert_eq!(out[4].to_bits(), row[4].to_bits());
    }

    #[test]
    fn zero_alpha_is_identity() {
        let row = [0.10, 0.10, 0.30, 0.30, 0.20];
        let (out, clamps) = rebalance_row(&row, &map(), &RebalanceConfig::with_alpha(0.0)).unwrap();
        assert_eq!(out, row);
        assert_eq!(clamps, 0);
    }

    #[test]
    fn clamp_redistribute_worked_example() {
        let row = [0.02, 0.00, 0.70, 0.08, 0.20];
        let (out, clamps) = rebalance_row(&row, &map(), &RebalanceConfig::with_alpha(1.0)).unwrap();
        assert_eq!(clamps, 1);
        assert_close(&out, &[0.21, 0.19, 0.40, 0.00, 0.20], 1e-15);
        assert_eq!(out[3], 0.0);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clamp_renormalize_keeps_row_sum() {
        let row = [0.02, 0.00, 0.70, 0.08, 0.20];
        let cfg = RebalanceConfig {
            alpha: 1.0,
            clamp_mode: ClampMode::ClampRenormalize,
            ..Default::default()
        };
        let (out, clamps) = rebalance_row(&row, &map(), &cfg).unwrap();
        assert_eq!(clamps, 1);
        // raw [0.21, 0.19, 0.51, 0.0, 0.20] sums to 1.11
        let expected: Vec<f64> = [0.21, 0.19, 0.51, 0.0, 0.20]
            .iter()
            .map(|w| w / 1.11)
            .collect();
        assert_close(&out, &expected, 1e-12);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cascading_clamps() {
        // image 2 must shed 0.3 but two of its three tokens are tiny
        let seg = SegmentMap::new(vec![0..1, 1..4], 4..5).unwrap();
        let row = [0.0, 0.01, 0.02, 0.57, 0.40];
        let (out, clamps) = rebalance_row(&row, &seg, &RebalanceConfig::with_alpha(1.0)).unwrap();
        assert_eq!(clamps, 2);
        assert_close(&out, &[0.30, 0.0, 0.0, 0.30, 0.40], 1e-15);
    }

    #[test]
    fn ineligible_row_is_unchanged() {
        let row = [0.05, 0.0, 0.10, 0.05, 0.80];
        let (out, clamps) = rebalance_row(&row, &map(), &RebalanceConfig::with_alpha(1.0)).unwrap();
        assert_eq!(out, row);
        assert_eq!(clamps, 0);
    }

    #[test]
    fn single_image_is_noop() {
        let seg = SegmentMap::contiguous(&[3], 2).unwrap();
        let row = [0.5, 0.2, 0.1, 0.1, 0.1];
        let (out, _) = rebalance_row(&row, &seg, &RebalanceConfig::with_alpha(1.0)).unwrap();
        assert_eq!(out, row);
    }

    #[test]
    fn row_errors() {
        let bad = RebalanceConfig::with_alpha(2.0);
        assert!(matches!(
            rebalance_row(&[0.2; 5], &map(), &bad),
            Err(DabError::Config(_))
        ));
        assert!(matches!(
            rebalance_row(&[0.25; 4], &map(), &RebalanceConfig::default()),
            Err(DabError::Dimension(_))
        ));
    }

    #[test]
    fn tensor_composes_row_kernel() {
        let row = [0.10, 0.10, 0.30, 0.30, 0.20];
        let t = AttentionTensor::from_row(&row).unwrap();
        let out = rebalance_tensor(&t, &map(), &RebalanceConfig::default()).unwrap();
        let (expected, _) = rebalance_row(&row, &map(), &RebalanceConfig::default()).unwrap();
        assert_eq!(out.adjusted.row(0, 0, 0), expected.as_slice());
        assert_eq!(out.rows_touched, 1);
        assert_eq!(out.rows_skipped_ineligible, 0);
        assert!(out.max_row_sum_error <= 1e-9);
        assert_eq!(t.row(0, 0, 0), &row);
    }

    #[test]
    fn tensor_only_touches_text_rows() {
        // full 5x5 self-attention: only query 4 is a text position
        let mut w = vec![];
        for _ in 0..4 {
            w.extend_from_slice(&[0.7, 0.1, 0.1, 0.1, 0.0]);
        }
        w.extend_from_slice(&[0.10, 0.10, 0.30, 0.30, 0.20]);
        let t = AttentionTensor::new(1, 1, 5, 5, w).unwrap();
        let out = rebalance_tensor(&t, &map(), &RebalanceConfig::default()).unwrap();
        for q in 0..4 {
            assert_eq!(out.adjusted.row(0, 0, q), t.row(0, 0, q));
        }
        assert_close(
            out.adjusted.row(0, 0, 4),
            &[0.15, 0.15, 0.25, 0.25, 0.20],
            1e-15,
        );
        assert_eq!(out.rows_touched + out.rows_skipped_ineligible, 1);
    }

    #[test]
    fn tensor_all_ineligible() {
        let row = [0.05, 0.05, 0.05, 0.05, 0.80];
        let t = AttentionTensor::new(2, 3, 1, 5, row.repeat(6)).unwrap();
        let out = rebalance_tensor(&t, &map(), &RebalanceConfig::with_alpha(1.0)).unwrap();
        assert_eq!(out.adjusted, t);
        assert_eq!(out.rows_touched, 0);
        assert_eq!(out.rows_skipped_ineligible, 6);
    }

    #[test]
    fn tensor_zero_alpha_bit_identical() {
        let row = [0.02, 0.00, 0.70, 0.08, 0.20];
        let t = AttentionTensor::new(1, 2, 1, 5, row.repeat(2)).unwrap();
        for scope in [Scope::PerRow, Scope::Aggregated] {
            let cfg = RebalanceConfig {
                alpha: 0.0,
                scope,
                ..Default::default()
            };
            let out = rebalance_tensor(&t, &map(), &cfg).unwrap();
            let bits =
                |x: &AttentionTensor| x.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&out.adjusted), bits(&t));
            assert_eq!(out.clamp_events, 0);
        }
    }

    #[test]
    fn aggregated_scope_uses_mean_text_ratios() {
        // two text rows with mirrored imbalance average to a balanced head
        let seg = SegmentMap::contiguous(&[2, 2], 2).unwrap();
        let a = [0.10, 0.10, 0.30, 0.30, 0.10, 0.10];
        let b = [0.30, 0.30, 0.10, 0.10, 0.10, 0.10];
        let mut w = a.to_vec();
        w.extend_from_slice(&b);
        let t = AttentionTensor::new(1, 1, 2, 6, w).unwrap();
        let cfg = RebalanceConfig {
            alpha: 1.0,
            scope: Scope::Aggregated,
            ..Default::default()
        };
        let out = rebalance_tensor(&t, &seg, &cfg).unwrap();
        assert_eq!(out.rows_touched, 1);
        assert_close(out.adjusted.weights(), t.weights(), 1e-15);

        // a single skewed head is shifted uniformly on all its text rows
        let t = AttentionTensor::new(1, 1, 2, 6, a.repeat(2)).unwrap();
        let out = rebalance_tensor(&t, &seg, &cfg).unwrap();
        for q in 0..2 {
            assert_close(
                out.adjusted.row(0, 0, q),
                &[0.2, 0.2, 0.2, 0.2, 0.1, 0.1],
                1e-15,
            );
        }
    }

    #[test]
    fn aggregated_infeasible_row_conserves_sum() {
        // head means: image 1 = 1.55 / 3, image 2 = 0.85 / 3, so image 1 must
        // shed ~0.117 per row, more than row 0 holds on image 1
        let seg = SegmentMap::contiguous(&[1, 1], 3).unwrap();
        let t3 = 0.2 / 3.0;
        let mut w = vec![0.05, 0.75, t3, t3, t3];
        w.extend_from_slice(&[0.75, 0.05, t3, t3, t3]);
        w.extend_from_slice(&[0.75, 0.05, t3, t3, t3]);
        let t = AttentionTensor::new(1, 1, 3, 5, w).unwrap();
        let cfg = RebalanceConfig {
            alpha: 1.0,
            scope: Scope::Aggregated,
            ..Default::default()
        };
        let out = rebalance_tensor(&t, &seg, &cfg).unwrap();
        assert_eq!(out.clamp_events, 1);
        assert!(out.max_row_sum_error <= 1e-12);
        assert_close(out.adjusted.row(0, 0, 0), &[0.0, 0.8, t3, t3, t3], 1e-12);
        assert_close(
            out.adjusted.row(0, 0, 1),
            &[0.75 - 0.35 / 3.0, 0.05 + 0.35 / 3.0, t3, t3, t3],
            1e-12,
        );
    }
}
