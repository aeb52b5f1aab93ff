//! Test-only reference implementation of the balancing rule and a seeded
//! generator of random attention rows. Written directly from the formulas,
//! without touching the library's kernel.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random row together with its layout.
#[derive(Debug, Clone)]
pub struct Case {
    pub row: Vec<f64>,
    pub image_lens: Vec<usize>,
    pub text_len: usize,
}

impl Case {
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for &len in &self.image_lens {
            out.push((start, start + len));
            start += len;
        }
        out
    }

    pub fn text(&self) -> (usize, usize) {
        let start: usize = self.image_lens.iter().sum();
        (start, start + self.text_len)
    }
}

/// Row-stochastic rows with at most `max_keys` keys and `max_images` images.
/// Weights are log-normal with heavy spread plus occasional exact zeros so
/// clamping is exercised.
pub fn random_case(rng: &mut ChaCha8Rng, max_keys: usize, max_images: usize) -> Case {
    let n = rng.random_range(1..=max_images);
    let text_len = rng.random_range(1..=max_keys - n);
    let mut budget = max_keys - text_len - n;
    let mut image_lens = vec![1; n];
    for len in image_lens.iter_mut() {
        let extra = rng.random_range(0..=budget.min(8));
        *len += extra;
        budget -= extra;
    }
    let keys: usize = image_lens.iter().sum::<usize>() + text_len;
    let spread = rng.random_range(0.5..3.0);
    let mut row: Vec<f64> = (0..keys)
        .map(|_| {
            if rng.random_bool(0.08) {
                0.0
            } else {
                let z: f64 = rng.random_range(-1.0..1.0) * spread * 2.0;
                z.exp()
            }
        })
        .collect();
    if row.iter().all(|w| *w == 0.0) {
        row[0] = 1.0;
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|w| *w /= s);
    Case {
        row,
        image_lens,
        text_len,
    }
}

pub fn corpus(seed: u64, count: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng, 32, 5)).collect()
}

/// Direct transcription: ratio_k = sum of image k's weights,
/// avg = sum_k ratio_k / n, delta_k = avg - ratio_k,
/// a_i <- a_i + alpha * delta_k / N_k; rows with sum_k ratio_k <= tau are
/// untouched. Negative results are zeroed and the shortfall is taken evenly
/// from the image's other unclamped tokens, repeated until none is negative.
pub fn reference_rebalance(
    row: &[f64],
    spans: &[(usize, usize)],
    alpha: f64,
    tau: f64,
) -> (Vec<f64>, usize) {
    let ratios: Vec<f64> = spans.iter().map(|&(s, e)| row[s..e].iter().sum()).collect();
    let total: f64 = ratios.iter().sum();
    if !(total > tau) {
        return (row.to_vec(), 0);
    }
    let avg = total / spans.len() as f64;
    let mut out = row.to_vec();
    let mut events = 0;
    for (k, &(s, e)) in spans.iter().enumerate() {
        let delta = avg - ratios[k];
        let n_k = (e - s) as f64;
        for a in &mut out[s..e] {
            *a += alpha * delta / n_k;
        }
        let mut clamped = vec![false; e - s];
        loop {
            let mut shortfall = 0.0;
            for (i, a) in out[s..e].iter_mut().enumerate() {
                if !clamped[i] && *a < 0.0 {
                    shortfall += -*a;
                    *a = 0.0;
                    clamped[i] = true;
                    events += 1;
                }
            }
            if shortfall == 0.0 {
                break;
            }
            let remaining = clamped.iter().filter(|c| !**c).count();
            if remaining == 0 {
                break;
            }
            for (i, a) in out[s..e].iter_mut().enumerate() {
                if !clamped[i] {
                    *a -= shortfall / remaining as f64;
                }
            }
        }
    }
    (out, events)
}

pub fn image_ratios(row: &[f64], spans: &[(usize, usize)]) -> Vec<f64> {
    spans.iter().map(|&(s, e)| row[s..e].iter().sum()).collect()
}
