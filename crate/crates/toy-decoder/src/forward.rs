use dab_core::{AttentionTensor, SegmentMap};
use mihbench::seed;
use rand_distr::{Distribution, StandardNormal};

use crate::config::DecoderConfig;
use crate::error::Result;
use crate::scene::{SceneImage, SyntheticScene};

/// Segment layout of the token sequence: the images in order, then the
/// question text.
pub fn segments(scene: &SyntheticScene, config: &DecoderConfig) -> Result<SegmentMap> {
    let lens = vec![config.tokens_per_image; scene.images.len()];
    Ok(SegmentMap::contiguous(&lens, config.text_tokens)?)
}

fn gaussian(seed: u64, label: &str, len: usize) -> Vec<f64> {
    let mut rng = seed::rng_for(seed, label);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn image_key(img: &SceneImage) -> String {
    let objects: Vec<String> = img
        .objects
        .iter()
        .map(|(l, n)| format!("{l}={n}"))
        .collect();
    format!("{}|{}", img.id, objects.join(","))
}

fn embed(scene: &SyntheticScene, config: &DecoderConfig) -> Vec<Vec<f64>> {
    let d = config.model_dim;
    let mut hidden = Vec::new();
    for img in &scene.images {
        let key = image_key(img);
        for t in 0..config.tokens_per_image {
            hidden.push(unit(gaussian(config.seed, &format!("image/{key}/{t}"), d)));
        }
    }
    for t in 0..config.text_tokens {
        hidden.push(unit(gaussian(
            config.seed,
            &format!("text/{}/{t}", scene.queried_object),
            d,
        )));
    }
    hidden
}

/// Row-major `rows x cols` matrix times vector.
fn project(x: &[f64], w: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (i, xi) in x.iter().enumerate() {
        for (o, wij) in out.iter_mut().zip(&w[i * cols..(i + 1) * cols]) {
            *o += xi * wij;
        }
    }
    out
}

/// Runs the decoder and returns attention weights for every layer, head and
/// token (queries equal keys).
///
/// Image tokens attend to every image token, text tokens to every image
/// token and to earlier text tokens. Hidden states are the residual sum of
/// the input and the heads' outputs, rescaled to unit length.
pub fn forward(scene: &SyntheticScene, config: &DecoderConfig) -> Result<AttentionTensor> {
    config.validate()?;
    scene.validate()?;
    let seg = segments(scene, config)?;
    if let Some(k) = config.skew_target {
        if k >= scene.images.len() {
            return Err(crate::DecoderError::Config(format!(
                "skew target {k} is outside a {}-image scene",
                scene.images.len()
            )));
        }
    }
    let skewed = config.skew_target.map(|k| seg.image_span(k));
    let visual_end = seg.text_span().start;
    let n = seg.keys();
    let d = config.model_dim;
    let dk = config.head_dim();
    let scale = 1.0 / (dk as f64).sqrt();

    let mut hidden = embed(scene, config);
    let mut weights = Vec::with_capacity(config.layers * config.heads * n * n);

    for layer in 0..config.layers {
        let mut update = vec![vec![0.0; d]; n];
        for head in 0..config.heads {
            let w = |role: &str| {
                gaussian(
                    config.seed,
                    &format!("layer{layer}/head{head}/{role}"),
                    d * dk,
                )
            };
            let (wq, wk, wv) = (w("q"), w("k"), w("v"));
            let q: Vec<Vec<f64>> = hidden.iter().map(|h| project(h, &wq, dk)).collect();
            let k: Vec<Vec<f64>> = hidden.iter().map(|h| project(h, &wk, dk)).collect();
            let v: Vec<Vec<f64>> = hidden.iter().map(|h| project(h, &wv, dk)).collect();

            for i in 0..n {
                let visible = if i < visual_end { visual_end } else { i + 1 };
                let mut logits: Vec<f64> = (0..visible)
                    .map(|j| {
                        let dot: f64 = q[i].iter().zip(&k[j]).map(|(a, b)| a * b).sum();
                        let bias = match &skewed {
                            Some(span) if span.contains(&j) => config.skew,
                            _ => 0.0,
                        };
                        dot * scale + bias
                    })
                    .collect();
                let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                logits.iter_mut().for_each(|x| *x = (*x - max).exp());
                let total: f64 = logits.iter().sum();
                let row_start = weights.len();
                weights.extend(logits.iter().map(|x| x / total));
                weights.resize(row_start + n, 0.0);

                let out = &mut update[i][head * dk..(head + 1) * dk];
                for (j, a) in weights[row_start..row_start + visible].iter().enumerate() {
                    for (o, vj) in out.iter_mut().zip(&v[j]) {
                        *o += a * vj;
                    }
                }
            }
        }
        for (h, u) in hidden.iter_mut().zip(update) {
            let sum: Vec<f64> = h.iter().zip(&u).map(|(a, b)| a + b).collect();
            *h = unit(sum);
        }
    }
    Ok(AttentionTensor::new(
        config.layers,
        config.heads,
        n,
        n,
        weights,
    )?)
}
