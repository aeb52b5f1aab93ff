//! Seeded stand-ins for detector annotations, multi-view groups and their
//! similarity matrix. Useful for demos and tests; the statistics are made up.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::annotation::{AnnotationRecord, ObjectAnnotation};
use crate::identity::ViewGroup;
use crate::seed;
use crate::similarity::SimilarityMatrix;

const THEMES: [&[&str]; 4] = [
    &[
        "bicycle",
        "bus",
        "car",
        "motorcycle",
        "stop sign",
        "traffic light",
    ],
    &["bottle", "bowl", "cup", "knife", "oven", "spoon"],
    &["bird", "cat", "cow", "dog", "horse", "sheep"],
    &[
        "airplane",
        "bench",
        "elephant",
        "kite",
        "surfboard",
        "umbrella",
    ],
];

/// `images` annotation records. Each image draws a theme whose objects
/// appear often, other objects appear rarely, and "person" is common
/// everywhere. Some objects are detected below the presence threshold and
/// some appear more than three times.
pub fn annotations(images: usize, seed: u64) -> Vec<AnnotationRecord> {
    let mut rng = seed::rng_for(seed, "synthetic/annotations");
    (0..images)
        .map(|i| {
            let theme = rng.random_range(0..THEMES.len());
            let mut objects = BTreeMap::new();
            let mut add = |rng: &mut rand_chacha::ChaCha8Rng, label: &str, p: f64| {
                if rng.random_bool(p) {
                    let count = match rng.random_range(0..100) {
                        0..45 => 1,
                        45..70 => 2,
                        70..85 => 3,
                        85..95 => 4,
                        _ => 5,
                    };
                    objects.insert(
                        label.to_string(),
                        ObjectAnnotation {
                            confidence: rng.random_range(0.5..1.0),
                            count,
                        },
                    );
                } else if rng.random_bool(0.06) {
                    objects.insert(
                        label.to_string(),
                        ObjectAnnotation {
                            confidence: rng.random_range(0.1..0.5),
                            count: 0,
                        },
                    );
                }
            };
            add(&mut rng, "person", 0.5);
            for (t, labels) in THEMES.iter().enumerate() {
                let p = if t == theme { 0.5 } else { 0.05 };
                for label in labels.iter() {
                    add(&mut rng, label, p);
                }
            }
            AnnotationRecord {
                image_id: format!("coco_val2014_{i:06}"),
                objects,
            }
        })
        .collect()
}

/// `objects_per_category` objects in each of `categories` categories, each
/// with `views` frames, plus a symmetric cosine-similarity matrix over all
/// frames. Frames of one object are most alike, then frames of the same
/// category.
pub fn view_groups(
    categories: usize,
    objects_per_category: usize,
    views: usize,
    seed: u64,
) -> (Vec<ViewGroup>, SimilarityMatrix) {
    const DIM: usize = 16;
    let names: Vec<&str> = THEMES.iter().flat_map(|t| t.iter().copied()).collect();
    let mut rng = seed::rng_for(seed, "synthetic/views");
    let gauss = |scale: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..DIM)
            .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect()
    };

    let mut groups = Vec::new();
    let mut ids = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for c in 0..categories {
        let category = names[c % names.len()].to_string();
        let center = gauss(1.0, &mut rng);
        for o in 0..objects_per_category {
            let object_id = format!("{}_{o:03}", category.replace(' ', "_"));
            let offset = gauss(0.6, &mut rng);
            let mut frames = Vec::with_capacity(views);
            for v in 0..views {
                let noise = gauss(0.35, &mut rng);
                let vec: Vec<f64> = (0..DIM).map(|d| center[d] + offset[d] + noise[d]).collect();
                let id = format!("co3d/{object_id}/frame{v:03}");
                frames.push(id.clone());
                ids.push(id);
                vectors.push(vec);
            }
            groups.push(ViewGroup {
                object_id,
                category: category.clone(),
                views: frames,
            });
        }
    }

    let norms: Vec<f64> = vectors
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let n = ids.len();
    let mut scores = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            // rounded so the CSV form is short and exactly symmetric
            let s = (dot / (norms[i] * norms[j]) * 1e6).round() / 1e6;
            scores[i * n + j] = s;
            scores[j * n + i] = s;
        }
    }
    let sim = SimilarityMatrix::new(ids, scores, true).expect("constructed symmetric");
    (groups, sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::AnnotationPool;

    #[test]
    fn deterministic() {
        assert_eq!(annotations(20, 3), annotations(20, 3));
        assert_ne!(annotations(20, 3), annotations(20, 4));
        let (g1, s1) = view_groups(3, 2, 5, 1);
        let (g2, s2) = view_groups(3, 2, 5, 1);
        assert_eq!(g1, g2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn pool_is_usable() {
        let pool = AnnotationPool::new(annotations(200, 0)).unwrap();
        assert!(pool.vocabulary().len() >= 20);
        let (groups, sim) = view_groups(4, 3, 8, 0);
        assert_eq!(groups.len(), 12);
        let a = &groups[0].views;
        let other = &groups[11].views[0];
        assert!(sim.score(&a[0], &a[1]).unwrap() > sim.score(&a[0], other).unwrap());
    }
}
