use std::collections::BTreeMap;

use dab_core::{rebalance_tensor, segment_ratios, RebalanceConfig};
use mihbench::{
    build_existence, compute_metrics, synthetic, AnnotationPool, Answer, ExistenceOptions,
    ExistenceSubtype, QAInstance,
};
use proptest::prelude::*;
use toy_decoder::{
    answer_existence, forward, mean_image_ratios, segments, simulate_suite, DecoderConfig,
    DetectionCurve, LayerSelection, ReadoutModel, SceneImage, SimRecord, SyntheticScene,
};

fn image(id: &str, object: &str, count: u32) -> SceneImage {
    SceneImage {
        id: id.into(),
        objects: BTreeMap::from([(object.to_string(), count)]),
    }
}

fn scene(ids: &[&str], present: &[bool]) -> SyntheticScene {
    SyntheticScene {
        images: ids
            .iter()
            .zip(present)
            .map(|(id, p)| image(id, "dog", u32::from(*p)))
            .collect(),
        queried_object: "dog".into(),
    }
}

fn skewed(skew: f64, target: usize) -> DecoderConfig {
    DecoderConfig {
        skew,
        skew_target: Some(target),
        ..DecoderConfig::default()
    }
}

fn suite(len: usize, count: usize, seed: u64) -> Vec<QAInstance> {
    let pool = AnnotationPool::new(synthetic::annotations(600, 11)).unwrap();
    let options = ExistenceOptions {
        seq_len: len,
        ..ExistenceOptions::default()
    };
    build_existence(
        &pool,
        ExistenceSubtype::Random,
        count.div_ceil(2),
        count / 2,
        &options,
        seed,
    )
    .unwrap()
}

fn accuracy(instances: &[QAInstance], records: &[SimRecord]) -> f64 {
    let preds: Vec<_> = records.iter().map(SimRecord::prediction).collect();
    let gold: Vec<_> = instances.iter().map(|i| i.gold).collect();
    compute_metrics(&preds, &gold).unwrap().accuracy
}

fn misses(instances: &[QAInstance], records: &[SimRecord]) -> usize {
    instances
        .iter()
        .zip(records)
        .filter(|(i, r)| i.gold == Answer::Yes && r.raw_text == "No")
        .count()
}

#[test]
fn identical_images_get_equal_attention() {
    let scene = scene(&["same", "same"], &[true, true]);
    let config = DecoderConfig::default();
    let seg = segments(&scene, &config).unwrap();
    let tensor = forward(&scene, &config).unwrap();
    for l in 0..tensor.layers() {
        for h in 0..tensor.heads() {
            for q in tensor.text_query_rows(&seg) {
                let r = segment_ratios(tensor.row(l, h, q), &seg).unwrap();
                assert!((r.per_image[0] - r.per_image[1]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn skew_favors_target_on_every_text_row() {
    let scene = scene(&["a", "b"], &[true, true]);
    let config = skewed(4.0, 1);
    let seg = segments(&scene, &config).unwrap();
    let tensor = forward(&scene, &config).unwrap();
    for l in 0..tensor.layers() {
        for h in 0..tensor.heads() {
            for q in tensor.text_query_rows(&seg) {
                let r = segment_ratios(tensor.row(l, h, q), &seg).unwrap();
                assert!(
                    r.per_image[1] > r.per_image[0],
                    "layer {l} head {h} row {q}"
                );
            }
        }
    }
}

#[test]
fn forward_is_deterministic() {
    let scene = scene(&["a", "b", "c"], &[true, false, true]);
    let config = skewed(2.0, 0);
    assert_eq!(
        forward(&scene, &config).unwrap(),
        forward(&scene, &config).unwrap()
    );
    let other = DecoderConfig {
        seed: 1,
        ..config.clone()
    };
    assert_ne!(
        forward(&scene, &config).unwrap(),
        forward(&scene, &other).unwrap()
    );
}

#[test]
fn skew_weakly_starves_other_images() {
    let scene = scene(&["a", "b", "c"], &[true, true, true]);
    for layers in [LayerSelection::Final, LayerSelection::All] {
        let others: Vec<f64> = [0.0, 1.0, 2.0, 4.0]
            .iter()
            .map(|&s| {
                let config = skewed(s, 1);
                let seg = segments(&scene, &config).unwrap();
                let r =
                    mean_image_ratios(&forward(&scene, &config).unwrap(), &seg, layers).unwrap();
                r[0] + r[2]
            })
            .collect();
        assert!(others.windows(2).all(|w| w[1] <= w[0]), "{others:?}");
    }
}

#[test]
fn starved_image_is_missed_until_rebalanced() {
    let scene = scene(&["a", "b", "c"], &[true, true, true]);
    let config = skewed(4.0, 1);
    let seg = segments(&scene, &config).unwrap();
    let readout = ReadoutModel::step();
    let tensor = forward(&scene, &config).unwrap();
    assert_eq!(
        answer_existence(&tensor, &seg, &scene, &readout, 0).unwrap(),
        Answer::No
    );
    let fixed = rebalance_tensor(&tensor, &seg, &RebalanceConfig::with_alpha(1.0)).unwrap();
    assert_eq!(
        answer_existence(&fixed.adjusted, &seg, &scene, &readout, 0).unwrap(),
        Answer::Yes
    );
}

#[test]
fn certain_curve_answers_yes_when_present() {
    let scene = scene(&["a", "b", "c"], &[true, true, true]);
    let config = DecoderConfig::default();
    let seg = segments(&scene, &config).unwrap();
    let readout = ReadoutModel::with_curve(DetectionCurve::Certain);
    let tensor = forward(&scene, &config).unwrap();
    assert_eq!(
        answer_existence(&tensor, &seg, &scene, &readout, 3).unwrap(),
        Answer::Yes
    );
}

#[test]
fn unknown_object_is_rejected() {
    let mut scene = scene(&["a", "b"], &[true, true]);
    let config = DecoderConfig::default();
    let seg = segments(&scene, &config).unwrap();
    let tensor = forward(&scene, &config).unwrap();
    scene.queried_object = "unicorn".into();
    assert!(answer_existence(&tensor, &seg, &scene, &ReadoutModel::step(), 0).is_err());
}

#[test]
fn invalid_configs() {
    let scene = scene(&["a", "b"], &[true, true]);
    for config in [
        DecoderConfig {
            heads: 3,
            ..DecoderConfig::default()
        },
        DecoderConfig {
            layers: 0,
            ..DecoderConfig::default()
        },
        DecoderConfig {
            skew: -1.0,
            ..DecoderConfig::default()
        },
        skewed(1.0, 2),
    ] {
        assert!(forward(&scene, &config).is_err(), "{config:?}");
    }
    let mut big = scene.clone();
    big.images[0].objects.insert("dog".into(), 4);
    assert!(forward(&big, &DecoderConfig::default()).is_err());
}

#[test]
fn empty_suite() {
    let out = simulate_suite(&[], &DecoderConfig::default(), &ReadoutModel::step(), None).unwrap();
    assert!(out.is_empty());
}

#[test]
fn noiseless_ceiling() {
    let instances = suite(3, 100, 1);
    let readout = ReadoutModel::with_curve(DetectionCurve::Certain);
    let out = simulate_suite(&instances, &DecoderConfig::default(), &readout, None).unwrap();
    assert_eq!(accuracy(&instances, &out), 1.0);
}

#[test]
fn rebalancing_helps_under_skew() {
    let instances = suite(3, 800, 2);
    let config = skewed(4.0, 1);
    let readout = ReadoutModel::step();
    let base = simulate_suite(&instances, &config, &readout, None).unwrap();
    let half = simulate_suite(
        &instances,
        &config,
        &readout,
        Some(&RebalanceConfig::default()),
    )
    .unwrap();
    let full = simulate_suite(
        &instances,
        &config,
        &readout,
        Some(&RebalanceConfig::with_alpha(1.0)),
    )
    .unwrap();
    assert!(accuracy(&instances, &half) >= accuracy(&instances, &base));
    assert!(misses(&instances, &full) < misses(&instances, &base));
    assert!(misses(&instances, &full) <= misses(&instances, &half));
}

#[test]
fn zero_alpha_matches_baseline() {
    let instances = suite(4, 60, 3);
    let config = skewed(2.0, 0);
    let readout = ReadoutModel::with_curve(DetectionCurve::Linear);
    let base = simulate_suite(&instances, &config, &readout, None).unwrap();
    let zero = simulate_suite(
        &instances,
        &config,
        &readout,
        Some(&RebalanceConfig::with_alpha(0.0)),
    )
    .unwrap();
    assert_eq!(base, zero);
}

#[test]
fn suite_is_deterministic_and_ordered() {
    let instances = suite(3, 50, 4);
    let config = skewed(1.0, 0);
    let readout = ReadoutModel::with_curve(DetectionCurve::Linear);
    let a = simulate_suite(&instances, &config, &readout, None).unwrap();
    let b = simulate_suite(&instances, &config, &readout, None).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().zip(&instances).all(|(r, i)| r.instance_id == i.id));
}

#[test]
fn longer_sequences_are_not_easier() {
    let config = DecoderConfig::default();
    let readout = ReadoutModel::with_curve(DetectionCurve::Linear);
    let acc = |len| {
        let instances = suite(len, 200, 5);
        accuracy(
            &instances,
            &simulate_suite(&instances, &config, &readout, None).unwrap(),
        )
    };
    let (short, long) = (acc(2), acc(6));
    assert!(long <= short, "length 2: {short}, length 6: {long}");
}

#[test]
fn serde_round_trip() {
    let scene = scene(&["a", "b"], &[true, false]);
    let text = serde_json::to_string(&scene).unwrap();
    assert_eq!(
        serde_json::from_str::<SyntheticScene>(&text).unwrap(),
        scene
    );
    let config: DecoderConfig = serde_json::from_str(r#"{"skew": 4.0, "skew_target": 1}"#).unwrap();
    assert_eq!(config, skewed(4.0, 1));
    let readout: ReadoutModel = serde_json::from_str(r#"{"curve": {"kind": "linear"}}"#).unwrap();
    assert_eq!(readout.curve, DetectionCurve::Linear);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn absent_objects_are_never_detected(
        present in prop::collection::vec(any::<bool>(), 2..5),
        skew in 0.0f64..6.0,
        seed in any::<u64>(),
        curve in prop::sample::select(vec![DetectionCurve::Step, DetectionCurve::Linear, DetectionCurve::Certain]),
    ) {
        let ids: Vec<String> = (0..present.len()).map(|i| format!("img{i}")).collect();
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        let scene = scene(&ids, &present);
        let config = DecoderConfig { seed, ..skewed(skew, 0) };
        let seg = segments(&scene, &config).unwrap();
        let tensor = forward(&scene, &config).unwrap();
        let ratios = mean_image_ratios(&tensor, &seg, LayerSelection::All).unwrap();
        let detected = toy_decoder::detect(&ratios, &scene, &ReadoutModel::with_curve(curve), seed).unwrap();
        for (d, p) in detected.iter().zip(&present) {
            prop_assert!(!d || *p);
        }
        let answer = answer_existence(&tensor, &seg, &scene, &ReadoutModel::with_curve(curve), seed).unwrap();
        if present.iter().any(|p| !p) {
            prop_assert_eq!(answer, Answer::No);
        }
    }
}
