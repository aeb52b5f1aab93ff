use std::collections::BTreeMap;

use crate::annotation::AnnotationPool;
use crate::error::{KitError, Result};
use crate::existence::{build_existence, ExistenceOptions, NegativePlacement};
use crate::identity::{build_identity, IdentityInputs, IdentityOptions};
use crate::instance::{ExistenceSubtype, QAInstance};
use crate::seed::derive_seed;

pub const DEFAULT_SWEEP_LENGTHS: [usize; 5] = [2, 3, 4, 5, 6];

/// One balanced existence set per sequence length, with the image lacking
/// the object always last.
pub fn sweep_image_count(
    pool: &AnnotationPool,
    subtype: ExistenceSubtype,
    lengths: &[usize],
    per_length: usize,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<QAInstance>>> {
    let mut out = BTreeMap::new();
    for &len in lengths {
        if len < 2 {
            return Err(KitError::InvalidInput(format!(
                "image-count sweep: length {len} is below 2"
            )));
        }
        let options = ExistenceOptions {
            seq_len: len,
            placement: NegativePlacement::Last,
            id_prefix: Some(format!("existence-len{len}")),
        };
        let set = build_existence(
            pool,
            subtype,
            per_length.div_ceil(2),
            per_length / 2,
            &options,
            derive_seed(seed, &format!("image-count/{len}")),
        )?;
        out.insert(len, set);
    }
    Ok(out)
}

/// One identity set per distractor position `1..=seq_len`; positives are
/// generated identically for every position.
pub fn sweep_negative_position(
    inputs: &IdentityInputs,
    seq_len: usize,
    per_position: usize,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<QAInstance>>> {
    if seq_len < 2 {
        return Err(KitError::InvalidInput(format!(
            "negative-position sweep: sequence length {seq_len} is below 2"
        )));
    }
    let mut out = BTreeMap::new();
    for position in 1..=seq_len {
        let options = IdentityOptions {
            seq_len,
            negative_position: Some(position),
            id_prefix: format!("identity-pos{position}"),
        };
        let set = build_identity(
            &inputs.groups,
            &inputs.similarity,
            per_position.div_ceil(2),
            per_position / 2,
            &options,
            derive_seed(seed, &format!("negative-position/{seq_len}")),
        )?;
        out.insert(position, set);
    }
    Ok(out)
}

/// Fraction of images in a negative instance that are distractors.
pub fn negative_ratio(positives_per_instance: usize) -> f64 {
    1.0 / (positives_per_instance + 1) as f64
}

/// One identity set per `m`: negatives hold the distractor first followed
/// by `m` target views, so the negative ratio is `1 / (m + 1)`. Each set
/// has `inputs.total` instances.
pub fn sweep_negative_ratio(
    inputs: &IdentityInputs,
    positives_per_instance: &[usize],
    seed: u64,
) -> Result<BTreeMap<usize, Vec<QAInstance>>> {
    let mut out = BTreeMap::new();
    for &m in positives_per_instance {
        if m == 0 {
            return Err(KitError::InvalidInput(
                "negative-ratio sweep: m = 0 leaves a single-image instance".into(),
            ));
        }
        let options = IdentityOptions {
            seq_len: m + 1,
            negative_position: Some(1),
            id_prefix: format!("identity-m{m}"),
        };
        let set = build_identity(
            &inputs.groups,
            &inputs.similarity,
            inputs.total.div_ceil(2),
            inputs.total / 2,
            &options,
            derive_seed(seed, &format!("negative-ratio/{m}")),
        )?;
        out.insert(m, set);
    }
    Ok(out)
}
