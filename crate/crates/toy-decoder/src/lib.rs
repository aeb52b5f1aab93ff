//! A toy multi-image decoder for exercising attention rebalancing end to end.
//!
//! Images and question text become pseudo-random unit vectors, a few layers
//! of untrained multi-head attention run over them, and an optional skew
//! pulls attention toward one image. A readout then turns each image's share
//! of the attention into a simulated detection, so an image that is starved
//! of attention can be "missed" even though it shows the object.
//!
//! Nothing here models a real language model. Skew magnitudes are synthetic.
//!
//! ```
//! use toy_decoder::{forward, segments, DecoderConfig, SceneImage, SyntheticScene};
//! use std::collections::BTreeMap;
//!
//! let image = |id: &str| SceneImage { id: id.into(), objects: BTreeMap::from([("dog".into(), 1)]) };
//! let scene = SyntheticScene { images: vec![image("a"), image("b")], queried_object: "dog".into() };
//! let config = DecoderConfig { skew: 4.0, skew_target: Some(1), ..DecoderConfig::default() };
//! let tensor = forward(&scene, &config).unwrap();
//! assert_eq!(tensor.keys(), segments(&scene, &config).unwrap().keys());
//! ```

mod config;
mod error;
mod forward;
mod readout;
mod scene;
mod simulate;

pub use config::DecoderConfig;
pub use error::{DecoderError, Result};
pub use forward::{forward, segments};
pub use readout::{
    answer_existence, detect, mean_image_ratios, normalized_shares, DetectionCurve, LayerSelection,
    ReadoutModel,
};
pub use scene::{SceneImage, SyntheticScene};
pub use simulate::{simulate_instance, simulate_suite, SimRecord};
