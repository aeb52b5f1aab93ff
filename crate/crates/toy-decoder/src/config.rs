use serde::{Deserialize, Serialize};

use crate::error::{DecoderError, Result};

/// Shape and seed of the toy decoder.
///
/// `skew` is added to the pre-softmax logits of every key in image
/// `skew_target` (0-based), in every layer and head. With `skew_target`
/// unset the skew is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub tokens_per_image: usize,
    pub text_tokens: usize,
    pub seed: u64,
    pub skew: f64,
    pub skew_target: Option<usize>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            heads: 2,
            model_dim: 16,
            tokens_per_image: 8,
            text_tokens: 6,
            seed: 0,
            skew: 0.0,
            skew_target: None,
        }
    }
}

impl DecoderConfig {
    pub fn head_dim(&self) -> usize {
        self.model_dim / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("layers", self.layers),
            ("heads", self.heads),
            ("model_dim", self.model_dim),
            ("tokens_per_image", self.tokens_per_image),
            ("text_tokens", self.text_tokens),
        ] {
            if v == 0 {
                return Err(DecoderError::Config(format!("{name} must be at least 1")));
            }
        }
        if !self.model_dim.is_multiple_of(self.heads) {
            return Err(DecoderError::Config(format!(
                "model_dim {} is not divisible by {} heads",
                self.model_dim, self.heads
            )));
        }
        if !(self.skew.is_finite() && self.skew >= 0.0) {
            return Err(DecoderError::Config(format!(
                "skew must be finite and >= 0, got {}",
                self.skew
            )));
        }
        Ok(())
    }
}
