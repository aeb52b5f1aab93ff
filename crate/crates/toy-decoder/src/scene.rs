use std::collections::BTreeMap;

use mihbench::{InstanceMeta, QAInstance, TaskKind, MAX_COUNTABLE};
use serde::{Deserialize, Serialize};

use crate::error::{DecoderError, Result};

/// One image of a scene. Objects listed with count 0 are known to be absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneImage {
    /// Identity of the image. Two images with the same id and objects get
    /// the same embedding.
    pub id: String,
    pub objects: BTreeMap<String, u32>,
}

impl SceneImage {
    pub fn contains(&self, object: &str) -> bool {
        self.objects.get(object).is_some_and(|&c| c > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub images: Vec<SceneImage>,
    pub queried_object: String,
}

impl SyntheticScene {
    pub fn validate(&self) -> Result<()> {
        if self.images.len() < 2 {
            return Err(DecoderError::Scene(format!(
                "a scene needs at least 2 images, got {}",
                self.images.len()
            )));
        }
        for img in &self.images {
            if let Some((label, n)) = img.objects.iter().find(|(_, &n)| n > MAX_COUNTABLE) {
                return Err(DecoderError::Scene(format!(
                    "image `{}` holds {n} `{label}`, at most {MAX_COUNTABLE} allowed",
                    img.id
                )));
            }
        }
        if !self
            .images
            .iter()
            .any(|img| img.objects.contains_key(&self.queried_object))
        {
            return Err(DecoderError::Scene(format!(
                "queried object `{}` is not annotated in any image",
                self.queried_object
            )));
        }
        Ok(())
    }

    pub fn truth(&self) -> Vec<bool> {
        self.images
            .iter()
            .map(|img| img.contains(&self.queried_object))
            .collect()
    }

    /// Scene for an existence question: each image holds one instance of the
    /// queried object or is annotated as lacking it.
    pub fn from_instance(instance: &QAInstance) -> Result<Self> {
        let labels = match (&instance.task, &instance.meta) {
            (TaskKind::Existence, InstanceMeta::Existence { labels, .. }) => labels,
            _ => {
                return Err(DecoderError::Unsupported {
                    id: instance.id.clone(),
                    reason: format!(
                        "only existence questions can be simulated, got {}",
                        instance.task
                    ),
                })
            }
        };
        if labels.len() != instance.image_ids.len() {
            return Err(DecoderError::Scene(format!(
                "instance `{}` has {} images but {} labels",
                instance.id,
                instance.image_ids.len(),
                labels.len()
            )));
        }
        let images = instance
            .image_ids
            .iter()
            .zip(labels)
            .map(|(id, &present)| SceneImage {
                id: id.clone(),
                objects: BTreeMap::from([(instance.object.clone(), u32::from(present))]),
            })
            .collect();
        let scene = Self {
            images,
            queried_object: instance.object.clone(),
        };
        scene.validate()?;
        Ok(scene)
    }
}
