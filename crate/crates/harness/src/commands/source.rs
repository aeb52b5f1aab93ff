use std::path::PathBuf;

use mihbench::{io, seed, synthetic, AnnotationPool, SimilarityMatrix, ViewGroup};
use serde::Serialize;

use crate::cli::SourceArgs;
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

pub const SYNTHETIC_IMAGES: usize = 600;
pub const SYNTHETIC_CATEGORIES: usize = 8;
pub const SYNTHETIC_OBJECTS: usize = 5;
pub const SYNTHETIC_VIEWS: usize = 8;

/// Where the raw material came from, recorded in the manifest config.
#[derive(Debug, Clone, Serialize)]
pub struct SourceSnapshot {
    pub annotations: &'static str,
    pub views: &'static str,
}

pub struct Sources {
    pub pool: AnnotationPool,
    pub groups: Vec<ViewGroup>,
    pub similarity: SimilarityMatrix,
    pub snapshot: SourceSnapshot,
    /// Files read, by role.
    pub inputs: Vec<(&'static str, PathBuf)>,
}

impl Sources {
    pub fn register(&self, manifest: &mut RunManifest) -> Result<()> {
        for (role, path) in &self.inputs {
            manifest.add_input(role, path)?;
        }
        Ok(())
    }
}

/// Loads the given files or falls back to synthetic material derived from
/// `seed`.
pub fn load(args: &SourceArgs, seed: u64) -> Result<Sources> {
    let mut inputs = Vec::new();
    let (pool, annotations) = match &args.annotations {
        Some(path) => {
            inputs.push(("annotations", path.clone()));
            (AnnotationPool::new(io::load_annotations(path)?)?, "file")
        }
        None => (
            AnnotationPool::new(synthetic::annotations(
                SYNTHETIC_IMAGES,
                seed::derive_seed(seed, "synthetic/annotations"),
            ))?,
            "synthetic",
        ),
    };
    let (groups, similarity, views) = match (&args.groups, &args.similarity) {
        (Some(g), Some(s)) => {
            inputs.push(("groups", g.clone()));
            inputs.push(("similarity", s.clone()));
            (
                io::load_view_groups(g)?,
                io::load_similarity(s, true)?,
                "file",
            )
        }
        (None, None) => {
            let (g, s) = synthetic::view_groups(
                SYNTHETIC_CATEGORIES,
                SYNTHETIC_OBJECTS,
                SYNTHETIC_VIEWS,
                seed::derive_seed(seed, "synthetic/views"),
            );
            (g, s, "synthetic")
        }
        _ => {
            return Err(HarnessError::usage(
                "--groups and --similarity must be given together",
            ))
        }
    };
    Ok(Sources {
        pool,
        groups,
        similarity,
        snapshot: SourceSnapshot { annotations, views },
        inputs,
    })
}
