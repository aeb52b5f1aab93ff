use std::fs::File;
use std::io::BufWriter;

use mihbench::{seed, synthetic};
use serde::Serialize;

use super::{announce, prepare_dir, write_jsonl};
use crate::cli::SynthArgs;
use crate::error::Result;
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct Snapshot {
    seed: u64,
    images: usize,
    categories: usize,
    objects_per_category: usize,
    views: usize,
}

pub fn synth(args: &SynthArgs, seed: u64) -> Result<RunManifest> {
    prepare_dir(&args.out)?;
    let mut manifest = RunManifest::new(
        "synth",
        &Snapshot {
            seed,
            images: args.images,
            categories: args.categories,
            objects_per_category: args.objects_per_category,
            views: args.views,
        },
    )?;
    let records = synthetic::annotations(
        args.images,
        seed::derive_seed(seed, "synthetic/annotations"),
    );
    write_jsonl(&args.out, "annotations.jsonl", &mut manifest, &records)?;
    let (groups, similarity) = synthetic::view_groups(
        args.categories,
        args.objects_per_category,
        args.views,
        seed::derive_seed(seed, "synthetic/views"),
    );
    write_jsonl(&args.out, "view_groups.jsonl", &mut manifest, &groups)?;
    similarity.write_csv(BufWriter::new(File::create(
        args.out.join("similarity.csv"),
    )?))?;
    manifest.outputs.push("similarity.csv".into());
    manifest.write(&args.out)?;
    announce(&manifest)?;
    Ok(manifest)
}
