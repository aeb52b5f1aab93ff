use mihbench::{
    build_count_set, build_existence_set, build_identity_set, rederive_gold, seed,
    ExistenceSubtype, QAInstance,
};
use serde::Serialize;

use super::source::{self, SourceSnapshot};
use super::{announce, prepare_dir, write_jsonl};
use crate::cli::GenDataArgs;
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct Snapshot {
    seed: u64,
    existence_per_subtype: usize,
    count: usize,
    identity: usize,
    source: SourceSnapshot,
}

pub fn gen_data(args: &GenDataArgs, seed: u64) -> Result<RunManifest> {
    prepare_dir(&args.out)?;
    let sources = source::load(&args.source, seed)?;
    let mut manifest = RunManifest::new(
        "gen-data",
        &Snapshot {
            seed,
            existence_per_subtype: args.existence_per_subtype,
            count: args.count,
            identity: args.identity,
            source: sources.snapshot.clone(),
        },
    )?;
    sources.register(&mut manifest)?;

    let mut existence = Vec::new();
    for subtype in ExistenceSubtype::ALL {
        existence.extend(build_existence_set(
            &sources.pool,
            subtype,
            args.existence_per_subtype,
            seed::derive_seed(seed, &format!("existence/{subtype}")),
        )?);
    }
    let count = build_count_set(&sources.pool, args.count, seed::derive_seed(seed, "count"))?;
    let identity = build_identity_set(
        &sources.groups,
        &sources.similarity,
        args.identity,
        seed::derive_seed(seed, "identity"),
    )?;

    for set in [&existence, &count, &identity] {
        check_gold(set)?;
    }
    write_jsonl(&args.out, "existence.jsonl", &mut manifest, &existence)?;
    write_jsonl(&args.out, "count.jsonl", &mut manifest, &count)?;
    write_jsonl(&args.out, "identity.jsonl", &mut manifest, &identity)?;
    manifest.write(&args.out)?;
    announce(&manifest)?;
    Ok(manifest)
}

fn check_gold(set: &[QAInstance]) -> Result<()> {
    for inst in set {
        if rederive_gold(inst)? != inst.gold {
            return Err(HarnessError::invariant(format!(
                "instance `{}`: stored gold answer disagrees with its metadata",
                inst.id
            )));
        }
    }
    Ok(())
}
