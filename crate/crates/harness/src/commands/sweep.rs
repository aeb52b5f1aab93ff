//! Sweeps write one directory per point plus `sweep.csv` with the columns
//! `kind, point, x, variant, status, n, accuracy, f1, manifest`.
//!
//! `x` is the plotted value: the sequence length, the distractor position,
//! or the negative ratio `1 / (m + 1)`. `status` is `ok` or `missing`; a
//! missing point keeps its row with empty metrics.

use std::path::{Path, PathBuf};

use mihbench::{
    io, negative_ratio, sweep_image_count, sweep_negative_position, sweep_negative_ratio,
    ExistenceSubtype, IdentityInputs, QAInstance,
};
use rayon::prelude::*;
use serde::Serialize;
use toy_decoder::DetectionCurve;

use super::eval::{score_groups, ReportLine};
use super::sim::{resolve_sim_config, simulate, summarize, SimConfig};
use super::source::{self, SourceSnapshot};
use super::{announce, prepare_dir, write_csv, DEFAULT_SEED};
use crate::cli::{SweepArgs, SweepKind};
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

pub const SWEEP_HEADER: &[&str] = &[
    "kind", "point", "x", "variant", "status", "n", "accuracy", "f1", "manifest",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: String,
    pub point: usize,
    pub x: f64,
    pub variant: String,
    pub status: String,
    pub n: Option<usize>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub manifest: String,
}

impl SweepKind {
    fn name(self) -> &'static str {
        match self {
            SweepKind::ImageCount => "image-count",
            SweepKind::NegativePosition => "negative-position",
            SweepKind::NegativeRatio => "negative-ratio",
        }
    }

    fn x(self, point: usize) -> f64 {
        match self {
            SweepKind::NegativeRatio => negative_ratio(point),
            _ => point as f64,
        }
    }

    fn default_points(self, seq_len: usize) -> Vec<usize> {
        match self {
            SweepKind::ImageCount => mihbench::DEFAULT_SWEEP_LENGTHS.to_vec(),
            SweepKind::NegativePosition => (1..=seq_len).collect(),
            SweepKind::NegativeRatio => vec![1, 2, 3, 4],
        }
    }
}

#[derive(Serialize)]
struct Snapshot<'a> {
    seed: u64,
    kind: &'static str,
    points: &'a [usize],
    per_point: usize,
    seq_len: usize,
    dab: bool,
    external_predictions: bool,
    sim: &'a SimConfig,
    source: SourceSnapshot,
}

/// Simulator defaults for sweeps: a linear readout, so each extra image is
/// another chance of a miss.
fn sweep_defaults() -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.readout.curve = DetectionCurve::Linear;
    cfg
}

pub fn sweep(args: &SweepArgs, seed: Option<u64>) -> Result<RunManifest> {
    let master = seed.unwrap_or(DEFAULT_SEED);
    let points = args
        .points
        .clone()
        .unwrap_or_else(|| args.kind.default_points(args.seq_len));
    if args.per_point == 0 {
        return Err(HarnessError::usage("--per-point must be at least 1"));
    }
    let cfg = resolve_sim_config(&args.sim, seed, sweep_defaults())?;
    let sources = source::load(&args.source, master)?;
    let mut manifest = RunManifest::new(
        "sweep",
        &Snapshot {
            seed: master,
            kind: args.kind.name(),
            points: &points,
            per_point: args.per_point,
            seq_len: args.seq_len,
            dab: args.sim.dab,
            external_predictions: args.predictions_dir.is_some(),
            sim: &cfg,
            source: sources.snapshot.clone(),
        },
    )?;
    sources.register(&mut manifest)?;
    prepare_dir(&args.out)?;

    let datasets = build_points(args, &points, &sources, master)?;
    let hash = manifest.hash.clone();
    let results: Vec<Result<(Vec<SweepRow>, Vec<String>)>> = datasets
        .par_iter()
        .map(|(point, set)| run_point(args, *point, set, &cfg, &hash))
        .collect();
    let mut rows = Vec::new();
    for r in results {
        let (point_rows, outputs) = r?;
        rows.extend(point_rows);
        manifest.outputs.extend(outputs);
    }
    write_csv(&args.out, "sweep.csv", &mut manifest, SWEEP_HEADER, &rows)?;
    manifest.write(&args.out)?;
    announce(&manifest)?;
    Ok(manifest)
}

fn build_points(
    args: &SweepArgs,
    points: &[usize],
    sources: &source::Sources,
    seed: u64,
) -> Result<Vec<(usize, Vec<QAInstance>)>> {
    let identity = || IdentityInputs {
        groups: sources.groups.clone(),
        similarity: sources.similarity.clone(),
        total: args.per_point,
    };
    let mut map = match args.kind {
        SweepKind::ImageCount => sweep_image_count(
            &sources.pool,
            ExistenceSubtype::Random,
            points,
            args.per_point,
            seed,
        )?,
        SweepKind::NegativePosition => {
            if let Some(p) = points.iter().find(|&&p| p == 0 || p > args.seq_len) {
                return Err(HarnessError::usage(format!(
                    "negative position {p} is outside 1..={}",
                    args.seq_len
                )));
            }
            if points.is_empty() {
                Default::default()
            } else {
                let mut all =
                    sweep_negative_position(&identity(), args.seq_len, args.per_point, seed)?;
                all.retain(|p, _| points.contains(p));
                all
            }
        }
        SweepKind::NegativeRatio => sweep_negative_ratio(&identity(), points, seed)?,
    };
    Ok(points
        .iter()
        .filter_map(|p| map.remove(p).map(|set| (*p, set)))
        .collect())
}

fn point_dir(out: &Path, kind: SweepKind, point: usize) -> (PathBuf, String) {
    let name = match kind {
        SweepKind::ImageCount => format!("len{point}"),
        SweepKind::NegativePosition => format!("pos{point}"),
        SweepKind::NegativeRatio => format!("m{point}"),
    };
    (out.join(&name), name)
}

fn run_point(
    args: &SweepArgs,
    point: usize,
    set: &[QAInstance],
    cfg: &SimConfig,
    manifest: &str,
) -> Result<(Vec<SweepRow>, Vec<String>)> {
    let (dir, name) = point_dir(&args.out, args.kind, point);
    prepare_dir(&dir)?;
    let header = io::FileHeader::new(manifest);
    io::save_jsonl(&dir.join("dataset.jsonl"), Some(&header), set)?;
    let mut outputs = vec![format!("{name}/dataset.jsonl")];

    let row = |variant: &str, line: Option<&ReportLine>| SweepRow {
        kind: args.kind.name().to_string(),
        point,
        x: args.kind.x(point),
        variant: variant.to_string(),
        status: if line.is_some() { "ok" } else { "missing" }.to_string(),
        n: line.map(|l| l.n),
        accuracy: line.map(|l| l.accuracy),
        f1: line.map(|l| l.f1),
        manifest: manifest.to_string(),
    };

    let lines: Vec<ReportLine> = if let Some(pred_dir) = &args.predictions_dir {
        let path = pred_dir.join(format!("{point}.jsonl"));
        if !path.is_file() {
            return Ok((vec![row("external", None)], outputs));
        }
        let preds = io::load_predictions(&path)?;
        score_groups(set, &preds)?
            .into_iter()
            .filter(|(_, subset, _)| subset == "all" || subset == "macro")
            .map(|(task, _, r)| ReportLine::new(&r.to_row(&task, "external"), manifest))
            .collect()
    } else if args.kind == SweepKind::ImageCount {
        let runs = simulate(set, cfg, args.sim.dab)?;
        for (variant, records) in &runs {
            io::save_jsonl(
                &dir.join(format!("predictions-{variant}.jsonl")),
                Some(&header),
                records,
            )?;
            outputs.push(format!("{name}/predictions-{variant}.jsonl"));
        }
        summarize(set, &runs, manifest)?
    } else {
        return Ok((vec![row("external", None)], outputs));
    };

    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(dir.join("report.csv"))?;
    w.write_record(ReportLine::HEADER)?;
    for l in &lines {
        w.serialize(l)?;
    }
    w.flush()?;
    outputs.push(format!("{name}/report.csv"));
    Ok((
        lines.iter().map(|l| row(&l.subset, Some(l))).collect(),
        outputs,
    ))
}
