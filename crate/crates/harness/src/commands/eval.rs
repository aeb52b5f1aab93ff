use std::collections::HashSet;

use mihbench::{
    io, macro_average, score_by_id, EvalReport, ExistenceSubtype, KitError, PredictionRecord,
    QAInstance, ReportRow, TaskKind,
};
use serde::{Deserialize, Serialize};

use super::{announce, prepare_dir, write_csv};
use crate::cli::EvalArgs;
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

/// One row of `report.csv`. Metrics are percentages with two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub task: String,
    pub subset: String,
    pub n: usize,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub unparseable: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub yes_ratio: f64,
    pub undefined: String,
    pub manifest: String,
}

impl ReportLine {
    pub const HEADER: &'static [&'static str] = &[
        "task",
        "subset",
        "n",
        "tp",
        "fp",
        "tn",
        "fn",
        "unparseable",
        "accuracy",
        "precision",
        "recall",
        "f1",
        "yes_ratio",
        "undefined",
        "manifest",
    ];

    pub fn new(row: &ReportRow, manifest: &str) -> Self {
        Self {
            task: row.task.clone(),
            subset: row.subset.clone(),
            n: row.n,
            tp: row.tp,
            fp: row.fp,
            tn: row.tn,
            fn_: row.fn_,
            unparseable: row.unparseable,
            accuracy: row.accuracy,
            precision: row.precision,
            recall: row.recall,
            f1: row.f1,
            yes_ratio: row.yes_ratio,
            undefined: row.undefined.clone(),
            manifest: manifest.to_string(),
        }
    }
}

#[derive(Serialize)]
struct Labeled<'a> {
    task: &'a str,
    subset: &'a str,
    report: &'a EvalReport,
}

/// Scores every instance, grouped per task. Existence is split by subtype
/// and followed by one macro-averaged row.
pub fn score_groups(
    instances: &[QAInstance],
    preds: &[PredictionRecord],
) -> Result<Vec<(String, String, EvalReport)>> {
    let known: HashSet<&str> = preds.iter().map(|p| p.instance_id.as_str()).collect();
    let missing: Vec<String> = instances
        .iter()
        .filter(|i| !known.contains(i.id.as_str()))
        .map(|i| i.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(KitError::MissingIds(missing).into());
    }

    let mut out = Vec::new();
    let existence: Vec<&QAInstance> = instances
        .iter()
        .filter(|i| i.task == TaskKind::Existence)
        .collect();
    if !existence.is_empty() {
        let mut subtype_reports = Vec::new();
        for subtype in ExistenceSubtype::ALL {
            let subset: Vec<QAInstance> = existence
                .iter()
                .filter(|i| i.subtype() == Some(subtype))
                .map(|i| (*i).clone())
                .collect();
            if subset.is_empty() {
                continue;
            }
            let report = score_by_id(&subset, preds)?;
            out.push(("existence".to_string(), subtype.to_string(), report.clone()));
            subtype_reports.push(report);
        }
        out.push((
            "existence".to_string(),
            "macro".to_string(),
            macro_average(&subtype_reports),
        ));
    }
    for task in [TaskKind::Count, TaskKind::Identity] {
        let subset: Vec<QAInstance> = instances
            .iter()
            .filter(|i| i.task == task)
            .cloned()
            .collect();
        if !subset.is_empty() {
            out.push((
                task.to_string(),
                "all".to_string(),
                score_by_id(&subset, preds)?,
            ));
        }
    }
    Ok(out)
}

pub fn eval(args: &EvalArgs) -> Result<RunManifest> {
    let mut instances: Vec<QAInstance> = Vec::new();
    let mut manifest = RunManifest::new(
        "eval",
        &serde_json::json!({ "datasets": args.datasets.len() }),
    )?;
    for (i, path) in args.datasets.iter().enumerate() {
        manifest.add_input(&format!("dataset{i}"), path)?;
        instances.extend(io::load_jsonl::<QAInstance>(path)?);
    }
    manifest.add_input("predictions", &args.predictions)?;
    let mut seen = HashSet::new();
    if let Some(dup) = instances.iter().find(|i| !seen.insert(i.id.as_str())) {
        return Err(HarnessError::data(format!(
            "instance id `{}` appears more than once",
            dup.id
        )));
    }
    let preds = io::load_predictions(&args.predictions)?;
    let groups = score_groups(&instances, &preds)?;

    prepare_dir(&args.out)?;
    let hash = manifest.hash.clone();
    let lines: Vec<ReportLine> = groups
        .iter()
        .map(|(task, subset, r)| ReportLine::new(&r.to_row(task, subset), &hash))
        .collect();
    write_csv(
        &args.out,
        "report.csv",
        &mut manifest,
        ReportLine::HEADER,
        &lines,
    )?;
    let labeled: Vec<Labeled> = groups
        .iter()
        .map(|(task, subset, report)| Labeled {
            task,
            subset,
            report,
        })
        .collect();
    let doc = serde_json::json!({ "manifest": hash, "reports": labeled });
    std::fs::write(
        args.out.join("report.json"),
        format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    manifest.outputs.push("report.json".into());
    manifest.write(&args.out)?;
    announce(&manifest)?;
    Ok(manifest)
}

pub(crate) fn read_report(path: &std::path::Path) -> Result<Vec<ReportLine>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
