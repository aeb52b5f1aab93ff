use std::path::{Path, PathBuf};

use mihbench::{correlation_analysis, io, HallucinationFlags};

use super::eval::read_report;
use super::{announce, prepare_dir};
use crate::cli::{ReportArgs, ReportCommand};
use crate::error::{HarnessError, Result};
use crate::manifest::RunManifest;

pub fn report(args: &ReportArgs) -> Result<RunManifest> {
    match &args.command {
        ReportCommand::Compare { inputs, out } => compare(inputs, out),
        ReportCommand::Correlation { single, joint, out } => correlation(single, joint, out),
    }
}

/// `compare.csv`: one row per (task, subset) in first-seen order, with
/// `<label>_accuracy` and `<label>_f1` columns per input. Cells are empty
/// where an input lacks the row.
fn compare(inputs: &[String], out: &Path) -> Result<RunManifest> {
    let mut labeled = Vec::new();
    for input in inputs {
        let (label, path) = input.split_once('=').ok_or_else(|| {
            HarnessError::usage(format!("--input `{input}` is not of the form label=path"))
        })?;
        labeled.push((label.to_string(), PathBuf::from(path)));
    }
    let labels: Vec<&str> = labeled.iter().map(|(l, _)| l.as_str()).collect();
    let mut manifest =
        RunManifest::new("report compare", &serde_json::json!({ "labels": labels }))?;
    let mut tables = Vec::new();
    for (label, path) in &labeled {
        manifest.add_input(label, path)?;
        tables.push(read_report(path)?);
    }

    let mut keys: Vec<(String, String)> = Vec::new();
    for t in &tables {
        for line in t {
            let key = (line.task.clone(), line.subset.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }

    prepare_dir(out)?;
    let mut w = csv::Writer::from_path(out.join("compare.csv"))?;
    let mut header = vec!["task".to_string(), "subset".to_string()];
    for (label, _) in &labeled {
        header.push(format!("{label}_accuracy"));
        header.push(format!("{label}_f1"));
    }
    header.push("manifest".into());
    w.write_record(&header)?;
    for (task, subset) in &keys {
        let mut record = vec![task.clone(), subset.clone()];
        for t in &tables {
            match t.iter().find(|l| &l.task == task && &l.subset == subset) {
                Some(l) => {
                    record.push(format!("{:.2}", l.accuracy));
                    record.push(format!("{:.2}", l.f1));
                }
                None => record.extend([String::new(), String::new()]),
            }
        }
        record.push(manifest.hash.clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    manifest.outputs.push("compare.csv".into());
    manifest.write(out)?;
    announce(&manifest)?;
    Ok(manifest)
}

fn correlation(single: &Path, joint: &Path, out: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("report correlation", &())?;
    manifest.add_input("single", single)?;
    manifest.add_input("joint", joint)?;
    let s: Vec<HallucinationFlags> = io::load_jsonl(single)?;
    let j: Vec<HallucinationFlags> = io::load_jsonl(joint)?;
    let report = correlation_analysis(&s, &j)?;
    prepare_dir(out)?;
    let doc = serde_json::json!({ "manifest": manifest.hash, "correlation": report });
    std::fs::write(
        out.join("correlation.json"),
        format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    manifest.outputs.push("correlation.json".into());
    manifest.write(out)?;
    announce(&manifest)?;
    Ok(manifest)
}
