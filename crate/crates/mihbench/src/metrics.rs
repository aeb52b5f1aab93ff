use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::answer::{ParsedAnswer, PredictionRecord};
use crate::error::{KitError, Result};
use crate::instance::{Answer, QAInstance};

/// Confusion counts and the five summary metrics, as fractions in [0, 1].
///
/// "Yes" is the positive class. An unparseable answer is always wrong: it
/// counts as a false negative when the gold answer is yes and as a plain
/// miss (neither `fp` nor `tn`) when the gold answer is no. Metrics whose
/// denominator is zero are reported as 0 and named in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
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
    pub undefined: Vec<String>,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize, unparseable_no: usize) -> Self {
        let total = tp + fp + tn + fn_ + unparseable_no;
        let mut undefined = Vec::new();
        let mut ratio = |num: usize, den: usize, name: &str| {
            if den == 0 {
                undefined.push(name.to_string());
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let accuracy = ratio(tp + tn, total, "accuracy");
        let precision = ratio(tp, tp + fp, "precision");
        let recall = ratio(tp, tp + fn_, "recall");
        let yes_ratio = ratio(tp + fp, total, "yes_ratio");
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            undefined.push("f1".to_string());
            0.0
        };
        Self {
            total,
            tp,
            fp,
            tn,
            fn_,
            unparseable: 0,
            accuracy,
            precision,
            recall,
            f1,
            yes_ratio,
            undefined,
        }
    }

    /// Percent-scaled row rounded to two decimals.
    pub fn to_row(&self, task: &str, subset: &str) -> ReportRow {
        ReportRow {
            task: task.to_string(),
            subset: subset.to_string(),
            n: self.total,
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
            unparseable: self.unparseable,
            accuracy: percent(self.accuracy),
            precision: percent(self.precision),
            recall: percent(self.recall),
            f1: percent(self.f1),
            yes_ratio: percent(self.yes_ratio),
            undefined: self.undefined.join(";"),
        }
    }
}

/// `x` in [0, 1] as a percentage with two decimals.
pub fn percent(x: f64) -> f64 {
    (x * 10_000.0).round() / 100.0
}

/// One line of a serialized report. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
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
}

/// Scores predictions against gold answers of the same order.
pub fn compute_metrics(preds: &[PredictionRecord], gold: &[Answer]) -> Result<EvalReport> {
    if preds.len() != gold.len() {
        return Err(KitError::LengthMismatch {
            left: preds.len(),
            right: gold.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_, mut miss_no, mut unparseable) = (0, 0, 0, 0, 0, 0);
    for (p, g) in preds.iter().zip(gold) {
        match (p.parsed, g) {
            (ParsedAnswer::Yes, Answer::Yes) => tp += 1,
            (ParsedAnswer::Yes, Answer::No) => fp += 1,
            (ParsedAnswer::No, Answer::No) => tn += 1,
            (ParsedAnswer::No, Answer::Yes) => fn_ += 1,
            (ParsedAnswer::Unparseable, Answer::Yes) => {
                fn_ += 1;
                unparseable += 1;
            }
            (ParsedAnswer::Unparseable, Answer::No) => {
                miss_no += 1;
                unparseable += 1;
            }
        }
    }
    let mut report = EvalReport::from_counts(tp, fp, tn, fn_, miss_no);
    report.unparseable = unparseable;
    Ok(report)
}

/// Aligns predictions to instances by id and scores them. Every instance
/// needs a prediction; predictions for unknown ids are ignored.
pub fn score_by_id(instances: &[QAInstance], preds: &[PredictionRecord]) -> Result<EvalReport> {
    let by_id: HashMap<&str, &PredictionRecord> =
        preds.iter().map(|p| (p.instance_id.as_str(), p)).collect();
    let mut aligned = Vec::with_capacity(instances.len());
    let mut missing = Vec::new();
    for inst in instances {
        match by_id.get(inst.id.as_str()) {
            Some(p) => aligned.push((*p).clone()),
            None => missing.push(inst.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(KitError::MissingIds(missing));
    }
    let gold: Vec<Answer> = instances.iter().map(|i| i.gold).collect();
    compute_metrics(&aligned, &gold)
}

/// Unweighted mean of each metric over `reports`; counts are summed.
pub fn macro_average(reports: &[EvalReport]) -> EvalReport {
    let k = reports.len().max(1) as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    let mut undefined: Vec<String> = reports
        .iter()
        .flat_map(|r| r.undefined.iter().cloned())
        .collect();
    undefined.sort();
    undefined.dedup();
    EvalReport {
        total: reports.iter().map(|r| r.total).sum(),
        tp: reports.iter().map(|r| r.tp).sum(),
        fp: reports.iter().map(|r| r.fp).sum(),
        tn: reports.iter().map(|r| r.tn).sum(),
        fn_: reports.iter().map(|r| r.fn_).sum(),
        unparseable: reports.iter().map(|r| r.unparseable).sum(),
        accuracy: mean(|r| r.accuracy),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        yes_ratio: mean(|r| r.yes_ratio),
        undefined,
    }
}
