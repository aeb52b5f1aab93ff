use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};

/// Per-image hallucination flags for one multi-image instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallucinationFlags {
    pub instance_id: String,
    pub flags: Vec<bool>,
}

/// How `Y` is assigned; written into every report.
pub const Y_DEFINITION: &str = "X=1 iff any single-image sub-question is hallucinated. \
If X=1, Y=1 iff the joint answer hallucinates on an image whose single-image answer was correct \
(on any image when every single-image answer was hallucinated). \
If X=0, Y=1 iff the joint answer hallucinates on any image.";

/// Counts and proportions of the four `(X, Y)` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub x0_y0: usize,
    pub x0_y1: usize,
    pub x1_y0: usize,
    pub x1_y1: usize,
    pub p_x0_y0: f64,
    pub p_x0_y1: f64,
    pub p_x1_y0: f64,
    pub p_x1_y1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n: usize,
    pub table: JointTable,
    /// Phi coefficient of `(X, Y)`; `None` when either variable is constant.
    pub pearson: Option<f64>,
    pub y_definition: String,
}

/// Flags each image whose predicted count differs from its gold count.
pub fn hallucination_flags(predicted: &[u32], gold: &[u32]) -> Vec<bool> {
    predicted.iter().zip(gold).map(|(p, g)| p != g).collect()
}

/// Pearson correlation of two binary variables,
/// `(n11 n00 - n10 n01) / sqrt(n1. n0. n.1 n.0)`.
pub fn pearson_binary(pairs: &[(bool, bool)]) -> Option<f64> {
    let mut n = [[0u64; 2]; 2];
    for &(x, y) in pairs {
        n[x as usize][y as usize] += 1;
    }
    let x1 = (n[1][0] + n[1][1]) as f64;
    let x0 = (n[0][0] + n[0][1]) as f64;
    let y1 = (n[0][1] + n[1][1]) as f64;
    let y0 = (n[0][0] + n[1][0]) as f64;
    let denom = (x1 * x0 * y1 * y0).sqrt();
    if denom == 0.0 {
        return None;
    }
    let num = n[1][1] as f64 * n[0][0] as f64 - n[1][0] as f64 * n[0][1] as f64;
    Some(num / denom)
}

fn xy(single: &[bool], joint: &[bool]) -> (bool, bool) {
    let x = single.iter().any(|f| *f);
    if !x {
        return (false, joint.iter().any(|f| *f));
    }
    let mut siblings = single.iter().zip(joint).filter(|(s, _)| !**s).peekable();
    let y = if siblings.peek().is_none() {
        joint.iter().any(|f| *f)
    } else {
        siblings.any(|(_, j)| *j)
    };
    (true, y)
}

/// Joint distribution of single-image (`X`) and joint-answer (`Y`)
/// hallucination, see [`Y_DEFINITION`], with its Pearson coefficient.
pub fn correlation_analysis(
    single: &[HallucinationFlags],
    joint: &[HallucinationFlags],
) -> Result<CorrelationReport> {
    if single.is_empty() {
        return Err(KitError::InvalidInput(
            "correlation analysis needs at least one instance".into(),
        ));
    }
    let by_id: HashMap<&str, &HallucinationFlags> =
        joint.iter().map(|f| (f.instance_id.as_str(), f)).collect();
    let missing: Vec<String> = single
        .iter()
        .filter(|s| !by_id.contains_key(s.instance_id.as_str()))
        .map(|s| s.instance_id.clone())
        .collect();
    if !missing.is_empty() || joint.len() != single.len() {
        let mut missing = missing;
        let single_ids: std::collections::HashSet<&str> =
            single.iter().map(|s| s.instance_id.as_str()).collect();
        missing.extend(
            joint
                .iter()
                .filter(|j| !single_ids.contains(j.instance_id.as_str()))
                .map(|j| j.instance_id.clone()),
        );
        return Err(KitError::MissingIds(missing));
    }

    let mut pairs = Vec::with_capacity(single.len());
    for s in single {
        let j = by_id[s.instance_id.as_str()];
        if j.flags.len() != s.flags.len() {
            return Err(KitError::InvalidInput(format!(
                "instance `{}`: {} single-image flags vs {} joint flags",
                s.instance_id,
                s.flags.len(),
                j.flags.len()
            )));
        }
        pairs.push(xy(&s.flags, &j.flags));
    }

    let count = |x: bool, y: bool| pairs.iter().filter(|p| **p == (x, y)).count();
    let n = pairs.len();
    let p = |c: usize| c as f64 / n as f64;
    let (c00, c01, c10, c11) = (
        count(false, false),
        count(false, true),
        count(true, false),
        count(true, true),
    );
    Ok(CorrelationReport {
        n,
        table: JointTable {
            x0_y0: c00,
            x0_y1: c01,
            x1_y0: c10,
            x1_y1: c11,
            p_x0_y0: p(c00),
            p_x0_y1: p(c01),
            p_x1_y0: p(c10),
            p_x1_y1: p(c11),
        },
        pearson: pearson_binary(&pairs),
        y_definition: Y_DEFINITION.to_string(),
    })
}
