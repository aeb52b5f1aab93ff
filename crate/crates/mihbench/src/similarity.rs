use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{KitError, Result};

/// Square matrix of precomputed image similarity scores (higher is more
/// similar), indexed by image id.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    scores: Vec<f64>,
}

pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

impl SimilarityMatrix {
    /// `scores` is row-major over `ids`. With `symmetric`, the matrix must
    /// equal its transpose within [`SYMMETRY_TOLERANCE`].
    pub fn new(ids: Vec<String>, scores: Vec<f64>, symmetric: bool) -> Result<Self> {
        let n = ids.len();
        if scores.len() != n * n {
            return Err(KitError::InvalidInput(format!(
                "similarity matrix over {n} ids needs {} scores, got {}",
                n * n,
                scores.len()
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(KitError::InvalidInput(format!(
                    "duplicate similarity id `{id}`"
                )));
            }
        }
        if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
            return Err(KitError::InvalidInput(format!(
                "similarity score at ({}, {}) is not finite",
                ids[bad / n],
                ids[bad % n]
            )));
        }
        let m = Self { ids, index, scores };
        if symmetric {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (m.scores[i * n + j] - m.scores[j * n + i]).abs() > SYMMETRY_TOLERANCE {
                        return Err(KitError::InvalidInput(format!(
                            "similarity matrix declared symmetric but ({}, {}) differs from its transpose",
                            m.ids[i], m.ids[j]
                        )));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        let i = *self.index.get(a)?;
        let j = *self.index.get(b)?;
        Some(self.scores[i * self.ids.len() + j])
    }

    /// Reads a CSV whose header row is `<corner>,id1,id2,...` and whose rows
    /// are `idk,s_k1,s_k2,...`. Rows may come in any order but must cover
    /// exactly the column ids.
    pub fn from_csv<R: Read>(input: R, symmetric: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let ids: Vec<String> = reader
            .headers()?
            .iter()
            .skip(1)
            .map(str::to_string)
            .collect();
        let n = ids.len();
        let col: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut scores = vec![f64::NAN; n * n];
        let mut filled = vec![false; n];
        for record in reader.records() {
            let record = record?;
            let row_id = record.get(0).unwrap_or_default();
            let &r = col.get(row_id).ok_or_else(|| {
                KitError::InvalidInput(format!("similarity row `{row_id}` has no matching column"))
            })?;
            if filled[r] {
                return Err(KitError::InvalidInput(format!(
                    "similarity row `{row_id}` appears twice"
                )));
            }
            if record.len() != n + 1 {
                return Err(KitError::InvalidInput(format!(
                    "similarity row `{row_id}` has {} scores, expected {n}",
                    record.len() - 1
                )));
            }
            for (c, cell) in record.iter().skip(1).enumerate() {
                scores[r * n + c] = cell.trim().parse().map_err(|_| {
                    KitError::InvalidInput(format!(
                        "similarity row `{row_id}`: `{cell}` is not a number"
                    ))
                })?;
            }
            filled[r] = true;
        }
        let missing: Vec<String> = ids
            .iter()
            .zip(&filled)
            .filter(|(_, f)| !**f)
            .map(|(id, _)| id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(KitError::MissingIds(missing));
        }
        Self::new(ids, scores, symmetric)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend(self.ids.iter().cloned());
        writer.write_record(&header)?;
        let n = self.ids.len();
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(
                self.scores[i * n..(i + 1) * n]
                    .iter()
                    .map(|s| format!("{s:?}")),
            );
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "id,a,b,c\nb,0.5,1.0,0.2\na,1.0,0.5,0.3\nc,0.3,0.2,1.0\n";

    #[test]
    fn reads_rows_in_any_order() {
        let m = SimilarityMatrix::from_csv(CSV.as_bytes(), true).unwrap();
        assert_eq!(m.score("a", "b"), Some(0.5));
        assert_eq!(m.score("c", "a"), Some(0.3));
        assert_eq!(m.score("a", "z"), None);
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        let back = SimilarityMatrix::from_csv(out.as_slice(), true).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_asymmetry_when_declared() {
        let csv = "id,a,b\na,1.0,0.5\nb,0.4,1.0\n";
        assert!(SimilarityMatrix::from_csv(csv.as_bytes(), true).is_err());
        assert!(SimilarityMatrix::from_csv(csv.as_bytes(), false).is_ok());
    }

    #[test]
    fn rejects_missing_rows() {
        let csv = "id,a,b\na,1.0,0.5\n";
        assert!(matches!(
            SimilarityMatrix::from_csv(csv.as_bytes(), false),
            Err(KitError::MissingIds(ids)) if ids == vec!["b".to_string()]
        ));
    }
}
