//! JSON Lines and CSV file formats.
//!
//! Every JSONL file written by this crate may start with a header line
//! `{"header":{"schema_version":1,"manifest":"<hex>"}}` naming the run that
//! produced it. Readers skip header lines and blank lines, so files from
//! other tools (one record per line, no header) load the same way.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationRecord;
use crate::answer::PredictionRecord;
use crate::error::{KitError, Result};
use crate::identity::ViewGroup;
use crate::instance::SCHEMA_VERSION;
use crate::similarity::SimilarityMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHeader {
    pub schema_version: u32,
    pub manifest: String,
}

impl FileHeader {
    pub fn new(manifest: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            manifest: manifest.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: FileHeader,
}

/// Prediction input line: `{"instance_id": ..., "raw_text": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawPrediction {
    pub instance_id: String,
    pub raw_text: String,
}

pub fn write_jsonl<W: Write, T: Serialize>(
    mut out: W,
    header: Option<&FileHeader>,
    items: &[T],
) -> Result<()> {
    if let Some(h) = header {
        let line = serde_json::to_string(&HeaderLine { header: h.clone() })
            .map_err(|source| KitError::Json { line: 0, source })?;
        writeln!(out, "{line}")?;
    }
    for (i, item) in items.iter().enumerate() {
        let line = serde_json::to_string(item).map_err(|source| KitError::Json {
            line: i + 1,
            source,
        })?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl_with_header<R: BufRead, T: DeserializeOwned>(
    input: R,
) -> Result<(Option<FileHeader>, Vec<T>)> {
    let mut header = None;
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|source| KitError::Json {
                line: i + 1,
                source,
            })?;
        if let Some(h) = value
            .as_object()
            .filter(|o| o.len() == 1)
            .and_then(|o| o.get("header"))
        {
            header = Some(
                serde_json::from_value(h.clone()).map_err(|source| KitError::Json {
                    line: i + 1,
                    source,
                })?,
            );
            continue;
        }
        items.push(
            serde_json::from_value(value).map_err(|source| KitError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok((header, items))
}

pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    Ok(read_jsonl_with_header(input)?.1)
}

pub fn load_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl(BufReader::new(open(path)?))
}

pub fn save_jsonl<T: Serialize>(
    path: &Path,
    header: Option<&FileHeader>,
    items: &[T],
) -> Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), header, items)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        KitError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    load_jsonl(path)
}

pub fn load_view_groups(path: &Path) -> Result<Vec<ViewGroup>> {
    load_jsonl(path)
}

pub fn load_similarity(path: &Path, symmetric: bool) -> Result<SimilarityMatrix> {
    SimilarityMatrix::from_csv(BufReader::new(open(path)?), symmetric)
}

/// Reads prediction lines and parses each answer.
pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let raw: Vec<RawPrediction> = load_jsonl(path)?;
    Ok(raw
        .into_iter()
        .map(|r| PredictionRecord::new(r.instance_id, r.raw_text))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_skipped() {
        let mut buf = Vec::new();
        let items = vec![RawPrediction {
            instance_id: "a".into(),
            raw_text: "Yes".into(),
        }];
        write_jsonl(&mut buf, Some(&FileHeader::new("abc")), &items).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"header":{"schema_version":1,"manifest":"abc"}}"#));
        let (h, back): (_, Vec<RawPrediction>) = read_jsonl_with_header(buf.as_slice()).unwrap();
        assert_eq!(h.unwrap().manifest, "abc");
        assert_eq!(back[0].instance_id, "a");
    }

    #[test]
    fn reports_bad_line_number() {
        let text = "{\"instance_id\":\"a\",\"raw_text\":\"no\"}\n\nnot json\n";
        let err = read_jsonl::<_, RawPrediction>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, KitError::Json { line: 3, .. }));
    }
}
