//! Text interchange format for attention tensors.
//!
//! A file is one line of JSON header followed by the weights:
//!
//! ```text
//! {"format":"dab-attention","version":1,"layers":1,"heads":1,"queries":1,"keys":5,"segments":{"images":[[0,2],[2,4]],"text":[4,5]},"encoding":"csv"}
//! 0.1,0.1,0.3,0.3,0.2
//! ```
//!
//! With `"encoding":"csv"` the body holds `layers * heads * queries` lines
//! of `keys` comma-separated decimals in row-major `(layer, head, query)`
//! order. With `"encoding":"base64"` the body is a single line of standard
//! padded base64 over the little-endian IEEE-754 `f64` weights in the same
//! order. Both encodings round-trip bit-exactly.

use std::io::{BufRead, Write};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{DabError, Result};
use crate::segments::SegmentMap;
use crate::tensor::AttentionTensor;

pub const FORMAT_NAME: &str = "dab-attention";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Csv,
    Base64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub layers: usize,
    pub heads: usize,
    pub queries: usize,
    pub keys: usize,
    pub segments: SegmentMap,
    pub encoding: Encoding,
}

fn io_err(e: std::io::Error) -> DabError {
    DabError::Format(e.to_string())
}

pub fn write_tensor<W: Write>(
    mut out: W,
    tensor: &AttentionTensor,
    segments: &SegmentMap,
    encoding: Encoding,
) -> Result<()> {
    tensor.check_segments(segments)?;
    let header = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        layers: tensor.layers(),
        heads: tensor.heads(),
        queries: tensor.queries(),
        keys: tensor.keys(),
        segments: segments.clone(),
        encoding,
    };
    let line = serde_json::to_string(&header).map_err(|e| DabError::Format(e.to_string()))?;
    writeln!(out, "{line}").map_err(io_err)?;
    match encoding {
        Encoding::Csv => {
            for row in tensor.weights().chunks_exact(tensor.keys()) {
                let cells: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
                writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
            }
        }
        Encoding::Base64 => {
            let bytes: Vec<u8> = tensor
                .weights()
                .iter()
                .flat_map(|w| w.to_le_bytes())
                .collect();
            writeln!(out, "{}", STANDARD.encode(bytes)).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_tensor<R: BufRead>(input: R) -> Result<(AttentionTensor, SegmentMap)> {
    let mut lines = input.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| DabError::Format("missing header line".into()))?
        .map_err(io_err)?;
    let header: Header = serde_json::from_str(&header_line)
        .map_err(|e| DabError::Format(format!("bad header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(DabError::Format(format!(
            "unknown format `{}`",
            header.format
        )));
    }
    if header.version != FORMAT_VERSION {
        return Err(DabError::Format(format!(
            "unsupported version {}",
            header.version
        )));
    }

    let expected = header.layers * header.heads * header.queries * header.keys;
    let mut weights = Vec::with_capacity(expected);
    match header.encoding {
        Encoding::Csv => {
            for (n, line) in lines.enumerate() {
                let line = line.map_err(io_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                let before = weights.len();
                for cell in line.split(',') {
                    let w: f64 = cell.trim().parse().map_err(|_| {
                        DabError::Format(format!("body line {}: `{cell}` is not a number", n + 1))
                    })?;
                    weights.push(w);
                }
                if weights.len() - before != header.keys {
                    return Err(DabError::Format(format!(
                        "body line {} has {} values, expected {}",
                        n + 1,
                        weights.len() - before,
                        header.keys
                    )));
                }
            }
        }
        Encoding::Base64 => {
            let body: String = lines
                .map(|l| l.map_err(io_err))
                .collect::<Result<Vec<_>>>()?
                .concat();
            let bytes = STANDARD
                .decode(body.trim())
                .map_err(|e| DabError::Format(format!("bad base64 body: {e}")))?;
            if bytes.len() % 8 != 0 {
                return Err(DabError::Format(
                    "base64 body is not a whole number of f64s".into(),
                ));
            }
            weights.extend(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))),
            );
        }
    }
    if weights.len() != expected {
        return Err(DabError::Dimension(format!(
            "header declares {expected} weights, body holds {}",
            weights.len()
        )));
    }
    let tensor = AttentionTensor::new(
        header.layers,
        header.heads,
        header.queries,
        header.keys,
        weights,
    )?;
    tensor.check_segments(&header.segments)?;
    Ok((tensor, header.segments))
}

pub fn to_string(
    tensor: &AttentionTensor,
    segments: &SegmentMap,
    encoding: Encoding,
) -> Result<String> {
    let mut buf = Vec::new();
    write_tensor(&mut buf, tensor, segments, encoding)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

pub fn from_str(text: &str) -> Result<(AttentionTensor, SegmentMap)> {
    read_tensor(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (AttentionTensor, SegmentMap) {
        let seg = SegmentMap::contiguous(&[2, 2], 1).unwrap();
        let mut w = vec![0.1, 0.1, 0.3, 0.3, 0.2];
        w.extend_from_slice(&[
            1.0 / 3.0,
            1.0 / 7.0,
            0.0,
            1e-20,
            1.0 - 1.0 / 3.0 - 1.0 / 7.0 - 1e-20,
        ]);
        (AttentionTensor::new(1, 2, 1, 5, w).unwrap(), seg)
    }

    #[test]
    fn csv_layout() {
        let (t, seg) = sample();
        let text = to_string(&t, &seg, Encoding::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            r#"{"format":"dab-attention","version":1,"layers":1,"heads":2,"queries":1,"keys":5,"segments":{"images":[[0,2],[2,4]],"text":[4,5]},"encoding":"csv"}"#
        );
        assert_eq!(lines.next().unwrap(), "0.1,0.1,0.3,0.3,0.2");
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn both_encodings_round_trip_bits() {
        let (t, seg) = sample();
        for enc in [Encoding::Csv, Encoding::Base64] {
            let (back, seg_back) = from_str(&to_string(&t, &seg, enc).unwrap()).unwrap();
            assert_eq!(seg_back, seg);
            let a: Vec<u64> = t.weights().iter().map(|w| w.to_bits()).collect();
            let b: Vec<u64> = back.weights().iter().map(|w| w.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_malformed() {
        let (t, seg) = sample();
        let good = to_string(&t, &seg, Encoding::Csv).unwrap();
        let truncated: String = good.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(from_str(&truncated), Err(DabError::Dimension(_))));
        assert!(matches!(from_str(""), Err(DabError::Format(_))));
        assert!(matches!(
            from_str(&good.replace("0.3,0.3", "0.3,x")),
            Err(DabError::Format(_))
        ));
        assert!(matches!(
            from_str(&good.replace("dab-attention", "other")),
            Err(DabError::Format(_))
        ));
        let bad_seg = good.replace("[4,5]", "[4,6]");
        assert!(from_str(&bad_seg).is_err());
    }
}
