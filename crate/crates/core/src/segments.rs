use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{DabError, Result};

/// Partition of the key axis into `n` image spans and one text span.
///
/// Spans are half-open, non-empty, pairwise disjoint and together cover
/// `[0, keys)` exactly. Image spans keep input order (image 1 first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSegments", into = "RawSegments")]
pub struct SegmentMap {
    image_spans: Vec<Range<usize>>,
    text_span: Range<usize>,
    keys: usize,
}

impl SegmentMap {
    pub fn new(image_spans: Vec<Range<usize>>, text_span: Range<usize>) -> Result<Self> {
        if image_spans.is_empty() {
            return Err(DabError::Segments(
                "at least one image span is required".into(),
            ));
        }
        for (k, span) in image_spans.iter().enumerate() {
            if span.start >= span.end {
                return Err(DabError::Segments(format!(
                    "image span {} ({}..{}) is empty",
                    k + 1,
                    span.start,
                    span.end
                )));
            }
        }
        if text_span.start >= text_span.end {
            return Err(DabError::Segments(format!(
                "text span ({}..{}) is empty",
                text_span.start, text_span.end
            )));
        }

        let mut all: Vec<Range<usize>> = image_spans.clone();
        all.push(text_span.clone());
        all.sort_by_key(|r| r.start);
        let mut cursor = 0;
        for span in &all {
            if span.start < cursor {
                return Err(DabError::Segments(format!(
                    "span {}..{} overlaps a preceding span",
                    span.start, span.end
                )));
            }
            if span.start > cursor {
                return Err(DabError::Segments(format!(
                    "keys {}..{} are not covered by any span",
                    cursor, span.start
                )));
            }
            cursor = span.end;
        }

        Ok(Self {
            image_spans,
            text_span,
            keys: cursor,
        })
    }

    /// Layout `[V1, V2, ..., Vn, X]` with the given image token counts
    /// followed by `text_len` text tokens.
    pub fn contiguous(image_lens: &[usize], text_len: usize) -> Result<Self> {
        let mut spans = Vec::with_capacity(image_lens.len());
        let mut start = 0;
        for &len in image_lens {
            spans.push(start..start + len);
            start += len;
        }
        Self::new(spans, start..start + text_len)
    }

    pub fn num_images(&self) -> usize {
        self.image_spans.len()
    }

    pub fn image_spans(&self) -> &[Range<usize>] {
        &self.image_spans
    }

    pub fn image_span(&self, k: usize) -> Range<usize> {
        self.image_spans[k].clone()
    }

    pub fn text_span(&self) -> Range<usize> {
        self.text_span.clone()
    }

    /// Total number of keys covered.
    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn text_len(&self) -> usize {
        self.text_span.len()
    }
}

#[derive(Serialize, Deserialize)]
struct RawSegments {
    images: Vec<[usize; 2]>,
    text: [usize; 2],
}

impl TryFrom<RawSegments> for SegmentMap {
    type Error = DabError;

    fn try_from(raw: RawSegments) -> Result<Self> {
        SegmentMap::new(
            raw.images.iter().map(|[s, e]| *s..*e).collect(),
            raw.text[0]..raw.text[1],
        )
    }
}

impl From<SegmentMap> for RawSegments {
    fn from(map: SegmentMap) -> Self {
        RawSegments {
            images: map.image_spans.iter().map(|r| [r.start, r.end]).collect(),
            text: [map.text_span.start, map.text_span.end],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_layout() {
        let m = SegmentMap::contiguous(&[2, 3], 4).unwrap();
        assert_eq!(m.image_spans(), &[0..2, 2..5]);
        assert_eq!(m.text_span(), 5..9);
        assert_eq!(m.keys(), 9);
        assert_eq!(m.num_images(), 2);
    }

    #[test]
    fn empty_text_rejected() {
        let err = SegmentMap::new(vec![0..2, 2..4], 4..4).unwrap_err();
        assert!(matches!(err, DabError::Segments(_)));
    }

    #[test]
    fn empty_image_rejected() {
        assert!(SegmentMap::contiguous(&[2, 0], 1).is_err());
        assert!(SegmentMap::new(vec![], 0..3).is_err());
    }

    #[test]
    fn gaps_and_overlaps_rejected() {
        assert!(SegmentMap::new(vec![0..2, 3..4], 4..5).is_err());
        assert!(SegmentMap::new(vec![0..3, 2..4], 4..5).is_err());
        assert!(SegmentMap::new(vec![1..3], 3..4).is_err());
    }

    #[test]
    fn text_may_lead() {
        let m = SegmentMap::new(vec![2..4, 4..6], 0..2).unwrap();
        assert_eq!(m.keys(), 6);
    }

    #[test]
    fn single_image_is_legal() {
        assert_eq!(SegmentMap::contiguous(&[4], 2).unwrap().num_images(), 1);
    }

    #[test]
    fn serde_validates() {
        let m: SegmentMap =
            serde_json::from_str(r#"{"images":[[0,2],[2,4]],"text":[4,5]}"#).unwrap();
        assert_eq!(m, SegmentMap::contiguous(&[2, 2], 1).unwrap());
        assert!(
            serde_json::from_str::<SegmentMap>(r#"{"images":[[0,2],[2,4]],"text":[4,4]}"#).is_err()
        );
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(back, r#"{"images":[[0,2],[2,4]],"text":[4,5]}"#);
    }
}
