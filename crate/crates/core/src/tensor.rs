use std::ops::Range;

use crate::error::{DabError, Result};
use crate::segments::SegmentMap;
use crate::ROW_SUM_TOLERANCE;

/// Dense `layer x head x query x key` attention weights, row-stochastic
/// along the key axis.
///
/// Query rows are aligned to the tail of the key axis: with `queries ==
/// keys` query `j` sits at sequence position `j`, and with fewer queries
/// (the usual decoding case where only the newest positions are queried)
/// query `j` sits at position `keys - queries + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTensor {
    layers: usize,
    heads: usize,
    queries: usize,
    keys: usize,
    weights: Vec<f64>,
}

impl AttentionTensor {
    pub fn new(
        layers: usize,
        heads: usize,
        queries: usize,
        keys: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if layers == 0 || heads == 0 || queries == 0 || keys == 0 {
            return Err(DabError::Dimension(format!(
                "all dimensions must be positive, got {layers}x{heads}x{queries}x{keys}"
            )));
        }
        if queries > keys {
            return Err(DabError::Dimension(format!(
                "{queries} queries cannot be aligned to {keys} keys"
            )));
        }
        let expected = layers * heads * queries * keys;
        if weights.len() != expected {
            return Err(DabError::Dimension(format!(
                "expected {expected} weights for {layers}x{heads}x{queries}x{keys}, got {}",
                weights.len()
            )));
        }
        let tensor = Self {
            layers,
            heads,
            queries,
            keys,
            weights,
        };
        tensor.check_stochastic()?;
        Ok(tensor)
    }

    /// A single-layer, single-head tensor holding one query row.
    pub fn from_row(row: &[f64]) -> Result<Self> {
        Self::new(1, 1, 1, row.len(), row.to_vec())
    }

    /// Builds a tensor from already-validated parts. Used for kernel outputs
    /// whose invariants are checked by the caller.
    pub(crate) fn from_parts_unchecked(
        layers: usize,
        heads: usize,
        queries: usize,
        keys: usize,
        weights: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(weights.len(), layers * heads * queries * keys);
        Self {
            layers,
            heads,
            queries,
            keys,
            weights,
        }
    }

    fn check_stochastic(&self) -> Result<()> {
        for (r, row) in self.weights.chunks_exact(self.keys).enumerate() {
            let mut sum = 0.0;
            for (i, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 || w > 1.0 + ROW_SUM_TOLERANCE {
                    return Err(DabError::Domain(format!(
                        "weight {w} at row {r}, key {i} is outside [0, 1]"
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(DabError::Domain(format!(
                    "row {r} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    /// `(layers, heads, queries, keys)`.
    pub fn shape(&self) -> [usize; 4] {
        [self.layers, self.heads, self.queries, self.keys]
    }

    /// Row-major flat weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub(crate) fn row_offset(&self, layer: usize, head: usize, query: usize) -> usize {
        ((layer * self.heads + head) * self.queries + query) * self.keys
    }

    pub fn row(&self, layer: usize, head: usize, query: usize) -> &[f64] {
        let start = self.row_offset(layer, head, query);
        &self.weights[start..start + self.keys]
    }

    pub fn get(&self, layer: usize, head: usize, query: usize, key: usize) -> f64 {
        self.weights[self.row_offset(layer, head, query) + key]
    }

    /// Sequence position of query row `query`.
    pub fn query_position(&self, query: usize) -> usize {
        self.keys - self.queries + query
    }

    /// Query indices whose sequence position falls inside the text span.
    pub fn text_query_rows(&self, segments: &SegmentMap) -> Range<usize> {
        let offset = self.keys - self.queries;
        let text = segments.text_span();
        let start = text.start.saturating_sub(offset).min(self.queries);
        let end = text.end.saturating_sub(offset).min(self.queries);
        start..end
    }

    pub fn check_segments(&self, segments: &SegmentMap) -> Result<()> {
        if segments.keys() != self.keys {
            return Err(DabError::Dimension(format!(
                "segment map covers {} keys but tensor has {}",
                segments.keys(),
                self.keys
            )));
        }
        Ok(())
    }
}
