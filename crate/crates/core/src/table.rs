//! Probability tables over a state grid.

use std::fmt;
use std::sync::Arc;

use crate::chain::grid::StateGrid;
use crate::error::{Error, Result};
use crate::par::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Empirical,
    PredictedProductForm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::Empirical => "empirical",
            Provenance::PredictedProductForm => "predicted-product-form",
        })
    }
}

#[derive(Debug, Clone)]
pub struct StationaryTable {
    grid: Arc<StateGrid>,
    probabilities: Vec<f64>,
    provenance: Provenance,
    /// Ordered key/value pairs (solver, seeds, variant flags, ...).
    pub metadata: Vec<(String, String)>,
}

impl StationaryTable {
    /// Normalizes `weights` (nonnegative, positive total) into a table.
    pub fn from_weights(
        grid: Arc<StateGrid>,
        weights: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} weights for {} states",
                weights.len(),
                grid.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidState(format!(
                "weight {w} is negative or non-finite"
            )));
        }
        let total = pairwise_sum(&weights);
        if total <= 0.0 {
            return Err(Error::EmptySupport("all weights are zero".into()));
        }
        let probabilities = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            grid,
            probabilities,
            provenance,
            metadata: Vec::new(),
        })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn grid(&self) -> &Arc<StateGrid> {
        &self.grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn probability_of(&self, counts: &[u32]) -> Option<f64> {
        self.grid.index_of(counts).map(|i| self.probabilities[i])
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.probabilities)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}
