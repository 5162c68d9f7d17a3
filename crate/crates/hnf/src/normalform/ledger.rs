use std::collections::BTreeMap;

use serde::Serialize;

use crate::scalar::BaseNumber;
use crate::series::Monomial;

/// One small denominator `(α, J)` with where it was first needed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub j: Vec<i64>,
    pub exact: String,
    pub magnitude: f64,
    pub step: String,
    pub monomial: String,
}

/// Every resonance form divided by during a run, once per (J, step, monomial).
#[derive(Clone, Debug, Default)]
pub struct Ledger {
    entries: BTreeMap<(Vec<i64>, String, String), LedgerEntry>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Note a division by `(α, j)`, needed at `step` for `monomial`.
    pub fn record(&mut self, j: &[i64], value: &BaseNumber, step: &str, monomial: &Monomial) {
        let key = (j.to_vec(), step.to_string(), monomial.to_canonical());
        self.entries.entry(key).or_insert_with(|| LedgerEntry {
            j: j.to_vec(),
            exact: value.to_canonical(),
            magnitude: value.to_complex().norm(),
            step: step.to_string(),
            monomial: monomial.to_canonical(),
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by (J, step, monomial).
    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.values()
    }

    /// Smallest `|(α, J)|` seen, if any.
    pub fn smallest(&self) -> Option<&LedgerEntry> {
        self.entries
            .values()
            .min_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}
