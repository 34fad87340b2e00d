//! Sweep results: one record per simulated run.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregatorKind;
use crate::evaluation::mean;

/// Sampler name used for unsampled baseline runs.
pub const BASELINE_SAMPLER: &str = "none";

/// Effectiveness of one run on one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    /// `None` when nDCG is not applicable to the query.
    pub ndcg: Option<f64>,
    /// Preference look-ups spent on the query.
    pub comparisons: usize,
    /// `comparisons / (k² - k)` for the query.
    pub effective_rate: f64,
}

/// One run: a (sampler, aggregator, rate, repetition) combination over all queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub corpus_tag: String,
    pub sampler: String,
    /// Sampler parameters beyond the rate, e.g. `{"lambda": 8}`.
    pub params: serde_json::Value,
    pub aggregator: AggregatorKind,
    /// Nominal grid rate; 1.0 for baselines.
    pub rate: f64,
    /// Total comparisons over total `k² - k` across queries.
    pub effective_rate: f64,
    pub repetition: u32,
    /// Mean nDCG over queries where it is applicable; NaN (`null` in JSON)
    /// when it applies to none.
    #[serde(with = "nan_as_null")]
    pub ndcg: f64,
    pub comparisons: usize,
    pub per_query: Vec<QueryRecord>,
}

impl RunRecord {
    pub fn is_baseline(&self) -> bool {
        self.sampler == BASELINE_SAMPLER
    }

    /// Builds a record, deriving the run-level aggregates from `per_query`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_queries(
        corpus_tag: impl Into<String>,
        sampler: impl Into<String>,
        params: serde_json::Value,
        aggregator: AggregatorKind,
        rate: f64,
        repetition: u32,
        per_query: Vec<QueryRecord>,
        pair_totals: usize,
    ) -> Self {
        let comparisons = per_query.iter().map(|q| q.comparisons).sum();
        let scores: Vec<f64> = per_query.iter().filter_map(|q| q.ndcg).collect();
        RunRecord {
            corpus_tag: corpus_tag.into(),
            sampler: sampler.into(),
            params,
            aggregator,
            rate,
            effective_rate: if pair_totals > 0 {
                comparisons as f64 / pair_totals as f64
            } else {
                0.0
            },
            repetition,
            ndcg: if scores.is_empty() { f64::NAN } else { mean(&scores) },
            comparisons,
            per_query,
        }
    }
}

/// All runs of a sweep, in execution-independent order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<RunRecord>,
}

impl SweepReport {
    pub fn baseline(&self, aggregator: AggregatorKind) -> Option<&RunRecord> {
        self.records
            .iter()
            .find(|r| r.aggregator == aggregator && r.is_baseline())
    }

    /// Distinct (aggregator, sampler) combinations with sampled runs, sorted.
    pub fn combinations(&self) -> Vec<(AggregatorKind, String)> {
        let mut combos: Vec<(AggregatorKind, String)> = self
            .records
            .iter()
            .filter(|r| !r.is_baseline())
            .map(|r| (r.aggregator, r.sampler.clone()))
            .collect();
        combos.sort();
        combos.dedup();
        combos
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Rates compare equal when they agree to six decimals.
pub(crate) fn rate_key(rate: f64) -> i64 {
    (rate * 1e6).round() as i64
}
