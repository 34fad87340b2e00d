//! Sparse pairwise re-ranking.
//!
//! Samples a subset of the `k² - k` ordered document pairs of a candidate
//! list, aggregates the cached preference probabilities of those pairs into a
//! ranking, measures the quality of a preference matrix, and evaluates
//! rankings with nDCG and paired significance tests.
//!
//! Document indices are 0-based positions in the pointwise candidate order.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod model;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod simulation;

pub use aggregation::{aggregate, AggregateOutcome, AggregatorKind, AggregatorSpec, PageRankDirection};
pub use diagnostics::{consistency, epsilon_complementarity, transitivity, ConsistencyMode};
pub use error::{Error, Result};
pub use evaluation::{minimal_safe_rate, ndcg_at, paired_t_test, NdcgOptions, Qrels, SignificanceResult};
pub use model::{ComparisonSet, DocId, PreferenceMatrix, RankedDoc, Ranking, SamplerSpec, TopKList};
pub use report::{QueryRecord, RunRecord, SweepReport};
pub use simulation::{generate_preferences, SynthSpec};
