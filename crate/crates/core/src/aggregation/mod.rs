//! Rank aggregation: turning preference probabilities restricted to a
//! comparison set into per-document scores and a ranking.
//!
//! Every aggregator except KwikSort reads `p(i, j)` only for pairs in the
//! comparison set; missing probabilities count as zero. KwikSort issues its
//! own look-ups and ignores the comparison set.

mod additive;
mod bradley_terry;
mod greedy;
mod kwiksort;
mod pagerank;

use serde::{Deserialize, Serialize};

pub use additive::aggregate_additive;
pub use bradley_terry::{aggregate_bradley_terry, fit_bradley_terry, BradleyTerryFit};
pub use greedy::aggregate_greedy;
pub use kwiksort::{kwiksort, KwikSortResult};
pub use pagerank::{aggregate_pagerank, PageRankResult};

use crate::error::{Error, Result};
use crate::model::{ComparisonSet, PreferenceMatrix, Ranking};

/// The five aggregation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregatorKind {
    Additive,
    BradleyTerry,
    Greedy,
    PageRank,
    KwikSort,
}

impl AggregatorKind {
    pub const ALL: [AggregatorKind; 5] = [
        AggregatorKind::Additive,
        AggregatorKind::BradleyTerry,
        AggregatorKind::Greedy,
        AggregatorKind::PageRank,
        AggregatorKind::KwikSort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregatorKind::Additive => "additive",
            AggregatorKind::BradleyTerry => "bradley-terry",
            AggregatorKind::Greedy => "greedy",
            AggregatorKind::PageRank => "pagerank",
            AggregatorKind::KwikSort => "kwiksort",
        }
    }

    /// Whether the method reads a pre-sampled comparison set.
    pub fn uses_sample(self) -> bool {
        self != AggregatorKind::KwikSort
    }
}

impl std::str::FromStr for AggregatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parameter(format!("unknown aggregator {s:?}")))
    }
}

impl std::fmt::Display for AggregatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which way PageRank mass flows along a sampled comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PageRankDirection {
    /// For a sampled `(i, j)`, `j` passes mass to `i` in proportion to
    /// `p(i, j)`: the preferred document collects mass.
    #[default]
    WinnerReceives,
    /// For a sampled `(j, i)`, `j` passes mass to `i` in proportion to
    /// `p(j, i)`, normalized by `j`'s sampled outgoing probabilities.
    /// Preferred documents give mass away, so this reverses the order.
    LoserReceives,
}

/// Aggregator choice and its tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatorSpec {
    pub kind: AggregatorKind,
    /// PageRank teleport weight.
    pub gamma: f64,
    pub pr_tol: f64,
    pub pr_max_iter: usize,
    pub pr_direction: PageRankDirection,
    /// L2 penalty on Bradley-Terry scores; must be positive.
    pub bt_reg: f64,
    pub bt_tol: f64,
    pub bt_max_iter: usize,
    pub kwiksort_seed: u64,
}

impl AggregatorSpec {
    pub fn new(kind: AggregatorKind) -> Self {
        AggregatorSpec {
            kind,
            gamma: 0.15,
            pr_tol: 1e-10,
            pr_max_iter: 1000,
            pr_direction: PageRankDirection::default(),
            bt_reg: 0.01,
            bt_tol: 1e-8,
            bt_max_iter: 500,
            kwiksort_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.kwiksort_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parameter(what.to_string()));
        match self.kind {
            AggregatorKind::PageRank => {
                if !(0.0..=1.0).contains(&self.gamma) {
                    return bad("gamma must be in [0, 1]");
                }
                if !(self.pr_tol > 0.0) || self.pr_max_iter == 0 {
                    return bad("PageRank tolerance and iteration cap must be positive");
                }
            }
            AggregatorKind::BradleyTerry => {
                if !(self.bt_reg > 0.0) {
                    return bad("Bradley-Terry regularization must be positive");
                }
                if !(self.bt_tol > 0.0) || self.bt_max_iter == 0 {
                    return bad("Bradley-Terry tolerance and iteration cap must be positive");
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// A ranking plus bookkeeping from the method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOutcome {
    pub ranking: Ranking,
    /// False when an iterative method hit its iteration cap.
    pub converged: bool,
    pub iterations: usize,
    /// Preference look-ups consumed: `|C|`, or KwikSort's own count.
    pub comparisons: usize,
}

/// Runs the aggregator described by `spec`.
pub fn aggregate(
    prefs: &PreferenceMatrix,
    sample: &ComparisonSet,
    spec: &AggregatorSpec,
) -> Result<AggregateOutcome> {
    spec.validate()?;
    let plain = |ranking: Ranking| AggregateOutcome {
        ranking,
        converged: true,
        iterations: 0,
        comparisons: sample.len(),
    };
    Ok(match spec.kind {
        AggregatorKind::Additive => plain(aggregate_additive(prefs, sample)?),
        AggregatorKind::Greedy => plain(aggregate_greedy(prefs, sample)?),
        AggregatorKind::BradleyTerry => {
            let (ranking, fit) = aggregate_bradley_terry(prefs, sample, spec)?;
            AggregateOutcome {
                ranking,
                converged: fit.converged,
                iterations: fit.iterations,
                comparisons: sample.len(),
            }
        }
        AggregatorKind::PageRank => {
            let r = aggregate_pagerank(prefs, sample, spec)?;
            AggregateOutcome {
                ranking: r.ranking,
                converged: r.converged,
                iterations: r.iterations,
                comparisons: sample.len(),
            }
        }
        AggregatorKind::KwikSort => {
            let r = kwiksort(prefs, spec.kwiksort_seed)?;
            AggregateOutcome {
                ranking: r.ranking,
                converged: true,
                iterations: 0,
                comparisons: r.lookups,
            }
        }
    })
}

pub(crate) fn check_dims(prefs: &PreferenceMatrix, sample: &ComparisonSet) -> Result<()> {
    if prefs.k() != sample.k() {
        return Err(Error::Input(format!(
            "query {}: preference matrix has k = {}, comparison set has k = {}",
            prefs.query_id(),
            prefs.k(),
            sample.k()
        )));
    }
    Ok(())
}
