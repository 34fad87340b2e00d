//! Quality measures of a full preference matrix: direction consistency,
//! numerical complementarity and triple transitivity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PreferenceMatrix;

/// Which pairs the consistency fraction counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsistencyMode {
    /// Unordered pairs `{i, j}` where exactly one of `p(i, j)`, `p(j, i)` is
    /// at least 0.5, over `(k² - k)/2` pairs. Ranges over `[0, 1]`.
    #[default]
    Unordered,
    /// Ordered pairs with `p(i, j) ≥ 0.5` and `p(j, i) < 0.5`, over
    /// `k² - k` pairs. Never exceeds 0.5.
    Ordered,
}

/// Fraction of document pairs whose two directed probabilities name the
/// same winner.
pub fn consistency(prefs: &PreferenceMatrix, mode: ConsistencyMode) -> f64 {
    let k = prefs.k();
    if k < 2 {
        return 0.0;
    }
    let mut agreeing = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            if (prefs.p(i, j) >= 0.5) != (prefs.p(j, i) >= 0.5) {
                agreeing += 1;
            }
        }
    }
    let ordered = (k * k - k) as f64;
    match mode {
        ConsistencyMode::Unordered => agreeing as f64 / (ordered / 2.0),
        ConsistencyMode::Ordered => agreeing as f64 / ordered,
    }
}

/// Fraction of pairs with `|p(i, j) + p(j, i) - 1| < eps`.
pub fn epsilon_complementarity(prefs: &PreferenceMatrix, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {eps}")));
    }
    let k = prefs.k();
    if k < 2 {
        return Ok(0.0);
    }
    let hits = prefs
        .entries()
        .filter(|&(i, j, p)| (p + prefs.p(j, i) - 1.0).abs() < eps)
        .count();
    Ok(hits as f64 / (k * k - k) as f64)
}

/// Counts of transitive and intransitive ordered triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TripleCounts {
    pub transitive: u64,
    pub intransitive: u64,
}

impl TripleCounts {
    /// `|T| / (|T| + |I|)`, or `None` when no triple qualifies.
    pub fn ratio(&self) -> Option<f64> {
        let total = self.transitive + self.intransitive;
        (total > 0).then(|| self.transitive as f64 / total as f64)
    }
}

/// Classifies every ordered triple `(i, j, l)` of distinct documents.
///
/// If `p(i, j)` and `p(j, l)` fall on the same side of 0.5, the triple is
/// transitive when `p(i, l)` falls on that side too and intransitive
/// otherwise. Triples whose first two statements disagree are not counted.
pub fn triple_counts(prefs: &PreferenceMatrix) -> TripleCounts {
    let k = prefs.k();
    let (transitive, intransitive) = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut t = 0u64;
            let mut n = 0u64;
            for j in (0..k).filter(|&j| j != i) {
                let ij = prefs.p(i, j) >= 0.5;
                for l in (0..k).filter(|&l| l != i && l != j) {
                    if ij != (prefs.p(j, l) >= 0.5) {
                        continue;
                    }
                    if ij == (prefs.p(i, l) >= 0.5) {
                        t += 1;
                    } else {
                        n += 1;
                    }
                }
            }
            (t, n)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    TripleCounts {
        transitive,
        intransitive,
    }
}

/// Transitivity fraction; `None` for fewer than three documents or when no
/// triple qualifies.
pub fn transitivity(prefs: &PreferenceMatrix) -> Option<f64> {
    if prefs.k() < 3 {
        return None;
    }
    triple_counts(prefs).ratio()
}
