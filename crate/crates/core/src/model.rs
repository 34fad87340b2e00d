//! Shared data model: candidate lists, preference matrices, comparison sets
//! and rankings.
//!
//! Document indices are 0-based positions in the pointwise ranking: index 0
//! is the document the pointwise model ranked first.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

/// Opaque corpus document (or passage) identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("empty document id".into()));
        }
        Ok(DocId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_unique(query_id: &str, docs: &[DocId]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d) {
            return Err(Error::Validation(format!(
                "query {query_id}: duplicate document {d}"
            )));
        }
    }
    Ok(())
}

/// The top-k documents of a pointwise ranking, rank 1 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKList {
    query_id: String,
    docs: Vec<DocId>,
}

impl TopKList {
    pub fn new(query_id: impl Into<String>, docs: Vec<DocId>) -> Result<Self> {
        let query_id = query_id.into();
        if docs.len() < 2 {
            return Err(Error::Validation(format!(
                "query {query_id}: top-k list needs at least 2 documents, got {}",
                docs.len()
            )));
        }
        check_unique(&query_id, &docs)?;
        Ok(TopKList { query_id, docs })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    pub fn k(&self) -> usize {
        self.docs.len()
    }

    /// Keeps only the first `k` documents.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        TopKList::new(self.query_id.clone(), self.docs.iter().take(k).cloned().collect())
    }
}

/// Dense matrix of directed preference probabilities `p(i, j)` that
/// document `i` should rank above document `j`, for every ordered pair
/// `i != j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    query_id: String,
    docs: Vec<DocId>,
    // row-major k*k, diagonal unused (0.0)
    values: Vec<f64>,
}

impl PreferenceMatrix {
    /// Builds a matrix from `f(i, j)`, called once for every off-diagonal pair.
    pub fn from_fn(
        query_id: impl Into<String>,
        docs: Vec<DocId>,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let query_id = query_id.into();
        if docs.is_empty() {
            return Err(Error::Validation(format!("query {query_id}: no documents")));
        }
        check_unique(&query_id, &docs)?;
        let k = docs.len();
        let mut values = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let p = f(i, j);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "query {query_id}: probability p({}, {}) = {p} outside [0,1]",
                        docs[i], docs[j]
                    )));
                }
                values[i * k + j] = p;
            }
        }
        Ok(PreferenceMatrix {
            query_id,
            docs,
            values,
        })
    }

    /// Builds a matrix from nested rows; diagonal entries are ignored.
    pub fn from_rows(
        query_id: impl Into<String>,
        docs: Vec<DocId>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let k = docs.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Input(format!("expected a {k}x{k} matrix")));
        }
        Self::from_fn(query_id, docs, |i, j| rows[i][j])
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    pub fn k(&self) -> usize {
        self.docs.len()
    }

    /// Preference probability of document `i` over document `j` (`i != j`).
    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j, "self-pair ({i},{i})");
        self.values[i * self.docs.len() + j]
    }

    /// Number of stored entries, always `k² - k`.
    pub fn len(&self) -> usize {
        let k = self.k();
        k * k - k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(i, j, p(i, j))` over all ordered off-diagonal pairs, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let k = self.k();
        (0..k).flat_map(move |i| {
            (0..k)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.values[i * k + j]))
        })
    }

    /// Re-indexes the matrix so index `n` refers to `perm[n]` of the current order.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&x| x >= k || std::mem::replace(&mut seen[x], true))
        {
            return Err(Error::Input("not a permutation of the document indices".into()));
        }
        let docs = perm.iter().map(|&o| self.docs[o].clone()).collect();
        Self::from_fn(self.query_id.clone(), docs, |a, b| self.p(perm[a], perm[b]))
    }

    /// Reorders the matrix to follow the pointwise order of `top`.
    ///
    /// Both must hold exactly the same documents.
    pub fn aligned_to(&self, top: &TopKList) -> Result<Self> {
        if top.k() != self.k() {
            return Err(Error::Input(format!(
                "query {}: preference cache has k = {}, pointwise run has k = {}",
                self.query_id,
                self.k(),
                top.k()
            )));
        }
        let perm = top
            .docs()
            .iter()
            .map(|d| {
                self.docs.iter().position(|x| x == d).ok_or_else(|| {
                    Error::Input(format!(
                        "query {}: document {d} of the pointwise run has no preferences",
                        self.query_id
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.permuted(&perm)
    }
}

/// A set of ordered document-index pairs `(i, j)`, `i != j`, selected for
/// pairwise inference.
///
/// Construction guarantees the set is duplicate-free and that every index
/// takes part in at least one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonSet {
    k: usize,
    pairs: Vec<(usize, usize)>,
    mask: Vec<bool>,
}

impl ComparisonSet {
    pub fn new(k: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter(format!("comparison set needs k >= 2, got {k}")));
        }
        let mut mask = vec![false; k * k];
        let mut covered = vec![false; k];
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        for &(i, j) in &pairs {
            if i >= k || j >= k {
                return Err(Error::Validation(format!("pair ({i},{j}) outside 0..{k}")));
            }
            if i == j {
                return Err(Error::Validation(format!("self-pair ({i},{j})")));
            }
            if std::mem::replace(&mut mask[i * k + j], true) {
                return Err(Error::Validation(format!("duplicate pair ({i},{j})")));
            }
            covered[i] = true;
            covered[j] = true;
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(Error::Validation(format!(
                "document index {missing} is not part of any comparison"
            )));
        }
        pairs.sort_unstable();
        Ok(ComparisonSet { k, pairs, mask })
    }

    /// All `k² - k` ordered pairs.
    pub fn full(k: usize) -> Result<Self> {
        Self::new(k, (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.k && j < self.k && self.mask[i * self.k + j]
    }

    /// `|C| / (k² - k)`.
    pub fn rate(&self) -> f64 {
        self.len() as f64 / (self.k * self.k - self.k) as f64
    }

    /// Number of pairs with `i` as first element.
    pub fn out_degree(&self, i: usize) -> usize {
        (0..self.k).filter(|&j| self.contains(i, j)).count()
    }

    /// Number of pairs with `j` as second element.
    pub fn in_degree(&self, j: usize) -> usize {
        (0..self.k).filter(|&i| self.contains(i, j)).count()
    }

    /// Re-indexes the set the same way as [`PreferenceMatrix::permuted`].
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; self.k];
        if perm.len() != self.k {
            return Err(Error::Input("permutation length differs from k".into()));
        }
        for (new, &old) in perm.iter().enumerate() {
            if old >= self.k || inverse[old] != usize::MAX {
                return Err(Error::Input("not a permutation of the document indices".into()));
            }
            inverse[old] = new;
        }
        Self::new(self.k, self.pairs.iter().map(|&(i, j)| (inverse[i], inverse[j])))
    }

    /// The set with every pair reversed.
    pub fn transposed(&self) -> Self {
        let pairs = self.pairs.iter().map(|&(i, j)| (j, i));
        Self::new(self.k, pairs).expect("transpose of a valid set is valid")
    }
}

/// One ranked document with its aggregated score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub doc: DocId,
    pub score: f64,
}

/// Documents in final order with non-increasing scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    query_id: String,
    tag: String,
    entries: Vec<RankedDoc>,
}

impl Ranking {
    /// Orders `docs` by descending score; equal scores keep the input order,
    /// i.e. the better pointwise position wins.
    pub fn from_scores(
        query_id: impl Into<String>,
        tag: impl Into<String>,
        docs: &[DocId],
        scores: &[f64],
    ) -> Result<Self> {
        let query_id = query_id.into();
        if docs.len() != scores.len() {
            return Err(Error::Input(format!(
                "query {query_id}: {} documents but {} scores",
                docs.len(),
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| s.is_nan()) {
            return Err(Error::Validation(format!(
                "query {query_id}: score of {} is NaN",
                docs[i]
            )));
        }
        check_unique(&query_id, docs)?;
        let order = order_by_score(scores);
        let entries = order
            .into_iter()
            .map(|i| RankedDoc {
                doc: docs[i].clone(),
                score: scores[i],
            })
            .collect();
        Ok(Ranking {
            query_id,
            tag: tag.into(),
            entries,
        })
    }

    /// Takes entries already in rank order; scores must be non-increasing.
    pub fn from_entries(
        query_id: impl Into<String>,
        tag: impl Into<String>,
        entries: Vec<RankedDoc>,
    ) -> Result<Self> {
        let query_id = query_id.into();
        if entries.windows(2).any(|w| !(w[0].score >= w[1].score)) {
            return Err(Error::Validation(format!(
                "query {query_id}: scores are not non-increasing in rank order"
            )));
        }
        let docs: Vec<DocId> = entries.iter().map(|e| e.doc.clone()).collect();
        check_unique(&query_id, &docs)?;
        Ok(Ranking {
            query_id,
            tag: tag.into(),
            entries,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn entries(&self) -> &[RankedDoc] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &DocId> {
        self.entries.iter().map(|e| &e.doc)
    }
}

/// Indices sorted by descending score, ties by ascending index.
pub(crate) fn order_by_score(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// How the comparison set of a query is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerSpec {
    /// Uniform random pairs at rate `rate`.
    GlobalRandom { rate: f64, seed: u64 },
    /// The `m` pointwise successors of every document, wrapping around.
    NeighborhoodWindow { m: usize },
    /// Every `lambda`-th successor, `m` per document, wrapping around.
    SkipWindow { m: usize, lambda: usize },
    /// All `k² - k` pairs.
    None,
}

impl SamplerSpec {
    /// Short name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::GlobalRandom { .. } => "g-random",
            SamplerSpec::NeighborhoodWindow { .. } => "n-window",
            SamplerSpec::SkipWindow { .. } => "s-window",
            SamplerSpec::None => "none",
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
        }
        match *self {
            SamplerSpec::GlobalRandom { rate, .. } => sampling::check_rate(rate),
            SamplerSpec::NeighborhoodWindow { m } => sampling::check_window(k, m),
            SamplerSpec::SkipWindow { m, lambda } => {
                sampling::check_window(k, m)?;
                sampling::check_skip(lambda)
            }
            SamplerSpec::None => Ok(()),
        }
    }

    /// Exact size of the comparison set this spec produces for `k` documents.
    pub fn comparison_count(&self, k: usize) -> Result<usize> {
        self.validate(k)?;
        Ok(match *self {
            SamplerSpec::GlobalRandom { rate, .. } => sampling::global_random_size(k, rate),
            SamplerSpec::NeighborhoodWindow { m } => k * m,
            SamplerSpec::SkipWindow { m, lambda } => sampling::skip_window_size(k, m, lambda),
            SamplerSpec::None => k * k - k,
        })
    }

    /// `|C| / (k² - k)` of the set this spec produces for `k` documents.
    pub fn effective_rate(&self, k: usize) -> Result<f64> {
        Ok(self.comparison_count(k)? as f64 / (k * k - k) as f64)
    }

    /// Samples the comparison set for `k` documents.
    pub fn sample(&self, k: usize) -> Result<ComparisonSet> {
        match *self {
            SamplerSpec::GlobalRandom { rate, seed } => {
                sampling::sample_global_random(k, rate, seed)
            }
            SamplerSpec::NeighborhoodWindow { m } => sampling::sample_neighborhood_window(k, m),
            SamplerSpec::SkipWindow { m, lambda } => sampling::sample_skip_window(k, m, lambda),
            SamplerSpec::None => ComparisonSet::full(k),
        }
    }
}
