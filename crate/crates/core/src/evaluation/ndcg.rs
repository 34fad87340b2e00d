use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{DocId, Ranking};

/// Graded relevance judgments, `query -> doc -> grade`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<DocId, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a grade, returning the previous one.
    pub fn insert(&mut self, query_id: impl Into<String>, doc: DocId, grade: u32) -> Option<u32> {
        self.judgments.entry(query_id.into()).or_default().insert(doc, grade)
    }

    pub fn grade(&self, query_id: &str, doc: &DocId) -> Option<u32> {
        self.judgments.get(query_id)?.get(doc).copied()
    }

    /// All judgments of one query.
    pub fn query(&self, query_id: &str) -> Option<&BTreeMap<DocId, u32>> {
        self.judgments.get(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// Iterates `(query, doc, grade)` in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &DocId, u32)> {
        self.judgments
            .iter()
            .flat_map(|(q, docs)| docs.iter().map(move |(d, &g)| (q.as_str(), d, g)))
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether the query has at least one judgment with a positive grade.
    pub fn has_relevant(&self, query_id: &str) -> bool {
        self.query(query_id).is_some_and(|docs| docs.values().any(|&g| g > 0))
    }
}

/// Gain assigned to a relevance grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gain {
    /// `2^grade - 1`
    #[default]
    Exponential,
    /// `grade`
    Linear,
}

impl Gain {
    fn of(self, grade: u32) -> f64 {
        match self {
            Gain::Exponential => 2f64.powi(grade as i32) - 1.0,
            Gain::Linear => grade as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NdcgOptions {
    pub depth: usize,
    /// Drop unjudged documents and close the gaps before truncating.
    pub judged_only: bool,
    pub gain: Gain,
}

impl Default for NdcgOptions {
    fn default() -> Self {
        NdcgOptions {
            depth: 10,
            judged_only: true,
            gain: Gain::Exponential,
        }
    }
}

fn dcg(grades: impl Iterator<Item = u32>, gain: Gain) -> f64 {
    grades
        .enumerate()
        .map(|(rank0, g)| gain.of(g) / ((rank0 + 2) as f64).log2())
        .sum()
}

/// nDCG of a ranking at `opts.depth`.
///
/// The ideal ordering sorts all grades judged for the query. Returns `None`
/// when the query has no positively judged document or nothing is left to
/// evaluate; such queries are left out of averages.
pub fn ndcg_at(ranking: &Ranking, qrels: &Qrels, opts: NdcgOptions) -> Option<f64> {
    let judged = qrels.query(ranking.query_id())?;
    let mut ideal: Vec<u32> = judged.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter().take(opts.depth), opts.gain);
    if !(idcg > 0.0) {
        return None;
    }

    let grades: Vec<u32> = ranking
        .doc_ids()
        .filter_map(|d| match judged.get(d) {
            Some(&g) => Some(g),
            None if opts.judged_only => None,
            None => Some(0),
        })
        .take(opts.depth)
        .collect();
    if grades.is_empty() {
        return None;
    }
    Some(dcg(grades.into_iter(), opts.gain) / idcg)
}
