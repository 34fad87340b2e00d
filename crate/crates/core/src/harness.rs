//! Experiment orchestration: re-ranking runs, sampling-rate sweeps, skip
//! size selection, corpus diagnostics and significance tables.
//!
//! All randomness is derived from a base seed per (query, repetition), and
//! parallel work is collected in a fixed order, so results do not depend on
//! the number of worker threads.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, AggregateOutcome, AggregatorKind, AggregatorSpec};
use crate::diagnostics::{consistency, epsilon_complementarity, transitivity, ConsistencyMode};
use crate::error::{Error, Result};
use crate::evaluation::{mean, minimal_safe_rate, ndcg_at, NdcgOptions, Qrels, SafeRate};
use crate::io;
use crate::model::{PreferenceMatrix, Ranking, SamplerSpec, TopKList};
use crate::report::{QueryRecord, RunRecord, SweepReport, BASELINE_SAMPLER};
use crate::rng::{derive_seed, rng_from_seed, Stream};
use crate::sampling::window_for_rate;
use crate::simulation::{generate_corpus, SynthQuery, SynthSpec};

/// One query ready for re-ranking: preferences indexed in pointwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub prefs: PreferenceMatrix,
    pub top: TopKList,
}

impl Query {
    pub fn id(&self) -> &str {
        self.top.query_id()
    }

    pub fn k(&self) -> usize {
        self.top.k()
    }
}

/// Queries plus judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub tag: String,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
}

/// Pairs each cached matrix with the head of its pointwise ranking, `k`
/// documents deep. Pointwise queries without a cache are ignored.
pub fn align(matrices: Vec<PreferenceMatrix>, pointwise: &[Ranking]) -> Result<Vec<Query>> {
    let runs: HashMap<&str, &Ranking> = pointwise.iter().map(|r| (r.query_id(), r)).collect();
    matrices
        .into_iter()
        .map(|prefs| {
            let qid = prefs.query_id().to_string();
            let run = runs.get(qid.as_str()).ok_or_else(|| {
                Error::Input(format!("query {qid}: no pointwise ranking"))
            })?;
            if run.len() < prefs.k() {
                return Err(Error::Input(format!(
                    "query {qid}: preference cache has k = {} but the pointwise ranking lists {} documents",
                    prefs.k(),
                    run.len()
                )));
            }
            let top = io::top_k(run, Some(prefs.k()))?;
            let prefs = prefs.aligned_to(&top)?;
            Ok(Query { prefs, top })
        })
        .collect()
}

/// Loads a preference cache and pointwise run, plus qrels when given.
pub fn load_corpus(
    tag: impl Into<String>,
    prefs_path: impl AsRef<Path>,
    pointwise_path: impl AsRef<Path>,
    qrels_path: Option<&Path>,
) -> Result<Corpus> {
    let matrices = io::read_preference_cache(prefs_path)?;
    let pointwise = io::read_run(pointwise_path)?;
    let queries = align(matrices, &pointwise)?;
    let qrels = match qrels_path {
        Some(p) => io::read_qrels(p)?.0,
        None => Qrels::new(),
    };
    Ok(Corpus {
        tag: tag.into(),
        queries,
        qrels,
    })
}

// ---------------------------------------------------------------------------
// samplers

/// Sampler families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    GRandom,
    NWindow,
    SWindow,
    None,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::GRandom => "g-random",
            SamplerKind::NWindow => "n-window",
            SamplerKind::SWindow => "s-window",
            SamplerKind::None => BASELINE_SAMPLER,
        }
    }

    pub fn is_random(self) -> bool {
        self == SamplerKind::GRandom
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g-random" | "grandom" | "random" => Ok(SamplerKind::GRandom),
            "n-window" | "nwindow" => Ok(SamplerKind::NWindow),
            "s-window" | "swindow" => Ok(SamplerKind::SWindow),
            "none" | "all" => Ok(SamplerKind::None),
            _ => Err(Error::Parameter(format!(
                "unknown sampler `{s}` (expected g-random, n-window, s-window or none)"
            ))),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A sampler described independently of `k`: window samplers take either
/// `m` or a rate, from which `m` is derived per query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerRequest {
    pub kind: SamplerKind,
    pub rate: Option<f64>,
    pub m: Option<usize>,
    pub lambda: usize,
}

impl SamplerRequest {
    pub fn none() -> Self {
        SamplerRequest {
            kind: SamplerKind::None,
            rate: None,
            m: None,
            lambda: 1,
        }
    }

    pub fn at_rate(kind: SamplerKind, rate: f64, lambda: usize) -> Self {
        SamplerRequest {
            kind,
            rate: Some(rate),
            m: None,
            lambda,
        }
    }

    fn window(&self, k: usize) -> Result<usize> {
        match (self.m, self.rate) {
            (Some(m), _) => Ok(m),
            (None, Some(rate)) => window_for_rate(k, rate),
            (None, None) => Err(Error::Parameter(format!(
                "{} needs a window size or a rate",
                self.kind
            ))),
        }
    }

    /// The concrete sampler for a query with `k` documents.
    pub fn resolve(&self, k: usize, seed: u64) -> Result<SamplerSpec> {
        let spec = match self.kind {
            SamplerKind::GRandom => SamplerSpec::GlobalRandom {
                rate: self
                    .rate
                    .ok_or_else(|| Error::Parameter("g-random needs a rate".into()))?,
                seed,
            },
            SamplerKind::NWindow => SamplerSpec::NeighborhoodWindow { m: self.window(k)? },
            SamplerKind::SWindow => SamplerSpec::SkipWindow {
                m: self.window(k)?,
                lambda: self.lambda,
            },
            SamplerKind::None => SamplerSpec::None,
        };
        spec.validate(k)?;
        Ok(spec)
    }
}

/// Samples and aggregates one query. `repetition` selects the derived
/// sampler and KwikSort seeds.
pub fn rerank_query(
    query: &Query,
    sampler: &SamplerRequest,
    aggregator: &AggregatorSpec,
    base_seed: u64,
    repetition: u64,
) -> Result<AggregateOutcome> {
    let qid = query.id();
    let k = query.k();
    let spec = sampler.resolve(k, derive_seed(base_seed, Stream::Sampler, qid, repetition))?;
    let sample = spec.sample(k)?;
    let agg = aggregator.with_seed(derive_seed(base_seed, Stream::KwikSort, qid, repetition));
    aggregate(&query.prefs, &sample, &agg)
}

/// Re-ranks every query; rankings carry `tag`.
pub fn rerank(
    queries: &[Query],
    sampler: &SamplerRequest,
    aggregator: &AggregatorSpec,
    base_seed: u64,
    tag: &str,
) -> Result<Vec<AggregateOutcome>> {
    aggregator.validate()?;
    queries
        .par_iter()
        .map(|q| {
            let mut out = rerank_query(q, sampler, aggregator, base_seed, 0)?;
            out.ranking = out.ranking.with_tag(tag);
            Ok(out)
        })
        .collect()
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

// ---------------------------------------------------------------------------
// sweeps

/// The nominal grid `0.05, 0.10, ..., 0.95`.
pub fn default_rates() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub samplers: Vec<SamplerKind>,
    pub aggregators: Vec<AggregatorKind>,
    pub rates: Vec<f64>,
    /// Repetitions of random samplers and KwikSort; structured samplers run once.
    pub repetitions: u32,
    pub base_seed: u64,
    /// Skip size of S-Window.
    pub lambda: usize,
    /// Tuning parameters applied to every aggregator.
    pub aggregator_params: AggregatorSpec,
    pub ndcg: NdcgOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            samplers: vec![SamplerKind::GRandom, SamplerKind::NWindow, SamplerKind::SWindow],
            aggregators: vec![
                AggregatorKind::Additive,
                AggregatorKind::BradleyTerry,
                AggregatorKind::Greedy,
                AggregatorKind::PageRank,
            ],
            rates: default_rates(),
            repetitions: 10,
            base_seed: 0,
            lambda: 8,
            aggregator_params: AggregatorSpec::new(AggregatorKind::Greedy),
            ndcg: NdcgOptions::default(),
        }
    }
}

/// One planned run.
#[derive(Debug, Clone)]
struct RunPlan {
    sampler: SamplerRequest,
    aggregator: AggregatorSpec,
    rate: f64,
    repetition: u32,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.aggregators.is_empty() {
            return Err(Error::Parameter("sweep needs at least one aggregator".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Parameter("repetitions must be at least 1".into()));
        }
        if self.samplers.contains(&SamplerKind::None) {
            return Err(Error::Parameter(
                "the unsampled baseline is always included; list only sampling methods".into(),
            ));
        }
        for &r in &self.rates {
            crate::sampling::check_rate(r)?;
        }
        if self.lambda == 0 {
            return Err(Error::Parameter("lambda must be at least 1".into()));
        }
        Ok(())
    }

    /// Runs in report order: per aggregator its baseline, then every
    /// (sampler, rate, repetition). KwikSort samples its own comparisons
    /// and only gets baselines, one per repetition.
    fn plan(&self) -> Vec<RunPlan> {
        let mut plans = Vec::new();
        for &kind in &self.aggregators {
            let aggregator = AggregatorSpec {
                kind,
                ..self.aggregator_params
            };
            let baseline_reps = if kind == AggregatorKind::KwikSort {
                self.repetitions
            } else {
                1
            };
            for repetition in 0..baseline_reps {
                plans.push(RunPlan {
                    sampler: SamplerRequest::none(),
                    aggregator,
                    rate: 1.0,
                    repetition,
                });
            }
            if !kind.uses_sample() {
                continue;
            }
            for &sampler in &self.samplers {
                let reps = if sampler.is_random() { self.repetitions } else { 1 };
                for &rate in &self.rates {
                    for repetition in 0..reps {
                        plans.push(RunPlan {
                            sampler: SamplerRequest::at_rate(sampler, rate, self.lambda),
                            aggregator,
                            rate,
                            repetition,
                        });
                    }
                }
            }
        }
        plans
    }
}

fn run_params(plan: &RunPlan, corpus: &Corpus) -> serde_json::Value {
    let ks: Vec<usize> = corpus.queries.iter().map(Query::k).collect();
    let uniform_k = ks.first().filter(|&&k| ks.iter().all(|&x| x == k)).copied();
    let window = uniform_k.and_then(|k| plan.sampler.window(k).ok());
    match plan.sampler.kind {
        SamplerKind::GRandom | SamplerKind::None => serde_json::json!({}),
        SamplerKind::NWindow => serde_json::json!({ "m": window }),
        SamplerKind::SWindow => serde_json::json!({ "m": window, "lambda": plan.sampler.lambda }),
    }
}

/// Evaluates one query of one run.
fn query_record(
    corpus: &Corpus,
    query: &Query,
    plan: &RunPlan,
    base_seed: u64,
    ndcg: NdcgOptions,
) -> Result<QueryRecord> {
    let out = rerank_query(query, &plan.sampler, &plan.aggregator, base_seed, plan.repetition as u64)?;
    if !out.converged {
        log::warn!(
            "query {}: {} did not converge ({} iterations)",
            query.id(),
            plan.aggregator.kind,
            out.iterations
        );
    }
    let k = query.k();
    Ok(QueryRecord {
        query_id: query.id().to_string(),
        ndcg: ndcg_at(&out.ranking, &corpus.qrels, ndcg),
        comparisons: out.comparisons,
        effective_rate: out.comparisons as f64 / (k * k - k) as f64,
    })
}

/// Runs the full factorial sweep, parallel over (run, query) units.
pub fn sweep(corpus: &Corpus, config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    config.aggregator_params.validate()?;
    if corpus.queries.is_empty() {
        return Err(Error::Input("corpus has no queries".into()));
    }
    if !corpus.queries.iter().any(|q| corpus.qrels.has_relevant(q.id())) {
        return Err(Error::Input(
            "no query has a relevant judgment; nDCG is undefined everywhere".into(),
        ));
    }
    let plans = config.plan();
    let nq = corpus.queries.len();
    log::info!("sweep: {} runs over {nq} queries", plans.len());

    let units: Vec<QueryRecord> = (0..plans.len() * nq)
        .into_par_iter()
        .map(|u| {
            let (plan, query) = (&plans[u / nq], &corpus.queries[u % nq]);
            query_record(corpus, query, plan, config.base_seed, config.ndcg)
        })
        .collect::<Result<_>>()?;

    let pair_totals: usize = corpus.queries.iter().map(|q| q.k() * q.k() - q.k()).sum();
    let mut units = units.into_iter();
    let records = plans
        .iter()
        .map(|plan| {
            RunRecord::from_queries(
                corpus.tag.clone(),
                plan.sampler.kind.name(),
                run_params(plan, corpus),
                plan.aggregator.kind,
                plan.rate,
                plan.repetition,
                units.by_ref().take(nq).collect(),
                pair_totals,
            )
        })
        .collect();
    Ok(SweepReport { records })
}

// ---------------------------------------------------------------------------
// skip size selection

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub rates: Vec<f64>,
    pub lambdas: Vec<usize>,
    pub folds: usize,
    pub base_seed: u64,
    pub aggregator: AggregatorSpec,
    pub ndcg: NdcgOptions,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rates: default_rates(),
            lambdas: (2..=15).collect(),
            folds: 5,
            base_seed: 0,
            aggregator: AggregatorSpec::new(AggregatorKind::Greedy),
            ndcg: NdcgOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldChoice {
    pub fold: usize,
    pub lambda: usize,
    /// Mean nDCG of the chosen skip size on the other folds.
    pub train_ndcg: f64,
    /// Mean nDCG of the chosen skip size on this fold.
    pub heldout_ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateChoice {
    pub rate: f64,
    /// Window size when all queries share `k`.
    pub m: Option<usize>,
    pub folds: Vec<FoldChoice>,
    /// Most frequent fold winner; ties go to the smaller skip size.
    pub lambda: usize,
    /// Mean held-out nDCG over folds.
    pub cv_ndcg: f64,
    /// Mean nDCG of every skip size on all queries.
    pub per_lambda: Vec<(usize, f64)>,
}

/// Assigns query positions to `folds` disjoint folds after a seeded shuffle.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Parameter("at least 2 folds are needed".into()));
    }
    if n < folds {
        return Err(Error::Input(format!("{n} queries cannot fill {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, Stream::Folds, "", 0)));
    let mut fold_of = vec![0; n];
    for (pos, &q) in order.iter().enumerate() {
        fold_of[q] = pos % folds;
    }
    Ok(fold_of)
}

/// Mean of the applicable values among `members`.
fn mean_over(values: &[Option<f64>], members: impl Iterator<Item = usize>) -> f64 {
    let v: Vec<f64> = members.filter_map(|q| values[q]).collect();
    if v.is_empty() {
        f64::NAN
    } else {
        mean(&v)
    }
}

/// Index of the best score, ties to the earliest; NaN never wins.
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] || scores[best].is_nan() {
            best = i;
        }
    }
    best
}

/// Selects the S-Window skip size per rate by cross-validation: each fold's
/// skip size maximizes mean nDCG on the remaining folds and is scored on the
/// fold itself.
pub fn grid_lambda(corpus: &Corpus, config: &GridConfig) -> Result<Vec<RateChoice>> {
    if config.lambdas.is_empty() || config.lambdas.contains(&0) {
        return Err(Error::Parameter("skip sizes must be a non-empty list of positive values".into()));
    }
    if !config.aggregator.kind.uses_sample() {
        return Err(Error::Parameter(format!(
            "{} does not use a comparison sample",
            config.aggregator.kind
        )));
    }
    config.aggregator.validate()?;
    let mut lambdas = config.lambdas.clone();
    lambdas.sort_unstable();
    lambdas.dedup();
    let nq = corpus.queries.len();
    let fold_of = fold_assignment(nq, config.folds, config.base_seed)?;

    config
        .rates
        .iter()
        .map(|&rate| {
            let grid: Vec<Vec<Option<f64>>> = lambdas
                .iter()
                .map(|&lambda| {
                    let sampler = SamplerRequest::at_rate(SamplerKind::SWindow, rate, lambda);
                    corpus
                        .queries
                        .par_iter()
                        .map(|q| {
                            let out = rerank_query(q, &sampler, &config.aggregator, config.base_seed, 0)?;
                            Ok(ndcg_at(&out.ranking, &corpus.qrels, config.ndcg))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;

            let folds: Vec<FoldChoice> = (0..config.folds)
                .map(|fold| {
                    let train = |l: usize| mean_over(&grid[l], (0..nq).filter(|&q| fold_of[q] != fold));
                    let scores: Vec<f64> = (0..lambdas.len()).map(train).collect();
                    let best = argmax_first(&scores);
                    FoldChoice {
                        fold,
                        lambda: lambdas[best],
                        train_ndcg: scores[best],
                        heldout_ndcg: mean_over(&grid[best], (0..nq).filter(|&q| fold_of[q] == fold)),
                    }
                })
                .collect();

            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for f in &folds {
                *votes.entry(f.lambda).or_default() += 1;
            }
            let top = votes.values().copied().max().unwrap_or(0);
            let lambda = votes
                .iter()
                .find(|&(_, &n)| n == top)
                .map(|(&l, _)| l)
                .unwrap_or(lambdas[0]);
            let heldout: Vec<f64> = folds.iter().map(|f| f.heldout_ndcg).filter(|v| !v.is_nan()).collect();
            let ks: Vec<usize> = corpus.queries.iter().map(Query::k).collect();
            let m = match ks.first() {
                Some(&k) if ks.iter().all(|&x| x == k) => Some(window_for_rate(k, rate)?),
                _ => None,
            };
            Ok(RateChoice {
                rate,
                m,
                folds,
                lambda,
                cv_ndcg: if heldout.is_empty() { f64::NAN } else { mean(&heldout) },
                per_lambda: lambdas
                    .iter()
                    .zip(&grid)
                    .map(|(&l, v)| (l, mean_over(v, 0..nq)))
                    .collect(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// diagnostics

/// Mean, sample standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let m = mean(values);
        let n = values.len();
        let std = if n > 1 {
            let sq: Vec<f64> = values.iter().map(|v| (v - m).powi(2)).collect();
            (mean(&sq) * n as f64 / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Summary {
            count: n,
            mean: m,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDiagnostics {
    pub query_id: String,
    pub k: usize,
    pub consistency: f64,
    /// `None` for fewer than three documents.
    pub transitivity: Option<f64>,
    /// ε-complementarity at each ε of the report grid.
    pub complementarity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub consistency_mode: ConsistencyMode,
    pub consistency: Option<Summary>,
    pub transitivity: Option<Summary>,
    pub epsilons: Vec<f64>,
    /// Mean ε-complementarity over queries, one value per ε.
    pub complementarity: Vec<f64>,
    /// Probabilities in 20 equal bins over `[0, 1]`; the last bin includes 1.
    pub histogram: Vec<HistogramBin>,
    pub per_query: Vec<QueryDiagnostics>,
}

/// `0.05, 0.10, ..., 0.50`.
pub fn epsilon_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 20.0).collect()
}

pub fn diagnose(matrices: &[PreferenceMatrix], mode: ConsistencyMode) -> Result<DiagnosticsReport> {
    let epsilons = epsilon_grid();
    let per_query: Vec<QueryDiagnostics> = matrices
        .par_iter()
        .map(|m| {
            Ok(QueryDiagnostics {
                query_id: m.query_id().to_string(),
                k: m.k(),
                consistency: consistency(m, mode),
                transitivity: transitivity(m),
                complementarity: epsilons
                    .iter()
                    .map(|&e| epsilon_complementarity(m, e))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;

    const BINS: usize = 20;
    let mut counts = [0usize; BINS];
    for m in matrices {
        for (_, _, p) in m.entries() {
            counts[((p * BINS as f64) as usize).min(BINS - 1)] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| HistogramBin {
            lower: b as f64 / BINS as f64,
            upper: (b + 1) as f64 / BINS as f64,
            count,
            fraction: if total > 0 { count as f64 / total as f64 } else { 0.0 },
        })
        .collect();

    let cons: Vec<f64> = per_query.iter().map(|q| q.consistency).collect();
    let trans: Vec<f64> = per_query.iter().filter_map(|q| q.transitivity).collect();
    let complementarity = (0..epsilons.len())
        .map(|e| {
            let v: Vec<f64> = per_query.iter().map(|q| q.complementarity[e]).collect();
            if v.is_empty() { f64::NAN } else { mean(&v) }
        })
        .collect();
    Ok(DiagnosticsReport {
        consistency_mode: mode,
        consistency: Summary::of(&cons),
        transitivity: Summary::of(&trans),
        epsilons,
        complementarity,
        histogram,
        per_query,
    })
}

// ---------------------------------------------------------------------------
// significance and budgets

/// Lowest safe rate of every (aggregator, sampler) combination in a sweep.
pub fn significance_table(sweep: &SweepReport, test_count: usize) -> Result<Vec<SafeRate>> {
    sweep
        .combinations()
        .into_iter()
        .map(|(agg, sampler)| minimal_safe_rate(sweep, agg, &sampler, test_count))
        .collect()
}

/// Plain-text table: one row per combination, rate with its nDCG delta.
pub fn format_significance_table(rows: &[SafeRate]) -> String {
    let mut out = format!(
        "{:<14} {:<10} {:>9}  {}\n",
        "aggregator", "sampler", "baseline", "lowest similarly effective rate (delta)"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<14} {:<10} {:>9.3}  {:.2} ({:+.3})\n",
            r.aggregator.name(),
            r.sampler,
            r.baseline_ndcg,
            r.rate,
            r.delta
        ));
    }
    out
}

/// Largest re-ranking depth `k` whose sampled comparisons
/// `rate·(k² - k)` fit in `budget`.
pub fn depth_for_budget(budget: usize, rate: f64) -> Result<usize> {
    crate::sampling::check_rate(rate)?;
    let fits = |k: usize| rate * (k * k - k) as f64 <= budget as f64 + 1e-9;
    if !fits(2) {
        return Err(Error::Parameter(format!(
            "a budget of {budget} comparisons cannot cover two documents at rate {rate}"
        )));
    }
    let mut k = 2;
    while fits(k + 1) {
        k += 1;
    }
    Ok(k)
}

// ---------------------------------------------------------------------------
// synthetic corpora

/// Generates a synthetic corpus of `topics` queries.
pub fn synth(template: &SynthSpec, topics: usize, base_seed: u64, tag: &str) -> Result<(Corpus, Vec<SynthQuery>)> {
    if topics == 0 {
        return Err(Error::Parameter("at least one topic is needed".into()));
    }
    let generated = generate_corpus(template, topics, base_seed)?;
    let queries = generated
        .iter()
        .map(|g| Query {
            prefs: g.prefs.clone(),
            top: g.top.clone(),
        })
        .collect();
    let qrels = crate::simulation::merged_qrels(&generated);
    Ok((
        Corpus {
            tag: tag.to_string(),
            queries,
            qrels,
        },
        generated,
    ))
}

/// The candidate lists as a pointwise run scored `k, k - 1, ..., 1`.
pub fn pointwise_rankings(queries: &[Query], tag: &str) -> Result<Vec<Ranking>> {
    queries
        .iter()
        .map(|q| {
            let k = q.k();
            let scores: Vec<f64> = (0..k).map(|i| (k - i) as f64).collect();
            Ranking::from_scores(q.id(), tag, q.top.docs(), &scores)
        })
        .collect()
}

/// Writes `prefs.csv`, `pointwise.run` and `qrels.txt` into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let matrices: Vec<PreferenceMatrix> = corpus.queries.iter().map(|q| q.prefs.clone()).collect();
    io::write_preference_cache(dir.join(PREFS_FILE), &matrices)?;
    io::write_run(dir.join(POINTWISE_FILE), &pointwise_rankings(&corpus.queries, "pointwise")?)?;
    io::write_qrels(dir.join(QRELS_FILE), &corpus.qrels)
}

pub const PREFS_FILE: &str = "prefs.csv";
pub const POINTWISE_FILE: &str = "pointwise.run";
pub const QRELS_FILE: &str = "qrels.txt";
