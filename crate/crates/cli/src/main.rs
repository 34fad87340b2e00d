//! `sparsepairrank`: experiments with sparse pairwise re-ranking.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sparse_rerank::aggregation::{AggregatorKind, AggregatorSpec, PageRankDirection};
use sparse_rerank::diagnostics::ConsistencyMode;
use sparse_rerank::evaluation::{Gain, NdcgOptions};
use sparse_rerank::harness::{self, Corpus, GridConfig, SamplerKind, SamplerRequest, SweepConfig};
use sparse_rerank::io;
use sparse_rerank::simulation::SynthSpec;

#[derive(Parser, Debug)]
#[command(name = "sparsepairrank", version, about, args_override_self = true)]
struct Cli {
    /// TOML file with flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Re-rank a pointwise run with sampled pairwise preferences.
    Rerank(RerankArgs),
    /// Evaluate samplers and aggregators over a grid of sampling rates.
    Sweep(SweepArgs),
    /// Choose the S-Window skip size per rate by cross-validation.
    GridLambda(GridArgs),
    /// Consistency, complementarity and transitivity of a preference cache.
    Diagnose(DiagnoseArgs),
    /// Lowest sampling rate not significantly worse than all pairs.
    Significance(SignificanceArgs),
    /// Generate a synthetic preference cache, pointwise run and qrels.
    Synth(SynthArgs),
    /// Deepest candidate list a comparison budget affords at a rate.
    Depth(DepthArgs),
}

#[derive(Args, Debug)]
struct CorpusArgs {
    /// Preference cache CSV (`query_id,doc_i,doc_j,probability`).
    #[arg(long)]
    prefs: PathBuf,
    /// Pointwise TREC run defining each query's candidate order.
    #[arg(long)]
    pointwise: PathBuf,
}

#[derive(Args, Debug)]
struct AggregatorArgs {
    /// PageRank teleport weight.
    #[arg(long, default_value_t = 0.15)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-10)]
    pr_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pr_max_iter: usize,
    /// Which document of a comparison collects PageRank mass.
    #[arg(long, value_enum, default_value_t = Direction::Winner)]
    pagerank_direction: Direction,
    /// L2 penalty on Bradley-Terry scores.
    #[arg(long, default_value_t = 0.01)]
    bt_reg: f64,
    #[arg(long, default_value_t = 1e-8)]
    bt_tol: f64,
    #[arg(long, default_value_t = 500)]
    bt_max_iter: usize,
}

impl AggregatorArgs {
    fn spec(&self, kind: AggregatorKind) -> AggregatorSpec {
        AggregatorSpec {
            kind,
            gamma: self.gamma,
            pr_tol: self.pr_tol,
            pr_max_iter: self.pr_max_iter,
            pr_direction: match self.pagerank_direction {
                Direction::Winner => PageRankDirection::WinnerReceives,
                Direction::Loser => PageRankDirection::LoserReceives,
            },
            bt_reg: self.bt_reg,
            bt_tol: self.bt_tol,
            bt_max_iter: self.bt_max_iter,
            kwiksort_seed: 0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Direction {
    Winner,
    Loser,
}

#[derive(Args, Debug)]
struct NdcgArgs {
    /// nDCG cutoff.
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = GainArg::Exponential)]
    gain: GainArg,
    /// Count unjudged documents as non-relevant instead of removing them.
    #[arg(long)]
    include_unjudged: bool,
}

impl NdcgArgs {
    fn options(&self) -> NdcgOptions {
        NdcgOptions {
            depth: self.depth,
            judged_only: !self.include_unjudged,
            gain: match self.gain {
                GainArg::Exponential => Gain::Exponential,
                GainArg::Linear => Gain::Linear,
            },
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GainArg {
    Exponential,
    Linear,
}

fn parse_aggregator(s: &str) -> Result<AggregatorKind, String> {
    s.parse().map_err(|e: sparse_rerank::Error| e.to_string())
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    s.parse().map_err(|e: sparse_rerank::Error| e.to_string())
}

/// A list of counts given as `2..15`, `2..=15` or a single value.
#[derive(Clone, Debug)]
struct CountRange(Vec<usize>);

fn parse_range(s: &str) -> Result<CountRange, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a count"));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        Ok(CountRange((a..=b).collect()))
    } else {
        Ok(CountRange(vec![num(s)?]))
    }
}

#[derive(Args, Debug)]
struct RerankArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_parser = parse_sampler, default_value = "none")]
    sampler: SamplerKind,
    /// Sampling rate; window samplers derive their window size from it.
    #[arg(long)]
    rate: Option<f64>,
    /// Window size of N-Window and S-Window.
    #[arg(long)]
    m: Option<usize>,
    /// Skip size of S-Window.
    #[arg(long, default_value_t = 8)]
    lambda: usize,
    #[arg(long, value_parser = parse_aggregator, default_value = "greedy")]
    aggregator: AggregatorKind,
    #[command(flatten)]
    params: AggregatorArgs,
    /// Run tag written to the output.
    #[arg(long, default_value = "sparsepairrank")]
    tag: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RunFormat::Trec)]
    format: RunFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RunFormat {
    Trec,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, value_parser = parse_sampler, value_delimiter = ',', default_value = "g-random,n-window,s-window")]
    samplers: Vec<SamplerKind>,
    #[arg(long, value_parser = parse_aggregator, value_delimiter = ',', default_value = "additive,bradley-terry,greedy,pagerank")]
    aggregators: Vec<AggregatorKind>,
    /// Nominal sampling rates (default 0.05, 0.10, ..., 0.95).
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    repetitions: u32,
    #[arg(long, default_value_t = 8)]
    lambda: usize,
    #[command(flatten)]
    params: AggregatorArgs,
    #[command(flatten)]
    ndcg: NdcgArgs,
    /// Corpus label stored in every record.
    #[arg(long, default_value = "corpus")]
    corpus_tag: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SweepFormat::Jsonl)]
    format: SweepFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepFormat {
    /// One run record per line.
    Jsonl,
    /// One row per run and query.
    Csv,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    /// Skip sizes to try, e.g. `2..15`.
    #[arg(long, value_parser = parse_range, default_value = "2..15")]
    lambdas: CountRange,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, value_parser = parse_aggregator, default_value = "greedy")]
    aggregator: AggregatorKind,
    #[command(flatten)]
    params: AggregatorArgs,
    #[command(flatten)]
    ndcg: NdcgArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long)]
    prefs: PathBuf,
    /// Count consistent pairs over unordered or ordered pairs.
    #[arg(long, value_enum, default_value_t = Mode::Unordered)]
    consistency_mode: Mode,
    /// Accepted for uniformity; diagnostics are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Unordered,
    Ordered,
}

#[derive(Args, Debug)]
struct SignificanceArgs {
    /// Sweep report in JSON-lines format.
    #[arg(long)]
    sweep: PathBuf,
    /// Bonferroni factor.
    #[arg(long, default_value_t = 19)]
    test_count: usize,
    /// Accepted for uniformity; the tests are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    topics: usize,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Preset::Calibrated)]
    preset: Preset,
    #[arg(long)]
    sharpness: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    extremity: Option<f64>,
    #[arg(long)]
    bias: Option<f64>,
    #[arg(long)]
    pointwise_noise_sd: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the cache, pointwise run and qrels.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SynthFormat::Trec)]
    format: SynthFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Noisy, inconsistent preferences resembling a pairwise transformer.
    Calibrated,
    /// Noise-free logistic preferences.
    Noiseless,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SynthFormat {
    /// CSV preference cache plus TREC run and qrels.
    Trec,
}

#[derive(Args, Debug)]
struct DepthArgs {
    /// Comparisons available per query.
    #[arg(long, default_value_t = 2450)]
    budget: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,1.0")]
    rates: Vec<f64>,
    /// Accepted for uniformity; the calculation is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

/// Writes to the named file, or standard output.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load(corpus: &CorpusArgs, qrels: Option<&Path>, tag: &str) -> Result<Corpus> {
    harness::load_corpus(tag, &corpus.prefs, &corpus.pointwise, qrels)
        .with_context(|| format!("loading {} and {}", corpus.prefs.display(), corpus.pointwise.display()))
}

fn rates_or_default(rates: &[f64]) -> Vec<f64> {
    if rates.is_empty() {
        harness::default_rates()
    } else {
        rates.to_vec()
    }
}

fn cmd_rerank(a: &RerankArgs, threads: Option<usize>) -> Result<()> {
    let corpus = load(&a.corpus, None, "rerank")?;
    let sampler = SamplerRequest {
        kind: a.sampler,
        rate: a.rate,
        m: a.m,
        lambda: a.lambda,
    };
    let spec = a.params.spec(a.aggregator);
    let outcomes = harness::with_threads(threads, || harness::rerank(&corpus.queries, &sampler, &spec, a.seed, &a.tag))??;
    let comparisons: usize = outcomes.iter().map(|o| o.comparisons).sum();
    log::info!("{} queries re-ranked with {comparisons} comparisons", outcomes.len());
    for o in outcomes.iter().filter(|o| !o.converged) {
        log::warn!("query {}: {} did not converge", o.ranking.query_id(), a.aggregator);
    }

    let mut out = output(a.out.as_deref())?;
    match a.format {
        RunFormat::Trec => {
            let rankings: Vec<_> = outcomes.into_iter().map(|o| o.ranking).collect();
            io::write_run_to(&mut out, &rankings)?;
        }
        RunFormat::Json => {
            let records: Vec<_> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "query_id": o.ranking.query_id(),
                        "tag": o.ranking.tag(),
                        "comparisons": o.comparisons,
                        "converged": o.converged,
                        "iterations": o.iterations,
                        "entries": o.ranking.entries(),
                    })
                })
                .collect();
            write_json(&mut out, &records)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, threads: Option<usize>) -> Result<()> {
    let corpus = load(&a.corpus, Some(&a.qrels), &a.corpus_tag)?;
    let config = SweepConfig {
        samplers: a.samplers.clone(),
        aggregators: a.aggregators.clone(),
        rates: rates_or_default(&a.rates),
        repetitions: a.repetitions,
        base_seed: a.seed,
        lambda: a.lambda,
        aggregator_params: a.params.spec(AggregatorKind::Greedy),
        ndcg: a.ndcg.options(),
    };
    let report = harness::with_threads(threads, || harness::sweep(&corpus, &config))??;
    log::info!("{} run records", report.records.len());
    match (a.format, a.out.as_deref()) {
        (SweepFormat::Jsonl, Some(p)) => io::write_sweep_jsonl(p, &report)?,
        (SweepFormat::Csv, Some(p)) => io::write_sweep_csv(p, &report)?,
        (SweepFormat::Jsonl, None) => {
            let mut out = output(None)?;
            for r in &report.records {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
            out.flush()?;
        }
        (SweepFormat::Csv, None) => bail!("--format csv needs --out"),
    }
    Ok(())
}

fn cmd_grid(a: &GridArgs, threads: Option<usize>) -> Result<()> {
    let corpus = load(&a.corpus, Some(&a.qrels), "grid")?;
    let config = GridConfig {
        rates: rates_or_default(&a.rates),
        lambdas: a.lambdas.0.clone(),
        folds: a.folds,
        base_seed: a.seed,
        aggregator: a.params.spec(a.aggregator),
        ndcg: a.ndcg.options(),
    };
    let choices = harness::with_threads(threads, || harness::grid_lambda(&corpus, &config))??;
    let mut out = output(a.out.as_deref())?;
    match a.format {
        ReportFormat::Json => write_json(&mut out, &choices)?,
        ReportFormat::Text => {
            writeln!(out, "{:>6} {:>4} {:>7} {:>8}  per-fold", "rate", "m", "lambda", "cv-ndcg")?;
            for c in &choices {
                let folds: Vec<String> = c.folds.iter().map(|f| f.lambda.to_string()).collect();
                let m = c.m.map_or("-".to_string(), |m| m.to_string());
                writeln!(out, "{:>6.2} {:>4} {:>7} {:>8.4}  {}", c.rate, m, c.lambda, c.cv_ndcg, folds.join(" "))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_diagnose(a: &DiagnoseArgs, threads: Option<usize>) -> Result<()> {
    let matrices = io::read_preference_cache(&a.prefs)
        .with_context(|| format!("reading {}", a.prefs.display()))?;
    let mode = match a.consistency_mode {
        Mode::Unordered => ConsistencyMode::Unordered,
        Mode::Ordered => ConsistencyMode::Ordered,
    };
    let report = harness::with_threads(threads, || harness::diagnose(&matrices, mode))??;
    let mut out = output(a.out.as_deref())?;
    match a.format {
        ReportFormat::Json => write_json(&mut out, &report)?,
        ReportFormat::Text => {
            writeln!(out, "queries: {}", report.per_query.len())?;
            for (name, s) in [("consistency", report.consistency), ("transitivity", report.transitivity)] {
                match s {
                    Some(s) => writeln!(
                        out,
                        "{name:<13} mean {:.4}  std {:.4}  min {:.4}  max {:.4}",
                        s.mean, s.std, s.min, s.max
                    )?,
                    None => writeln!(out, "{name:<13} not applicable")?,
                }
            }
            writeln!(out, "epsilon-complementarity:")?;
            for (e, v) in report.epsilons.iter().zip(&report.complementarity) {
                writeln!(out, "  eps {e:.2}  {v:.4}")?;
            }
            writeln!(out, "probability histogram:")?;
            for b in &report.histogram {
                writeln!(out, "  [{:.2}, {:.2})  {:>8}  {:.4}", b.lower, b.upper, b.count, b.fraction)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_significance(a: &SignificanceArgs) -> Result<()> {
    let sweep = io::read_sweep_jsonl(&a.sweep).with_context(|| format!("reading {}", a.sweep.display()))?;
    let rows = harness::significance_table(&sweep, a.test_count)?;
    let mut out = output(a.out.as_deref())?;
    match a.format {
        ReportFormat::Json => write_json(&mut out, &rows)?,
        ReportFormat::Text => write!(out, "{}", harness::format_significance_table(&rows))?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut spec = match a.preset {
        Preset::Calibrated => SynthSpec::calibrated(a.k, 0),
        Preset::Noiseless => SynthSpec {
            k: a.k,
            ..SynthSpec::default()
        },
    };
    if let Some(v) = a.sharpness {
        spec.sharpness = v;
    }
    if let Some(v) = a.noise_sd {
        spec.noise_sd = v;
    }
    if let Some(v) = a.extremity {
        spec.extremity = v;
    }
    if let Some(v) = a.bias {
        spec.bias = v;
    }
    if let Some(v) = a.pointwise_noise_sd {
        spec.pointwise_noise_sd = v;
    }
    let SynthFormat::Trec = a.format;
    let (corpus, _) = harness::synth(&spec, a.topics, a.seed, "synthetic")?;
    harness::write_corpus(&a.out, &corpus)?;
    let spec_path = a.out.join("synth.json");
    let file = File::create(&spec_path).with_context(|| format!("creating {}", spec_path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json!({ "spec": spec, "topics": a.topics, "seed": a.seed }))?;
    log::info!("wrote {} queries to {}", corpus.queries.len(), a.out.display());
    Ok(())
}

fn cmd_depth(a: &DepthArgs) -> Result<()> {
    let rows: Vec<(f64, usize)> = a
        .rates
        .iter()
        .map(|&r| Ok((r, harness::depth_for_budget(a.budget, r)?)))
        .collect::<Result<_>>()?;
    let mut out = output(a.out.as_deref())?;
    match a.format {
        ReportFormat::Json => {
            let v: Vec<_> = rows.iter().map(|(r, k)| json!({ "rate": r, "k": k })).collect();
            write_json(&mut out, &json!({ "budget": a.budget, "depths": v }))?;
        }
        ReportFormat::Text => {
            for (r, k) in rows {
                writeln!(out, "rate {r:.2}: k = {k}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    match &cli.command {
        Command::Rerank(a) => cmd_rerank(a, threads),
        Command::Sweep(a) => cmd_sweep(a, threads),
        Command::GridLambda(a) => cmd_grid(a, threads),
        Command::Diagnose(a) => cmd_diagnose(a, threads),
        Command::Significance(a) => cmd_significance(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Depth(a) => cmd_depth(a),
    }
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        match config::apply::<Cli>(args, &path) {
            Ok(a) => args = a,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse_from(args);
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// A closed standard output (e.g. piping into `head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<std::io::Error>()
            .map(std::io::Error::kind)
            .or_else(|| c.downcast_ref::<serde_json::Error>()?.io_error_kind());
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}
