//! On-disk formats.
//!
//! * Preference cache: CSV with header `query_id,doc_i,doc_j,probability`,
//!   one row per ordered pair, all `k² - k` pairs of every query present.
//! * Runs: TREC `qid Q0 docid rank score tag`, whitespace-separated.
//! * Qrels: TREC `qid 0 docid grade`.
//! * Sweep reports: one JSON run record per line, or a flat per-query CSV.
//!
//! Readers return queries in order of first appearance in the file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Qrels;
use crate::model::{DocId, PreferenceMatrix, RankedDoc, Ranking, TopKList};
use crate::report::{RunRecord, SweepReport};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Groups items by query id, keeping first-appearance order.
struct Grouped<T> {
    order: Vec<String>,
    groups: HashMap<String, Vec<T>>,
}

impl<T> Grouped<T> {
    fn new() -> Self {
        Grouped {
            order: Vec::new(),
            groups: HashMap::new(),
        }
    }

    fn push(&mut self, query_id: &str, item: T) {
        if !self.groups.contains_key(query_id) {
            self.order.push(query_id.to_string());
        }
        self.groups.entry(query_id.to_string()).or_default().push(item);
    }

    fn into_iter(mut self) -> impl Iterator<Item = (String, Vec<T>)> {
        self.order.into_iter().map(move |q| {
            let items = self.groups.remove(&q).unwrap_or_default();
            (q, items)
        })
    }
}

// ---------------------------------------------------------------------------
// preference cache

#[derive(Debug, Deserialize)]
struct CacheRow {
    query_id: String,
    doc_i: String,
    doc_j: String,
    probability: f64,
}

/// Reads a preference cache. Documents are indexed in order of first
/// appearance within each query; use [`PreferenceMatrix::aligned_to`] to
/// put them in pointwise order.
pub fn read_preference_cache(path: impl AsRef<Path>) -> Result<Vec<PreferenceMatrix>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);

    struct Pending {
        docs: Vec<DocId>,
        index: HashMap<DocId, usize>,
        values: HashMap<(usize, usize), f64>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, Pending> = HashMap::new();

    let headers = reader.headers()?.clone();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: CacheRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(path, line, e.to_string()))?;
        if !(0.0..=1.0).contains(&row.probability) {
            return Err(Error::Validation(format!(
                "{}:{line}: query {}, pair ({},{}): probability {} outside [0, 1]",
                path.display(),
                row.query_id,
                row.doc_i,
                row.doc_j,
                row.probability
            )));
        }
        if row.doc_i == row.doc_j {
            return Err(Error::Validation(format!(
                "{}:{line}: query {}: self-pair ({},{})",
                path.display(),
                row.query_id,
                row.doc_i,
                row.doc_j
            )));
        }
        if !pending.contains_key(&row.query_id) {
            order.push(row.query_id.clone());
        }
        let q = pending.entry(row.query_id.clone()).or_insert_with(|| Pending {
            docs: Vec::new(),
            index: HashMap::new(),
            values: HashMap::new(),
        });
        let mut idx = |name: &str| -> Result<usize> {
            let doc = DocId::new(name)?;
            if let Some(&i) = q.index.get(&doc) {
                return Ok(i);
            }
            q.docs.push(doc.clone());
            q.index.insert(doc, q.docs.len() - 1);
            Ok(q.docs.len() - 1)
        };
        let (i, j) = (idx(&row.doc_i)?, idx(&row.doc_j)?);
        if q.values.insert((i, j), row.probability).is_some() {
            return Err(Error::Validation(format!(
                "{}:{line}: query {}: pair ({},{}) appears twice",
                path.display(),
                row.query_id,
                row.doc_i,
                row.doc_j
            )));
        }
    }

    order
        .into_iter()
        .map(|qid| {
            let q = pending.remove(&qid).expect("every grouped query is pending");
            let k = q.docs.len();
            for i in 0..k {
                for j in (0..k).filter(|&j| j != i) {
                    if !q.values.contains_key(&(i, j)) {
                        return Err(Error::MissingPair {
                            query: qid.clone(),
                            i: q.docs[i].to_string(),
                            j: q.docs[j].to_string(),
                        });
                    }
                }
            }
            PreferenceMatrix::from_fn(qid, q.docs, |i, j| q.values[&(i, j)])
        })
        .collect()
}

/// Writes matrices row by row in index order. Probabilities use the
/// shortest representation that reads back to the same value.
pub fn write_preference_cache(path: impl AsRef<Path>, matrices: &[PreferenceMatrix]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(create(path)?);
    writer.write_record(["query_id", "doc_i", "doc_j", "probability"])?;
    for m in matrices {
        for (i, j, p) in m.entries() {
            writer.write_record([
                m.query_id(),
                m.docs()[i].as_str(),
                m.docs()[j].as_str(),
                &p.to_string(),
            ])?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// TREC runs

struct RunLine {
    doc: DocId,
    rank: u64,
    score: f64,
    tag: String,
    line: usize,
}

/// Reads a TREC run. Entries are ordered by rank when the ranks of a query
/// are exactly `1..=n`; otherwise by descending score, ties in file order.
/// An empty file yields no rankings.
pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<Ranking>> {
    let path = path.as_ref();
    let mut grouped: Grouped<RunLine> = Grouped::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                line_no,
                format!("expected 6 fields `qid Q0 docid rank score tag`, found {}", fields.len()),
            ));
        }
        let rank = fields[3]
            .parse::<u64>()
            .map_err(|_| parse_error(path, line_no, format!("rank `{}` is not a non-negative integer", fields[3])))?;
        let score = fields[4]
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or_else(|| parse_error(path, line_no, format!("score `{}` is not a finite number", fields[4])))?;
        let doc = DocId::new(fields[2]).map_err(|e| parse_error(path, line_no, e.to_string()))?;
        grouped.push(
            fields[0],
            RunLine {
                doc,
                rank,
                score,
                tag: fields[5].to_string(),
                line: line_no,
            },
        );
    }

    grouped
        .into_iter()
        .map(|(qid, mut lines)| {
            let mut seen = HashMap::new();
            for l in &lines {
                if let Some(first) = seen.insert(l.doc.clone(), l.line) {
                    return Err(parse_error(
                        path,
                        l.line,
                        format!("query {qid}: document {} already listed on line {first}", l.doc),
                    ));
                }
            }
            let mut ranks: Vec<u64> = lines.iter().map(|l| l.rank).collect();
            ranks.sort_unstable();
            let contiguous = ranks.iter().zip(1u64..).all(|(&r, want)| r == want);
            if contiguous {
                lines.sort_by_key(|l| l.rank);
            } else {
                // stable sort keeps file order among equal scores
                lines.sort_by(|a, b| b.score.total_cmp(&a.score));
            }
            let tag = lines[0].tag.clone();
            let entries = lines
                .into_iter()
                .map(|l| RankedDoc {
                    doc: l.doc,
                    score: l.score,
                })
                .collect();
            Ranking::from_entries(qid, tag, entries).map_err(|e| {
                Error::Validation(format!("{}: {e}; ranks disagree with scores", path.display()))
            })
        })
        .collect()
}

/// Writes rankings as a TREC run, ranks from 1, scores with six decimals.
pub fn write_run(path: impl AsRef<Path>, rankings: &[Ranking]) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    write_run_to(&mut out, rankings).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes rankings in TREC run format to any writer.
pub fn write_run_to(out: &mut impl Write, rankings: &[Ranking]) -> std::io::Result<()> {
    for r in rankings {
        for (rank, e) in r.entries().iter().enumerate() {
            writeln!(
                out,
                "{} Q0 {} {} {:.6} {}",
                r.query_id(),
                e.doc,
                rank + 1,
                e.score,
                r.tag()
            )?;
        }
    }
    Ok(())
}

/// The candidate list of a pointwise ranking, optionally cut to `depth`.
pub fn top_k(ranking: &Ranking, depth: Option<usize>) -> Result<TopKList> {
    let docs: Vec<DocId> = ranking.doc_ids().cloned().collect();
    let list = TopKList::new(ranking.query_id(), docs)?;
    match depth {
        Some(k) if k < list.k() => list.truncated(k),
        _ => Ok(list),
    }
}

// ---------------------------------------------------------------------------
// qrels

/// Reads TREC qrels. Negative grades become 0 and a repeated
/// `(query, doc)` keeps its last grade; both produce a warning, which is
/// logged and returned.
pub fn read_qrels(path: impl AsRef<Path>) -> Result<(Qrels, Vec<String>)> {
    let path = path.as_ref();
    let mut qrels = Qrels::new();
    let mut warnings = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(parse_error(
                path,
                line_no,
                format!("expected 4 fields `qid 0 docid grade`, found {}", fields.len()),
            ));
        }
        let raw = fields[3]
            .parse::<i64>()
            .map_err(|_| parse_error(path, line_no, format!("grade `{}` is not an integer", fields[3])))?;
        let doc = DocId::new(fields[2]).map_err(|e| parse_error(path, line_no, e.to_string()))?;
        let grade = if raw < 0 {
            warnings.push(format!(
                "{}:{line_no}: negative grade {raw} for {} {} treated as 0",
                path.display(),
                fields[0],
                doc
            ));
            0
        } else {
            u32::try_from(raw)
                .map_err(|_| parse_error(path, line_no, format!("grade {raw} is too large")))?
        };
        if let Some(previous) = qrels.insert(fields[0], doc, grade) {
            warnings.push(format!(
                "{}:{line_no}: duplicate judgment for {} {} (grade {previous} replaced by {grade})",
                path.display(),
                fields[0],
                fields[2]
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((qrels, warnings))
}

pub fn write_qrels(path: impl AsRef<Path>, qrels: &Qrels) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let written: std::io::Result<()> = qrels
        .iter()
        .try_for_each(|(q, d, g)| writeln!(out, "{q} 0 {d} {g}"));
    written
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// sweep reports

/// Writes one JSON run record per line.
pub fn write_sweep_jsonl(path: impl AsRef<Path>, report: &SweepReport) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for record in &report.records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sweep_jsonl(path: impl AsRef<Path>) -> Result<SweepReport> {
    let path = path.as_ref();
    let mut records = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line)
            .map_err(|e| parse_error(path, n + 1, e.to_string()))?;
        records.push(record);
    }
    Ok(SweepReport { records })
}

/// One row of the flat sweep export.
#[derive(Debug, Serialize)]
struct SweepRow<'a> {
    corpus_tag: &'a str,
    query_id: &'a str,
    sampler: &'a str,
    params: String,
    aggregator: &'a str,
    rate: f64,
    effective_rate: f64,
    repetition: u32,
    ndcg: Option<f64>,
    comparisons: usize,
}

/// Writes one CSV row per (run, query) for plotting tools.
pub fn write_sweep_csv(path: impl AsRef<Path>, report: &SweepReport) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(create(path)?);
    for run in &report.records {
        let params = run.params.to_string();
        for q in &run.per_query {
            writer.serialize(SweepRow {
                corpus_tag: &run.corpus_tag,
                query_id: &q.query_id,
                sampler: &run.sampler,
                params: params.clone(),
                aggregator: run.aggregator.name(),
                rate: run.rate,
                effective_rate: q.effective_rate,
                repetition: run.repetition,
                ndcg: q.ndcg,
                comparisons: q.comparisons,
            })?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
