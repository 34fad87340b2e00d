use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregatorKind;
use crate::error::{Error, Result};
use crate::report::{rate_key, RunRecord, SweepReport};

use super::stats::{paired_t_test, SignificanceResult};

/// Lowest sampling rate that is not significantly worse than the unsampled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafeRate {
    pub aggregator: AggregatorKind,
    pub sampler: String,
    /// 1.0 when every sampled rate is significantly worse.
    pub rate: f64,
    /// Mean nDCG of the selected run minus the baseline mean.
    pub delta: f64,
    /// Test of the selected run against the baseline, absent for the 1.0 fallback.
    pub test: Option<SignificanceResult>,
    pub baseline_ndcg: f64,
}

/// Per-query nDCG values of two runs, paired on queries applicable in both.
fn paired_scores(run: &RunRecord, baseline: &RunRecord) -> (Vec<f64>, Vec<f64>) {
    let base: HashMap<&str, f64> = baseline
        .per_query
        .iter()
        .filter_map(|q| q.ndcg.map(|v| (q.query_id.as_str(), v)))
        .collect();
    run.per_query
        .iter()
        .filter_map(|q| Some((q.ndcg?, *base.get(q.query_id.as_str())?)))
        .unzip()
}

/// Finds the lowest rate at which `aggregator` with `sampler` is not
/// significantly less effective than the same aggregator on all pairs.
///
/// Of repeated runs at one rate the least effective repetition is tested.
/// Each rate is compared with a two-sided paired t-test on per-query nDCG,
/// Bonferroni-corrected by `test_count`; a rate qualifies unless the
/// difference is significant and negative.
pub fn minimal_safe_rate(
    sweep: &SweepReport,
    aggregator: AggregatorKind,
    sampler: &str,
    test_count: usize,
) -> Result<SafeRate> {
    let baseline = sweep.baseline(aggregator).ok_or_else(|| {
        Error::Input(format!("sweep has no unsampled baseline for {aggregator}"))
    })?;

    let mut worst_per_rate: BTreeMap<i64, &RunRecord> = BTreeMap::new();
    for run in sweep
        .records
        .iter()
        .filter(|r| r.aggregator == aggregator && r.sampler == sampler && !r.is_baseline())
    {
        worst_per_rate
            .entry(rate_key(run.rate))
            .and_modify(|cur| {
                let worse = run.ndcg < cur.ndcg
                    || (run.ndcg == cur.ndcg && run.repetition < cur.repetition);
                if worse {
                    *cur = run;
                }
            })
            .or_insert(run);
    }
    if worst_per_rate.is_empty() {
        return Err(Error::Input(format!(
            "sweep has no runs for {aggregator} with sampler {sampler}"
        )));
    }

    for run in worst_per_rate.values() {
        let (a, b) = paired_scores(run, baseline);
        let test = paired_t_test(&a, &b, test_count)?;
        let worse = test.significant && test.mean_difference < 0.0;
        if !worse {
            return Ok(SafeRate {
                aggregator,
                sampler: sampler.to_string(),
                rate: run.rate,
                delta: run.ndcg - baseline.ndcg,
                test: Some(test),
                baseline_ndcg: baseline.ndcg,
            });
        }
    }
    Ok(SafeRate {
        aggregator,
        sampler: sampler.to_string(),
        rate: 1.0,
        delta: 0.0,
        test: None,
        baseline_ndcg: baseline.ndcg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::QueryRecord;

    pub(crate) fn run(sampler: &str, rate: f64, rep: u32, scores: &[f64]) -> RunRecord {
        let per_query = scores
            .iter()
            .enumerate()
            .map(|(i, &v)| QueryRecord {
                query_id: format!("q{i}"),
                ndcg: Some(v),
                comparisons: 1,
                effective_rate: rate,
            })
            .collect();
        RunRecord::from_queries(
            "test",
            sampler,
            serde_json::Value::Null,
            AggregatorKind::Greedy,
            rate,
            rep,
            per_query,
            scores.len(),
        )
    }

    fn base() -> Vec<f64> {
        (0..20).map(|i| 0.4 + 0.02 * i as f64).collect()
    }

    #[test]
    fn identical_runs_accept_the_lowest_rate() {
        let mut records = vec![run("none", 1.0, 0, &base())];
        for r in 1..=19 {
            records.push(run("s-window", r as f64 * 0.05, 0, &base()));
        }
        let s = minimal_safe_rate(&SweepReport { records }, AggregatorKind::Greedy, "s-window", 19).unwrap();
        assert!((s.rate - 0.05).abs() < 1e-12);
        assert_eq!(s.delta, 0.0);
    }

    #[test]
    fn worst_repetition_decides() {
        let good = base();
        let bad: Vec<f64> = base().iter().map(|v| v - 0.2).collect();
        let records = vec![
            run("none", 1.0, 0, &base()),
            run("g-random", 0.5, 0, &good),
            run("g-random", 0.5, 1, &bad),
            run("g-random", 0.6, 0, &good),
        ];
        let s = minimal_safe_rate(&SweepReport { records }, AggregatorKind::Greedy, "g-random", 2).unwrap();
        assert!((s.rate - 0.6).abs() < 1e-12);
    }

    #[test]
    fn all_rates_worse_falls_back_to_full() {
        let bad: Vec<f64> = base().iter().map(|v| v - 0.2).collect();
        let records = vec![run("none", 1.0, 0, &base()), run("n-window", 0.5, 0, &bad)];
        let s = minimal_safe_rate(&SweepReport { records }, AggregatorKind::Greedy, "n-window", 19).unwrap();
        assert_eq!(s.rate, 1.0);
        assert!(s.test.is_none());
    }

    #[test]
    fn missing_baseline_or_runs() {
        let records = vec![run("s-window", 0.5, 0, &base())];
        let sweep = SweepReport { records };
        assert!(matches!(
            minimal_safe_rate(&sweep, AggregatorKind::Greedy, "s-window", 19),
            Err(Error::Input(_))
        ));
        let sweep = SweepReport { records: vec![run("none", 1.0, 0, &base())] };
        assert!(minimal_safe_rate(&sweep, AggregatorKind::Greedy, "s-window", 19).is_err());
    }
}
