use sparse_rerank::evaluation::{NdcgOptions, Qrels};
use sparse_rerank::harness::{
    self, Corpus, GridConfig, Query, SamplerKind, SamplerRequest, SweepConfig,
};
use sparse_rerank::model::{DocId, PreferenceMatrix, TopKList};
use sparse_rerank::sampling::sample_skip_window;
use sparse_rerank::simulation::SynthSpec;
use sparse_rerank::{AggregatorKind, AggregatorSpec};

fn calibrated(topics: usize, seed: u64) -> Corpus {
    harness::synth(&SynthSpec::calibrated(50, 0), topics, seed, "cal").unwrap().0
}

#[test]
fn sweeps_do_not_depend_on_the_worker_count() {
    let corpus = harness::synth(&SynthSpec::calibrated(20, 0), 8, 4, "det").unwrap().0;
    let config = SweepConfig {
        aggregators: AggregatorKind::ALL.to_vec(),
        rates: vec![0.15, 0.5],
        repetitions: 3,
        base_seed: 4,
        ..SweepConfig::default()
    };
    let one = harness::with_threads(Some(1), || harness::sweep(&corpus, &config)).unwrap().unwrap();
    let three = harness::with_threads(Some(3), || harness::sweep(&corpus, &config)).unwrap().unwrap();
    assert_eq!(one, three);
}

#[test]
fn sweep_layout_follows_the_sampler_kinds() {
    let corpus = harness::synth(&SynthSpec::calibrated(12, 0), 5, 1, "lay").unwrap().0;
    let config = SweepConfig {
        aggregators: vec![AggregatorKind::Greedy, AggregatorKind::KwikSort],
        rates: vec![0.2, 0.4, 0.6],
        repetitions: 4,
        ..SweepConfig::default()
    };
    let report = harness::sweep(&corpus, &config).unwrap();
    let count = |agg, sampler: &str| {
        report.records.iter().filter(|r| r.aggregator == agg && r.sampler == sampler).count()
    };
    assert_eq!(count(AggregatorKind::Greedy, "none"), 1);
    assert_eq!(count(AggregatorKind::Greedy, "g-random"), 3 * 4);
    assert_eq!(count(AggregatorKind::Greedy, "n-window"), 3);
    assert_eq!(count(AggregatorKind::Greedy, "s-window"), 3);
    assert_eq!(count(AggregatorKind::KwikSort, "none"), 4);
    assert_eq!(report.records.len(), 1 + 12 + 3 + 3 + 4);
}

#[test]
fn nearly_full_windows_match_the_unsampled_run() {
    let corpus = calibrated(30, 6);
    let greedy = AggregatorSpec::new(AggregatorKind::Greedy);
    let opts = NdcgOptions::default();
    let mean = |req: &SamplerRequest| {
        let outs = harness::rerank(&corpus.queries, req, &greedy, 6, "t").unwrap();
        let used: usize = outs.iter().map(|o| o.comparisons).sum();
        assert!(used as f64 >= 0.9 * (corpus.queries.len() * 50 * 49) as f64);
        let v: Vec<f64> = outs
            .iter()
            .filter_map(|o| sparse_rerank::ndcg_at(&o.ranking, &corpus.qrels, opts))
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let full = mean(&SamplerRequest::none());
    // a skip size sharing a factor with k revisits partners; 7 is coprime with 50
    for kind in [SamplerKind::NWindow, SamplerKind::SWindow] {
        let near = mean(&SamplerRequest::at_rate(kind, 0.95, 7));
        assert!((full - near).abs() <= 0.005, "{kind}: {near} vs {full}");
    }
}

/// Queries whose preferences are correct on the pairs of one skip window
/// (either direction) and reversed elsewhere, with the relevant documents
/// at the bottom of the pointwise list.
fn planted(k: usize, m: usize, lambda: usize, topics: usize) -> Corpus {
    let informative = sample_skip_window(k, m, lambda).unwrap();
    let mut qrels = Qrels::new();
    let queries = (0..topics)
        .map(|t| {
            let qid = format!("p{t:02}");
            let docs: Vec<DocId> = (0..k).map(|i| DocId::new(format!("{qid}-{i}")).unwrap()).collect();
            // true relevance rises with the pointwise index
            for (i, d) in docs.iter().enumerate() {
                qrels.insert(qid.clone(), d.clone(), if i + 3 >= k { 2 } else { 0 });
            }
            let prefs = PreferenceMatrix::from_fn(qid.clone(), docs.clone(), |i, j| {
                let truthful = informative.contains(i, j) || informative.contains(j, i);
                if (i > j) == truthful { 0.9 } else { 0.1 }
            })
            .unwrap();
            Query { prefs, top: TopKList::new(qid, docs).unwrap() }
        })
        .collect();
    Corpus { tag: "planted".into(), queries, qrels }
}

#[test]
fn grid_search_finds_a_planted_skip_size() {
    // k prime, so only λ = 5 and its mirror 18 (outside the grid) reach
    // exactly the truthful pairs
    let k = 23;
    let corpus = planted(k, 4, 5, 10);
    let config = GridConfig { rates: vec![4.0 / 22.0], folds: 5, ..GridConfig::default() };
    let choice = &harness::grid_lambda(&corpus, &config).unwrap()[0];
    assert_eq!(choice.m, Some(4));
    assert_eq!(choice.lambda, 5, "{choice:?}");
    assert!(choice.folds.iter().all(|f| f.lambda == 5));
}

#[test]
fn grid_search_prefers_the_smallest_of_equal_skip_sizes() {
    let corpus = planted(20, 2, 7, 10);
    // every document equally relevant: all orderings score 1
    let mut qrels = Qrels::new();
    for q in &corpus.queries {
        for d in q.top.docs() {
            qrels.insert(q.id(), d.clone(), 1);
        }
    }
    let flat = Corpus { qrels, ..corpus };
    let config = GridConfig { rates: vec![0.2, 0.5], folds: 5, ..GridConfig::default() };
    for choice in harness::grid_lambda(&flat, &config).unwrap() {
        assert_eq!(choice.lambda, 2);
        assert!(choice.per_lambda.iter().all(|&(_, v)| v == 1.0));
    }
}

#[test]
fn rerank_rejects_mismatched_inputs() {
    let corpus = calibrated(2, 1);
    let bad = SamplerRequest { kind: SamplerKind::SWindow, rate: None, m: Some(50), lambda: 3 };
    assert!(harness::rerank(&corpus.queries, &bad, &AggregatorSpec::new(AggregatorKind::Greedy), 0, "t").is_err());
    let mut pr = AggregatorSpec::new(AggregatorKind::PageRank);
    pr.gamma = 1.5;
    assert!(harness::rerank(&corpus.queries, &SamplerRequest::none(), &pr, 0, "t").is_err());
}
