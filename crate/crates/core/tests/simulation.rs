use sparse_rerank::diagnostics::{consistency, transitivity, ConsistencyMode};
use sparse_rerank::harness::{self, SamplerRequest};
use sparse_rerank::simulation::{generate_corpus, generate_preferences, SynthSpec};
use sparse_rerank::{AggregatorKind, AggregatorSpec};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn more_noise_means_less_consistency() {
    let levels = [0.0, 0.5, 1.0, 2.0, 4.0];
    let means: Vec<f64> = levels
        .iter()
        .map(|&noise_sd| {
            let v: Vec<f64> = (0..60)
                .map(|seed| {
                    let spec = SynthSpec { k: 20, noise_sd, seed, ..SynthSpec::default() };
                    consistency(&generate_preferences(&spec, "q").unwrap().prefs, ConsistencyMode::Unordered)
                })
                .collect();
            mean(&v)
        })
        .collect();
    assert_eq!(means[0], 1.0);
    for w in means.windows(2) {
        assert!(w[1] < w[0], "{means:?}");
    }
}

#[test]
fn noiseless_preferences_are_recovered_by_every_aggregator() {
    let spec = SynthSpec { k: 30, pointwise_noise_sd: 2.0, ..SynthSpec::default() };
    let (corpus, synth) = harness::synth(&spec, 6, 8, "clean").unwrap();
    for (q, s) in corpus.queries.iter().zip(&synth) {
        assert_eq!(transitivity(&q.prefs), Some(1.0));
        let mut truth: Vec<usize> = (0..q.k()).collect();
        truth.sort_by(|&a, &b| s.latent[b].total_cmp(&s.latent[a]));
        let want: Vec<&str> = truth.iter().map(|&i| q.top.docs()[i].as_str()).collect();
        for kind in AggregatorKind::ALL {
            let out = harness::rerank_query(q, &SamplerRequest::none(), &AggregatorSpec::new(kind), 1, 0).unwrap();
            let got: Vec<&str> = out.ranking.doc_ids().map(|d| d.as_str()).collect();
            assert_eq!(got, want, "{kind} on {}", q.id());
        }
    }
}

#[test]
fn generation_is_reproducible_and_seed_sensitive() {
    let spec = SynthSpec::calibrated(25, 0);
    let a = generate_corpus(&spec, 5, 3).unwrap();
    let b = generate_corpus(&spec, 5, 3).unwrap();
    let c = generate_corpus(&spec, 5, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn calibrated_corpus_lands_near_its_targets() {
    let (corpus, _) = harness::synth(&SynthSpec::calibrated(50, 0), 50, 2, "cal").unwrap();
    let matrices: Vec<_> = corpus.queries.iter().map(|q| q.prefs.clone()).collect();
    let report = harness::diagnose(&matrices, ConsistencyMode::Unordered).unwrap();
    let cons = report.consistency.unwrap().mean;
    let trans = report.transitivity.unwrap().mean;
    assert!((cons - 0.498).abs() <= 0.05, "consistency {cons}");
    assert!((trans - 0.693).abs() <= 0.05, "transitivity {trans}");
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(generate_preferences(&SynthSpec { k: 1, ..SynthSpec::default() }, "q").is_err());
    assert!(generate_preferences(&SynthSpec { noise_sd: -1.0, ..SynthSpec::default() }, "q").is_err());
    assert!(generate_preferences(&SynthSpec { grade_probs: vec![0.0, 0.0], ..SynthSpec::default() }, "q").is_err());
}
