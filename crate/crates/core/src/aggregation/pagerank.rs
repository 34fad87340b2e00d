use crate::error::Result;
use crate::model::{ComparisonSet, PreferenceMatrix, Ranking};

use super::{check_dims, AggregatorSpec, PageRankDirection};

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub ranking: Ranking,
    /// Scores by document index; non-negative, summing to one.
    pub scores: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Weighted edges `(from, to, weight)` of the comparison graph.
fn edges(
    prefs: &PreferenceMatrix,
    sample: &ComparisonSet,
    direction: PageRankDirection,
) -> Vec<(usize, usize, f64)> {
    sample
        .pairs()
        .iter()
        .map(|&(i, j)| {
            let p = prefs.p(i, j);
            match direction {
                PageRankDirection::WinnerReceives => (j, i, p),
                PageRankDirection::LoserReceives => (i, j, p),
            }
        })
        .collect()
}

/// Weighted PageRank over the graph induced by the sampled comparisons.
///
/// `s_i = γ/k + (1 - γ)·Σ_{j→i} w(j, i)/W_j·s_j`, where `W_j` sums the
/// weights leaving `j` over sampled pairs only. A document whose outgoing
/// weight is zero spreads its mass evenly over all documents. Iteration
/// starts from the uniform vector and stops once no score moves by more
/// than `pr_tol`.
pub fn aggregate_pagerank(
    prefs: &PreferenceMatrix,
    sample: &ComparisonSet,
    spec: &AggregatorSpec,
) -> Result<PageRankResult> {
    check_dims(prefs, sample)?;
    spec.validate()?;
    let k = prefs.k();
    let kf = k as f64;
    let gamma = spec.gamma;

    let edges = edges(prefs, sample, spec.pr_direction);
    let mut out_weight = vec![0.0; k];
    for &(from, _, w) in &edges {
        out_weight[from] += w;
    }
    let transitions: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .filter(|&(from, _, _)| out_weight[from] > 0.0)
        .map(|(from, to, w)| (from, to, w / out_weight[from]))
        .collect();
    let dangling: Vec<usize> = (0..k).filter(|&j| !(out_weight[j] > 0.0)).collect();

    let mut scores = vec![1.0 / kf; k];
    let mut next = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < spec.pr_max_iter {
        iterations += 1;
        let spread: f64 = dangling.iter().map(|&j| scores[j]).sum::<f64>() / kf;
        next.fill(gamma / kf + (1.0 - gamma) * spread);
        for &(from, to, w) in &transitions {
            next[to] += (1.0 - gamma) * w * scores[from];
        }
        let delta = scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut scores, &mut next);
        if delta <= spec.pr_tol {
            converged = true;
            break;
        }
    }

    if !converged {
        log::warn!(
            "query {}: PageRank did not converge in {} iterations",
            prefs.query_id(),
            spec.pr_max_iter
        );
    }
    let ranking = Ranking::from_scores(prefs.query_id(), "pagerank", prefs.docs(), &scores)?;
    Ok(PageRankResult {
        ranking,
        scores,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::super::AggregatorKind;
    use super::*;

    fn spec() -> AggregatorSpec {
        AggregatorSpec::new(AggregatorKind::PageRank)
    }

    #[test]
    fn uniform_preferences_give_uniform_scores() {
        let prefs = PreferenceMatrix::from_fn("q", ids(7), |_, _| 0.5).unwrap();
        for gamma in [0.0, 0.15, 0.5, 1.0] {
            let mut s = spec();
            s.gamma = gamma;
            let r = aggregate_pagerank(&prefs, &ComparisonSet::full(7).unwrap(), &s).unwrap();
            assert!(r.converged);
            for x in &r.scores {
                assert!((x - 1.0 / 7.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn scores_form_a_distribution() {
        let sample = crate::sampling::sample_skip_window(9, 3, 2).unwrap();
        let r = aggregate_pagerank(&greedy_like(9), &sample, &spec()).unwrap();
        assert!(r.converged);
        assert!(r.scores.iter().all(|&x| x >= 0.0));
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    fn greedy_like(k: usize) -> PreferenceMatrix {
        PreferenceMatrix::from_fn("q", ids(k), |i, j| ((i * 7 + j * 3) % 10) as f64 / 10.0).unwrap()
    }

    #[test]
    fn winners_collect_mass_by_default() {
        let r = aggregate_pagerank(&total_order(5), &ComparisonSet::full(5).unwrap(), &spec()).unwrap();
        assert_eq!(order(&r.ranking), ["d0", "d1", "d2", "d3", "d4"]);
        let mut s = spec();
        s.pr_direction = PageRankDirection::LoserReceives;
        let r = aggregate_pagerank(&total_order(5), &ComparisonSet::full(5).unwrap(), &s).unwrap();
        assert_eq!(order(&r.ranking), ["d4", "d3", "d2", "d1", "d0"]);
    }

    #[test]
    fn dangling_rows_keep_the_mass() {
        // d0 and d2 end up with no outgoing weight
        let prefs = PreferenceMatrix::from_fn("q", ids(3), |i, _| if i == 2 { 0.0 } else { 0.7 }).unwrap();
        let sample = ComparisonSet::new(3, [(2, 0), (2, 1), (0, 1)]).unwrap();
        let r = aggregate_pagerank(&prefs, &sample, &spec()).unwrap();
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut s = spec();
        s.pr_max_iter = 2;
        s.pr_tol = 1e-300;
        let r = aggregate_pagerank(&greedy_like(6), &ComparisonSet::full(6).unwrap(), &s).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }
}
