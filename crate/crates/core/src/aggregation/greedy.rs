use crate::error::Result;
use crate::model::{ComparisonSet, PreferenceMatrix, Ranking};

use super::check_dims;

/// Greedy ordering by potential.
///
/// Every document starts with potential `t_i = Σ_j p(i, j) - Σ_j p(j, i)`
/// (unsampled probabilities are zero). The document with the highest
/// potential takes the best free rank and score `|remaining|`; the
/// remaining documents then drop the terms involving it. Equal potentials
/// go to the better pointwise position.
pub fn aggregate_greedy(prefs: &PreferenceMatrix, sample: &ComparisonSet) -> Result<Ranking> {
    check_dims(prefs, sample)?;
    let k = prefs.k();
    let p = |i: usize, j: usize| {
        if sample.contains(i, j) {
            prefs.p(i, j)
        } else {
            0.0
        }
    };

    let mut potential: Vec<f64> = (0..k)
        .map(|i| {
            let wins: f64 = (0..k).filter(|&j| j != i).map(|j| p(i, j)).sum();
            let losses: f64 = (0..k).filter(|&j| j != i).map(|j| p(j, i)).sum();
            wins - losses
        })
        .collect();
    let mut remaining = vec![true; k];
    let mut scores = vec![0.0; k];

    for left in (1..=k).rev() {
        let mut best = None;
        for i in (0..k).filter(|&i| remaining[i]) {
            match best {
                Some(b) if potential[i] <= potential[b] => {}
                _ => best = Some(i),
            }
        }
        let chosen = best.expect("a document remains while left > 0");
        scores[chosen] = left as f64;
        remaining[chosen] = false;
        for i in (0..k).filter(|&i| remaining[i]) {
            potential[i] = potential[i] - p(i, chosen) + p(chosen, i);
        }
    }

    Ranking::from_scores(prefs.query_id(), "greedy", prefs.docs(), &scores)
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use crate::model::PreferenceMatrix;

    #[test]
    fn total_order_gets_descending_integer_scores() {
        let r = aggregate_greedy(&total_order(4), &ComparisonSet::full(4).unwrap()).unwrap();
        let scores: Vec<f64> = r.entries().iter().map(|e| e.score).collect();
        assert_eq!(scores, [4.0, 3.0, 2.0, 1.0]);
        assert_eq!(order(&r), ["d0", "d1", "d2", "d3"]);
    }

    #[test]
    fn worked_three_document_example() {
        // t = (1.4, -1.0, -0.4); after d0 leaves: t1 = -0.3, t2 = 0.3
        let r = aggregate_greedy(&greedy_example(), &ComparisonSet::full(3).unwrap()).unwrap();
        assert_eq!(order(&r), ["d0", "d2", "d1"]);
    }

    #[test]
    fn ties_go_to_the_better_pointwise_position() {
        let prefs = PreferenceMatrix::from_fn("q", ids(4), |_, _| 0.5).unwrap();
        let r = aggregate_greedy(&prefs, &ComparisonSet::full(4).unwrap()).unwrap();
        assert_eq!(order(&r), ["d0", "d1", "d2", "d3"]);
    }

    #[test]
    fn unsampled_pairs_are_ignored() {
        // true order is d2, d1, d0; only d2's wins are sampled, so d0 and d1
        // tie behind it and keep their pointwise order
        let prefs =
            PreferenceMatrix::from_fn("q", ids(3), |i, j| if i > j { 1.0 } else { 0.0 }).unwrap();
        let sample = ComparisonSet::new(3, [(2, 0), (2, 1)]).unwrap();
        let r = aggregate_greedy(&prefs, &sample).unwrap();
        assert_eq!(order(&r), ["d2", "d0", "d1"]);
        let full = aggregate_greedy(&prefs, &ComparisonSet::full(3).unwrap()).unwrap();
        assert_eq!(order(&full), ["d2", "d1", "d0"]);
    }
}
