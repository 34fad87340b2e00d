use crate::error::Result;
use crate::model::{ComparisonSet, PreferenceMatrix, Ranking};

use super::check_dims;

/// Symmetric sum: `s_i = Σ_j p(i, j) + Σ_j (1 - p(j, i))`, where a summand
/// is zero when its pair was not sampled.
pub fn aggregate_additive(prefs: &PreferenceMatrix, sample: &ComparisonSet) -> Result<Ranking> {
    check_dims(prefs, sample)?;
    let mut scores = vec![0.0; prefs.k()];
    for &(i, j) in sample.pairs() {
        let p = prefs.p(i, j);
        scores[i] += p;
        scores[j] += 1.0 - p;
    }
    Ranking::from_scores(prefs.query_id(), "additive", prefs.docs(), &scores)
}
