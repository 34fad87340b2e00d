use rand::Rng as _;

use crate::error::Result;
use crate::model::{PreferenceMatrix, Ranking};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct KwikSortResult {
    pub ranking: Ranking,
    /// Preference look-ups issued.
    pub lookups: usize,
}

/// Quicksort on preferences with uniformly random pivots.
///
/// Each other document of the current subset is judged against the pivot by
/// `p(pivot, other)`: at least 0.5 places it below the pivot, otherwise
/// above. Subsets keep their pointwise order. Scores are `k - position`.
pub fn kwiksort(prefs: &PreferenceMatrix, seed: u64) -> Result<KwikSortResult> {
    let k = prefs.k();
    let mut rng = rng_from_seed(seed);
    let mut lookups = 0;
    let mut order = Vec::with_capacity(k);
    sort_into((0..k).collect(), prefs, &mut rng, &mut lookups, &mut order);

    let mut scores = vec![0.0; k];
    for (position, &i) in order.iter().enumerate() {
        scores[i] = (k - position) as f64;
    }
    let ranking = Ranking::from_scores(prefs.query_id(), "kwiksort", prefs.docs(), &scores)?;
    Ok(KwikSortResult { ranking, lookups })
}

fn sort_into(
    items: Vec<usize>,
    prefs: &PreferenceMatrix,
    rng: &mut Rng,
    lookups: &mut usize,
    out: &mut Vec<usize>,
) {
    if items.len() <= 1 {
        out.extend(items);
        return;
    }
    let pivot = items[rng.random_range(0..items.len())];
    let (mut above, mut below) = (Vec::new(), Vec::new());
    for &other in items.iter().filter(|&&o| o != pivot) {
        *lookups += 1;
        if prefs.p(pivot, other) >= 0.5 {
            below.push(other);
        } else {
            above.push(other);
        }
    }
    sort_into(above, prefs, rng, lookups, out);
    out.push(pivot);
    sort_into(below, prefs, rng, lookups, out);
}
