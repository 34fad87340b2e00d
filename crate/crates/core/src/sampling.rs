//! Comparison-set samplers.
//!
//! All samplers index documents by pointwise rank (0-based) and produce a
//! [`ComparisonSet`] that is duplicate-free and covers every document.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::ComparisonSet;
use crate::rng::rng_from_seed;

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sampling rate must be in (0, 1], got {rate}")))
    }
}

pub(crate) fn check_window(k: usize, m: usize) -> Result<()> {
    if k >= 2 && (1..k).contains(&m) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "window size must be in [1, {}] for k = {k}, got {m}",
            k.saturating_sub(1)
        )))
    }
}

pub(crate) fn check_skip(lambda: usize) -> Result<()> {
    if lambda >= 1 {
        Ok(())
    } else {
        Err(Error::Parameter("skip size must be at least 1".into()))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k >= 2 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("k must be at least 2, got {k}")))
    }
}

/// `⌊r·(k² - k)⌋`, raised to `k` so every document can lead one pair.
pub(crate) fn global_random_size(k: usize, rate: f64) -> usize {
    let all = k * k - k;
    // the epsilon absorbs representation error, e.g. 0.7 * 2450 = 1714.9999...
    let target = ((rate * all as f64) + 1e-9).floor() as usize;
    target.clamp(k, all)
}

/// Maps a linear index over the off-diagonal grid to its `(i, j)` pair.
fn off_diagonal(k: usize, linear: usize) -> (usize, usize) {
    let i = linear / (k - 1);
    let c = linear % (k - 1);
    (i, if c < i { c } else { c + 1 })
}

/// Uniform random sample of `max(⌊r·(k² - k)⌋, k)` ordered pairs in which
/// every document is the first element of at least one pair.
///
/// Pairs are drawn without replacement from the whole grid. Each document
/// left without an outgoing pair then gets one to a uniformly chosen
/// partner, and a random pair from a row holding two or more pairs is
/// dropped to keep the size fixed.
pub fn sample_global_random(k: usize, rate: f64, seed: u64) -> Result<ComparisonSet> {
    check_k(k)?;
    check_rate(rate)?;
    let all = k * k - k;
    let size = global_random_size(k, rate);
    let target = (((rate * all as f64) + 1e-9).floor() as usize).min(all);

    let mut rng = rng_from_seed(seed);
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for linear in index::sample(&mut rng, all, target) {
        let (i, j) = off_diagonal(k, linear);
        rows[i].insert(j);
    }

    let mut total = target;
    for i in 0..k {
        if !rows[i].is_empty() {
            continue;
        }
        let c = rng.random_range(0..k - 1);
        rows[i].insert(if c < i { c } else { c + 1 });
        total += 1;
        if total > size {
            let candidates: Vec<(usize, usize)> = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.len() >= 2)
                .flat_map(|(a, r)| r.iter().map(move |&b| (a, b)))
                .collect();
            let (a, b) = candidates[rng.random_range(0..candidates.len())];
            rows[a].remove(&b);
            total -= 1;
        }
    }
    debug_assert_eq!(total, size);

    ComparisonSet::new(
        k,
        rows.iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j))),
    )
}

/// The `m` successors of every document in pointwise order, wrapping
/// around to the top of the list: `|C| = k·m`.
pub fn sample_neighborhood_window(k: usize, m: usize) -> Result<ComparisonSet> {
    check_window(k, m)?;
    ComparisonSet::new(
        k,
        (0..k).flat_map(|i| (1..=m).map(move |c| (i, (i + c) % k))),
    )
}

fn skip_window_row(k: usize, m: usize, lambda: usize, i: usize) -> BTreeSet<usize> {
    (1..=m)
        .map(|c| (i + c * lambda) % k)
        .filter(|&j| j != i)
        .collect()
}

/// Every `lambda`-th successor of every document, `m` slots per document,
/// wrapping around. Slots that land on the document itself are omitted and
/// repeated partners within a row are kept once. `lambda = 1` reproduces
/// the neighborhood window.
pub fn sample_skip_window(k: usize, m: usize, lambda: usize) -> Result<ComparisonSet> {
    check_window(k, m)?;
    check_skip(lambda)?;
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| skip_window_row(k, m, lambda, i).into_iter().map(move |j| (i, j)))
        .collect();
    ComparisonSet::new(k, pairs).map_err(|e| {
        Error::Parameter(format!(
            "skip window m = {m}, lambda = {lambda} yields no valid set for k = {k}: {e}"
        ))
    })
}

pub(crate) fn skip_window_size(k: usize, m: usize, lambda: usize) -> usize {
    (0..k).map(|i| skip_window_row(k, m, lambda, i).len()).sum()
}

/// Largest window size `m` with `k·m ≤ rate·(k² - k)`, at least 1.
pub fn window_for_rate(k: usize, rate: f64) -> Result<usize> {
    check_k(k)?;
    check_rate(rate)?;
    let m = ((rate * (k - 1) as f64) + 1e-9).floor() as usize;
    Ok(m.clamp(1, k - 1))
}
