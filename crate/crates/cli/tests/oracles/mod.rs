//! Reference implementations written directly from the published
//! definitions, sharing no code with the library beyond its input types.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

/// Dense `k × k` preferences with unsampled and diagonal entries zeroed.
pub fn masked(p: &[Vec<f64>], sample: &BTreeSet<(usize, usize)>) -> Vec<Vec<f64>> {
    let k = p.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if sample.contains(&(i, j)) { p[i][j] } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Greedy aggregation of preferences, line by line:
///
/// ```text
/// for d_i in D: t_i ← Σ_j p_ij − Σ_j p_ji
/// while D ≠ ∅:
///     d_i ← argmax t          (first maximum = best pointwise rank)
///     s_i ← |D|;  D ← D \ {d_i}
///     for d_j in D: t_j ← t_j − p_ji + p_ij
/// ```
///
/// Returns document indices best first.
pub fn greedy(p: &[Vec<f64>]) -> Vec<usize> {
    let k = p.len();
    let mut t = vec![0.0; k];
    for i in 0..k {
        let mut out = 0.0;
        let mut inc = 0.0;
        for j in 0..k {
            if j != i {
                out += p[i][j];
            }
        }
        for j in 0..k {
            if j != i {
                inc += p[j][i];
            }
        }
        t[i] = out - inc;
    }
    let mut d: Vec<usize> = (0..k).collect();
    let mut order = Vec::new();
    while !d.is_empty() {
        let mut at = 0;
        for pos in 1..d.len() {
            if t[d[pos]] > t[d[at]] {
                at = pos;
            }
        }
        let chosen = d.remove(at);
        order.push(chosen);
        for &j in &d {
            t[j] = t[j] - p[j][chosen] + p[chosen][j];
        }
    }
    order
}

/// Weighted PageRank by dense power iteration. `w[j][i]` is the weight of
/// the edge from `j` to `i`; rows without weight jump uniformly.
pub fn pagerank(w: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let k = w.len();
    let kf = k as f64;
    let mut m = vec![vec![0.0; k]; k];
    for j in 0..k {
        let total: f64 = w[j].iter().sum();
        for i in 0..k {
            m[j][i] = if total > 0.0 { w[j][i] / total } else { 1.0 / kf };
        }
    }
    let mut s = vec![1.0 / kf; k];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..k)
            .map(|i| gamma / kf + (1.0 - gamma) * (0..k).map(|j| m[j][i] * s[j]).sum::<f64>())
            .collect();
        let delta = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        s = next;
        if delta < 1e-15 {
            break;
        }
    }
    s
}

/// Consistency over unordered pairs: pairs where exactly one direction is
/// at least 0.5, over `(k² − k)/2`.
pub fn consistency_unordered(p: &[Vec<f64>]) -> f64 {
    let k = p.len();
    let mut n = 0usize;
    for i in 0..k {
        for j in 0..k {
            if i != j && p[i][j] >= 0.5 && p[j][i] < 0.5 {
                n += 1;
            }
        }
    }
    n as f64 / ((k * k - k) / 2) as f64
}

/// The literal ordered-pair formula.
pub fn consistency_ordered(p: &[Vec<f64>]) -> f64 {
    let k = p.len();
    let mut n = 0usize;
    for i in 0..k {
        for j in 0..k {
            if i != j && p[i][j] >= 0.5 && p[j][i] < 0.5 {
                n += 1;
            }
        }
    }
    n as f64 / (k * k - k) as f64
}

pub fn complementarity(p: &[Vec<f64>], eps: f64) -> f64 {
    let k = p.len();
    let mut n = 0usize;
    for i in 0..k {
        for j in 0..k {
            if i != j && (p[i][j] + p[j][i] - 1.0).abs() < eps {
                n += 1;
            }
        }
    }
    n as f64 / (k * k - k) as f64
}

/// `(|T|, |I|)` by enumerating the four defining conditions.
pub fn triples(p: &[Vec<f64>]) -> (u64, u64) {
    let k = p.len();
    let (mut t, mut inc) = (0, 0);
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                if i == j || j == l || i == l {
                    continue;
                }
                let (ij, jl, il) = (p[i][j], p[j][l], p[i][l]);
                if (ij >= 0.5 && jl >= 0.5 && il >= 0.5) || (ij < 0.5 && jl < 0.5 && il < 0.5) {
                    t += 1;
                }
                if (ij >= 0.5 && jl >= 0.5 && il < 0.5) || (ij < 0.5 && jl < 0.5 && il >= 0.5) {
                    inc += 1;
                }
            }
        }
    }
    (t, inc)
}

/// Kendall's τ between two strict orders given as best-first index lists.
pub fn kendall_tau(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut pos_b = vec![0; n];
    for (r, &x) in b.iter().enumerate() {
        pos_b[x] = r;
    }
    let (mut conc, mut disc) = (0i64, 0i64);
    for x in 0..n {
        for y in (x + 1)..n {
            // a ranks a[x] above a[y]
            if pos_b[a[x]] < pos_b[a[y]] {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    (conc - disc) as f64 / (n * (n - 1) / 2) as f64
}

/// Pairs of the window rule with 1-based positions: row `i` visits
/// `a = i + c·λ − 1` for `c = 1..m` and compares with `j = 1 + (a mod k)`.
/// Self-comparisons are skipped; repeats collapse. Returned 0-based, sorted.
pub fn skip_window(k: usize, m: usize, lambda: usize) -> Vec<(usize, usize)> {
    let mut hit = vec![false; k * k];
    for i in 1..=k {
        for c in 1..=m {
            let a = i + c * lambda - 1;
            let j = 1 + (a % k);
            if j != i {
                hit[(i - 1) * k + (j - 1)] = true;
            }
        }
    }
    (0..k * k).filter(|&x| hit[x]).map(|x| (x / k, x % k)).collect()
}

/// Discounted cumulative gain with gain `2^g − 1` and discount `log2(r + 1)`.
pub fn dcg(grades: &[u32]) -> f64 {
    grades
        .iter()
        .enumerate()
        .map(|(r, &g)| (2f64.powi(g as i32) - 1.0) / ((r + 2) as f64).log2())
        .sum()
}
