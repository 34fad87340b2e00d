use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ComparisonSet, PreferenceMatrix, Ranking};

use super::{check_dims, AggregatorSpec};

/// Result of a Bradley-Terry fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BradleyTerryFit {
    /// Latent scores, centered to sum to zero.
    pub scores: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Final gradient 2-norm of the penalized log-likelihood.
    pub gradient_norm: f64,
}

/// `log σ(x)` without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn objective(wins: &[(usize, usize)], reg: f64, s: &DVector<f64>) -> f64 {
    let ll: f64 = wins.iter().map(|&(w, l)| log_sigmoid(s[w] - s[l])).sum();
    ll - reg * s.norm_squared()
}

fn gradient(wins: &[(usize, usize)], reg: f64, s: &DVector<f64>) -> DVector<f64> {
    let mut g = s * (-2.0 * reg);
    for &(w, l) in wins {
        let q = 1.0 - sigmoid(s[w] - s[l]);
        g[w] += q;
        g[l] -= q;
    }
    g
}

/// Negated Hessian; positive definite whenever `reg > 0`.
fn curvature(k: usize, wins: &[(usize, usize)], reg: f64, s: &DVector<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::from_diagonal_element(k, k, 2.0 * reg);
    for &(w, l) in wins {
        let p = sigmoid(s[w] - s[l]);
        let c = p * (1.0 - p);
        h[(w, w)] += c;
        h[(l, l)] += c;
        h[(w, l)] -= c;
        h[(l, w)] -= c;
    }
    h
}

/// Maximizes `Σ_{(w, l)} log σ(s_w - s_l) - reg·Σ s_i²` over the latent
/// scores by damped Newton iteration from `start`, where each `(w, l)` in
/// `wins` records one comparison won by `w` against `l`.
///
/// The objective is strictly concave for `reg > 0`, so the optimum is unique
/// and independent of the starting point.
pub fn fit_bradley_terry(
    k: usize,
    wins: &[(usize, usize)],
    reg: f64,
    tol: f64,
    max_iter: usize,
    start: &[f64],
) -> Result<BradleyTerryFit> {
    if !(reg > 0.0) {
        return Err(Error::Parameter("Bradley-Terry regularization must be positive".into()));
    }
    if start.len() != k {
        return Err(Error::Input(format!("start vector has {} entries, expected {k}", start.len())));
    }
    if let Some(&(w, l)) = wins.iter().find(|&&(w, l)| w >= k || l >= k || w == l) {
        return Err(Error::Input(format!("invalid comparison ({w},{l}) for k = {k}")));
    }

    let mut s = DVector::from_column_slice(start);
    let mut f = objective(wins, reg, &s);
    let mut g = gradient(wins, reg, &s);
    let mut iterations = 0;

    while g.norm() > tol && iterations < max_iter {
        iterations += 1;
        let step = match curvature(k, wins, reg, &s).cholesky() {
            Some(chol) => chol.solve(&g),
            None => g.clone(),
        };
        let slope = g.dot(&step);
        // changes below this are rounding noise in the summed objective;
        // without the slack Armijo rejects every step close to the optimum
        let slack = 64.0 * f64::EPSILON * f.abs().max(1.0);
        let mut t = 1.0;
        let mut next = &s + &step;
        let mut f_next = objective(wins, reg, &next);
        // Armijo backtracking
        while f_next < f + 1e-4 * t * slope - slack && t > 1e-12 {
            t *= 0.5;
            next = &s + &step * t;
            f_next = objective(wins, reg, &next);
        }
        if f_next < f - slack {
            break;
        }
        s = next;
        f = f_next;
        g = gradient(wins, reg, &s);
    }

    let gradient_norm = g.norm();
    let mean = s.mean();
    Ok(BradleyTerryFit {
        scores: s.iter().map(|x| x - mean).collect(),
        converged: gradient_norm <= tol,
        iterations,
        gradient_norm,
    })
}

/// Directed outcomes of the sampled comparisons: `(i, j)` with
/// `p(i, j) ≥ 0.5` is a win for `i`, otherwise a win for `j`.
fn sampled_wins(prefs: &PreferenceMatrix, sample: &ComparisonSet) -> Vec<(usize, usize)> {
    sample
        .pairs()
        .iter()
        .map(|&(i, j)| if prefs.p(i, j) >= 0.5 { (i, j) } else { (j, i) })
        .collect()
}

/// Bradley-Terry maximum-likelihood scores over the directions of the
/// sampled comparisons, with an L2 penalty that keeps documents which only
/// win (or only lose) at finite scores.
pub fn aggregate_bradley_terry(
    prefs: &PreferenceMatrix,
    sample: &ComparisonSet,
    spec: &AggregatorSpec,
) -> Result<(Ranking, BradleyTerryFit)> {
    check_dims(prefs, sample)?;
    let k = prefs.k();
    let wins = sampled_wins(prefs, sample);
    let fit = fit_bradley_terry(k, &wins, spec.bt_reg, spec.bt_tol, spec.bt_max_iter, &vec![0.0; k])?;
    if !fit.converged {
        log::warn!(
            "query {}: Bradley-Terry stopped after {} iterations, gradient norm {:.3e}",
            prefs.query_id(),
            fit.iterations,
            fit.gradient_norm
        );
    }
    let ranking = Ranking::from_scores(prefs.query_id(), "bradley-terry", prefs.docs(), &fit.scores)?;
    Ok((ranking, fit))
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::super::AggregatorKind;
    use super::*;

    fn spec() -> AggregatorSpec {
        AggregatorSpec::new(AggregatorKind::BradleyTerry)
    }

    #[test]
    fn single_win_orders_the_winner_first() {
        let prefs = PreferenceMatrix::from_rows("q", ids(2), &[vec![0.0, 0.9], vec![0.3, 0.0]]).unwrap();
        let sample = ComparisonSet::new(2, [(0, 1)]).unwrap();
        let (r, fit) = aggregate_bradley_terry(&prefs, &sample, &spec()).unwrap();
        assert!(fit.converged);
        assert!(fit.scores[0] > fit.scores[1]);
        assert_eq!(order(&r), ["d0", "d1"]);
    }

    #[test]
    fn one_win_each_is_a_tie() {
        let prefs = PreferenceMatrix::from_rows("q", ids(2), &[vec![0.0, 0.9], vec![0.9, 0.0]]).unwrap();
        let (_, fit) = aggregate_bradley_terry(&prefs, &ComparisonSet::full(2).unwrap(), &spec()).unwrap();
        assert!((fit.scores[0] - fit.scores[1]).abs() <= 1e-6);
    }

    #[test]
    fn scores_are_centered_and_stationary() {
        let wins = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 1), (0, 3)];
        let fit = fit_bradley_terry(4, &wins, 0.01, 1e-10, 100, &[0.0; 4]).unwrap();
        assert!(fit.converged);
        assert!(fit.scores.iter().sum::<f64>().abs() < 1e-12);
        let s = DVector::from_vec(fit.scores.clone());
        assert!(gradient(&wins, 0.01, &s).norm() < 1e-9);
    }

    #[test]
    fn start_point_does_not_matter() {
        let wins = [(0, 1), (1, 2), (2, 0), (0, 2), (3, 0), (1, 3)];
        let a = fit_bradley_terry(4, &wins, 0.01, 1e-8, 500, &[0.0; 4]).unwrap();
        let b = fit_bradley_terry(4, &wins, 0.01, 1e-8, 500, &[1.0; 4]).unwrap();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn recovers_a_logistic_order() {
        // p(i, j) = σ(s_i - s_j) with s = (3, 2, 1, 0, -1, -2)
        let truth = [3.0, 2.0, 1.0, 0.0, -1.0, -2.0];
        let prefs =
            PreferenceMatrix::from_fn("q", ids(6), |i, j| sigmoid(truth[i] - truth[j])).unwrap();
        let (r, _) = aggregate_bradley_terry(&prefs, &ComparisonSet::full(6).unwrap(), &spec()).unwrap();
        assert_eq!(order(&r), ["d0", "d1", "d2", "d3", "d4", "d5"]);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let wins = [(0, 1), (1, 2), (0, 2)];
        let fit = fit_bradley_terry(3, &wins, 1e-6, 1e-14, 1, &[0.0; 3]).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
        assert!(fit.scores[0] > fit.scores[2]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_bradley_terry(2, &[(0, 1)], 0.0, 1e-8, 10, &[0.0; 2]).is_err());
        assert!(fit_bradley_terry(2, &[(0, 2)], 0.01, 1e-8, 10, &[0.0; 2]).is_err());
        assert!(fit_bradley_terry(2, &[(0, 1)], 0.01, 1e-8, 10, &[0.0; 3]).is_err());
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }
}
