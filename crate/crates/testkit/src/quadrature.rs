//! Gauss–Hermite quadrature of the random-intercept logistic likelihood.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights for `∫ f(t) e^{-t²} dt` by the Golub–Welsch
/// eigenvalue method.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for i in 1..n {
        let off = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = off;
        j[(i - 1, i)] = off;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Marginal log-likelihood `Σ_j log ∫ Π_i p(y_ij | η_ij + b) N(b; 0, σ²) db`
/// with `n_nodes`-point Gauss–Hermite quadrature.
///
/// `eta[g]` and `y[g]` hold the fixed-effect linear predictors and
/// responses of group `g`.
pub fn marginal_loglik(eta: &[Vec<f64>], y: &[Vec<f64>], sigma2: f64, n_nodes: usize) -> f64 {
    let (nodes, weights) = gauss_hermite(n_nodes);
    let scale = (2.0 * sigma2).sqrt();
    let mut total = 0.0;
    for (eg, yg) in eta.iter().zip(y) {
        let terms: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| {
                let b = scale * t;
                let ll: f64 = eg
                    .iter()
                    .zip(yg)
                    .map(|(&e, &yy)| {
                        let p = 1.0 / (1.0 + (-(e + b)).exp());
                        if yy == 1.0 {
                            p.ln()
                        } else {
                            (1.0 - p).ln()
                        }
                    })
                    .sum();
                (w / std::f64::consts::PI.sqrt()).ln() + ll
            })
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        total += m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
    }
    total
}
