//! Plain logistic regression by Newton–Raphson on the raw design.

use nalgebra::{DMatrix, DVector};

/// Maximum-likelihood logistic coefficients, iterated to a step size of
/// 1e-13. Uses LU rather than Cholesky for the Newton system.
pub fn fit(x: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
    let (n, p) = x.shape();
    let mut beta = DVector::zeros(p);
    for _ in 0..200 {
        let mut grad = DVector::zeros(p);
        let mut info = DMatrix::zeros(p, p);
        for i in 0..n {
            let eta: f64 = (0..p).map(|k| x[(i, k)] * beta[k]).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            for a in 0..p {
                grad[a] += (y[i] - mu) * x[(i, a)];
                for b in 0..p {
                    info[(a, b)] += mu * (1.0 - mu) * x[(i, a)] * x[(i, b)];
                }
            }
        }
        let step = info.lu().solve(&grad).expect("information matrix singular");
        beta += &step;
        if step.amax() < 1e-13 {
            break;
        }
    }
    beta
}

/// Bernoulli log-likelihood at `beta`.
pub fn loglik(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    (0..y.len())
        .map(|i| {
            let p = 1.0 / (1.0 + (-eta[i]).exp());
            if y[i] == 1.0 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}
