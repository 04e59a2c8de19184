//! Least squares through the normal equations.

use nalgebra::{DMatrix, DVector};

pub struct NormalEquations {
    pub beta: DVector<f64>,
    pub se: DVector<f64>,
    pub r2: f64,
    pub f_stat: f64,
    pub resid_se: f64,
}

/// Solves `(X'X) β = X'y` by LU and derives the usual summaries. Assumes
/// the first column of `x` is the intercept.
pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>) -> NormalEquations {
    let (n, p) = x.shape();
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let lu = xtx.clone().lu();
    let beta = lu.solve(&xty).expect("X'X singular");
    let inv = lu.try_inverse().expect("X'X singular");
    let mut rss = 0.0;
    for i in 0..n {
        let fitted: f64 = (0..p).map(|k| x[(i, k)] * beta[k]).sum();
        rss += (y[i] - fitted).powi(2);
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let s2 = rss / (n - p) as f64;
    let se = DVector::from_iterator(p, (0..p).map(|k| (s2 * inv[(k, k)]).sqrt()));
    let r2 = 1.0 - rss / tss;
    let f_stat = ((tss - rss) / (p - 1) as f64) / s2;
    NormalEquations {
        beta,
        se,
        r2,
        f_stat,
        resid_se: s2.sqrt(),
    }
}
