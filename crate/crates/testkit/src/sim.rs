//! Seeded simulators for model-recovery tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Random-intercept logistic data: one standard-normal covariate.
pub struct GlmmSample {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub group: Vec<String>,
}

pub fn random_intercept_logit(
    seed: u64,
    groups: usize,
    per_group: usize,
    intercept: f64,
    slope: f64,
    sigma: f64,
) -> GlmmSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut out = GlmmSample {
        y: Vec::new(),
        x: Vec::new(),
        group: Vec::new(),
    };
    for g in 0..groups {
        let b = sigma * normal.sample(&mut rng);
        for _ in 0..per_group {
            let x = normal.sample(&mut rng);
            let p = 1.0 / (1.0 + (-(intercept + slope * x + b)).exp());
            out.y.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
            out.x.push(x);
            out.group.push(format!("g{g:04}"));
        }
    }
    out
}

/// Gaussian design with an intercept column and `p - 1` covariates, and a
/// response from random coefficients plus unit noise.
pub fn linear_design(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let coefs: Vec<f64> = (0..p).map(|_| normal.sample(&mut rng) * 2.0).collect();
    let cols: Vec<Vec<f64>> = (1..p)
        .map(|_| (0..n).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    let y = (0..n)
        .map(|i| {
            coefs[0]
                + cols.iter().zip(&coefs[1..]).map(|(c, b)| c[i] * b).sum::<f64>()
                + normal.sample(&mut rng)
        })
        .collect();
    (cols, y)
}
