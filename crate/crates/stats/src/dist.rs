//! Reference distributions: normal, chi-square, t, F and the studentized
//! range with infinite degrees of freedom.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Two-sided p-value of a standard normal statistic.
pub fn norm_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    (2.0 * norm_sf(z.abs())).min(1.0)
}

pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn chisq_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|d| d.sf(x)).unwrap_or(f64::NAN)
}

/// Two-sided p-value of a t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    StudentsT::new(0.0, 1.0, df)
        .map(|d| (2.0 * d.sf(t.abs())).min(1.0))
        .unwrap_or(f64::NAN)
}

pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f.is_infinite() {
        return 0.0;
    }
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    FisherSnedecor::new(df1, df2)
        .map(|d| d.sf(f))
        .unwrap_or(f64::NAN)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const PANEL_LO: f64 = -9.0;
const PANEL_HI: f64 = 9.0;
const PANELS: usize = 36;

/// Composite rule over [-9, 9]; the normal density is < 1e-17 outside.
fn integration_grid() -> &'static [(f64, f64)] {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        let (x, w) = gauss_legendre(16);
        let h = (PANEL_HI - PANEL_LO) / PANELS as f64;
        let mut grid = Vec::with_capacity(PANELS * x.len());
        for p in 0..PANELS {
            let mid = PANEL_LO + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                grid.push((mid + 0.5 * h * xi, 0.5 * h * wi));
            }
        }
        grid
    })
}

/// `a^n - (a - b)^n` without cancellation, for `0 <= b <= a`.
fn power_gap(a: f64, b: f64, n: usize) -> f64 {
    let c = a - b;
    let mut sum = 0.0;
    let mut ap = 1.0;
    for j in 0..n {
        sum += ap * c.powi((n - 1 - j) as i32);
        ap *= a;
    }
    b * sum
}

/// Upper tail `P(Q > q)` of the studentized range of `k` independent
/// standard normals (infinite error degrees of freedom).
pub fn ptukey_sf(q: f64, k: usize) -> f64 {
    assert!(k >= 2, "studentized range needs k >= 2");
    if q.is_nan() {
        return f64::NAN;
    }
    if q <= 0.0 {
        return 1.0;
    }
    if q.is_infinite() {
        return 0.0;
    }
    let n = k - 1;
    let total: f64 = integration_grid()
        .iter()
        .map(|&(z, w)| {
            let a = norm_cdf(z);
            let b = norm_cdf(z - q).min(a);
            w * norm_pdf(z) * power_gap(a, b, n)
        })
        .sum();
    (k as f64 * total).clamp(0.0, 1.0)
}

pub fn ptukey_cdf(q: f64, k: usize) -> f64 {
    1.0 - ptukey_sf(q, k)
}

/// Quantile of the studentized range (infinite df), by bisection.
pub fn qtukey(p: f64, k: usize) -> f64 {
    assert!((0.0..1.0).contains(&p), "probability must be in [0, 1)");
    let (mut lo, mut hi) = (0.0, 1.0);
    while ptukey_cdf(hi, k) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ptukey_cdf(mid, k) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_level_range_is_a_two_sided_z_test() {
        for &z in &[0.1, 0.5, 1.0, 1.96, 3.0, 4.5] {
            let tukey = ptukey_sf(std::f64::consts::SQRT_2 * z, 2);
            let direct = norm_two_sided(z);
            assert!((tukey - direct).abs() < 1e-12, "z={z}: {tukey} vs {direct}");
        }
    }

    #[test]
    fn critical_values_match_published_tables() {
        // Studentized range upper 5% points, df = infinity.
        for &(k, q) in &[(2, 2.772), (3, 3.314), (4, 3.633), (5, 3.858), (10, 4.474)] {
            assert!((qtukey(0.95, k) - q).abs() < 1e-3, "k={k}");
        }
    }

    #[test]
    fn tails_are_monotone() {
        let mut prev = 1.0;
        for i in 1..60 {
            let p = ptukey_sf(i as f64 * 0.2, 3);
            assert!(p <= prev);
            prev = p;
        }
        assert_eq!(ptukey_sf(0.0, 4), 1.0);
    }

    #[test]
    fn other_distributions_basic_values() {
        assert!((chisq_sf(3.841458820694124, 1.0) - 0.05).abs() < 1e-10);
        assert!((norm_two_sided(1.959963984540054) - 0.05).abs() < 1e-12);
        assert!((t_two_sided(2.228138851986274, 10.0) - 0.05).abs() < 1e-9);
        assert!((f_sf(4.964602743730711, 1.0, 10.0) - 0.05).abs() < 1e-8);
    }
}
