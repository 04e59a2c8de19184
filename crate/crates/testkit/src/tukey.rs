//! Studentized range distribution (infinite df) by adaptive Simpson.

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ from the series `1/2 + φ(z) Σ z^{2n+1} / (1·3·…·(2n+1))`, whose
/// absolute error stays near machine precision on [-13, 13].
fn big_phi(z: f64) -> f64 {
    if z < -13.0 {
        return 0.0;
    }
    if z > 13.0 {
        return 1.0;
    }
    let mut term = z;
    let mut sum = z;
    let mut n = 1.0;
    while term.abs() > 1e-17 * sum.abs() {
        n += 2.0;
        term *= z * z / n;
        sum += term;
    }
    (0.5 + phi(z) * sum).clamp(0.0, 1.0)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    recurse(f, a, b, fa, fb, fc, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, fc: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    recurse(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
        + recurse(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
}

/// `P(Q ≤ q)` for the range of `k` standard normals:
/// `k ∫ φ(z) [Φ(z) − Φ(z − q)]^{k−1} dz`.
pub fn cdf(q: f64, k: usize) -> f64 {
    let integrand = |z: f64| phi(z) * (big_phi(z) - big_phi(z - q)).powi(k as i32 - 1);
    k as f64 * simpson(&integrand, -10.0, 10.0, 1e-12)
}
