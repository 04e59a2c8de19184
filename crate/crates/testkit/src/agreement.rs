//! Brute-force agreement formulas.

/// κ from category marginals computed by explicit loops over both
/// categories.
pub fn kappa(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len() as f64;
    let mut agree = 0.0;
    for i in 0..a.len() {
        if a[i] == b[i] {
            agree += 1.0;
        }
    }
    let p_o = agree / n;
    let mut p_e = 0.0;
    for cat in [false, true] {
        let ca = a.iter().filter(|&&x| x == cat).count() as f64 / n;
        let cb = b.iter().filter(|&&x| x == cat).count() as f64 / n;
        p_e += ca * cb;
    }
    if p_e == 1.0 {
        return 1.0;
    }
    (p_o - p_e) / (1.0 - p_e)
}

/// Mid-rank by counting: rank(x_i) = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let less = x.iter().filter(|&&xj| xj < xi).count() as f64;
            let equal = x.iter().filter(|&&xj| xj == xi).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Spearman ρ as the Pearson correlation of counted mid-ranks, using the
/// covariance / (sd · sd) definition with explicit means.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma: f64 = ra.iter().sum::<f64>() / n;
    let mb: f64 = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va.sqrt() * vb.sqrt())
}
