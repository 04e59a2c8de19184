use frameguard_stats::dist::{ptukey_cdf, qtukey};
use frameguard_testkit::tukey;

#[test]
fn range_cdf_matches_simpson_oracle() {
    for k in [2, 3, 4, 6, 10] {
        for q in [0.5, 1.0, 2.0, 2.8, 3.5, 4.5, 6.0] {
            let got = ptukey_cdf(q, k);
            let want = tukey::cdf(q, k);
            assert!((got - want).abs() < 1e-8, "k={k} q={q}: {got} vs {want}");
        }
    }
}

#[test]
fn quantile_inverts_cdf() {
    for k in [2, 3, 5] {
        for p in [0.5, 0.9, 0.95, 0.99] {
            assert!((ptukey_cdf(qtukey(p, k), k) - p).abs() < 1e-9);
        }
    }
}
