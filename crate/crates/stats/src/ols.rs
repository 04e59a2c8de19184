//! Ordinary least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::design::{Design, DesignInfo, ModelSpec};
use crate::dist::{f_sf, t_two_sided};
use crate::error::Result;
use crate::format::{p_clause, thousands};
use crate::model::{CoefficientRow, FittedModel, Link};
use crate::table::DataTable;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub info: DesignInfo,
    pub beta: DVector<f64>,
    pub se: DVector<f64>,
    pub t: DVector<f64>,
    pub p: DVector<f64>,
    pub vcov: DMatrix<f64>,
    pub residuals: DVector<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_p: f64,
    /// Model degrees of freedom (coefficients excluding the intercept).
    pub df_model: usize,
    pub df_resid: usize,
    pub resid_se: f64,
    pub n_obs: usize,
}

pub fn fit_ols(spec: &ModelSpec, table: &DataTable) -> Result<OlsFit> {
    let design = Design::build(spec, table)?;
    fit_ols_design(&design)
}

pub fn fit_ols_design(design: &Design) -> Result<OlsFit> {
    let x = &design.x;
    let y = &design.y;
    let (n, p) = x.shape();

    let qr = x.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .expect("rank checked when the design was built");
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .expect("rank checked when the design was built");
    let xtx_inv = &r_inv * r_inv.transpose();

    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df_resid = n - p;
    let df_model = p - 1;
    let sigma2 = if df_resid > 0 { rss / df_resid as f64 } else { f64::NAN };

    let vcov = &xtx_inv * sigma2;
    let se = vcov.diagonal().map(f64::sqrt);
    let t = beta.zip_map(&se, |b, s| b / s);
    let p_vals = t.map(|t| t_two_sided(t, df_resid as f64));

    let r2 = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 1.0 };
    let adj_r2 = if df_resid > 0 {
        1.0 - (1.0 - r2) * (n - 1) as f64 / df_resid as f64
    } else {
        f64::NAN
    };
    let (f_stat, f_p) = if df_model == 0 || df_resid == 0 {
        (f64::NAN, f64::NAN)
    } else if rss == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = ((tss - rss) / df_model as f64) / sigma2;
        (f, f_sf(f, df_model as f64, df_resid as f64))
    };

    Ok(OlsFit {
        info: design.info.clone(),
        beta,
        se,
        t,
        p: p_vals,
        vcov,
        residuals,
        r2,
        adj_r2,
        f_stat,
        f_p,
        df_model,
        df_resid,
        resid_se: sigma2.sqrt(),
        n_obs: n,
    })
}

impl OlsFit {
    pub fn coefficient_table(&self) -> Vec<CoefficientRow> {
        self.info
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| CoefficientRow {
                predictor: name.clone(),
                estimate: self.beta[i],
                se: self.se[i],
                statistic: self.t[i],
                p: self.p[i],
            })
            .collect()
    }

    /// `"F(29, 72,800) = 73.82, p < .001"`.
    pub fn f_summary(&self) -> String {
        format!(
            "F({}, {}) = {:.2}, {}",
            thousands(self.df_model as u64),
            thousands(self.df_resid as u64),
            self.f_stat,
            p_clause(self.f_p)
        )
    }

    /// Model-fit line in the layout of a regression table footer.
    pub fn fit_summary(&self) -> String {
        format!(
            "R2 = {:.3}; Adj. R2 = {:.3}; {}; Residual SE: {:.3}",
            self.r2,
            self.adj_r2,
            self.f_summary(),
            self.resid_se
        )
    }
}

impl FittedModel for OlsFit {
    fn design(&self) -> &DesignInfo {
        &self.info
    }
    fn beta(&self) -> &DVector<f64> {
        &self.beta
    }
    fn vcov(&self) -> &DMatrix<f64> {
        &self.vcov
    }
    fn link(&self) -> Link {
        Link::Identity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::FactorSpec;

    #[test]
    fn noiseless_line_is_fit_exactly() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let t = DataTable::new().with_numeric("x", x).with_numeric("y", y);
        let fit = fit_ols(&ModelSpec::new("y").covariate("x"), &t).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!((fit.beta[1] + 3.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.resid_se < 1e-12);
    }

    #[test]
    fn factor_means_are_recovered() {
        let t = DataTable::new()
            .with_numeric("y", vec![1.0, 2.0, 3.0, 10.0, 11.0, 12.0])
            .with_categorical("g", ["a", "a", "a", "b", "b", "b"]);
        let fit = fit_ols(&ModelSpec::new("y").factor(FactorSpec::new("g")), &t).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!((fit.beta[1] - 9.0).abs() < 1e-12);
        assert_eq!(fit.df_resid, 4);
        assert!(fit.adj_r2 <= fit.r2);
    }

    #[test]
    fn summary_uses_report_layout() {
        let t = DataTable::new()
            .with_numeric("y", vec![1.0, 2.1, 2.9, 4.2, 5.1, 5.8])
            .with_numeric("x", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let fit = fit_ols(&ModelSpec::new("y").covariate("x"), &t).unwrap();
        let s = fit.f_summary();
        assert!(s.starts_with("F(1, 4) = "), "{s}");
        assert!(s.ends_with("p < .001"), "{s}");
    }
}
