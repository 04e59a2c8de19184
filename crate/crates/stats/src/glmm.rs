//! Random-intercept logistic regression fitted by maximizing the Laplace
//! approximation to the marginal likelihood.
//!
//! Model: `logit P(y_ij = 1) = x_ij'β + b_j`, `b_j ~ N(0, σ²)`.
//!
//! For a fixed `(β, σ²)` each group's random-effect mode `b̂_j` is found by
//! Newton steps on the concave conditional log-density. The Laplace
//! contribution of group `j` is then
//!
//! `ℓ_j ≈ Σ_i log p(y_ij | b̂_j) − b̂_j² / (2σ²) − ½ log(1 + σ² S_j)`
//!
//! with `S_j = Σ_i μ_ij (1 − μ_ij)` evaluated at the mode. The outer problem
//! is solved with BFGS over `(β, σ)` using the exact gradient of this
//! approximation (including the dependence of `b̂_j` on the parameters).
//! The variance is parametrized through `σ` itself so that `σ = 0` is an
//! interior stationary point rather than a boundary.

use nalgebra::{DMatrix, DVector};

use crate::design::{Design, DesignInfo, ModelSpec};
use crate::dist::norm_two_sided;
use crate::error::{Result, StatsError};
use crate::model::{inv_logit, CoefficientRow, FittedModel, Link};
use crate::optim::{minimize, BfgsOptions};
use crate::table::DataTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceConstraint {
    /// Estimate σ² jointly with β.
    Free,
    /// Hold σ² at the given value (0 gives plain logistic regression).
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct GlmmOptions {
    pub variance: VarianceConstraint,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub initial_sigma2: f64,
}

impl Default for GlmmOptions {
    fn default() -> Self {
        Self {
            variance: VarianceConstraint::Free,
            gradient_tolerance: 1e-6,
            max_iterations: 200,
            initial_sigma2: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlmmFit {
    pub info: DesignInfo,
    pub beta: DVector<f64>,
    pub se: DVector<f64>,
    pub z: DVector<f64>,
    pub p: DVector<f64>,
    pub vcov: DMatrix<f64>,
    /// Random-intercept variance σ².
    pub sigma2: f64,
    /// Laplace-approximated marginal log-likelihood.
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    pub n_groups: usize,
    /// Conditional modes of the random intercepts, in group order.
    pub random_effects: Vec<f64>,
    pub group_labels: Vec<String>,
    pub variance_estimated: bool,
    pub warnings: Vec<String>,
}

impl GlmmFit {
    /// Number of estimated parameters (β plus σ² when estimated).
    pub fn n_params(&self) -> usize {
        self.beta.len() + usize::from(self.variance_estimated)
    }

    pub fn aic(&self) -> f64 {
        2.0 * self.n_params() as f64 - 2.0 * self.loglik
    }

    pub fn bic(&self) -> f64 {
        self.n_params() as f64 * (self.n_obs as f64).ln() - 2.0 * self.loglik
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn coefficient_table(&self) -> Vec<CoefficientRow> {
        self.info
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| CoefficientRow {
                predictor: name.clone(),
                estimate: self.beta[i],
                se: self.se[i],
                statistic: self.z[i],
                p: self.p[i],
            })
            .collect()
    }
}

impl FittedModel for GlmmFit {
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
        Link::Logit
    }
}

pub fn fit_glmm_logit(spec: &ModelSpec, table: &DataTable, opts: &GlmmOptions) -> Result<GlmmFit> {
    let design = Design::build(spec, table)?;
    fit_glmm_design(&design, opts)
}

pub fn fit_glmm_design(design: &Design, opts: &GlmmOptions) -> Result<GlmmFit> {
    if design.y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(StatsError::NonBinaryResponse(design.info.response.clone()));
    }
    let n = design.x.nrows();
    let p = design.x.ncols();
    let (groups, labels): (Vec<Vec<usize>>, Vec<String>) = match &design.grouping {
        Some(g) => (g.members.clone(), g.labels.clone()),
        None => ((0..n).map(|i| vec![i]).collect(), Vec::new()),
    };
    let variance = match (&design.grouping, opts.variance) {
        (None, _) => VarianceConstraint::Fixed(0.0),
        (Some(_), v) => v,
    };
    let objective = LaplaceObjective {
        x: &design.x,
        y: &design.y,
        groups: &groups,
    };

    let mut warnings = Vec::new();
    let init = logistic_irls(&design.x, &design.y);
    if !init.converged || init.beta.iter().any(|b| b.abs() > 15.0) {
        warnings.push(
            "possible complete or quasi-complete separation: logistic start values diverge".to_string(),
        );
    }

    let bfgs = BfgsOptions {
        gradient_tolerance: opts.gradient_tolerance,
        max_iterations: opts.max_iterations,
    };

    let (beta, sigma2, result) = match variance {
        VarianceConstraint::Fixed(v) => {
            let v = v.max(0.0);
            let eval = |params: &DVector<f64>| {
                let e = objective.evaluate(params, v);
                (-e.loglik, -e.grad_beta)
            };
            let h0 = seed_inverse_hessian(&eval, &init.beta);
            let res = minimize(eval, init.beta.clone(), h0, &bfgs);
            (res.x.clone(), v, res)
        }
        VarianceConstraint::Free => {
            let mut x0 = init.beta.clone().resize_vertically(p + 1, 0.0);
            x0[p] = opts.initial_sigma2.max(0.0).sqrt();
            let eval = |params: &DVector<f64>| objective.outer(params);
            let h0 = seed_inverse_hessian(&eval, &x0);
            let res = minimize(eval, x0, h0, &bfgs);
            let beta = res.x.rows(0, p).into_owned();
            let s = res.x[p];
            (beta, s * s, res)
        }
    };

    let final_eval = objective.evaluate(&beta, sigma2);
    let vcov = match variance {
        VarianceConstraint::Free => {
            let mut full = beta.clone().resize_vertically(p + 1, 0.0);
            full[p] = sigma2.sqrt();
            let hess = numeric_hessian(&|x: &DVector<f64>| objective.outer(x), &full);
            let theta_curv = hess[(p, p)];
            let joint = if sigma2.sqrt() > 1e-4 && theta_curv > 0.0 {
                hess.clone().cholesky().map(|c| c.inverse().view((0, 0), (p, p)).into_owned())
            } else {
                None
            };
            match joint {
                Some(v) => Some(v),
                None => hess.view((0, 0), (p, p)).into_owned().cholesky().map(|c| c.inverse()),
            }
        }
        VarianceConstraint::Fixed(v) => {
            let hess = numeric_hessian(
                &|x: &DVector<f64>| {
                    let e = objective.evaluate(x, v);
                    (-e.loglik, -e.grad_beta)
                },
                &beta,
            );
            hess.cholesky().map(|c| c.inverse())
        }
    };
    let vcov = match vcov {
        Some(v) => symmetrize(v),
        None => {
            warnings.push("Hessian is not positive definite; standard errors unavailable".to_string());
            DMatrix::from_element(p, p, f64::NAN)
        }
    };
    let se = vcov.diagonal().map(|v| v.max(0.0).sqrt());
    let z = beta.zip_map(&se, |b, s| b / s);
    let pv = z.map(norm_two_sided);
    if !result.converged {
        warnings.push(format!(
            "optimizer stopped after {} iterations with gradient norm {:.3e}",
            result.iterations,
            result.gradient.norm()
        ));
    }

    Ok(GlmmFit {
        info: design.info.clone(),
        beta,
        se,
        z,
        p: pv,
        vcov,
        sigma2,
        loglik: final_eval.loglik,
        converged: result.converged,
        iterations: result.iterations,
        n_obs: n,
        n_groups: if design.grouping.is_some() { groups.len() } else { 0 },
        random_effects: if design.grouping.is_some() { final_eval.modes } else { Vec::new() },
        group_labels: labels,
        variance_estimated: matches!(variance, VarianceConstraint::Free),
        warnings,
    })
}

/// Laplace log-likelihood of a design at given parameters. Exposed for
/// profiling and likelihood-ratio comparisons.
pub fn laplace_loglik(design: &Design, beta: &DVector<f64>, sigma2: f64) -> f64 {
    let n = design.x.nrows();
    let groups: Vec<Vec<usize>> = match &design.grouping {
        Some(g) => g.members.clone(),
        None => (0..n).map(|i| vec![i]).collect(),
    };
    let v = if design.grouping.is_some() { sigma2 } else { 0.0 };
    LaplaceObjective {
        x: &design.x,
        y: &design.y,
        groups: &groups,
    }
    .evaluate(beta, v)
    .loglik
}

struct Evaluation {
    loglik: f64,
    grad_beta: DVector<f64>,
    /// dℓ/dσ²
    grad_var: f64,
    modes: Vec<f64>,
}

struct LaplaceObjective<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    groups: &'a [Vec<usize>],
}

fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

impl LaplaceObjective<'_> {
    /// Negative log-likelihood and gradient over `(β, σ)`.
    fn outer(&self, params: &DVector<f64>) -> (f64, DVector<f64>) {
        let p = self.x.ncols();
        let beta = params.rows(0, p).into_owned();
        let s = params[p];
        let e = self.evaluate(&beta, s * s);
        let mut g = DVector::zeros(p + 1);
        g.rows_mut(0, p).copy_from(&(-e.grad_beta));
        g[p] = -2.0 * s * e.grad_var;
        (-e.loglik, g)
    }

    fn evaluate(&self, beta: &DVector<f64>, v: f64) -> Evaluation {
        let p = self.x.ncols();
        let eta0 = self.x * beta;
        let mut loglik = 0.0;
        let mut grad_beta = DVector::zeros(p);
        let mut grad_var = 0.0;
        let mut modes = Vec::with_capacity(self.groups.len());

        let mut u = DVector::zeros(p);
        let mut q = DVector::zeros(p);
        for members in self.groups {
            let b = self.mode(members, &eta0, v);
            u.fill(0.0);
            q.fill(0.0);
            let (mut ll, mut r, mut s, mut t) = (0.0, 0.0, 0.0, 0.0);
            for &i in members {
                let eta = eta0[i] + b;
                let mu = inv_logit(eta);
                let w = mu * (1.0 - mu);
                let y = self.y[i];
                ll += y * eta - softplus(eta);
                r += y - mu;
                s += w;
                t += w * (1.0 - 2.0 * mu);
                let xi = self.x.row(i);
                for k in 0..p {
                    let xv = xi[k];
                    grad_beta[k] += (y - mu) * xv;
                    u[k] += w * xv;
                    q[k] += w * (1.0 - 2.0 * mu) * xv;
                }
            }
            let d = 1.0 + v * s;
            // b̂²/(2σ²) = σ² r² / 2 at the mode, since b̂ = σ² r.
            loglik += ll - 0.5 * v * r * r - 0.5 * d.ln();
            grad_var += 0.5 * r * r - 0.5 * (s + v * t * r / d) / d;
            if v > 0.0 {
                let coef = 0.5 * v / d;
                let cross = t * v / d;
                for k in 0..p {
                    grad_beta[k] -= coef * (q[k] - cross * u[k]);
                }
            }
            modes.push(b);
        }
        Evaluation {
            loglik,
            grad_beta,
            grad_var,
            modes,
        }
    }

    /// Mode of the conditional log-density of one group's intercept,
    /// `h(b) = Σ log p(y_i | η_i + b) − b²/(2σ²)`.
    fn mode(&self, members: &[usize], eta0: &DVector<f64>, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let h = |b: f64| -> f64 {
            let ll: f64 = members
                .iter()
                .map(|&i| {
                    let eta = eta0[i] + b;
                    self.y[i] * eta - softplus(eta)
                })
                .sum();
            ll - b * b / (2.0 * v)
        };
        let mut b = 0.0;
        let mut hb = h(b);
        for _ in 0..100 {
            let (mut r, mut s) = (0.0, 0.0);
            for &i in members {
                let mu = inv_logit(eta0[i] + b);
                r += self.y[i] - mu;
                s += mu * (1.0 - mu);
            }
            // Newton step scaled by σ² for stability as σ² → 0.
            let mut step = (v * r - b) / (v * s + 1.0);
            if step.abs() <= 1e-13 * (1.0 + b.abs()) {
                b += step;
                break;
            }
            let mut accepted = false;
            for _ in 0..50 {
                let cand = b + step;
                let hc = h(cand);
                if hc >= hb - 1e-12 * hb.abs().max(1.0) {
                    b = cand;
                    hb = hc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        b
    }
}

pub(crate) struct IrlsResult {
    pub beta: DVector<f64>,
    pub converged: bool,
}

/// Plain logistic regression by Newton–Raphson (IRLS).
pub(crate) fn logistic_irls(x: &DMatrix<f64>, y: &DVector<f64>) -> IrlsResult {
    let (n, p) = x.shape();
    let mut beta = DVector::zeros(p);
    for _ in 0..100 {
        let eta = x * &beta;
        let mut xtwx = DMatrix::zeros(p, p);
        let mut score = DVector::zeros(p);
        for i in 0..n {
            let mu = inv_logit(eta[i]);
            let w = (mu * (1.0 - mu)).max(1e-12);
            let xi = x.row(i).transpose();
            xtwx.ger(w, &xi, &xi, 1.0);
            score.axpy(y[i] - mu, &xi, 1.0);
        }
        let Some(chol) = xtwx.cholesky() else {
            return IrlsResult { beta, converged: false };
        };
        let step = chol.solve(&score);
        beta += &step;
        if step.amax() < 1e-10 {
            return IrlsResult { beta, converged: true };
        }
        if beta.amax() > 50.0 {
            break;
        }
    }
    IrlsResult { beta, converged: false }
}

fn numeric_hessian<F>(eval: &F, x: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    let k = x.len();
    let mut h = DMatrix::zeros(k, k);
    for i in 0..k {
        let step = 1e-5 * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += step;
        xm[i] -= step;
        let gp = eval(&xp).1;
        let gm = eval(&xm).1;
        h.set_column(i, &((gp - gm) / (2.0 * step)));
    }
    symmetrize(h)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn seed_inverse_hessian<F>(eval: &F, x: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    let h = numeric_hessian(eval, x);
    let k = x.len();
    if let Some(c) = h.clone().cholesky() {
        return c.inverse();
    }
    // Not positive definite at the start: fall back to the diagonal.
    DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        (0..k).map(|i| {
            let d = h[(i, i)];
            if d > 1e-8 {
                1.0 / d
            } else {
                1.0
            }
        }),
    ))
}
