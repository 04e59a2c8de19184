//! Quasi-Newton (BFGS) minimizer with backtracking line search.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-6,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f`, where `eval(x)` returns `(f(x), ∇f(x))`.
///
/// `h0_inv` seeds the inverse-Hessian approximation. Near the optimum the
/// objective can stop decreasing measurably before the gradient tolerance
/// is reached; a step is then accepted when the objective is flat to
/// rounding and the gradient norm shrinks.
pub fn minimize<F>(mut eval: F, x0: DVector<f64>, h0_inv: DMatrix<f64>, opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = eval(&x);
    let mut h = h0_inv.clone();
    let mut iterations = 0;
    let mut reset_used = false;

    while iterations < opts.max_iterations {
        if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
            break;
        }
        if g.norm() < opts.gradient_tolerance {
            return BfgsResult {
                x,
                value: fx,
                gradient: g,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if slope >= 0.0 {
            h = h0_inv.clone();
            d = -(&h * &g);
            slope = g.dot(&d);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let x_new = &x + &d * alpha;
            let (f_new, g_new) = eval(&x_new);
            if f_new.is_finite() {
                let armijo = f_new <= fx + 1e-4 * alpha * slope;
                let flat = (f_new - fx).abs() <= 1e-12 * fx.abs().max(1.0)
                    && g_new.norm() < g.norm();
                if armijo || flat {
                    accepted = Some((x_new, f_new, g_new));
                    break;
                }
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if reset_used {
                break;
            }
            // Retry once from the seed curvature before giving up.
            reset_used = true;
            h = h0_inv.clone();
            continue;
        };
        reset_used = false;

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H' = H - rho (s y'H + H y s') + (rho^2 y'Hy + rho) s s'
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }

    let converged = g.norm() < opts.gradient_tolerance;
    BfgsResult {
        x,
        value: fx,
        gradient: g,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let eval = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            (f, g)
        };
        let res = minimize(
            eval,
            DVector::from_vec(vec![-1.2, 1.0]),
            DMatrix::identity(2, 2) * 1e-3,
            &BfgsOptions::default(),
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-6 && (res.x[1] - 1.0).abs() < 1e-6);
    }
}
