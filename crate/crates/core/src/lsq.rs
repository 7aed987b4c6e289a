//! Levenberg–Marquardt with a forward-difference Jacobian, and a
//! golden-section line search.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative decrease of the cost falls below this.
    pub ftol: f64,
    /// Stop when the relative step falls below this.
    pub xtol: f64,
    pub lambda0: f64,
    /// Relative Jacobian step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 200, ftol: 1e-16, xtol: 1e-14, lambda0: 1e-3, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    /// `‖r(x)‖₂`
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimise `‖r(x)‖²`. A residual function returning `None` marks `x`
/// as infeasible; such trial points are rejected like cost increases.
pub fn levenberg_marquardt(r: impl Fn(&[f64]) -> Option<Vec<f64>>, x0: &[f64], opts: &LmOptions) -> Option<LmResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut res = DVector::from_vec(r(&x)?);
    let m = res.len();
    let mut cost = res.norm_squared();
    let mut lambda = opts.lambda0;
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for k in 0..n {
            let step = opts.fd_step * x[k].abs().max(1.0);
            let mut xp = x.clone();
            xp[k] += step;
            let rp = match r(&xp) {
                Some(v) => DVector::from_vec(v),
                None => {
                    xp[k] = x[k] - step;
                    let rm = DVector::from_vec(r(&xp)?);
                    (&res - &rm) + &res
                }
            };
            jac.set_column(k, &((rp - &res) / step));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &res;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(dx) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
            match r(&xn) {
                Some(rn) => {
                    let rn = DVector::from_vec(rn);
                    let cn = rn.norm_squared();
                    if cn < cost {
                        let rel_f = (cost - cn) / cost;
                        let rel_x = dx.norm() / (DVector::from_vec(x.clone()).norm() + 1e-30);
                        x = xn;
                        res = rn;
                        cost = cn;
                        lambda = (lambda / 3.0).max(1e-15);
                        improved = true;
                        if rel_f < opts.ftol || rel_x < opts.xtol {
                            converged = true;
                        }
                        break;
                    }
                    lambda *= 4.0;
                }
                None => lambda *= 4.0,
            }
        }
        if !improved {
            // no descent from here: a (possibly flat) minimum at working precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Some(LmResult { x, residual: cost.sqrt(), iterations: it, converged })
}

/// Minimise a unimodal function on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = |x: &[f64]| Some(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let out = levenberg_marquardt(r, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
        assert!(out.residual < 1e-10);
    }

    #[test]
    fn exponential_fit() {
        let ts: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let r = |p: &[f64]| Some(ts.iter().zip(&ys).map(|(t, y)| p[0] * (p[1] * t).exp() - y).collect());
        let out = levenberg_marquardt(r, &[1.0, 0.0], &LmOptions::default()).unwrap();
        assert!((out.x[0] - 2.5).abs() < 1e-9 && (out.x[1] + 1.3).abs() < 1e-9);
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) = golden_section(|x| (x - 2.0).powi(2) + 1.0, 0.0, 5.0, 1e-10, 200);
        assert!((x - 2.0).abs() < 1e-6 && (fx - 1.0).abs() < 1e-12);
    }
}
