//! Dormand–Prince 5(4) integrator for complex-valued systems along a real
//! parameter, with the 4th-order continuous extension for dense output.
//!
//! The right-hand side receives the slope at the start of the current
//! step as a reference, so that a multivalued field (a square root, say)
//! can be continued on one branch.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError<E> {
    #[error("right-hand side failed at s = {s}: {source}")]
    Rhs { s: f64, source: E },
    #[error("step size underflow at s = {s}")]
    StepUnderflow { s: f64 },
    #[error("too many steps (stopped at s = {s})")]
    TooManySteps { s: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step as a fraction of the interval.
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, h0: 1e-2, max_steps: 200_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub s0: f64,
    pub s1: f64,
    pub y0: [C64; N],
    pub y1: [C64; N],
    /// Slope at `s1`.
    pub dy1: [C64; N],
    rcont: [[C64; N]; 5],
}

impl<const N: usize> Step<N> {
    fn dense(&self, s: f64) -> [C64; N] {
        let th = (s - self.s0) / (self.s1 - self.s0);
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|k| r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k]))))
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub steps: Vec<Step<N>>,
    pub y_end: [C64; N],
    pub dy_end: [C64; N],
    pub rhs_evals: usize,
}

impl<const N: usize> OdeSolution<N> {
    /// Dense output at `s` inside the integrated interval.
    pub fn eval(&self, s: f64) -> Option<[C64; N]> {
        let first = self.steps.first()?;
        let idx = self.steps.partition_point(|st| st.s1 < s);
        let st = self.steps.get(idx)?;
        if s < first.s0.min(first.s1) - 1e-15 {
            return None;
        }
        Some(st.dense(s))
    }
}

fn axpy<const N: usize>(y: &[C64; N], h: f64, ks: &[[C64; N]], coef: &[f64]) -> [C64; N] {
    std::array::from_fn(|k| {
        let mut acc = C64::new(0.0, 0.0);
        for (kk, c) in ks.iter().zip(coef) {
            if *c != 0.0 {
                acc += *c * kk[k];
            }
        }
        y[k] + h * acc
    })
}

/// Integrate `y′ = f(s, y, reference)` from `s0` to `s1 > s0`.
///
/// `dy0` is the slope at `s0` (also passed as the first reference).
pub fn integrate<const N: usize, E>(
    mut f: impl FnMut(f64, &[C64; N], &[C64; N]) -> Result<[C64; N], E>,
    s0: f64,
    s1: f64,
    y0: [C64; N],
    dy0: [C64; N],
    opts: &OdeOptions,
) -> Result<OdeSolution<N>, OdeError<E>> {
    let span = s1 - s0;
    assert!(span > 0.0, "integration interval must be positive");
    let mut s = s0;
    let mut y = y0;
    let mut k1 = dy0;
    let mut h = opts.h0 * span;
    let mut steps = Vec::new();
    let mut evals = 0usize;
    let mut n = 0usize;
    while s < s1 {
        n += 1;
        if n > opts.max_steps {
            return Err(OdeError::TooManySteps { s });
        }
        let last = s + h >= s1;
        if last {
            h = s1 - s;
        }
        if h <= 1e-14 * span.max(s.abs()) {
            return Err(OdeError::StepUnderflow { s });
        }
        let mut ks = [k1; 7];
        let mut failed = None;
        for st in 1..7 {
            let yi = axpy(&y, h, &ks[..st], &A[st][..st]);
            match f(s + C[st] * h, &yi, &k1) {
                Ok(k) => ks[st] = k,
                Err(e) => {
                    failed = Some((s + C[st] * h, e));
                    break;
                }
            }
            evals += 1;
        }
        if let Some((sf, e)) = failed {
            // a failed stage may just mean the step reached past a
            // singularity; shrink and retry, give up when tiny
            if h <= 1e-10 * span {
                return Err(OdeError::Rhs { s: sf, source: e });
            }
            h *= 0.25;
            continue;
        }
        let y1 = axpy(&y, h, &ks[..6], &A[6][..6]);
        let mut err: f64 = 0.0;
        for k in 0..N {
            let mut ek = C64::new(0.0, 0.0);
            for st in 0..7 {
                ek += E[st] * ks[st][k];
            }
            let sc = opts.atol + opts.rtol * y[k].norm().max(y1[k].norm());
            err = err.max((h * ek).norm() / sc);
        }
        if err <= 1.0 {
            let r1: [C64; N] = std::array::from_fn(|k| y1[k] - y[k]);
            let r2: [C64; N] = std::array::from_fn(|k| h * ks[0][k] - r1[k]);
            let r3: [C64; N] = std::array::from_fn(|k| r1[k] - h * ks[6][k] - r2[k]);
            let r4: [C64; N] = std::array::from_fn(|k| {
                let mut acc = C64::new(0.0, 0.0);
                for st in 0..7 {
                    acc += D[st] * ks[st][k];
                }
                h * acc
            });
            let s_next = if last { s1 } else { s + h };
            steps.push(Step { s0: s, s1: s_next, y0: y, y1, dy1: ks[6], rcont: [y, r1, r2, r3, r4] });
            s = s_next;
            y = y1;
            k1 = ks[6];
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
    }
    Ok(OdeSolution { steps, y_end: y, dy_end: k1, rhs_evals: evals })
}
