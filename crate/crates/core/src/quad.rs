//! Adaptive Gauss–Kronrod (7/15) quadrature of vector-valued complex
//! integrands over a real interval, and contour integrals along segments.

use num_complex::Complex64 as C64;
use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, max_depth: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError<E> {
    #[error("integrand failed at t = {t}: {source}")]
    Integrand { t: f64, source: E },
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    NotConverged { estimate: f64 },
}

#[derive(Debug, Clone)]
pub struct QuadResult<const N: usize> {
    pub value: [C64; N],
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<const N: usize, E>(
    f: &mut impl FnMut(f64) -> Result<[C64; N], E>,
    a: f64,
    b: f64,
    evals: &mut usize,
) -> Result<([C64; N], f64), QuadError<E>> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = C64::new(0.0, 0.0);
    let mut k = [zero; N];
    let mut g = [zero; N];
    let mut call = |t: f64| f(t).map_err(|source| QuadError::Integrand { t, source });
    for (idx, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &s in pts {
            let y = call(c + h * s)?;
            *evals += 1;
            for j in 0..N {
                k[j] += w * y[j];
                if idx % 2 == 1 {
                    g[j] += WG[idx / 2] * y[j];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for j in 0..N {
        k[j] *= h;
        g[j] *= h;
        err = err.max((k[j] - g[j]).norm());
    }
    Ok((k, err))
}

/// Integrate `f` over `[a, b]` by recursive bisection. An interval is
/// accepted when its Gauss–Kronrod error estimate falls below its share
/// of `abs_tol`, or below a roundoff floor relative to its value.
pub fn integrate<const N: usize, E>(
    mut f: impl FnMut(f64) -> Result<[C64; N], E>,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<N>, QuadError<E>> {
    let mut evals = 0;
    let mut total = [C64::new(0.0, 0.0); N];
    let mut err_total = 0.0;
    let mut worst_unconverged: f64 = 0.0;
    let width = (b - a).abs();
    if width == 0.0 {
        return Ok(QuadResult { value: total, error: 0.0, evaluations: 0 });
    }
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi, &mut evals)?;
        let share = opts.abs_tol * ((hi - lo).abs() / width).max(1e-3);
        let mag = val.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let floor = 50.0 * f64::EPSILON * mag;
        if err <= share.max(floor) || depth >= opts.max_depth {
            if err > share.max(floor) {
                worst_unconverged = worst_unconverged.max(err);
            }
            for j in 0..N {
                total[j] += val[j];
            }
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if worst_unconverged > 0.0 && err_total > opts.abs_tol.max(1e3 * f64::EPSILON * norm_max(&total)) {
        return Err(QuadError::NotConverged { estimate: err_total });
    }
    Ok(QuadResult { value: total, error: err_total, evaluations: evals })
}

fn norm_max<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Contour integral `∫ f(z) dz` along the straight segment `[z0, z1]`.
pub fn integrate_segment<const N: usize, E>(
    mut f: impl FnMut(C64) -> Result<[C64; N], E>,
    z0: C64,
    z1: C64,
    opts: QuadOptions,
) -> Result<QuadResult<N>, QuadError<E>> {
    let dz = z1 - z0;
    integrate(
        |t| {
            let mut y = f(z0 + t * dz)?;
            for v in y.iter_mut() {
                *v *= dz;
            }
            Ok(y)
        },
        0.0,
        1.0,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|t| Ok::<_, Infallible>([C64::new(t.powi(5), 0.0)]), 0.0, 2.0, QuadOptions::default())
            .unwrap();
        assert!((r.value[0].re - 64.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn contour_exp() {
        let z1 = C64::new(1.0, 2.0);
        let r = integrate_segment(|z| Ok::<_, Infallible>([z.exp()]), C64::new(0.0, 0.0), z1, QuadOptions::default())
            .unwrap();
        assert!((r.value[0] - (z1.exp() - 1.0)).norm() < 1e-13);
    }

    #[test]
    fn peaked_integrand_subdivides() {
        // ∫_{-1}^{1} 1/(t^2 + 1e-4) dt = 2·100·atan(100)
        let r = integrate(
            |t| Ok::<_, Infallible>([C64::new(1.0 / (t * t + 1e-4), 0.0)]),
            -1.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = 200.0 * 100f64.atan();
        assert!((r.value[0].re - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn integrand_error_propagates() {
        let r = integrate(|t| if t > 0.5 { Err("boom") } else { Ok([C64::new(1.0, 0.0)]) }, 0.0, 1.0, QuadOptions::default());
        assert!(matches!(r, Err(QuadError::Integrand { .. })));
    }
}
