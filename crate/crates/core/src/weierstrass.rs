//! Weierstrass representation.
//!
//! A pair `(f, g)` of holomorphic functions defines the minimal curve
//!
//! ```text
//! Ψ(z) = ∫_{z0}^{z} ( ½ f (1 − g²),  (i/2) f (1 + g²),  f g ) dζ
//! ```
//!
//! whose real part is a minimal surface in isothermal parameters with
//! `E = G = ¼|f|²(1+|g|²)²` and normal curvature
//! `ν = 4|g′| / (|f| (1+|g|²)²)`. The associated surface at angle `t` is
//! `Re(e^{−it} Ψ)`; `t = π/2` gives the conjugate `Im Ψ`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AnalyticError, AnalyticExpr, Jet};
use crate::chart::{Chart, ChartError, ChartJet, Provenance};
use crate::quad::{self, QuadError, QuadOptions};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeierstrassError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("pole on integration path near {at}")]
    PoleOnPath { at: C64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("f vanishes at {at}; normal curvature is unbounded there")]
    ZeroOfF { at: C64 },
    #[error("g is constant; the surface is planar")]
    ConstantG,
    #[error("f vanishes identically")]
    ZeroF,
    #[error("chart is not isothermal near the seed (isotropy defect {defect:e})")]
    NonIsothermal { defect: f64 },
    #[error("chart evaluation failed: {0}")]
    Chart(#[from] ChartError),
}

pub type Result<T, E = WeierstrassError> = std::result::Result<T, E>;

/// Weierstrass data `(f, g)` with integration base point `z0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassPair {
    pub f: AnalyticExpr,
    pub g: AnalyticExpr,
    pub z0: C64,
}

impl WeierstrassPair {
    pub fn new(f: AnalyticExpr, g: AnalyticExpr, z0: C64) -> Self {
        WeierstrassPair { f, g, z0 }
    }

    pub fn parse(f: &str, g: &str, z0: C64) -> Result<Self> {
        Ok(WeierstrassPair {
            f: crate::analytic::parse(f)?,
            g: crate::analytic::parse(g)?,
            z0,
        })
    }

    fn eval_expr(&self, e: &AnalyticExpr, z: C64) -> Result<Jet> {
        if e.has_tracked() {
            Ok(e.eval_from(self.z0, z)?)
        } else {
            Ok(e.eval(z)?)
        }
    }

    pub fn f_at(&self, z: C64) -> Result<Jet> {
        self.eval_expr(&self.f, z)
    }

    pub fn g_at(&self, z: C64) -> Result<Jet> {
        self.eval_expr(&self.g, z)
    }

    /// Pair of the associated surface at angle `t`: `(e^{−it} f, g)`.
    pub fn associated(&self, t: f64) -> Self {
        let rot = AnalyticExpr::Const(C64::from_polar(1.0, -t));
        WeierstrassPair { f: rot * self.f.clone(), g: self.g.clone(), z0: self.z0 }
    }

    /// Reject pairs that cannot generate a regular non-planar surface.
    pub fn validate(&self) -> Result<()> {
        if self.f.is_constant() && self.f.eval(C64::new(0.0, 0.0))?.value.norm() == 0.0 {
            return Err(WeierstrassError::ZeroF);
        }
        if self.g.is_constant() {
            return Err(WeierstrassError::ConstantG);
        }
        self.f_at(self.z0)?;
        let gj = self.g_at(self.z0)?;
        if !gj.derivative.re.is_finite() {
            return Err(AnalyticError::Pole { at: self.z0 }.into());
        }
        Ok(())
    }
}

/// `Ψ′ = (½ f (1 − g²), (i/2) f (1 + g²), f g)`.
pub fn curve_derivative_from(f: C64, g: C64) -> [C64; 3] {
    let i = C64::new(0.0, 1.0);
    [0.5 * f * (1.0 - g * g), 0.5 * i * f * (1.0 + g * g), f * g]
}

/// `Ψ″` from the jets of `f` and `g`.
pub fn curve_second_derivative_from(f: Jet, g: Jet) -> [C64; 3] {
    let i = C64::new(0.0, 1.0);
    let (fv, fd, gv, gd) = (f.value, f.derivative, g.value, g.derivative);
    [
        0.5 * (fd * (1.0 - gv * gv) - 2.0 * fv * gv * gd),
        0.5 * i * (fd * (1.0 + gv * gv) + 2.0 * fv * gv * gd),
        fd * gv + fv * gd,
    ]
}

/// Minimal curve `Ψ` of a pair, anchored so that `Ψ(z0) = 0`.
///
/// Polynomial pairs are integrated exactly; everything else by adaptive
/// Gauss–Kronrod quadrature along the segment `[z0, z]`.
#[derive(Debug, Clone)]
pub struct MinimalCurve {
    pair: WeierstrassPair,
    /// Antiderivative coefficients of `Ψ′` for polynomial pairs.
    poly: Option<[Vec<C64>; 3]>,
    base: [C64; 3],
    pub quad: QuadOptions,
}

fn poly_eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &k| acc * z + k)
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_lin(a: &[C64], ca: C64, b: &[C64], cb: C64) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| ca * a.get(k).copied().unwrap_or_default() + cb * b.get(k).copied().unwrap_or_default())
        .collect()
}

impl MinimalCurve {
    pub fn new(pair: WeierstrassPair) -> Self {
        let poly = match (pair.f.as_polynomial(), pair.g.as_polynomial()) {
            (Some(f), Some(g)) if !pair.f.has_tracked() && !pair.g.has_tracked() => {
                let one = C64::new(1.0, 0.0);
                let half = C64::new(0.5, 0.0);
                let ihalf = C64::new(0.0, 0.5);
                let g2 = poly_mul(&g, &g);
                let d1 = poly_mul(&f, &poly_lin(&[one], half, &g2, -half));
                let d2 = poly_mul(&f, &poly_lin(&[one], ihalf, &g2, ihalf));
                let d3 = poly_mul(&f, &g);
                let anti = |d: Vec<C64>| -> Vec<C64> {
                    let mut out = vec![C64::new(0.0, 0.0)];
                    out.extend(d.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)));
                    out
                };
                Some([anti(d1), anti(d2), anti(d3)])
            }
            _ => None,
        };
        let base = match &poly {
            Some(p) => [poly_eval(&p[0], pair.z0), poly_eval(&p[1], pair.z0), poly_eval(&p[2], pair.z0)],
            None => [C64::new(0.0, 0.0); 3],
        };
        MinimalCurve { pair, poly, base, quad: QuadOptions::default() }
    }

    pub fn pair(&self) -> &WeierstrassPair {
        &self.pair
    }

    pub fn is_polynomial(&self) -> bool {
        self.poly.is_some()
    }

    /// Polynomial coefficients of the three components (unanchored), for
    /// polynomial pairs.
    pub fn polynomial_components(&self) -> Option<&[Vec<C64>; 3]> {
        self.poly.as_ref()
    }

    pub fn derivative(&self, z: C64) -> Result<[C64; 3]> {
        let f = self.pair.f_at(z)?.value;
        let g = self.pair.g_at(z)?.value;
        Ok(curve_derivative_from(f, g))
    }

    pub fn second_derivative(&self, z: C64) -> Result<[C64; 3]> {
        Ok(curve_second_derivative_from(self.pair.f_at(z)?, self.pair.g_at(z)?))
    }

    /// `Ψ(z)` with `Ψ(z0) = 0`.
    pub fn eval(&self, z: C64) -> Result<[C64; 3]> {
        if let Some(p) = &self.poly {
            return Ok([
                poly_eval(&p[0], z) - self.base[0],
                poly_eval(&p[1], z) - self.base[1],
                poly_eval(&p[2], z) - self.base[2],
            ]);
        }
        let res = quad::integrate_segment(|w| self.derivative(w), self.pair.z0, z, self.quad);
        match res {
            Ok(r) => Ok(r.value),
            Err(QuadError::Integrand { source, .. }) => Err(match source {
                WeierstrassError::Analytic(AnalyticError::Pole { at })
                | WeierstrassError::Analytic(AnalyticError::NonFinite { at }) => WeierstrassError::PoleOnPath { at },
                other => other,
            }),
            Err(e @ QuadError::NotConverged { .. }) => Err(WeierstrassError::Quadrature(e.to_string())),
        }
    }

    /// `max |Ψ′²| / (1 + |Ψ′|²)` over the given points.
    pub fn isotropy_defect(&self, pts: &[C64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in pts {
            let d = self.derivative(z)?;
            let sq = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let n2: f64 = d.iter().map(|c| c.norm_sqr()).sum();
            worst = worst.max(sq.norm() / (1.0 + n2));
        }
        Ok(worst)
    }
}

/// `Ψ(z)` for the pair, anchored at `z0`.
pub fn integrate_curve(p: &WeierstrassPair, z: C64) -> Result<[C64; 3]> {
    MinimalCurve::new(p.clone()).eval(z)
}

/// Surface `Re(e^{−it} Ψ(u + iv))`.
#[derive(Debug, Clone)]
pub struct WeierstrassChart {
    curve: Arc<MinimalCurve>,
    rot: C64,
    provenance: Provenance,
}

impl WeierstrassChart {
    pub fn curve(&self) -> &MinimalCurve {
        &self.curve
    }

    fn project(&self, w: [C64; 3]) -> Vec3 {
        Vec3::new((self.rot * w[0]).re, (self.rot * w[1]).re, (self.rot * w[2]).re)
    }
}

impl Chart for WeierstrassChart {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        let psi = self.curve.eval(C64::new(u, v)).map_err(|e| ChartError(e.to_string()))?;
        Ok(self.project(psi))
    }

    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        let go = || -> Result<ChartJet> {
            let z = C64::new(u, v);
            let i = C64::new(0.0, 1.0);
            let x = self.project(self.curve.eval(z)?);
            let d1 = self.curve.derivative(z)?;
            let d2 = self.curve.second_derivative(z)?;
            let times = |a: [C64; 3], c: C64| [a[0] * c, a[1] * c, a[2] * c];
            Ok(ChartJet {
                x,
                xu: self.project(d1),
                xv: self.project(times(d1, i)),
                xuu: self.project(d2),
                xuv: self.project(times(d2, i)),
                xvv: -self.project(d2),
            })
        };
        Some(go().map_err(|e| ChartError(e.to_string())))
    }

    fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn polynomial_degree(&self) -> Option<usize> {
        let p = self.curve.poly.as_ref()?;
        p.iter()
            .map(|c| c.iter().rposition(|x| x.norm() != 0.0).unwrap_or(0))
            .max()
    }
}

pub fn chart_real(p: &WeierstrassPair) -> WeierstrassChart {
    WeierstrassChart {
        curve: Arc::new(MinimalCurve::new(p.clone())),
        rot: C64::new(1.0, 0.0),
        provenance: Provenance::WeierstrassReal,
    }
}

pub fn chart_imag(p: &WeierstrassPair) -> WeierstrassChart {
    WeierstrassChart {
        curve: Arc::new(MinimalCurve::new(p.clone())),
        rot: C64::new(0.0, -1.0),
        provenance: Provenance::WeierstrassImag,
    }
}

pub fn chart_assoc(p: &WeierstrassPair, t: f64) -> WeierstrassChart {
    let rot = if t == 0.0 {
        C64::new(1.0, 0.0)
    } else if t == FRAC_PI_2 {
        C64::new(0.0, -1.0)
    } else {
        C64::from_polar(1.0, -t)
    };
    WeierstrassChart {
        curve: Arc::new(MinimalCurve::new(p.clone())),
        rot,
        provenance: Provenance::Associated { t },
    }
}

/// Conformal factor: `(E, F, G)` with `F = 0` and `E = G = ¼|f|²(1+|g|²)²`.
pub fn metric_closed(p: &WeierstrassPair, z: C64) -> Result<(f64, f64, f64)> {
    let f = p.f_at(z)?.value;
    let g = p.g_at(z)?.value;
    let e = 0.25 * f.norm_sqr() * (1.0 + g.norm_sqr()).powi(2);
    Ok((e, 0.0, e))
}

/// Normal curvature `ν = 4|g′| / (|f|(1+|g|²)²)`.
pub fn nu_closed(p: &WeierstrassPair, z: C64) -> Result<f64> {
    let f = p.f_at(z)?.value;
    let g = p.g_at(z)?;
    if f.norm() == 0.0 {
        return Err(WeierstrassError::ZeroOfF { at: z });
    }
    Ok(4.0 * g.derivative.norm() / (f.norm() * (1.0 + g.value.norm_sqr()).powi(2)))
}

/// Pair `(−1/g′, g)`, whose surface is parametrized by canonical
/// principal parameters.
pub fn ganchev_curve(g: &AnalyticExpr, z0: C64) -> Result<WeierstrassPair> {
    if g.is_constant() {
        return Err(WeierstrassError::ConstantG);
    }
    let dg = g.differentiate();
    if dg.is_constant() && dg.eval(C64::new(0.0, 0.0))?.value.norm() == 0.0 {
        return Err(WeierstrassError::ConstantG);
    }
    let f = AnalyticExpr::real(-1.0) / dg;
    Ok(WeierstrassPair { f, g: g.clone(), z0 })
}

// ----------------------------------------------------------------------
// extraction of (f, g) from a chart

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    /// Radius of the sampling disk around the seed.
    pub radius: f64,
    /// Fit degree for charts without a known polynomial degree.
    pub default_degree: usize,
    /// Finite-difference step for charts without exact derivatives.
    pub h: f64,
    /// Relative size below which fitted coefficients are set to zero.
    pub snap: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { radius: 1.0, default_degree: 8, h: 1e-3, snap: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractedPair {
    pub pair: WeierstrassPair,
    pub f_coeffs: Vec<C64>,
    pub g_coeffs: Vec<C64>,
    /// Largest relative misfit of the fitted `f` and `f g` over the samples.
    pub residual: f64,
}

/// `φ = x_u − i x_v` at `(u, v)`.
pub fn chart_phi(c: &dyn Chart, u: f64, v: f64, h: f64) -> Result<[C64; 3], ChartError> {
    let (xu, xv) = match c.jet(u, v) {
        Some(j) => {
            let j = j?;
            (j.xu, j.xv)
        }
        None => {
            let d = |du: f64, dv: f64| -> Result<Vec3, ChartError> {
                let p = |s: f64| c.point(u + s * du, v + s * dv);
                Ok((8.0 * (p(h)? - p(-h)?) - (p(2.0 * h)? - p(-2.0 * h)?)) / (12.0 * h))
            };
            (d(1.0, 0.0)?, d(0.0, 1.0)?)
        }
    };
    Ok([0, 1, 2].map(|k| C64::new(xu[k], -xv[k])))
}

fn snap(c: &mut [C64], rel: f64) {
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for x in c.iter_mut() {
        if x.re.abs() <= rel * scale {
            x.re = 0.0;
        }
        if x.im.abs() <= rel * scale {
            x.im = 0.0;
        }
    }
}

fn lstsq(a: DMatrix<C64>, b: DVector<C64>) -> DVector<C64> {
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-13).expect("SVD computed with both factors")
}

/// Recover `(f, g)` from a minimal isothermal chart, with
/// `f = φ₁ − iφ₂`, `g = φ₃ / f`, both fitted as polynomials in `z`
/// around `seed`.
pub fn extract_pair(c: &dyn Chart, seed: (f64, f64), opts: &ExtractOptions) -> Result<ExtractedPair> {
    let deg = c.polynomial_degree().map(|d| d.saturating_sub(1)).unwrap_or(opts.default_degree);
    let z_seed = C64::new(seed.0, seed.1);
    let r = opts.radius;
    let mut zeta = vec![];
    for &rho in &[1.0 / 3.0, 2.0 / 3.0, 1.0] {
        for k in 0..24 {
            zeta.push(C64::from_polar(rho, (k as f64 + 0.5 * rho) * std::f64::consts::TAU / 24.0));
        }
    }
    zeta.push(C64::new(0.0, 0.0));
    let i = C64::new(0.0, 1.0);
    let mut fs = vec![];
    let mut f3 = vec![];
    let mut defect: f64 = 0.0;
    for &q in &zeta {
        let z = z_seed + r * q;
        let phi = chart_phi(c, z.re, z.im, opts.h)?;
        let sq = phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2];
        let n2: f64 = phi.iter().map(|x| x.norm_sqr()).sum();
        defect = defect.max(sq.norm() / n2.max(f64::MIN_POSITIVE));
        fs.push(phi[0] - i * phi[1]);
        f3.push(phi[2]);
    }
    if defect > 1e-6 {
        return Err(WeierstrassError::NonIsothermal { defect });
    }
    let fmax = fs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if fmax == 0.0 {
        return Err(WeierstrassError::ZeroF);
    }
    let n = zeta.len();
    let vander = DMatrix::from_fn(n, deg + 1, |row, col| zeta[row].powi(col as i32));
    let mut fc = lstsq(vander.clone(), DVector::from_vec(fs.clone()));
    snap(fc.as_mut_slice(), opts.snap);
    let fit_f = &vander * &fc;
    // g·f = φ₃
    let fv = DVector::from_vec(fs.clone());
    let a = DMatrix::from_fn(n, deg + 1, |row, col| fv[row] * zeta[row].powi(col as i32));
    let mut gc = lstsq(a, DVector::from_vec(f3.clone()));
    snap(gc.as_mut_slice(), opts.snap);
    let fit_fg = DVector::from_fn(n, |row, _| fit_f[row] * (&vander.row(row) * &gc)[0]);
    let f3max = f3.iter().map(|x| x.norm()).fold(0.0, f64::max).max(fmax);
    let mut residual: f64 = 0.0;
    for row in 0..n {
        residual = residual.max((fit_f[row] - fs[row]).norm() / fmax);
        residual = residual.max((fit_fg[row] - f3[row]).norm() / f3max);
    }
    // back from ζ = (z − seed)/r to z
    let to_z = |c: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); c.len()];
        for (j, &cj) in c.iter().enumerate() {
            if cj == C64::new(0.0, 0.0) {
                continue;
            }
            let scale = cj / r.powi(j as i32);
            // (z − s)^j = Σ binom(j,m) z^m (−s)^{j−m}
            let mut binom = 1.0;
            for m in 0..=j {
                out[m] += scale * binom * (-z_seed).powi((j - m) as i32);
                binom = binom * (j - m) as f64 / (m + 1) as f64;
            }
        }
        out
    };
    let mut f_coeffs = to_z(fc.as_slice());
    let mut g_coeffs = to_z(gc.as_slice());
    snap(&mut f_coeffs, opts.snap);
    snap(&mut g_coeffs, opts.snap);
    while f_coeffs.len() > 1 && f_coeffs.last().map(|x| x.norm() == 0.0).unwrap_or(false) {
        f_coeffs.pop();
    }
    while g_coeffs.len() > 1 && g_coeffs.last().map(|x| x.norm() == 0.0).unwrap_or(false) {
        g_coeffs.pop();
    }
    let pair = WeierstrassPair {
        f: AnalyticExpr::polynomial(&f_coeffs),
        g: AnalyticExpr::polynomial(&g_coeffs),
        z0: z_seed,
    };
    Ok(ExtractedPair { pair, f_coeffs, g_coeffs, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::FnChart;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn catenoid() -> WeierstrassPair {
        WeierstrassPair::parse("exp(z)", "exp(-z)", c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn catenoid_third_coordinate() {
        let p = catenoid();
        assert_eq!(integrate_curve(&p, c(0.0, 0.0)).unwrap(), [c(0.0, 0.0); 3]);
        let psi = integrate_curve(&p, c(1.0, 0.0)).unwrap();
        assert!((psi[2].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn first_family_curve_at_one() {
        let p = WeierstrassPair::parse("2000*z", "i*sqrt(3)/sqrt(500)*z^2", c(0.0, 0.0)).unwrap();
        let curve = MinimalCurve::new(p.clone());
        assert!(curve.is_polynomial());
        let exact = [c(501.0, 0.0), c(0.0, 499.0), c(0.0, 1500f64.sqrt())];
        let poly = curve.eval(c(1.0, 0.0)).unwrap();
        let mut q = MinimalCurve::new(p);
        q.poly = None;
        let numeric = q.eval(c(1.0, 0.0)).unwrap();
        for k in 0..3 {
            assert!((poly[k] - exact[k]).norm() < 1e-10);
            assert!((numeric[k] - exact[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn catenoid_metric_and_nu() {
        let p = catenoid();
        let (e, f, g) = metric_closed(&p, c(1.0, 0.0)).unwrap();
        assert!((e - 1f64.cosh().powi(2)).abs() < 1e-12);
        assert!((e - 2.381097845).abs() < 1e-9);
        assert_eq!(f, 0.0);
        assert_eq!(e, g);
        assert!((nu_closed(&p, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        let q = WeierstrassPair::parse("2", "0*z", c(0.0, 0.0)).unwrap();
        assert_eq!(metric_closed(&q, c(0.3, 0.1)).unwrap().0, 1.0);
    }

    #[test]
    fn enneper_nu_and_flat_points() {
        let p = WeierstrassPair::parse("1", "z", c(0.0, 0.0)).unwrap();
        assert_eq!(nu_closed(&p, c(0.0, 0.0)).unwrap(), 4.0);
        let q = WeierstrassPair::parse("1", "z^2", c(0.0, 0.0)).unwrap();
        assert_eq!(nu_closed(&q, c(0.0, 0.0)).unwrap(), 0.0);
        let r = WeierstrassPair::parse("z", "z", c(1.0, 0.0)).unwrap();
        assert!(matches!(nu_closed(&r, c(0.0, 0.0)), Err(WeierstrassError::ZeroOfF { .. })));
    }

    #[test]
    fn ganchev_pair_of_identity() {
        let p = ganchev_curve(&AnalyticExpr::z(), c(0.0, 0.0)).unwrap();
        assert_eq!(p.f.eval(c(0.7, 0.2)).unwrap().value, c(-1.0, 0.0));
        assert_eq!(nu_closed(&p, c(0.0, 0.0)).unwrap(), 4.0);
        let g = AnalyticExpr::monomial(c(2.0, 1.0), 1);
        let p = ganchev_curve(&g, c(0.0, 0.0)).unwrap();
        assert!((nu_closed(&p, c(0.0, 0.0)).unwrap() - 4.0 * 5.0).abs() < 1e-13);
        assert!(matches!(
            ganchev_curve(&AnalyticExpr::real(3.0), c(0.0, 0.0)),
            Err(WeierstrassError::ConstantG)
        ));
    }

    #[test]
    fn conjugate_is_quarter_turn() {
        let p = catenoid();
        let a = chart_assoc(&p, FRAC_PI_2);
        let b = chart_imag(&p);
        for &(u, v) in &[(0.3, 0.2), (-0.5, 1.0)] {
            assert!((a.point(u, v).unwrap() - b.point(u, v).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn extract_from_fn_chart() {
        // Enneper surface, real part of Ψ for (1, z)
        let ch = FnChart::new(|u, v| {
            Vec3::new(
                0.5 * (u - u.powi(3) / 3.0 + u * v * v),
                -0.5 * (v - v.powi(3) / 3.0 + u * u * v),
                0.5 * (u * u - v * v),
            )
        });
        let opts = ExtractOptions { default_degree: 3, ..Default::default() };
        let ex = extract_pair(&ch, (0.0, 0.0), &opts).unwrap();
        assert!(ex.residual < 1e-9, "{}", ex.residual);
        assert!((ex.f_coeffs[0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((ex.g_coeffs[1] - c(1.0, 0.0)).norm() < 1e-8);
    }
}
