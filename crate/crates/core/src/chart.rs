//! Parametrized surface patches `(u, v) → ℝ³`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{self, AnalyticExpr, ParseContext};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct ChartError(pub String);

impl From<analytic::AnalyticError> for ChartError {
    fn from(e: analytic::AnalyticError) -> Self {
        ChartError(e.to_string())
    }
}

/// Where a chart came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    WeierstrassReal,
    WeierstrassImag,
    Associated { t: f64 },
    PolynomialFamily,
    External,
}

/// Point together with its first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJet {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

pub trait Chart: Send + Sync {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError>;

    /// Exact derivatives, when the chart can supply them.
    fn jet(&self, _u: f64, _v: f64) -> Option<Result<ChartJet, ChartError>> {
        None
    }

    fn provenance(&self) -> Provenance;

    /// Total degree for polynomial charts.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

impl<C: Chart + ?Sized> Chart for Arc<C> {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        (**self).point(u, v)
    }
    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        (**self).jet(u, v)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
    fn polynomial_degree(&self) -> Option<usize> {
        (**self).polynomial_degree()
    }
}

impl<C: Chart + ?Sized> Chart for &C {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        (**self).point(u, v)
    }
    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        (**self).jet(u, v)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
    fn polynomial_degree(&self) -> Option<usize> {
        (**self).polynomial_degree()
    }
}

impl<C: Chart + ?Sized> Chart for Box<C> {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        (**self).point(u, v)
    }
    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        (**self).jet(u, v)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
    fn polynomial_degree(&self) -> Option<usize> {
        (**self).polynomial_degree()
    }
}

/// Chart backed by a closure.
pub struct FnChart<F> {
    f: F,
    provenance: Provenance,
}

impl<F> FnChart<F>
where
    F: Fn(f64, f64) -> Vec3 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnChart { f, provenance: Provenance::External }
    }

    pub fn with_provenance(f: F, provenance: Provenance) -> Self {
        FnChart { f, provenance }
    }
}

impl<F> Chart for FnChart<F>
where
    F: Fn(f64, f64) -> Vec3 + Send + Sync,
{
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        let p = (self.f)(u, v);
        if p.iter().all(|c| c.is_finite()) {
            Ok(p)
        } else {
            Err(ChartError(format!("non-finite chart value at ({u}, {v})")))
        }
    }

    fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Chart given by three real formulas in `u` and `v`, with exact
/// derivatives from symbolic differentiation.
#[derive(Clone)]
pub struct ExprChart {
    comps: [AnalyticExpr; 3],
    du: [AnalyticExpr; 3],
    dv: [AnalyticExpr; 3],
    duu: [AnalyticExpr; 3],
    duv: [AnalyticExpr; 3],
    dvv: [AnalyticExpr; 3],
}

impl fmt::Debug for ExprChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n: &[&str] = &["u", "v"];
        write!(
            f,
            "ExprChart({}, {}, {})",
            self.comps[0].display_with(n),
            self.comps[1].display_with(n),
            self.comps[2].display_with(n)
        )
    }
}

impl ExprChart {
    /// Components are expressions in variables 0 (`u`) and 1 (`v`).
    pub fn new(comps: [AnalyticExpr; 3]) -> Self {
        let d = |c: &[AnalyticExpr; 3], k: usize| -> [AnalyticExpr; 3] {
            [c[0].partial(k), c[1].partial(k), c[2].partial(k)]
        };
        let du = d(&comps, 0);
        let dv = d(&comps, 1);
        let duu = d(&du, 0);
        let duv = d(&du, 1);
        let dvv = d(&dv, 1);
        ExprChart { comps, du, dv, duu, duv, dvv }
    }

    /// Parse three formulas in `u`, `v` (e.g. `["u", "v", "u^2"]`).
    pub fn parse(texts: [&str; 3]) -> Result<Self, analytic::AnalyticError> {
        let ctx = ParseContext { vars: &["u", "v"], bindings: &[] };
        Ok(ExprChart::new([
            analytic::parse_with(texts[0], &ctx)?,
            analytic::parse_with(texts[1], &ctx)?,
            analytic::parse_with(texts[2], &ctx)?,
        ]))
    }

    fn eval3(e: &[AnalyticExpr; 3], u: f64, v: f64) -> Result<Vec3, ChartError> {
        let x = [C64::new(u, 0.0), C64::new(v, 0.0)];
        let mut out = Vec3::zeros();
        for k in 0..3 {
            out[k] = e[k].eval_values(&x)?.re;
        }
        Ok(out)
    }
}

impl Chart for ExprChart {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        Self::eval3(&self.comps, u, v)
    }

    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        let go = || -> Result<ChartJet, ChartError> {
            Ok(ChartJet {
                x: Self::eval3(&self.comps, u, v)?,
                xu: Self::eval3(&self.du, u, v)?,
                xv: Self::eval3(&self.dv, u, v)?,
                xuu: Self::eval3(&self.duu, u, v)?,
                xuv: Self::eval3(&self.duv, u, v)?,
                xvv: Self::eval3(&self.dvv, u, v)?,
            })
        };
        Some(go())
    }

    fn provenance(&self) -> Provenance {
        Provenance::External
    }
}

/// Reparametrized chart `c(m(u, v))` for an affine parameter map, with
/// derivatives transported by the chain rule when `c` has exact jets.
pub struct AffineReparam<C> {
    pub inner: C,
    /// `(u, v) ↦ lin · (u, v) + offset`
    pub lin: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl<C: Chart> AffineReparam<C> {
    fn map(&self, u: f64, v: f64) -> (f64, f64) {
        let l = &self.lin;
        (l[0][0] * u + l[0][1] * v + self.offset[0], l[1][0] * u + l[1][1] * v + self.offset[1])
    }
}

impl<C: Chart> Chart for AffineReparam<C> {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        let (s, t) = self.map(u, v);
        self.inner.point(s, t)
    }

    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        let (s, t) = self.map(u, v);
        let j = match self.inner.jet(s, t)? {
            Ok(j) => j,
            Err(e) => return Some(Err(e)),
        };
        let l = &self.lin;
        // ∂/∂u = l00 ∂s + l10 ∂t,  ∂/∂v = l01 ∂s + l11 ∂t
        let (a, b, c, d) = (l[0][0], l[1][0], l[0][1], l[1][1]);
        Some(Ok(ChartJet {
            x: j.x,
            xu: a * j.xu + b * j.xv,
            xv: c * j.xu + d * j.xv,
            xuu: a * a * j.xuu + 2.0 * a * b * j.xuv + b * b * j.xvv,
            xuv: a * c * j.xuu + (a * d + b * c) * j.xuv + b * d * j.xvv,
            xvv: c * c * j.xuu + 2.0 * c * d * j.xuv + d * d * j.xvv,
        }))
    }

    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }

    fn polynomial_degree(&self) -> Option<usize> {
        self.inner.polynomial_degree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_chart_jet() {
        let c = ExprChart::parse(["u", "v", "u^2 - 3*u*v"]).unwrap();
        let j = c.jet(0.5, 2.0).unwrap().unwrap();
        assert_eq!(j.x, Vec3::new(0.5, 2.0, 0.25 - 3.0));
        assert_eq!(j.xu, Vec3::new(1.0, 0.0, 1.0 - 6.0));
        assert_eq!(j.xv, Vec3::new(0.0, 1.0, -1.5));
        assert_eq!(j.xuu, Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(j.xuv, Vec3::new(0.0, 0.0, -3.0));
        assert_eq!(j.xvv, Vec3::zeros());
    }

    #[test]
    fn affine_chain_rule() {
        let c = ExprChart::parse(["u^3", "u*v", "v^2"]).unwrap();
        let r = AffineReparam { inner: c.clone(), lin: [[0.0, 1.0], [-1.0, 0.0]], offset: [0.2, 0.0] };
        let (u, v) = (0.3, -0.4);
        let j = r.jet(u, v).unwrap().unwrap();
        let h = 1e-5;
        let fd = (r.point(u + h, v).unwrap() - r.point(u - h, v).unwrap()) / (2.0 * h);
        assert!((j.xu - fd).norm() < 1e-8);
        let fd = (r.point(u + h, v + h).unwrap() - r.point(u + h, v - h).unwrap() - r.point(u - h, v + h).unwrap()
            + r.point(u - h, v - h).unwrap())
            / (4.0 * h * h);
        assert!((j.xuv - fd).norm() < 1e-4);
    }
}
