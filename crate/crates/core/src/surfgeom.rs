//! Fundamental forms and curvature of parametrized surfaces, minimality
//! and isothermality checks, and the residual of `Δ ln ν + 2ν = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{Chart, ChartError, ChartJet};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("degenerate point ({u}, {v}): |x_u × x_v| = {cross:e}")]
    Degenerate { u: f64, v: f64, cross: f64 },
    #[error("normal curvature is not positive at node ({i}, {j})")]
    NonPositiveNu { i: usize, j: usize },
    #[error("grid too small for the stencil ({nu}×{nv})")]
    GridTooSmall { nu: usize, nv: usize },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

/// Threshold on `|x_u × x_v|` below which a point is degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub k: f64,
    pub h: f64,
    /// `√(−K)`; `None` when `K` is clearly positive.
    pub nu: Option<f64>,
    /// `K` was slightly positive from round-off and `ν` was clamped to 0.
    pub clamped: bool,
}

/// How derivatives of a chart are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMode {
    /// Exact jets when the chart has them, finite differences otherwise.
    #[default]
    Auto,
    Exact,
    FiniteDifference,
}

// 4th-order central weights at offsets −2, −1, 1, 2 for the first derivative
const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Derivatives of `c` at `(u, v)` from 4th-order central differences with step `h`.
pub fn fd_jet(c: &dyn Chart, u: f64, v: f64, h: f64) -> Result<ChartJet> {
    let p = |a: f64, b: f64| c.point(u + a * h, v + b * h);
    let x = p(0.0, 0.0)?;
    let (pu1, mu1, pu2, mu2) = (p(1.0, 0.0)?, p(-1.0, 0.0)?, p(2.0, 0.0)?, p(-2.0, 0.0)?);
    let (pv1, mv1, pv2, mv2) = (p(0.0, 1.0)?, p(0.0, -1.0)?, p(0.0, 2.0)?, p(0.0, -2.0)?);
    let xu = (8.0 * (pu1 - mu1) - (pu2 - mu2)) / (12.0 * h);
    let xv = (8.0 * (pv1 - mv1) - (pv2 - mv2)) / (12.0 * h);
    let xuu = (16.0 * (pu1 + mu1) - (pu2 + mu2) - 30.0 * x) / (12.0 * h * h);
    let xvv = (16.0 * (pv1 + mv1) - (pv2 + mv2) - 30.0 * x) / (12.0 * h * h);
    let mut xuv = Vec3::zeros();
    for &(a, wa) in &D1 {
        for &(b, wb) in &D1 {
            xuv += wa * wb * p(a, b)?;
        }
    }
    xuv /= 144.0 * h * h;
    Ok(ChartJet { x, xu, xv, xuu, xuv, xvv })
}

pub fn derivatives(c: &dyn Chart, u: f64, v: f64, h: f64, mode: DiffMode) -> Result<ChartJet> {
    match mode {
        DiffMode::FiniteDifference => fd_jet(c, u, v, h),
        DiffMode::Auto | DiffMode::Exact => match c.jet(u, v) {
            Some(j) => Ok(j?),
            None => fd_jet(c, u, v, h),
        },
    }
}

/// Unit normal and fundamental forms from a jet.
pub fn forms_from_jet(j: &ChartJet, u: f64, v: f64) -> Result<(FundamentalForms, Vec3)> {
    let cross = j.xu.cross(&j.xv);
    let cn = cross.norm();
    if cn < DEGENERATE_TOL {
        return Err(GeomError::Degenerate { u, v, cross: cn });
    }
    let nrm = cross / cn;
    Ok((
        FundamentalForms {
            e: j.xu.dot(&j.xu),
            f: j.xu.dot(&j.xv),
            g: j.xv.dot(&j.xv),
            l: nrm.dot(&j.xuu),
            m: nrm.dot(&j.xuv),
            n: nrm.dot(&j.xvv),
        },
        nrm,
    ))
}

/// First and second fundamental forms at `(u, v)` (derivatives per
/// [`DiffMode::Auto`]).
pub fn fundamental_forms(c: &dyn Chart, u: f64, v: f64, h: f64) -> Result<FundamentalForms> {
    fundamental_forms_with(c, u, v, h, DiffMode::Auto)
}

pub fn fundamental_forms_with(c: &dyn Chart, u: f64, v: f64, h: f64, mode: DiffMode) -> Result<FundamentalForms> {
    let j = derivatives(c, u, v, h, mode)?;
    Ok(forms_from_jet(&j, u, v)?.0)
}

/// Relative size of a positive `K` that is still treated as round-off.
pub const NU_CLAMP_REL: f64 = 1e-10;

/// Gauss and mean curvature, and `ν = √(−K)`.
pub fn curvature(ff: &FundamentalForms) -> CurvatureSample {
    let det = ff.e * ff.g - ff.f * ff.f;
    let k = (ff.l * ff.n - ff.m * ff.m) / det;
    let h = (ff.e * ff.n - 2.0 * ff.f * ff.m + ff.g * ff.l) / (2.0 * det);
    // scale of the principal curvatures squared
    let scale = (ff.l * ff.l + 2.0 * ff.m * ff.m + ff.n * ff.n) / det;
    let (nu, clamped) = if k <= 0.0 {
        (Some((-k).sqrt()), false)
    } else if k <= NU_CLAMP_REL * scale || k < 1e-14 {
        (Some(0.0), true)
    } else {
        (None, false)
    };
    CurvatureSample { k, h, nu, clamped }
}

// ----------------------------------------------------------------------
// grids

/// Uniform tensor grid over `[u0, u1] × [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn new(u: (f64, f64), v: (f64, f64), nu: usize, nv: usize) -> Self {
        Grid { u0: u.0, u1: u.1, v0: v.0, v1: v.1, nu, nv }
    }

    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        Grid::new((lo, hi), (lo, hi), n, n)
    }

    fn coord(a: f64, b: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    }

    /// Node `(i, j)`; `i` indexes `u`, `j` indexes `v`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (Self::coord(self.u0, self.u1, self.nu, i), Self::coord(self.v0, self.v1, self.nv, j))
    }

    /// All nodes, row-major with `u` varying fastest.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        (0..self.nv).flat_map(|j| (0..self.nu).map(move |i| self.node(i, j))).collect()
    }

    pub fn diameter(&self) -> f64 {
        ((self.u1 - self.u0).powi(2) + (self.v1 - self.v0).powi(2)).sqrt()
    }

    /// Default finite-difference step: `1e−4 ×` diameter.
    pub fn default_step(&self) -> f64 {
        1e-4 * self.diameter().max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomOptions {
    pub mode: DiffMode,
    /// Finite-difference step; `None` uses [`Grid::default_step`].
    pub h: Option<f64>,
    /// Pass threshold for `max|H| / max √(H² − K)`.
    pub minimal_tol: f64,
    /// Pass threshold for `max|E−G|/(E+G)` and `max|F|/(E+G)`.
    pub isothermal_tol: f64,
}

impl Default for GeomOptions {
    fn default() -> Self {
        GeomOptions { mode: DiffMode::Auto, h: None, minimal_tol: 1e-8, isothermal_tol: 1e-8 }
    }
}

/// Everything known at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub u: f64,
    pub v: f64,
    pub forms: FundamentalForms,
    pub curvature: CurvatureSample,
}

/// A chart sampled on a grid with its fundamental-form fields. Degenerate
/// nodes are `None`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartGrid {
    pub grid: Grid,
    pub samples: Vec<Option<GridSample>>,
}

impl ChartGrid {
    pub fn sample(c: &dyn Chart, grid: Grid, opts: &GeomOptions) -> Result<ChartGrid> {
        let h = opts.h.unwrap_or_else(|| grid.default_step());
        let samples = grid
            .nodes()
            .into_par_iter()
            .map(|(u, v)| {
                let jet = derivatives(c, u, v, h, opts.mode)?;
                match forms_from_jet(&jet, u, v) {
                    Ok((forms, _)) => Ok(Some(GridSample { u, v, forms, curvature: curvature(&forms) })),
                    Err(GeomError::Degenerate { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChartGrid { grid, samples })
    }

    pub fn degenerate_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&GridSample> {
        self.samples[j * self.grid.nu + i].as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub max_abs_h: f64,
    /// `max √(H² − K)`, the largest principal curvature magnitude.
    pub max_curvature: f64,
    pub ratio: f64,
    pub max_nu: f64,
    pub degenerate_nodes: usize,
    pub clamped_nodes: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsothermalReport {
    pub max_e_minus_g: f64,
    pub max_f: f64,
    pub degenerate_nodes: usize,
    pub passed: bool,
}

impl ChartGrid {
    pub fn minimality(&self, tol: f64) -> MinimalityReport {
        let mut r = MinimalityReport {
            max_abs_h: 0.0,
            max_curvature: 0.0,
            ratio: 0.0,
            max_nu: 0.0,
            degenerate_nodes: self.degenerate_count(),
            clamped_nodes: 0,
            passed: false,
        };
        for s in self.samples.iter().flatten() {
            let c = &s.curvature;
            r.max_abs_h = r.max_abs_h.max(c.h.abs());
            r.max_curvature = r.max_curvature.max((c.h * c.h - c.k).max(0.0).sqrt());
            r.max_nu = r.max_nu.max(c.nu.unwrap_or(0.0));
            r.clamped_nodes += c.clamped as usize;
        }
        r.ratio = if r.max_curvature > 0.0 { r.max_abs_h / r.max_curvature } else { 0.0 };
        r.passed = r.ratio <= tol;
        r
    }

    pub fn isothermality(&self, tol: f64) -> IsothermalReport {
        let mut r = IsothermalReport {
            max_e_minus_g: 0.0,
            max_f: 0.0,
            degenerate_nodes: self.degenerate_count(),
            passed: false,
        };
        for s in self.samples.iter().flatten() {
            let ff = &s.forms;
            let sum = ff.e + ff.g;
            r.max_e_minus_g = r.max_e_minus_g.max((ff.e - ff.g).abs() / sum);
            r.max_f = r.max_f.max(ff.f.abs() / sum);
        }
        r.passed = r.max_e_minus_g <= tol && r.max_f <= tol;
        r
    }

    /// Interior nodes where `|ν_u ν_v|` (central differences) is below
    /// `tol · max ν² / h²`; these are flagged, not rejected.
    pub fn nu_derivative_warnings(&self, tol: f64) -> usize {
        let g = &self.grid;
        if g.nu < 3 || g.nv < 3 {
            return 0;
        }
        let nu_at = |i: usize, j: usize| self.get(i, j).and_then(|s| s.curvature.nu);
        let hu = (g.u1 - g.u0) / (g.nu - 1) as f64;
        let hv = (g.v1 - g.v0) / (g.nv - 1) as f64;
        let max_nu = self.samples.iter().flatten().filter_map(|s| s.curvature.nu).fold(0.0, f64::max);
        let mut count = 0;
        for j in 1..g.nv - 1 {
            for i in 1..g.nu - 1 {
                let (Some(a), Some(b), Some(c), Some(d)) =
                    (nu_at(i + 1, j), nu_at(i - 1, j), nu_at(i, j + 1), nu_at(i, j - 1))
                else {
                    continue;
                };
                let nuu = (a - b) / (2.0 * hu);
                let nuv = (c - d) / (2.0 * hv);
                if (nuu * nuv).abs() <= tol * max_nu * max_nu / (hu * hv) {
                    count += 1;
                }
            }
        }
        count
    }
}

pub fn check_minimal(c: &dyn Chart, grid: Grid, opts: &GeomOptions) -> Result<MinimalityReport> {
    Ok(ChartGrid::sample(c, grid, opts)?.minimality(opts.minimal_tol))
}

pub fn check_isothermal(c: &dyn Chart, grid: Grid, opts: &GeomOptions) -> Result<IsothermalReport> {
    Ok(ChartGrid::sample(c, grid, opts)?.isothermality(opts.isothermal_tol))
}

// ----------------------------------------------------------------------
// Ganchev PDE

/// Scalar field on a uniform square-cell grid, row-major with `u` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    pub u0: f64,
    pub v0: f64,
    pub h: f64,
    pub nu: usize,
    pub nv: usize,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    /// Sample `f` on the `n × n` grid of spacing `h` centred at `(uc, vc)`.
    pub fn sample_centered<E: Send>(
        center: (f64, f64),
        h: f64,
        n: usize,
        f: impl Fn(f64, f64) -> Result<f64, E> + Sync,
    ) -> Result<ScalarGrid, E> {
        let half = (n as f64 - 1.0) / 2.0;
        let (u0, v0) = (center.0 - half * h, center.1 - half * h);
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| f(u0 + (idx % n) as f64 * h, v0 + (idx / n) as f64 * h))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(ScalarGrid { u0, v0, h, nu: n, nv: n, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nu + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `max |Δ ln ν + 2ν|` over nodes at least two cells from the boundary.
///
/// The Laplacian is the Richardson combination `(4 L_h − L_{2h}) / 3` of
/// 5-point Laplacians, which is 4th-order accurate.
pub fn ganchev_pde_residual(field: &ScalarGrid) -> Result<f64> {
    if field.nu < 5 || field.nv < 5 {
        return Err(GeomError::GridTooSmall { nu: field.nu, nv: field.nv });
    }
    for j in 0..field.nv {
        for i in 0..field.nu {
            if !(field.at(i, j) > 0.0) {
                return Err(GeomError::NonPositiveNu { i, j });
            }
        }
    }
    let ln = |i: usize, j: usize| field.at(i, j).ln();
    let h = field.h;
    let mut worst: f64 = 0.0;
    for j in 2..field.nv - 2 {
        for i in 2..field.nu - 2 {
            let c = ln(i, j);
            let l1 = (ln(i + 1, j) + ln(i - 1, j) + ln(i, j + 1) + ln(i, j - 1) - 4.0 * c) / (h * h);
            let l2 = (ln(i + 2, j) + ln(i - 2, j) + ln(i, j + 2) + ln(i, j - 2) - 4.0 * c) / (4.0 * h * h);
            let lap = (4.0 * l1 - l2) / 3.0;
            worst = worst.max((lap + 2.0 * field.at(i, j)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{ExprChart, FnChart};

    fn catenoid() -> impl Chart {
        FnChart::new(|u: f64, v: f64| Vec3::new(u.cosh() * v.cos(), -u.cosh() * v.sin(), u))
    }

    #[test]
    fn plane_forms() {
        let p = FnChart::new(|u, v| Vec3::new(u, v, 0.0));
        let ff = fundamental_forms(&p, 0.3, -0.1, 1e-3).unwrap();
        assert!((ff.e - 1.0).abs() < 1e-12 && (ff.g - 1.0).abs() < 1e-12 && ff.f.abs() < 1e-12);
        assert!(ff.l.abs() < 1e-9 && ff.m.abs() < 1e-9 && ff.n.abs() < 1e-9);
        let c = curvature(&ff);
        assert!(c.k.abs() < 1e-12 && c.h.abs() < 1e-9);
        assert_eq!(c.nu.map(|x| x < 1e-5), Some(true));
    }

    #[test]
    fn catenoid_forms_and_curvature() {
        let c = catenoid();
        let ff = fundamental_forms(&c, 1.0, 0.0, 1e-3).unwrap();
        let ch2 = 1f64.cosh().powi(2);
        assert!((ff.e - ch2).abs() < 1e-10 * ch2);
        assert!((ff.g - ch2).abs() < 1e-10 * ch2);
        assert!(ff.f.abs() < 1e-10);
        let k = curvature(&fundamental_forms(&c, 0.0, 0.0, 1e-3).unwrap());
        assert!((k.k + 1.0).abs() < 1e-8);
        assert!(k.h.abs() < 1e-8);
        assert!((k.nu.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sphere_like_forms_flagged() {
        let ff = FundamentalForms { e: 1.0, f: 0.0, g: 1.0, l: 1.0, m: 0.0, n: 1.0 };
        let c = curvature(&ff);
        assert_eq!((c.k, c.h, c.nu), (1.0, 1.0, None));
    }

    #[test]
    fn paraboloid_not_minimal() {
        let c = ExprChart::parse(["u", "v", "u^2"]).unwrap();
        let r = check_minimal(&c, Grid::square(-1.0, 1.0, 11), &GeomOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.ratio > 0.1);
    }

    #[test]
    fn fourth_order_convergence() {
        let c = catenoid();
        let exact = 0.7f64.cosh().powi(2);
        let err = |h: f64| (fundamental_forms_with(&c, 0.7, 0.3, h, DiffMode::FiniteDifference).unwrap().e - exact).abs();
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 8.0, "{e1} {e2}");
    }

    #[test]
    fn enneper_canonical_nu_solves_pde() {
        let f = ScalarGrid::sample_centered((0.0, 0.0), 1e-2, 21, |u, v| {
            Ok::<_, ()>(4.0 / (1.0 + u * u + v * v).powi(2))
        })
        .unwrap();
        assert!(ganchev_pde_residual(&f).unwrap() <= 1e-6);
        let bad = ScalarGrid { values: vec![0.0; 25], u0: 0.0, v0: 0.0, h: 0.1, nu: 5, nv: 5 };
        assert!(matches!(ganchev_pde_residual(&bad), Err(GeomError::NonPositiveNu { .. })));
    }
}
