//! Canonical principal parameters.
//!
//! For a Weierstrass pair `(f, g)` the canonical parameter `w` is defined
//! through `z′(w)² = −1/(f(z) g′(z))`; then `g̃(w) = g(z(w))` generates
//! the same surface with `E = G = 1/ν`. The transform is integrated
//! numerically along straight segments from an anchor `(w₀, z₀)`, the
//! square root continued on the branch chosen at the anchor.
//!
//! The closed forms for the two polynomial families serve as oracles.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AnalyticError, AnalyticExpr, Branch, Jet};
use crate::ode::{self, OdeError, OdeOptions};
use crate::surfgeom::ScalarGrid;
use crate::weierstrass::{WeierstrassError, WeierstrassPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonicalError {
    #[error(transparent)]
    Weierstrass(#[from] WeierstrassError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("f·g′ vanishes at the anchor z₀ = {z0}")]
    DegenerateAnchor { z0: C64 },
    #[error("integration hit a zero of f·g′ near z = {z}")]
    Singularity { z: C64 },
    #[error("step size underflow while integrating towards w = {w}")]
    StepUnderflow { w: C64 },
    #[error("w = {w} lies outside the canonical domain")]
    OutsideDomain { w: C64 },
    #[error("invalid parameters: {0}")]
    Parameters(String),
}

pub type Result<T, E = CanonicalError> = std::result::Result<T, E>;

/// Which square root of `−1/(f g′)` starts the integration at the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "hint")]
pub enum InitialBranch {
    #[default]
    Principal,
    Alternate,
    /// The root closest to the given slope.
    Nearest(C64),
}

/// Region of the `w`-plane on which a canonical form is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WDomain {
    Unbounded,
    Disk { center: C64, radius: f64 },
    /// `r_min ≤ |w − center| ≤ r_max`, `arg(w − center) ∈ [theta_min, theta_max]`
    /// (angles in radians, the interval may extend beyond `(−π, π]`).
    Sector { center: C64, r_min: f64, r_max: f64, theta_min: f64, theta_max: f64 },
}

impl WDomain {
    pub fn contains(&self, w: C64) -> bool {
        match *self {
            WDomain::Unbounded => true,
            WDomain::Disk { center, radius } => (w - center).norm() <= radius * (1.0 + 1e-12),
            WDomain::Sector { center, r_min, r_max, theta_min, theta_max } => {
                let d = w - center;
                let r = d.norm();
                if r < r_min || r > r_max * (1.0 + 1e-12) {
                    return false;
                }
                let mut a = d.arg();
                while a < theta_min {
                    a += 2.0 * PI;
                }
                a <= theta_max
            }
        }
    }

    /// Sample points on the boundary used as ray targets.
    fn ray_targets(&self, w0: C64, n: usize) -> Vec<C64> {
        match *self {
            WDomain::Unbounded => vec![],
            WDomain::Disk { center, radius } => {
                (0..n).map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
            }
            WDomain::Sector { center, r_min, r_max, theta_min, theta_max } => (0..n)
                .map(|k| {
                    let th = theta_min + (theta_max - theta_min) * k as f64 / (n.max(2) - 1) as f64;
                    let r = if k % 2 == 0 { r_max } else { r_min.max(0.5 * (w0 - center).norm()) };
                    center + C64::from_polar(r, th)
                })
                .collect(),
        }
    }
}

/// One stored ray: samples of `z(w)` at the accepted ODE steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySamples {
    pub target: C64,
    pub w: Vec<C64>,
    pub z: Vec<C64>,
}

#[derive(Debug, Clone)]
enum Source {
    Numeric { pair: WeierstrassPair, dg: AnalyticExpr },
    Closed { gtilde: AnalyticExpr, z_of_w: Option<AnalyticExpr> },
}

/// A surface in canonical principal parameters.
///
/// Evaluation points are external parameters `w`; they map to the
/// internal parameter by `w_int = ε w + c` (identity unless
/// [`CanonicalForm::reparametrized`] was applied).
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    source: Source,
    pub w0: C64,
    pub z0: C64,
    /// `z′(w₀)` on the chosen branch (numeric forms).
    pub initial_slope: C64,
    pub branch: InitialBranch,
    pub domain: WDomain,
    pub ode: OdeOptions,
    pub rays: Vec<RaySamples>,
    eps: f64,
    shift: C64,
}

/// Everything evaluated at one canonical parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPoint {
    pub w: C64,
    /// `z(w)` and `z′(w)` when the form carries a parameter map.
    pub z: Option<C64>,
    pub dz: Option<C64>,
    pub g: C64,
    pub dg: C64,
    pub nu: f64,
}

/// `ν = 4|g̃′|² / (1+|g̃|²)²`
pub fn nu_from(g: C64, dg: C64) -> f64 {
    4.0 * dg.norm_sqr() / (1.0 + g.norm_sqr()).powi(2)
}

/// `P(z) = −1/(f g′)`, the right-hand side of `z′² = P`.
pub fn ode_rhs(pair: &WeierstrassPair, dg: &AnalyticExpr, z: C64) -> Result<C64> {
    let f = pair.f_at(z)?.value;
    let gp = if dg.has_tracked() { dg.eval_from(pair.z0, z)? } else { dg.eval(z)? }.value;
    let fg = f * gp;
    if fg.norm() == 0.0 || !fg.norm().is_finite() {
        return Err(CanonicalError::Singularity { z });
    }
    Ok(-1.0 / fg)
}

fn nearest_root(p: C64, reference: C64) -> C64 {
    let r = p.sqrt();
    if (r - reference).norm() <= (r + reference).norm() {
        r
    } else {
        -r
    }
}

fn map_ode_err(e: OdeError<CanonicalError>, w: C64) -> CanonicalError {
    match e {
        OdeError::Rhs { source, .. } => source,
        OdeError::StepUnderflow { .. } | OdeError::TooManySteps { .. } => CanonicalError::StepUnderflow { w },
    }
}

/// Integrate `z′ = √P(z)` along the polyline `path` (in `w`) starting from
/// `z(path[0]) = z_start` with slope `slope_start`. Returns `z`, `z′` at
/// the end and, when `record` is set, the accepted step samples.
pub fn integrate_z(
    pair: &WeierstrassPair,
    dg: &AnalyticExpr,
    path: &[C64],
    z_start: C64,
    slope_start: C64,
    opts: &OdeOptions,
    mut record: Option<&mut RaySamples>,
) -> Result<(C64, C64)> {
    let mut z = z_start;
    let mut slope = slope_start;
    for seg in path.windows(2) {
        let (wa, wb) = (seg[0], seg[1]);
        let dw = wb - wa;
        if dw.norm() == 0.0 {
            continue;
        }
        let rhs = |_s: f64, y: &[C64; 1], r: &[C64; 1]| -> Result<[C64; 1]> {
            let p = ode_rhs(pair, dg, y[0])?;
            Ok([dw * nearest_root(p, r[0] / dw)])
        };
        let sol = ode::integrate(rhs, 0.0, 1.0, [z], [dw * slope], opts).map_err(|e| map_ode_err(e, wb))?;
        if let Some(rec) = record.as_deref_mut() {
            for st in &sol.steps {
                rec.w.push(wa + st.s1 * dw);
                rec.z.push(st.y1[0]);
            }
        }
        z = sol.y_end[0];
        slope = sol.dy_end[0] / dw;
    }
    Ok((z, slope))
}

/// Integrate the inverse map `dw/dz = 1/√P(z)` along the segment
/// `[za, zb]`, starting on the root `slope_a` of `P(za)`. Returns the
/// increment of `w` and the continued slope `z′` at `zb`.
pub fn integrate_w(
    pair: &WeierstrassPair,
    dg: &AnalyticExpr,
    za: C64,
    zb: C64,
    slope_a: C64,
    opts: &OdeOptions,
) -> Result<(C64, C64)> {
    let dz = zb - za;
    if dz.norm() == 0.0 {
        return Ok((C64::new(0.0, 0.0), slope_a));
    }
    let rhs = |s: f64, _y: &[C64; 1], r: &[C64; 1]| -> Result<[C64; 1]> {
        let z = za + s * dz;
        let p = ode_rhs(pair, dg, z)?;
        // r = dz / z′_prev
        let prev = dz / r[0];
        Ok([dz / nearest_root(p, prev)])
    };
    let sol = ode::integrate(rhs, 0.0, 1.0, [C64::new(0.0, 0.0)], [dz / slope_a], opts)
        .map_err(|e| map_ode_err(e, zb))?;
    Ok((sol.y_end[0], dz / sol.dy_end[0]))
}

/// Inverse map along a path from `za` to `zb`, trying the straight
/// segment first and then two-leg detours on either side.
pub fn integrate_w_detour(
    pair: &WeierstrassPair,
    dg: &AnalyticExpr,
    za: C64,
    zb: C64,
    slope_a: C64,
    opts: &OdeOptions,
) -> Result<(C64, C64)> {
    let direct = integrate_w(pair, dg, za, zb, slope_a, opts);
    if direct.is_ok() {
        return direct;
    }
    let mid = 0.5 * (za + zb);
    let perp = C64::new(0.0, 1.0) * (zb - za);
    let mut last = direct;
    for &off in &[0.5, -0.5, 1.0, -1.0] {
        let corner = mid + off * perp;
        let leg = integrate_w(pair, dg, za, corner, slope_a, opts)
            .and_then(|(w1, s1)| integrate_w(pair, dg, corner, zb, s1, opts).map(|(w2, s2)| (w1 + w2, s2)));
        if leg.is_ok() {
            return leg;
        }
        last = leg;
    }
    last
}

impl CanonicalForm {
    /// Numeric canonical form of `pair` anchored at `z(w0) = z0`.
    pub fn numeric(pair: &WeierstrassPair, w0: C64, z0: C64, branch: InitialBranch, domain: WDomain) -> Result<Self> {
        let dg = pair.g.differentiate();
        let p = match ode_rhs(pair, &dg, z0) {
            Ok(p) => p,
            Err(CanonicalError::Singularity { .. }) => return Err(CanonicalError::DegenerateAnchor { z0 }),
            Err(e) => return Err(e),
        };
        let r = p.sqrt();
        let initial_slope = match branch {
            InitialBranch::Principal => r,
            InitialBranch::Alternate => -r,
            InitialBranch::Nearest(h) => nearest_root(p, h),
        };
        Ok(CanonicalForm {
            source: Source::Numeric { pair: pair.clone(), dg },
            w0,
            z0,
            initial_slope,
            branch,
            domain,
            ode: OdeOptions::default(),
            rays: vec![],
            eps: 1.0,
            shift: C64::new(0.0, 0.0),
        })
    }

    /// Expression-backed form with known `g̃(w)` and optionally `z(w)`.
    pub fn closed(gtilde: AnalyticExpr, z_of_w: Option<AnalyticExpr>, w0: C64, domain: WDomain) -> Result<Self> {
        let (z0, initial_slope) = match &z_of_w {
            Some(e) => {
                let j = e.eval_along(&[w0])?;
                (j.value, j.derivative)
            }
            None => (w0, C64::new(1.0, 0.0)),
        };
        Ok(CanonicalForm {
            source: Source::Closed { gtilde, z_of_w },
            w0,
            z0,
            initial_slope,
            branch: InitialBranch::Principal,
            domain,
            ode: OdeOptions::default(),
            rays: vec![],
            eps: 1.0,
            shift: C64::new(0.0, 0.0),
        })
    }

    pub fn pair(&self) -> Option<&WeierstrassPair> {
        match &self.source {
            Source::Numeric { pair, .. } => Some(pair),
            Source::Closed { .. } => None,
        }
    }

    pub fn gtilde_expr(&self) -> Option<&AnalyticExpr> {
        match &self.source {
            Source::Closed { gtilde, .. } => Some(gtilde),
            Source::Numeric { .. } => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.source, Source::Numeric { .. })
    }

    /// The form in parameters `w′` with `w = ε w′ + c`.
    pub fn reparametrized(&self, eps: f64, c: C64) -> Self {
        assert!(eps == 1.0 || eps == -1.0, "ε must be ±1");
        let mut out = self.clone();
        // w_int = self.eps·(eps·w′ + c) + self.shift
        out.eps = self.eps * eps;
        out.shift = self.eps * c + self.shift;
        if let WDomain::Disk { center, radius } = self.domain {
            out.domain = WDomain::Disk { center: eps * (center - c), radius };
        } else if self.domain != WDomain::Unbounded {
            out.domain = WDomain::Unbounded;
        }
        out
    }

    /// External parameter of the anchor.
    pub fn anchor_w(&self) -> C64 {
        self.eps * (self.w0 - self.shift)
    }

    fn internal(&self, w: C64) -> C64 {
        self.eps * w + self.shift
    }

    /// Evaluate along the straight segment from the anchor.
    pub fn at(&self, w: C64) -> Result<CanonicalPoint> {
        self.at_along(&[self.anchor_w(), w])
    }

    /// Evaluate at the end of the polyline `path` (external parameters),
    /// which must start at the anchor.
    pub fn at_along(&self, path: &[C64]) -> Result<CanonicalPoint> {
        let w = *path.last().expect("non-empty path");
        if !self.domain.contains(w) {
            return Err(CanonicalError::OutsideDomain { w });
        }
        let ipath: Vec<C64> = path.iter().map(|&p| self.internal(p)).collect();
        let (z, dz_int, g, dg_int) = match &self.source {
            Source::Numeric { pair, dg } => {
                let mut full = vec![self.w0];
                full.extend(ipath.iter().copied());
                let (z, dz) = integrate_z(pair, dg, &full, self.z0, self.initial_slope, &self.ode, None)?;
                let gj = pair.g_at(z)?;
                let gp = if dg.has_tracked() { dg.eval_from(pair.z0, z)? } else { dg.eval(z)? }.value;
                (Some(z), Some(dz), gj.value, gp * dz)
            }
            Source::Closed { gtilde, z_of_w } => {
                let mut full = vec![self.w0];
                full.extend(ipath.iter().copied());
                let j: Jet = gtilde.eval_along(&full)?;
                let zj = match z_of_w {
                    Some(e) => Some(e.eval_along(&full)?),
                    None => None,
                };
                (zj.map(|j| j.value), zj.map(|j| j.derivative), j.value, j.derivative)
            }
        };
        // d/dw′ = ε d/dw_int
        let dg = self.eps * dg_int;
        Ok(CanonicalPoint { w, z, dz: dz_int.map(|d| self.eps * d), g, dg, nu: nu_from(g, dg) })
    }

    pub fn gtilde(&self, w: C64) -> Result<Jet> {
        let p = self.at(w)?;
        Ok(Jet { value: p.g, derivative: p.dg })
    }

    pub fn nu(&self, w: C64) -> Result<f64> {
        Ok(self.at(w)?.nu)
    }

    /// Integrate and store `n` rays from the anchor to the domain boundary.
    /// Fails if a ray meets a zero of `f g′`.
    pub fn store_rays(&mut self, n: usize) -> Result<()> {
        let Source::Numeric { pair, dg } = &self.source else {
            return Ok(());
        };
        let mut rays = vec![];
        let anchor = self.anchor_w();
        for target in self.domain.ray_targets(anchor, n) {
            let mut rec = RaySamples { target, w: vec![anchor], z: vec![self.z0] };
            let path = [self.w0, self.internal(target)];
            integrate_z(pair, dg, &path, self.z0, self.initial_slope, &self.ode, Some(&mut rec))?;
            // samples were recorded in internal coordinates
            for w in rec.w.iter_mut().skip(1) {
                *w = self.eps * (*w - self.shift);
            }
            rays.push(rec);
        }
        self.rays = rays;
        Ok(())
    }
}

/// Transform `pair` to canonical principal parameters with `z(w0) = z0`,
/// storing eight rays to the domain boundary.
pub fn transform_to_canonical(
    pair: &WeierstrassPair,
    domain: WDomain,
    w0: C64,
    z0: C64,
    branch: InitialBranch,
) -> Result<CanonicalForm> {
    if !domain.contains(w0) {
        return Err(CanonicalError::OutsideDomain { w: w0 });
    }
    let mut cf = CanonicalForm::numeric(pair, w0, z0, branch, domain)?;
    cf.store_rays(8)?;
    Ok(cf)
}

/// Sampled canonical normal curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuField {
    pub grid: ScalarGrid,
    /// Nodes where `ν` vanishes (to round-off).
    pub zero_nodes: usize,
}

/// `ν` on the `n × n` grid of spacing `h` centred at `center`.
pub fn canonical_nu(cf: &CanonicalForm, center: C64, h: f64, n: usize) -> Result<NuField> {
    let grid = ScalarGrid::sample_centered((center.re, center.im), h, n, |u, v| cf.nu(C64::new(u, v)))?;
    let zero_nodes = grid.values.iter().filter(|&&x| x <= 1e-300).count();
    Ok(NuField { grid, zero_nodes })
}

// ----------------------------------------------------------------------
// closed forms

fn cst(c: C64) -> AnalyticExpr {
    AnalyticExpr::Const(c)
}

/// First family: `z(w) = √((1+i)e^{it/2} w) / (√2 (3a₁i₁)^{1/8})` and
/// `g̃(w) = (−1+i) 3^{1/4} a₁ e^{it/2} w / (2 (a₁i₁)^{3/4})`, anchored
/// where `z = 1`.
pub fn closed_form_first_family(a1: f64, i1: f64, t: f64) -> Result<CanonicalForm> {
    let p = a1 * i1;
    if !(p > 0.0) {
        return Err(CanonicalError::Parameters("closed form requires a₁i₁ > 0".into()));
    }
    let rot = C64::new(1.0, 1.0) * C64::from_polar(1.0, t / 2.0);
    let scale = 2f64.sqrt() * (3.0 * p).powf(0.125);
    let z_of_w = (cst(rot) * AnalyticExpr::z()).sqrt(Branch::Principal) / AnalyticExpr::real(scale);
    let k = C64::new(-1.0, 1.0) * 3f64.powf(0.25) * a1 * C64::from_polar(1.0, t / 2.0) / (2.0 * p.powf(0.75));
    let gtilde = AnalyticExpr::monomial(k, 1);
    let w0 = 2.0 * (3.0 * p).powf(0.25) / rot;
    CanonicalForm::closed(gtilde, Some(z_of_w), w0, WDomain::Unbounded)
}

/// Second family: `z(w) = 5^{1/5}(−w²)^{1/5} / (2^{2/5} C^{1/5})` and
/// `g̃(w) = −6·2^{3/5} A (−w²)^{1/5} / (5^{4/5} C^{6/5})` with
/// `A = a₁ + ia₂`, `C = c₃ − id₃`; anchored at `w₀ = √(−4C/5)`.
pub fn closed_form_second_family(a1: f64, a2: f64, c3: f64, d3: f64) -> Result<CanonicalForm> {
    let a = C64::new(a1, a2);
    let c = C64::new(c3, -d3);
    if a.norm() == 0.0 || c.norm() == 0.0 {
        return Err(CanonicalError::Parameters("need (a₁,a₂) ≠ 0 and (c₃,d₃) ≠ 0".into()));
    }
    let root = (-(AnalyticExpr::z().powi(2))).powq(1, 5, Branch::Principal);
    let c15 = c.powf(0.2);
    let z_of_w = cst(5f64.powf(0.2) / (2f64.powf(0.4) * c15)) * root.clone();
    let k = -6.0 * 2f64.powf(0.6) * a / (5f64.powf(0.8) * c.powf(1.2));
    let gtilde = cst(k) * root;
    let w0 = (-4.0 * c / 5.0).sqrt();
    CanonicalForm::closed(gtilde, Some(z_of_w), w0, WDomain::Unbounded)
}

/// Normal curvature of the second family in canonical parameters:
/// `1152·50^{1/5} Q |w|^{−6/5} / (25 + 72·50^{1/5} Q |w|^{4/5})²` with
/// `Q = (a₁²+a₂²)/(c₃²+d₃²)^{6/5}`.
pub fn second_family_nu(a1: f64, a2: f64, c3: f64, d3: f64, w_abs: f64) -> f64 {
    let q = (a1 * a1 + a2 * a2) / (c3 * c3 + d3 * d3).powf(1.2);
    let k = 50f64.powf(0.2);
    1152.0 * k * q * w_abs.powf(-1.2) / (25.0 + 72.0 * k * q * w_abs.powf(0.8)).powi(2)
}

/// Normal curvature of the first family in canonical parameters:
/// `8√3 κ² / (2 + √3 κ² |w|²)²` with `κ = |a₁/(a₁i₁)^{3/4}|`; `w` is
/// measured from the point where `z = 0`.
pub fn first_family_nu(a1: f64, i1: f64, w_abs: f64) -> f64 {
    let k2 = (a1 / (a1 * i1).abs().powf(0.75)).powi(2);
    let s3 = 3f64.sqrt();
    2.0 * s3 * k2 / (1.0 + 0.5 * s3 * k2 * w_abs * w_abs).powi(2)
}
