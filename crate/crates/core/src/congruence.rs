//! Congruence of minimal surfaces.
//!
//! Two surfaces are compared in canonical principal parameters, where the
//! normal curvature `ν(w)` determines the surface up to a rigid motion and
//! the parameters are unique up to `w ↦ εw + c`. The pipeline:
//!
//! 1. anchor surface B at a point `z_B` and search surface A's `z`-plane
//!    for a point `z_A*` with the same `ν` and the same gradient of `ν` in
//!    canonical parameters (one complex number, defined up to the sign ε);
//! 2. re-anchor A's canonical form there and compare `ν` on a sample disk
//!    (the curvature residual);
//! 3. fit the Möbius gauge `g̃_A = e^{iφ}(α + g̃_B)/(1 − ᾱ g̃_B)` and turn
//!    it into the rotation `AB`;
//! 4. confirm with a Procrustes fit of the corresponding point clouds.
//!
//! Rotations and translations in a report carry B onto A:
//! `X_A = R X_B + T`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::AnalyticExpr;
use crate::canonical::{integrate_w_detour, CanonicalForm, CanonicalPoint, InitialBranch, WDomain};
use crate::chart::Chart;
use crate::lsq::{golden_section, levenberg_marquardt, LmOptions};
use crate::surfgeom::{check_minimal, GeomOptions, Grid};
use crate::weierstrass::{extract_pair, ExtractOptions, MinimalCurve, WeierstrassPair};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CongruenceError {
    #[error("pair is not of the form (a z^k, b z^n)")]
    NotMonomial,
    #[error("degenerate point cloud")]
    DegenerateCloud,
    #[error("chart evaluation failed: {0}")]
    Chart(String),
}

/// Residual freedom of canonical data: `w ↦ εw + c` and
/// `g̃ ↦ e^{iφ}(α + g̃)/(1 − ᾱ g̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeParams {
    pub epsilon: i32,
    pub shift: C64,
    pub phi: f64,
    pub alpha: C64,
}

impl Default for GaugeParams {
    fn default() -> Self {
        GaugeParams { epsilon: 1, shift: C64::new(0.0, 0.0), phi: 0.0, alpha: C64::new(0.0, 0.0) }
    }
}

impl GaugeParams {
    pub fn mobius(phi: f64, alpha: C64) -> Self {
        GaugeParams { phi: wrap_angle(phi), alpha, ..Default::default() }
    }

    /// Möbius part of the inverse gauge: `(−φ, −α e^{iφ})`.
    pub fn mobius_inverse(&self) -> Self {
        GaugeParams::mobius(-self.phi, -self.alpha * C64::from_polar(1.0, self.phi))
    }
}

/// Angle in `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut a = x.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn mobius_eval(phi: f64, alpha: C64, g: C64) -> C64 {
    C64::from_polar(1.0, phi) * (alpha + g) / (1.0 - alpha.conj() * g)
}

/// `e^{iφ}(α + g)/(1 − ᾱ g)` as an expression.
pub fn mobius_apply(g: &AnalyticExpr, phi: f64, alpha: C64) -> AnalyticExpr {
    let c = AnalyticExpr::Const;
    c(C64::from_polar(1.0, phi)) * (c(alpha) + g.clone()) / (c(C64::new(1.0, 0.0)) - c(alpha.conj()) * g.clone())
}

/// The rotation `A B` induced by a Möbius gauge: `B` moves the normal
/// `N(g)` to `N((α+g)/(1−ᾱg))`, `A` rotates by `φ` about the third axis.
pub fn rotation_from_gauge(g: &GaugeParams) -> Mat3 {
    let (s, c) = g.phi.sin_cos();
    let a_mat = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    let (a, b) = (g.alpha.re, g.alpha.im);
    let d = 1.0 + a * a + b * b;
    let b_mat = Matrix3::new(
        (1.0 - a * a + b * b) / d,
        -2.0 * a * b / d,
        -2.0 * a / d,
        -2.0 * a * b / d,
        (1.0 + a * a - b * b) / d,
        -2.0 * b / d,
        2.0 * a / d,
        2.0 * b / d,
        (1.0 - a * a - b * b) / d,
    );
    a_mat * b_mat
}

/// Axis and angle in `[0, π]` of a proper rotation (an improper one is
/// first multiplied by −1).
pub fn rotation_axis_angle(r: &Mat3) -> (Vec3, f64) {
    let r = if r.determinant() < 0.0 { -r } else { *r };
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let sin = skew.norm() / 2.0;
    let angle = sin.atan2(cos);
    if sin > 1e-6 {
        return (skew.normalize(), angle);
    }
    if cos > 0.0 {
        return (Vec3::z(), 0.0);
    }
    // angle ≈ π: R + I = 2 n nᵀ
    let m = r + Mat3::identity();
    let k = (0..3).max_by(|&i, &j| m.column(i).norm().total_cmp(&m.column(j).norm())).unwrap();
    (m.column(k).normalize(), angle)
}

/// Signed rotation angle about the third axis, if `r` is (within `tol`)
/// such a rotation.
pub fn third_axis_angle(r: &Mat3, tol: f64) -> Option<f64> {
    let off = r[(0, 2)].abs() + r[(1, 2)].abs() + r[(2, 0)].abs() + r[(2, 1)].abs() + (r[(2, 2)] - 1.0).abs();
    (off <= tol).then(|| r[(1, 0)].atan2(r[(0, 0)]))
}

// ----------------------------------------------------------------------
// Procrustes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Procrustes {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub rms: f64,
    /// Diameter of the target cloud.
    pub diameter: f64,
    pub reflection: bool,
    /// Covariance rank below 3: the motion is not unique.
    pub rank_deficient: bool,
}

impl Procrustes {
    pub fn rotation_matrix(&self) -> Mat3 {
        let r = &self.rotation;
        Matrix3::from_fn(|i, j| r[i][j])
    }
}

fn mat_to_rows(m: &Mat3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Orthogonal `R` and `T` minimising `Σ |R xᵢ + T − yᵢ|²` (reflections allowed).
pub fn procrustes_points(src: &[Vec3], dst: &[Vec3]) -> Result<Procrustes, CongruenceError> {
    assert_eq!(src.len(), dst.len());
    let n = src.len();
    if n < 3 {
        return Err(CongruenceError::DegenerateCloud);
    }
    let m1 = src.iter().sum::<Vec3>() / n as f64;
    let m2 = dst.iter().sum::<Vec3>() / n as f64;
    let mut h = Mat3::zeros();
    for (x, y) in src.iter().zip(dst) {
        h += (x - m1) * (y - m2).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Err(CongruenceError::DegenerateCloud);
    }
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
    let r = vt.transpose() * u.transpose();
    let t = m2 - r * m1;
    let ss: f64 = src.iter().zip(dst).map(|(x, y)| (r * x + t - y).norm_squared()).sum();
    let mut diameter: f64 = 0.0;
    for (i, a) in dst.iter().enumerate() {
        for b in &dst[i + 1..] {
            diameter = diameter.max((a - b).norm());
        }
    }
    Ok(Procrustes {
        rotation: mat_to_rows(&r),
        translation: [t.x, t.y, t.z],
        rms: (ss / n as f64).sqrt(),
        diameter,
        reflection: r.determinant() < 0.0,
        rank_deficient: rank < 3,
    })
}

/// Rigid alignment of `c1` onto `c2` with correspondences
/// `(u, v) ↦ param_map(u, v)` over the nodes of `grid`.
pub fn procrustes_oracle(
    c1: &dyn Chart,
    c2: &dyn Chart,
    grid: &Grid,
    param_map: &(dyn Fn(f64, f64) -> (f64, f64) + Sync),
) -> Result<Procrustes, CongruenceError> {
    let pts: Result<Vec<(Vec3, Vec3)>, _> = grid
        .nodes()
        .into_par_iter()
        .map(|(u, v)| {
            let (u2, v2) = param_map(u, v);
            Ok((c1.point(u, v)?, c2.point(u2, v2)?))
        })
        .collect::<Result<_, crate::chart::ChartError>>()
        .map_err(|e| CongruenceError::Chart(e.0));
    let (a, b): (Vec<_>, Vec<_>) = pts?.into_iter().unzip();
    procrustes_points(&a, &b)
}

// ----------------------------------------------------------------------
// homothety

fn as_monomial(e: &AnalyticExpr, rel: f64) -> Option<(C64, usize)> {
    let c = e.as_polynomial()?;
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut nz = c.iter().enumerate().filter(|(_, x)| x.norm() > rel * scale);
    let (k, a) = nz.next()?;
    nz.next().is_none().then_some((*a, k))
}

/// `(λ, k, n)` for a pair `(a z^k, b z^n)`: the surface is `λ` times a
/// congruent copy of the surface of `(z^k, z^n)`, `λ = |a| / |b|^{(k+1)/n}`.
pub fn homothety_scale(p: &WeierstrassPair) -> Option<(f64, usize, usize)> {
    let (a, k) = as_monomial(&p.f, 1e-9)?;
    let (b, n) = as_monomial(&p.g, 1e-9)?;
    if n == 0 {
        return None;
    }
    Some((a.norm() / b.norm().powf((k as f64 + 1.0) / n as f64), k, n))
}

/// Unit representative `(z^k, z^n)` and the scale `λ`.
pub fn homothety_normalize(p: &WeierstrassPair) -> Result<(WeierstrassPair, f64), CongruenceError> {
    let (lambda, k, n) = homothety_scale(p).ok_or(CongruenceError::NotMonomial)?;
    let one = C64::new(1.0, 0.0);
    let rep = WeierstrassPair::new(AnalyticExpr::monomial(one, k as i32), AnalyticExpr::monomial(one, n as i32), p.z0);
    Ok((rep, lambda))
}

/// The pair with `f` multiplied by `s`: the surface scaled by `s`.
pub fn scale_pair(p: &WeierstrassPair, s: f64) -> WeierstrassPair {
    WeierstrassPair::new(AnalyticExpr::real(s) * p.f.clone(), p.g.clone(), p.z0)
}

// ----------------------------------------------------------------------
// local invariants

struct Jets {
    pair: WeierstrassPair,
    df: AnalyticExpr,
    dg: AnalyticExpr,
    ddg: AnalyticExpr,
}

#[derive(Debug, Clone, Copy)]
struct Local {
    nu: f64,
    /// `ν_x + i ν_y` in the `z`-plane.
    grad_z: C64,
    /// `−1/(f g′)`
    p: C64,
}

impl Jets {
    fn new(pair: &WeierstrassPair) -> Self {
        let dg = pair.g.differentiate();
        Jets { pair: pair.clone(), df: pair.f.differentiate(), ddg: dg.differentiate(), dg }
    }

    fn ev(&self, e: &AnalyticExpr, z: C64) -> Option<C64> {
        let j = if e.has_tracked() { e.eval_from(self.pair.z0, z) } else { e.eval(z) };
        j.ok().map(|j| j.value)
    }

    fn local(&self, z: C64) -> Option<Local> {
        let f = self.ev(&self.pair.f, z)?;
        let g = self.ev(&self.pair.g, z)?;
        let df = self.ev(&self.df, z)?;
        let dg = self.ev(&self.dg, z)?;
        let ddg = self.ev(&self.ddg, z)?;
        if f.norm() == 0.0 || dg.norm() == 0.0 {
            return None;
        }
        let q = 1.0 + g.norm_sqr();
        let nu = 4.0 * dg.norm() / (f.norm() * q * q);
        let dlog = ddg / (2.0 * dg) - df / (2.0 * f) - 2.0 * dg * g.conj() / q;
        let out = Local { nu, grad_z: 2.0 * nu * dlog.conj(), p: -1.0 / (f * dg) };
        (out.nu.is_finite() && out.nu > 0.0 && out.grad_z.norm().is_finite()).then_some(out)
    }
}

fn nearest_root(p: C64, reference: C64) -> C64 {
    let r = p.sqrt();
    if (r - reference).norm() <= (r + reference).norm() {
        r
    } else {
        -r
    }
}

// ----------------------------------------------------------------------
// options and report

/// Correspondence hint `z_B ↦ z_A` between the two parameter planes.
#[derive(Clone)]
pub struct Hint(pub Arc<dyn Fn(C64) -> C64 + Send + Sync>);

impl fmt::Debug for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Hint(..)")
    }
}

#[derive(Debug, Clone)]
pub struct CongruenceOptions {
    /// Normalised curvature residual threshold.
    pub curvature_tol: f64,
    /// Cloud RMS threshold relative to the cloud diameter.
    pub cloud_tol: f64,
    /// Acceptance of a pointwise invariant match before sampling.
    pub jet_tol: f64,
    /// Samples per side of the `w` grid.
    pub samples: usize,
    /// Sample disk radius as a fraction of `|z_B|` (mapped to `w`).
    pub sample_fraction: f64,
    pub anchor_a: Option<C64>,
    pub anchor_b: Option<C64>,
    pub hint: Option<Hint>,
    pub max_candidates: usize,
    pub extract: ExtractOptions,
    pub up_to_homothety: bool,
}

impl Default for CongruenceOptions {
    fn default() -> Self {
        CongruenceOptions {
            curvature_tol: 1e-6,
            cloud_tol: 1e-6,
            jet_tol: 1e-7,
            samples: 5,
            sample_fraction: 0.2,
            anchor_a: None,
            anchor_b: None,
            hint: None,
            max_candidates: 12,
            extract: ExtractOptions::default(),
            up_to_homothety: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Congruent,
    NotCongruent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub decision: Decision,
    pub congruent: bool,
    pub gauge: GaugeParams,
    /// Procrustes rotation carrying B onto A.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// `AB` from the fitted Möbius gauge.
    pub gauge_rotation: [[f64; 3]; 3],
    /// `‖R − AB‖` (Frobenius).
    pub rotation_mismatch: f64,
    pub reflection: bool,
    pub curvature_residual: f64,
    pub mobius_residual: f64,
    pub cloud_rms: f64,
    pub cloud_diameter: f64,
    /// Homothety factors of A and B (1 unless normalised).
    pub scale_a: f64,
    pub scale_b: f64,
    /// Matched points: anchor of B and its image in A's parameter plane.
    pub anchor_b: C64,
    pub match_a: C64,
    pub stages: Vec<StageEntry>,
}

impl CongruenceReport {
    fn empty() -> Self {
        let id = mat_to_rows(&Mat3::identity());
        CongruenceReport {
            decision: Decision::Unknown,
            congruent: false,
            gauge: GaugeParams::default(),
            rotation: id,
            translation: [0.0; 3],
            gauge_rotation: id,
            rotation_mismatch: f64::INFINITY,
            reflection: false,
            curvature_residual: f64::INFINITY,
            mobius_residual: f64::INFINITY,
            cloud_rms: f64::INFINITY,
            cloud_diameter: 0.0,
            scale_a: 1.0,
            scale_b: 1.0,
            anchor_b: C64::new(0.0, 0.0),
            match_a: C64::new(0.0, 0.0),
            stages: vec![],
        }
    }

    fn log(&mut self, stage: &str, ok: bool, detail: impl Into<String>) {
        self.stages.push(StageEntry { stage: stage.into(), ok, detail: detail.into() });
    }

    pub fn rotation_matrix(&self) -> Mat3 {
        let r = &self.rotation;
        Matrix3::from_fn(|i, j| r[i][j])
    }

    pub fn gauge_rotation_matrix(&self) -> Mat3 {
        let r = &self.gauge_rotation;
        Matrix3::from_fn(|i, j| r[i][j])
    }
}

/// A surface handed to [`decide_congruence`].
#[derive(Clone)]
pub enum SurfaceInput {
    Pair(WeierstrassPair),
    /// Chart, with the seed of the extraction disk.
    Chart(Arc<dyn Chart>, (f64, f64)),
}

impl fmt::Debug for SurfaceInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceInput::Pair(p) => f.debug_tuple("Pair").field(p).finish(),
            SurfaceInput::Chart(c, s) => f.debug_tuple("Chart").field(&c.provenance()).field(s).finish(),
        }
    }
}

impl From<WeierstrassPair> for SurfaceInput {
    fn from(p: WeierstrassPair) -> Self {
        SurfaceInput::Pair(p)
    }
}

// ----------------------------------------------------------------------
// canonical matching

const ANCHOR_CANDIDATES: [(f64, f64); 9] =
    [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.7, 0.7), (0.5, 0.0), (2.0, 0.0), (0.3, 0.4), (0.0, 0.0), (1.5, 1.0)];

fn choose_anchor(j: &Jets, preferred: Option<C64>) -> Option<(C64, Local)> {
    let list = preferred.into_iter().chain(ANCHOR_CANDIDATES.iter().map(|&(a, b)| C64::new(a, b)));
    for z in list {
        if let Some(l) = j.local(z) {
            let scale = z.norm().max(1.0);
            // gradient must fix the correspondence
            if l.grad_z.norm() * scale > 1e-6 * l.nu {
                return Some((z, l));
            }
        }
    }
    None
}

/// Canonical gradient `ν_u + i ν_v` at a point with slope `z′ = root`.
fn grad_w(l: &Local, root: C64) -> C64 {
    l.grad_z * root.conj()
}

/// Result of matching canonical data of B (form 1) and A (form 2).
#[derive(Debug, Clone)]
pub struct CanonicalMatch {
    pub epsilon: i32,
    pub shift: C64,
    /// Normalised RMS of `ν_B(w) − ν_A(εw + c)` over the samples.
    pub residual: f64,
    pub z_b: C64,
    pub z_a: C64,
    pub slope_a: C64,
    pub form_b: CanonicalForm,
    pub form_a: CanonicalForm,
    pub samples_b: Vec<CanonicalPoint>,
    pub samples_a: Vec<CanonicalPoint>,
}

struct Matcher<'a> {
    ja: Jets,
    opts: &'a CongruenceOptions,
    z_b: C64,
    loc_b: Local,
    slope_b: C64,
    form_b: CanonicalForm,
    ws: Vec<C64>,
    samples_b: Vec<CanonicalPoint>,
}

fn sample(cf: &CanonicalForm, ws: &[C64]) -> Option<Vec<CanonicalPoint>> {
    ws.par_iter().map(|&w| cf.at(w).ok()).collect()
}

fn nu_residual(a: &[CanonicalPoint], b: &[CanonicalPoint]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x.nu - y.nu).powi(2)).sum();
    let den: f64 = a.iter().map(|x| x.nu * x.nu).sum();
    (num / den).sqrt()
}

impl<'a> Matcher<'a> {
    fn new(pb: &WeierstrassPair, pa: &WeierstrassPair, opts: &'a CongruenceOptions) -> Result<Self, String> {
        let jb = Jets::new(pb);
        let ja = Jets::new(pa);
        let (z_b, loc_b) = choose_anchor(&jb, opts.anchor_b).ok_or("no regular anchor on surface B")?;
        let form_b = CanonicalForm::numeric(pb, C64::new(0.0, 0.0), z_b, InitialBranch::Principal, WDomain::Unbounded)
            .map_err(|e| e.to_string())?;
        let slope_b = form_b.initial_slope;
        let rz = opts.sample_fraction * if z_b.norm() > 0.0 { z_b.norm() } else { 1.0 };
        let rho = rz / slope_b.norm();
        let n = opts.samples.max(2);
        let mut ws = vec![];
        for i in 0..n {
            for k in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let y = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
                ws.push(rho * C64::new(x, y));
            }
        }
        let samples_b = sample(&form_b, &ws).ok_or("canonical transform of B failed on the sample disk")?;
        Ok(Matcher { ja, opts, z_b, loc_b, slope_b, form_b, ws, samples_b })
    }

    fn jet_residual(&self, z: C64, reference: C64) -> Option<(Vec<f64>, C64)> {
        let l = self.ja.local(z)?;
        let root = nearest_root(l.p, reference);
        let g1 = grad_w(&self.loc_b, self.slope_b);
        let g2 = grad_w(&l, root);
        let d = (g2 - g1) / g1.norm();
        Some((vec![(l.nu / self.loc_b.nu).ln(), d.re, d.im], root))
    }

    /// Seeds in A's plane ranked by the mismatch of `ν` and `|∇ν|`.
    fn seeds(&self) -> Vec<C64> {
        let base = if self.z_b.norm() > 0.0 { self.z_b.norm() } else { 1.0 };
        let gb = grad_w(&self.loc_b, self.slope_b).norm();
        let mut pts = vec![C64::new(0.0, 0.0)];
        for k in 0..=40 {
            let r = base * 10f64.powf(-2.0 + 4.0 * k as f64 / 40.0);
            for m in 0..64 {
                pts.push(C64::from_polar(r, 2.0 * PI * (m as f64 + 0.5 * (k % 2) as f64) / 64.0));
            }
        }
        let mut scored: Vec<(f64, C64)> = pts
            .par_iter()
            .filter_map(|&z| {
                let l = self.ja.local(z)?;
                let g = l.grad_z.norm() * l.p.norm().sqrt();
                let s = (l.nu / self.loc_b.nu).ln().abs() + (g / gb).ln().abs();
                s.is_finite().then_some((s, z))
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<C64> = vec![];
        for (_, z) in scored {
            if out.iter().all(|o| (o - z).norm() > 0.1 * z.norm().max(o.norm()).max(1e-3 * base)) {
                out.push(z);
            }
            if out.len() >= self.opts.max_candidates {
                break;
            }
        }
        out
    }

    /// Pointwise matches `(z_A, slope, jet residual)` from the seeds, both signs.
    fn jet_matches(&self, seeds: &[C64]) -> Vec<(C64, C64, f64)> {
        let runs: Vec<(C64, f64)> = seeds.iter().flat_map(|&z| [(z, 1.0), (z, -1.0)]).collect();
        let found: Vec<(C64, C64, f64)> = runs
            .par_iter()
            .filter_map(|&(z0, sigma)| {
                let l0 = self.ja.local(z0)?;
                let reference = sigma * l0.p.sqrt();
                let r = |x: &[f64]| self.jet_residual(C64::new(x[0], x[1]), reference).map(|v| v.0);
                let fit = levenberg_marquardt(r, &[z0.re, z0.im], &LmOptions::default())?;
                let z = C64::new(fit.x[0], fit.x[1]);
                let (_, root) = self.jet_residual(z, reference)?;
                Some((z, root, fit.residual))
            })
            .collect();
        let mut uniq: Vec<(C64, C64, f64)> = vec![];
        for m in found {
            if !m.2.is_finite() {
                continue;
            }
            let dup = uniq.iter().position(|u| (u.0 - m.0).norm() <= 1e-6 * m.0.norm().max(1e-6) && (u.1 - m.1).norm() <= 1e-6 * m.1.norm());
            match dup {
                Some(i) if uniq[i].2 <= m.2 => {}
                Some(i) => uniq[i] = m,
                None => uniq.push(m),
            }
        }
        uniq.sort_by(|a, b| a.2.total_cmp(&b.2));
        uniq
    }

    fn form_a(&self, z: C64, slope: C64) -> Option<CanonicalForm> {
        CanonicalForm::numeric(&self.ja.pair, C64::new(0.0, 0.0), z, InitialBranch::Nearest(slope), WDomain::Unbounded).ok()
    }

    fn sampled(&self, z: C64, slope: C64) -> Option<(CanonicalForm, Vec<CanonicalPoint>, f64)> {
        let form = self.form_a(z, slope)?;
        let s = sample(&form, &self.ws)?;
        let res = nu_residual(&self.samples_b, &s);
        Some((form, s, res))
    }

    /// Polish the match by least squares on the sampled `ν`.
    fn refine(&self, z: C64, slope: C64) -> Option<(C64, C64)> {
        let den: f64 = self.samples_b.iter().map(|x| x.nu * x.nu).sum::<f64>().sqrt();
        let r = |x: &[f64]| {
            let zz = C64::new(x[0], x[1]);
            let l = self.ja.local(zz)?;
            let form = self.form_a(zz, nearest_root(l.p, slope))?;
            let s = sample(&form, &self.ws)?;
            Some(self.samples_b.iter().zip(&s).map(|(a, b)| (b.nu - a.nu) / den).collect())
        };
        let opts = LmOptions { max_iter: 30, ..Default::default() };
        let fit = levenberg_marquardt(r, &[z.re, z.im], &opts)?;
        let zz = C64::new(fit.x[0], fit.x[1]);
        let l = self.ja.local(zz)?;
        Some((zz, nearest_root(l.p, slope)))
    }

    fn build(&self, z: C64, slope: C64) -> Option<CanonicalMatch> {
        let (mut form, mut s, mut res) = self.sampled(z, slope)?;
        let (mut z, mut slope) = (z, slope);
        if res > self.opts.curvature_tol && res < 1e-3 {
            if let Some((z2, s2)) = self.refine(z, slope) {
                if let Some((f2, smp2, r2)) = self.sampled(z2, s2) {
                    if r2 < res {
                        (form, s, res, z, slope) = (f2, smp2, r2, z2, s2);
                    }
                }
            }
        }
        Some(CanonicalMatch {
            epsilon: 1,
            shift: C64::new(0.0, 0.0),
            residual: res,
            z_b: self.z_b,
            z_a: z,
            slope_a: slope,
            form_b: self.form_b.clone(),
            form_a: form,
            samples_b: self.samples_b.clone(),
            samples_a: s,
        })
    }

    /// `(ε, c)` of the match relative to A's own anchor.
    fn gauge_shift(&self, m: &CanonicalMatch) -> Option<(i32, C64)> {
        let (z0, _) = choose_anchor(&self.ja, self.opts.anchor_a)?;
        let l0 = self.ja.local(z0)?;
        let opts = crate::ode::OdeOptions::default();
        let (c, cont) = integrate_w_detour(&self.ja.pair, &self.ja.dg, z0, m.z_a, l0.p.sqrt(), &opts).ok()?;
        let eps = if (cont - m.slope_a).norm() <= (cont + m.slope_a).norm() { 1 } else { -1 };
        Some((eps, c))
    }
}

/// Match the canonical normal curvature of B against A.
///
/// On success `ν_B(w) = ν_A(εw + c)` near `w = 0`, where `w` is B's
/// canonical parameter anchored at the returned `z_b` and A's is
/// anchored at its own default anchor. Returns every distinct verified
/// match (hint first, if it verifies), else the best failed attempt.
pub fn match_canonical(pb: &WeierstrassPair, pa: &WeierstrassPair, opts: &CongruenceOptions) -> Result<Vec<CanonicalMatch>, String> {
    let m = Matcher::new(pb, pa, opts)?;
    let mut seeds = vec![];
    if let Some(h) = &opts.hint {
        seeds.push((h.0)(m.z_b));
    }
    seeds.extend(m.seeds());
    let jets = m.jet_matches(&seeds);
    let mut verified = vec![];
    let mut best: Option<CanonicalMatch> = None;
    let mut tried = 0;
    for &(z, slope, jr) in &jets {
        if jr > opts.jet_tol && !verified.is_empty() {
            break;
        }
        if tried >= 2 * opts.max_candidates {
            break;
        }
        tried += 1;
        let Some(mut cm) = m.build(z, slope) else { continue };
        if cm.residual <= opts.curvature_tol {
            if let Some((eps, c)) = m.gauge_shift(&cm) {
                cm.epsilon = eps;
                cm.shift = c;
            } else {
                cm.shift = C64::new(f64::NAN, f64::NAN);
            }
            verified.push(cm);
            if verified.len() >= 8 {
                break;
            }
        } else if best.as_ref().map_or(true, |b| cm.residual < b.residual) {
            best = Some(cm);
        }
    }
    if verified.is_empty() {
        if best.is_none() {
            // no pointwise match: report the curvature misfit at the best seed
            if let Some(&z) = seeds.first() {
                if let Some(l) = m.ja.local(z) {
                    best = m.build(z, l.p.sqrt());
                }
            }
        }
        return best.map(|b| vec![b]).ok_or_else(|| "no comparable point found on surface A".into());
    }
    if let Some(h) = &opts.hint {
        let target = (h.0)(m.z_b);
        if let Some(i) = verified.iter().position(|v| (v.z_a - target).norm() <= 1e-6 * target.norm().max(1.0)) {
            let v = verified.remove(i);
            verified.insert(0, v);
        }
    }
    Ok(verified)
}

/// Chordal distance on the Riemann sphere.
fn chordal(p: C64, q: C64) -> C64 {
    (p - q) / ((1.0 + p.norm_sqr()) * (1.0 + q.norm_sqr())).sqrt()
}

/// Fit `g₂ ≈ e^{iφ}(α + g₁)/(1 − ᾱ g₁)` over paired samples; returns
/// the gauge and the RMS chordal misfit.
pub fn match_mobius(g1: &[C64], g2: &[C64]) -> (GaugeParams, f64) {
    let r = |x: &[f64]| {
        let a = C64::new(x[1], x[2]);
        let mut out = Vec::with_capacity(2 * g1.len());
        for (p, q) in g1.iter().zip(g2) {
            let d = chordal(*q, mobius_eval(x[0], a, *p));
            if !d.re.is_finite() {
                return None;
            }
            out.push(d.re);
            out.push(d.im);
        }
        Some(out)
    };
    let fits: Vec<_> = (0..8)
        .into_par_iter()
        .filter_map(|k| levenberg_marquardt(&r, &[k as f64 * PI / 4.0, 0.0, 0.0], &LmOptions::default()))
        .collect();
    let best = fits.into_iter().min_by(|a, b| a.residual.total_cmp(&b.residual));
    match best {
        Some(f) => {
            let rms = f.residual / (g1.len() as f64).sqrt();
            (GaugeParams::mobius(f.x[0], C64::new(f.x[1], f.x[2])), rms)
        }
        None => (GaugeParams::default(), f64::INFINITY),
    }
}

fn cloud(curve: &MinimalCurve, pts: &[CanonicalPoint]) -> Option<Vec<Vec3>> {
    pts.iter()
        .map(|p| {
            let x = curve.eval(p.z?).ok()?;
            Some(Vec3::new(x[0].re, x[1].re, x[2].re))
        })
        .collect()
}

fn resolve(input: &SurfaceInput, opts: &CongruenceOptions, label: &str, rep: &mut CongruenceReport) -> Option<WeierstrassPair> {
    match input {
        SurfaceInput::Pair(p) => match p.validate() {
            Ok(()) => Some(p.clone()),
            Err(e) => {
                rep.log(&format!("validate {label}"), false, e.to_string());
                None
            }
        },
        SurfaceInput::Chart(c, seed) => {
            let r = opts.extract.radius;
            let grid = Grid::new((seed.0 - r / 2.0, seed.0 + r / 2.0), (seed.1 - r / 2.0, seed.1 + r / 2.0), 7, 7);
            match check_minimal(c.as_ref(), grid, &GeomOptions::default()) {
                Ok(m) if m.passed => rep.log(&format!("minimal {label}"), true, format!("max|H|/max ν = {:.2e}", m.ratio)),
                Ok(m) => {
                    rep.log(&format!("minimal {label}"), false, format!("max|H|/max ν = {:.2e}", m.ratio));
                    return None;
                }
                Err(e) => {
                    rep.log(&format!("minimal {label}"), false, e.to_string());
                    return None;
                }
            }
            match extract_pair(c.as_ref(), *seed, &opts.extract) {
                Ok(x) => {
                    rep.log(&format!("extract {label}"), true, format!("f = {}, g = {}, residual {:.2e}", x.pair.f, x.pair.g, x.residual));
                    Some(x.pair)
                }
                Err(e) => {
                    rep.log(&format!("extract {label}"), false, e.to_string());
                    None
                }
            }
        }
    }
}

/// Curvature residual only (used by the homothety search).
fn curvature_only(pb: &WeierstrassPair, pa: &WeierstrassPair, opts: &CongruenceOptions) -> f64 {
    match match_canonical(pb, pa, opts) {
        Ok(v) => v.first().map_or(f64::INFINITY, |m| m.residual),
        Err(_) => f64::INFINITY,
    }
}

/// Decide whether A and B are congruent (optionally up to homothety) and
/// recover the rigid motion `X_A = R X_B + T`.
pub fn decide_congruence(a: &SurfaceInput, b: &SurfaceInput, opts: &CongruenceOptions) -> CongruenceReport {
    let mut rep = CongruenceReport::empty();
    let (Some(mut pa), Some(mut pb)) = (resolve(a, opts, "A", &mut rep), resolve(b, opts, "B", &mut rep)) else {
        return rep;
    };
    if opts.up_to_homothety {
        match (homothety_scale(&pa), homothety_scale(&pb)) {
            (Some((la, ..)), Some((lb, ..))) => {
                pa = scale_pair(&pa, 1.0 / la);
                pb = scale_pair(&pb, 1.0 / lb);
                rep.scale_a = la;
                rep.scale_b = lb;
                rep.log("homothety", true, format!("monomial scales λ_A = {la:.6e}, λ_B = {lb:.6e}"));
            }
            _ => {
                // scale A against B by a 1-D search on log λ
                let f = |t: f64| curvature_only(&pb, &scale_pair(&pa, t.exp()), opts);
                let (t, fx) = golden_section(f, 1e-3f64.ln(), 1e3f64.ln(), 1e-10, 200);
                let s = t.exp();
                pa = scale_pair(&pa, s);
                rep.scale_a = 1.0 / s;
                rep.log("homothety", fx.is_finite(), format!("searched scale {s:.6e}, residual {fx:.3e}"));
            }
        }
    }
    let matches = match match_canonical(&pb, &pa, opts) {
        Ok(v) => v,
        Err(e) => {
            rep.log("canonical", false, e);
            return rep;
        }
    };
    let verified = matches[0].residual <= opts.curvature_tol;
    rep.log(
        "canonical",
        true,
        format!("{} candidate(s), best curvature residual {:.3e}", if verified { matches.len() } else { 0 }, matches[0].residual),
    );
    let curve_a = MinimalCurve::new(pa.clone());
    let curve_b = MinimalCurve::new(pb.clone());
    struct Scored {
        m: usize,
        gauge: GaugeParams,
        mob: f64,
        pr: Procrustes,
        rgauge: Mat3,
    }
    let mut scored: Vec<Scored> = vec![];
    for (i, m) in matches.iter().enumerate() {
        let g1: Vec<C64> = m.samples_b.iter().map(|p| p.g).collect();
        let g2: Vec<C64> = m.samples_a.iter().map(|p| p.g).collect();
        let (mut gauge, mob) = match_mobius(&g1, &g2);
        gauge.epsilon = m.epsilon;
        gauge.shift = m.shift;
        let rgauge = rotation_from_gauge(&gauge);
        let (Some(xb), Some(xa)) = (cloud(&curve_b, &m.samples_b), cloud(&curve_a, &m.samples_a)) else {
            rep.log("procrustes", false, "surface evaluation failed");
            continue;
        };
        match procrustes_points(&xb, &xa) {
            Ok(pr) => scored.push(Scored { m: i, gauge, mob, pr, rgauge }),
            Err(e) => rep.log("procrustes", false, e.to_string()),
        }
        if opts.hint.is_some() && i == 0 && verified {
            break;
        }
    }
    let Some(best) = scored.into_iter().min_by(|x, y| {
        // hint first, otherwise the smallest rotation
        let key = |s: &Scored| {
            let hinted = opts.hint.is_some() && s.m == 0;
            (if hinted { 0.0f64 } else { 1.0 }, rotation_axis_angle(&s.pr.rotation_matrix()).1)
        };
        let (a, b) = (key(x), key(y));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    }) else {
        rep.curvature_residual = matches[0].residual;
        rep.decision = Decision::Unknown;
        return rep;
    };
    let m = &matches[best.m];
    rep.gauge = best.gauge;
    rep.curvature_residual = m.residual;
    rep.mobius_residual = best.mob;
    rep.rotation = best.pr.rotation;
    rep.translation = best.pr.translation;
    rep.gauge_rotation = mat_to_rows(&best.rgauge);
    rep.rotation_mismatch = (best.pr.rotation_matrix() - best.rgauge).norm();
    rep.reflection = best.pr.reflection;
    rep.cloud_rms = best.pr.rms;
    rep.cloud_diameter = best.pr.diameter;
    rep.anchor_b = m.z_b;
    rep.match_a = m.z_a;
    rep.log("mobius", best.mob.is_finite(), format!("φ = {:.9}, α = {:.3e}, residual {:.3e}", best.gauge.phi, best.gauge.alpha, best.mob));
    rep.log(
        "procrustes",
        !best.pr.rank_deficient,
        format!(
            "rms {:.3e} (diameter {:.3e}), ‖R − AB‖ = {:.2e}{}",
            best.pr.rms,
            best.pr.diameter,
            rep.rotation_mismatch,
            if best.pr.reflection { ", reflection" } else { "" }
        ),
    );
    // a mirror image is not a rigid motion
    let ok = m.residual <= opts.curvature_tol && best.pr.rms <= opts.cloud_tol * best.pr.diameter && !best.pr.reflection;
    rep.decision = if ok { Decision::Congruent } else { Decision::NotCongruent };
    rep.congruent = ok;
    rep
}
