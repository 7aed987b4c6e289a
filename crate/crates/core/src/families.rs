//! Harmonic polynomial surfaces of degree six and the minimal families
//! built from them.
//!
//! The general chart is
//!
//! ```text
//! r(u,v) = a(u⁶−15u⁴v²+15u²v⁴−v⁶) + b(3u⁵v−10u³v³+3uv⁵)
//!        + c(u⁵−10u³v²+5uv⁴) + d(v⁵−10u²v³+5u⁴v)
//!        + e(u⁴−6u²v²+v⁴) + f uv(u²−v²) + g u(u²−3v²) + h v(v²−3u²)
//!        + i(u²−v²) + j uv + k u + l v + m
//! ```
//!
//! which is `Re Σ Ψₙ zⁿ` with `Ψ₆ = a − ib/2`, `Ψ₅ = c − id`,
//! `Ψ₄ = e − if/4`, `Ψ₃ = g + ih`, `Ψ₂ = i − ij/2`, `Ψ₁ = k − il`,
//! `Ψ₀ = m`. The surface is minimal and isothermal exactly when the
//! coefficient vectors satisfy the 22 quadratic equations evaluated by
//! [`check_system`].

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticExpr;
use crate::chart::{Chart, ChartError, ChartJet, Provenance};
use crate::surd::{ratio, SurdSum};
use crate::weierstrass::WeierstrassPair;
use crate::Vec3;

pub const COEFF_NAMES: [&str; 13] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m"];

/// The thirteen coefficient vectors of the degree-6 chart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Degree6Coeffs {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
    pub e: [f64; 3],
    pub f: [f64; 3],
    pub g: [f64; 3],
    pub h: [f64; 3],
    pub i: [f64; 3],
    pub j: [f64; 3],
    pub k: [f64; 3],
    pub l: [f64; 3],
    #[serde(default)]
    pub m: [f64; 3],
}

impl Degree6Coeffs {
    pub fn vectors(&self) -> [[f64; 3]; 13] {
        [
            self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h, self.i, self.j, self.k, self.l, self.m,
        ]
    }

    pub fn from_vectors(v: [[f64; 3]; 13]) -> Self {
        Degree6Coeffs {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
            e: v[4],
            f: v[5],
            g: v[6],
            h: v[7],
            i: v[8],
            j: v[9],
            k: v[10],
            l: v[11],
            m: v[12],
        }
    }

    /// Complex coefficients `Ψₙ` (index `n = 0..=6`) of the minimal curve
    /// whose real part is the chart.
    pub fn psi(&self) -> [[C64; 3]; 7] {
        let cv = |re: [f64; 3], im: [f64; 3], s: f64| -> [C64; 3] {
            [0, 1, 2].map(|k| C64::new(re[k], s * im[k]))
        };
        [
            cv(self.m, [0.0; 3], 0.0),
            cv(self.k, self.l, -1.0),
            cv(self.i, self.j, -0.5),
            cv(self.g, self.h, 1.0),
            cv(self.e, self.f, -0.25),
            cv(self.c, self.d, -1.0),
            cv(self.a, self.b, -0.5),
        ]
    }
}

/// Exact coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCoeffs(pub [[SurdSum; 3]; 13]);

impl ExactCoeffs {
    pub fn zero() -> Self {
        ExactCoeffs(std::array::from_fn(|_| std::array::from_fn(|_| SurdSum::zero())))
    }

    pub fn from_f64(c: &Degree6Coeffs) -> Self {
        let v = c.vectors();
        ExactCoeffs(std::array::from_fn(|n| std::array::from_fn(|k| SurdSum::from_f64(v[n][k]))))
    }

    pub fn to_f64(&self) -> Degree6Coeffs {
        Degree6Coeffs::from_vectors(std::array::from_fn(|n| std::array::from_fn(|k| self.0[n][k].to_f64())))
    }

    fn set(&mut self, name: char, k: usize, v: SurdSum) {
        let idx = COEFF_NAMES.iter().position(|n| n.starts_with(name)).expect("coefficient name");
        self.0[idx][k] = v;
    }

    fn combine(&self, s: &SurdSum, other: &ExactCoeffs, t: &SurdSum) -> ExactCoeffs {
        ExactCoeffs(std::array::from_fn(|n| {
            std::array::from_fn(|k| &(&self.0[n][k] * s) + &(&other.0[n][k] * t))
        }))
    }
}

// ----------------------------------------------------------------------
// the 22 equations

trait Ring: Clone {
    fn int(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Ring for SurdSum {
    fn int(n: i64) -> Self {
        SurdSum::int(n)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Value paired with the sum of absolute values of the terms that formed it.
#[derive(Clone, Copy)]
struct Mag {
    v: f64,
    m: f64,
}

impl Ring for Mag {
    fn int(n: i64) -> Self {
        Mag { v: n as f64, m: (n as f64).abs() }
    }
    fn add(&self, o: &Self) -> Self {
        Mag { v: self.v + o.v, m: self.m + o.m }
    }
    fn mul(&self, o: &Self) -> Self {
        Mag { v: self.v * o.v, m: self.m * o.m }
    }
}

fn system<T: Ring>(x: &[[T; 3]; 13]) -> Vec<T> {
    let [a, b, c, d, e, f, g, h, i, j, k, l, _m] = x;
    let dot = |p: &[T; 3], q: &[T; 3]| p[0].mul(&q[0]).add(&p[1].mul(&q[1])).add(&p[2].mul(&q[2]));
    // Σ n·(p·q)
    let lin = |terms: &[(i64, &[T; 3], &[T; 3])]| -> T {
        let mut acc = T::int(0);
        for (n, p, q) in terms {
            acc = acc.add(&T::int(*n).mul(&dot(p, q)));
        }
        acc
    };
    vec![
        lin(&[(4, a, a), (-1, b, b)]),
        lin(&[(1, a, b)]),
        lin(&[(2, a, c), (-1, b, d)]),
        lin(&[(2, a, d), (1, b, c)]),
        lin(&[(25, c, c), (-25, d, d), (48, a, e), (-6, b, f)]),
        lin(&[(25, d, c), (12, b, e), (6, a, f)]),
        lin(&[(16, e, e), (-1, f, f), (30, c, g), (30, d, h), (24, a, i), (-6, b, j)]),
        lin(&[(4, e, f), (-15, c, h), (15, d, g), (6, b, i), (6, a, j)]),
        lin(&[(9, g, g), (-9, h, h), (16, e, i), (-2, f, j), (10, c, k), (-10, l, d)]),
        lin(&[(9, g, h), (-2, f, i), (-4, e, j), (-5, d, k), (-5, c, l)]),
        lin(&[(4, i, i), (-1, j, j), (6, g, k), (6, h, l)]),
        lin(&[(2, i, j), (3, g, l), (-3, h, k)]),
        lin(&[(18, a, g), (9, b, h), (20, e, c), (-5, f, d)]),
        lin(&[(18, a, h), (-9, b, g), (-20, e, d), (-5, f, c)]),
        lin(&[(6, a, k), (-3, b, l), (10, c, i), (-5, d, j), (12, e, g), (3, f, h)]),
        lin(&[(6, a, l), (3, b, k), (5, c, j), (10, d, i), (3, f, g), (-12, e, h)]),
        lin(&[(4, e, k), (-1, f, l), (3, h, j), (6, g, i)]),
        lin(&[(4, e, l), (1, f, k), (3, g, j), (-6, h, i)]),
        lin(&[(2, l, i), (1, k, j)]),
        lin(&[(2, k, i), (-1, l, j)]),
        lin(&[(1, k, k), (-1, l, l)]),
        lin(&[(1, k, l)]),
    ]
}

/// Residuals (left minus right side) of the 22 equations in floating point.
pub fn check_system(c: &Degree6Coeffs) -> [f64; 22] {
    let v = c.vectors().map(|p| p.map(|x| Mag { v: x, m: x.abs() }));
    let r = system(&v);
    std::array::from_fn(|n| r[n].v)
}

/// Residuals divided by the sum of absolute values of their terms (zero
/// where all terms vanish).
pub fn check_system_scaled(c: &Degree6Coeffs) -> [f64; 22] {
    let v = c.vectors().map(|p| p.map(|x| Mag { v: x, m: x.abs() }));
    let r = system(&v);
    std::array::from_fn(|n| if r[n].m == 0.0 { 0.0 } else { r[n].v.abs() / r[n].m })
}

/// Exact residuals of the 22 equations.
pub fn check_system_exact(c: &ExactCoeffs) -> Vec<SurdSum> {
    system(&c.0)
}

// ----------------------------------------------------------------------
// the chart

/// Polynomial chart `Re Σ Ψₙ zⁿ` with exact derivatives.
#[derive(Debug, Clone)]
pub struct Degree6Chart {
    pub coeffs: Degree6Coeffs,
    psi: [[C64; 3]; 7],
}

impl Degree6Chart {
    pub fn new(coeffs: Degree6Coeffs) -> Self {
        Degree6Chart { coeffs, psi: coeffs.psi() }
    }

    /// The chart is constant (all non-constant coefficients vanish).
    pub fn is_degenerate(&self) -> bool {
        self.psi[1..].iter().all(|p| p.iter().all(|c| c.norm() == 0.0))
    }

    /// `Ψ(z)`, `Ψ′(z)`, `Ψ″(z)`.
    pub fn curve(&self, z: C64) -> [[C64; 3]; 3] {
        let mut out = [[C64::new(0.0, 0.0); 3]; 3];
        for k in 0..3 {
            let (mut p, mut d1, mut d2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for n in (0..7).rev() {
                d2 = d2 * z + 2.0 * d1;
                d1 = d1 * z + p;
                p = p * z + self.psi[n][k];
            }
            out[0][k] = p;
            out[1][k] = d1;
            out[2][k] = d2;
        }
        out
    }
}

fn re3(w: [C64; 3]) -> Vec3 {
    Vec3::new(w[0].re, w[1].re, w[2].re)
}

impl Chart for Degree6Chart {
    fn point(&self, u: f64, v: f64) -> Result<Vec3, ChartError> {
        Ok(re3(self.curve(C64::new(u, v))[0]))
    }

    fn jet(&self, u: f64, v: f64) -> Option<Result<ChartJet, ChartError>> {
        let [p, d1, d2] = self.curve(C64::new(u, v));
        let i = C64::new(0.0, 1.0);
        let times = |w: [C64; 3]| w.map(|c| c * i);
        Some(Ok(ChartJet {
            x: re3(p),
            xu: re3(d1),
            xv: re3(times(d1)),
            xuu: re3(d2),
            xuv: re3(times(d2)),
            xvv: -re3(d2),
        }))
    }

    fn provenance(&self) -> Provenance {
        Provenance::PolynomialFamily
    }

    fn polynomial_degree(&self) -> Option<usize> {
        (0..7).rev().find(|&n| self.psi[n].iter().any(|c| c.norm() != 0.0))
    }
}

pub fn degree6_chart(coeffs: &Degree6Coeffs) -> Degree6Chart {
    Degree6Chart::new(*coeffs)
}

// ----------------------------------------------------------------------
// families

/// A family member: float coefficients for evaluation and exact ones for
/// certification of the system.
#[derive(Debug, Clone)]
pub struct FamilySurface {
    pub name: String,
    pub coeffs: Degree6Coeffs,
    pub exact: ExactCoeffs,
}

impl FamilySurface {
    fn from_exact(name: String, exact: ExactCoeffs) -> Self {
        FamilySurface { name, coeffs: exact.to_f64(), exact }
    }

    /// A general degree-6 chart from float coefficients (certified through
    /// their exact binary values).
    pub fn from_coeffs(name: impl Into<String>, coeffs: Degree6Coeffs) -> Self {
        FamilySurface { name: name.into(), coeffs, exact: ExactCoeffs::from_f64(&coeffs) }
    }

    pub fn chart(&self) -> Degree6Chart {
        Degree6Chart::new(self.coeffs)
    }
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

/// Third components of `e` and `f` shared by the r₁/r₂ charts:
/// `√(3/2)·√(|p|−p)` and `−2√6·√(|p|+p)` for `p = a·i`.
fn radical_parts(p: &BigRational) -> (SurdSum, SurdSum) {
    let abs = p.abs();
    let e3 = SurdSum::sqrt_rational(&(ratio(3, 2) * (&abs - p)));
    let f3 = &SurdSum::int(-2) * &SurdSum::sqrt_rational(&(ratio(6, 1) * (&abs + p)));
    (e3, f3)
}

fn r1_exact(a1: &BigRational, i1: &BigRational) -> ExactCoeffs {
    let r = |x: &BigRational| SurdSum::rational(x.clone());
    let mut c = ExactCoeffs::zero();
    c.set('a', 0, r(a1));
    c.set('b', 1, r(&(ratio(2, 1) * a1)));
    c.set('i', 0, r(i1));
    c.set('j', 1, r(&(ratio(-2, 1) * i1)));
    let (e3, f3) = radical_parts(&(a1 * i1));
    c.set('e', 2, e3);
    c.set('f', 2, f3);
    c
}

fn r2_exact(a2: &BigRational, i2: &BigRational) -> ExactCoeffs {
    let r = |x: &BigRational| SurdSum::rational(x.clone());
    let mut c = ExactCoeffs::zero();
    c.set('a', 1, r(a2));
    c.set('b', 0, r(&(ratio(-2, 1) * a2)));
    c.set('i', 1, r(i2));
    c.set('j', 0, r(&(ratio(2, 1) * i2)));
    let (e3, f3) = radical_parts(&(a2 * i2));
    c.set('e', 2, e3);
    c.set('f', 2, f3);
    c
}

/// `r₁[a₁, i₁]`.
pub fn r1(a1: f64, i1: f64) -> FamilySurface {
    FamilySurface::from_exact(format!("r1[{a1},{i1}]"), r1_exact(&q(a1), &q(i1)))
}

/// `r₂[a₂, i₂]`.
pub fn r2(a2: f64, i2: f64) -> FamilySurface {
    FamilySurface::from_exact(format!("r2[{a2},{i2}]"), r2_exact(&q(a2), &q(i2)))
}

/// Conjugate of `r₁[a₁, i₁]`: `r₂[−a₁, i₁]`, with the third component
/// negated when `a₁i₁ < 0` (the radicals swap roles there).
fn r1_conjugate_exact(a1: &BigRational, i1: &BigRational) -> ExactCoeffs {
    let mut c = r2_exact(&-a1.clone(), i1);
    if (a1 * i1).is_negative() {
        for row in c.0.iter_mut() {
            row[2] = -&row[2];
        }
    }
    c
}

/// `assoc_t[a₁, i₁] = r₁[a₁, i₁] cos t + r₂[−a₁, i₁] sin t` (conjugate
/// sign-corrected for `a₁i₁ < 0`).
pub fn assoc_family(a1: f64, i1: f64, t: f64) -> FamilySurface {
    let (s, c) = t.sin_cos();
    let exact = r1_exact(&q(a1), &q(i1)).combine(&SurdSum::from_f64(c), &r1_conjugate_exact(&q(a1), &q(i1)), &SurdSum::from_f64(s));
    FamilySurface::from_exact(format!("assoc[{a1},{i1}](t={t})"), exact)
}

/// Associated chart at the angle with rational `(cos t, sin t) =
/// ((1−μ²)/(1+μ²), 2μ/(1+μ²))`, so that the system can be certified
/// exactly.
pub fn assoc_family_rational(a1: &BigRational, i1: &BigRational, mu: &BigRational) -> FamilySurface {
    let one = ratio(1, 1);
    let den = &one + mu * mu;
    let c = (&one - mu * mu) / &den;
    let s = ratio(2, 1) * mu / &den;
    let exact = r1_exact(a1, i1).combine(&SurdSum::rational(c), &r1_conjugate_exact(a1, i1), &SurdSum::rational(s));
    FamilySurface::from_exact(format!("assoc[{a1},{i1}](mu={mu})"), exact)
}

/// `(e₁, e₂)` solving the reduced system of the second family.
fn s_e(a1: &BigRational, a2: &BigRational, c3: &BigRational, d3: &BigRational) -> (BigRational, BigRational) {
    let n = a1 * a1 + a2 * a2;
    assert!(!n.is_zero(), "a₁² + a₂² must be positive");
    let den = ratio(96, 1) * n;
    let two = ratio(2, 1);
    let e1 = ratio(25, 1) * (-(a1 * c3 * c3) + &two * a2 * c3 * d3 + a1 * d3 * d3) / &den;
    let e2 = ratio(25, 1) * (-(a2 * c3 * c3) - &two * a1 * c3 * d3 + a2 * d3 * d3) / &den;
    (e1, e2)
}

pub fn s_family_exact(a1: &BigRational, a2: &BigRational, c3: &BigRational, d3: &BigRational) -> FamilySurface {
    let r = |x: BigRational| SurdSum::rational(x);
    let (e1, e2) = s_e(a1, a2, c3, d3);
    let mut c = ExactCoeffs::zero();
    c.set('a', 0, r(a1.clone()));
    c.set('a', 1, r(a2.clone()));
    c.set('b', 0, r(ratio(-2, 1) * a2));
    c.set('b', 1, r(ratio(2, 1) * a1));
    c.set('c', 2, r(c3.clone()));
    c.set('d', 2, r(d3.clone()));
    c.set('f', 0, r(ratio(4, 1) * &e2));
    c.set('f', 1, r(ratio(-4, 1) * &e1));
    c.set('e', 0, r(e1));
    c.set('e', 1, r(e2));
    FamilySurface::from_exact(format!("s[{a1},{a2},{c3},{d3}]"), c)
}

/// `s[a₁, a₂, c₃, d₃]`.
pub fn s_family(a1: f64, a2: f64, c3: f64, d3: f64) -> FamilySurface {
    let mut s = s_family_exact(&q(a1), &q(a2), &q(c3), &q(d3));
    s.name = format!("s[{a1},{a2},{c3},{d3}]");
    s
}

/// `s₁[a₁, c₃] = s[a₁, 0, c₃, 0]`.
pub fn s1(a1: f64, c3: f64) -> FamilySurface {
    let mut s = s_family(a1, 0.0, c3, 0.0);
    s.name = format!("s1[{a1},{c3}]");
    s
}

/// `s₂[a₂, d₃] = s[0, a₂, 0, d₃]`.
pub fn s2(a2: f64, d3: f64) -> FamilySurface {
    let mut s = s_family(0.0, a2, 0.0, d3);
    s.name = format!("s2[{a2},{d3}]");
    s
}

// ----------------------------------------------------------------------
// closed-form Weierstrass data

/// Pair generating `assoc_t[a₁, i₁]`: `f = 4i₁e^{−it}z` and `g = κ z²` with
/// `κ = i√3 a₁/√(a₁i₁)` for `a₁i₁ > 0`, `κ = −√3 a₁/√|a₁i₁|` for `a₁i₁ < 0`.
pub fn first_family_pair(a1: f64, i1: f64, t: f64) -> WeierstrassPair {
    let p = a1 * i1;
    assert!(p != 0.0, "a₁i₁ must be nonzero");
    let kappa = if p > 0.0 {
        C64::new(0.0, 3f64.sqrt() * a1 / p.sqrt())
    } else {
        C64::new(-3f64.sqrt() * a1 / (-p).sqrt(), 0.0)
    };
    WeierstrassPair {
        f: AnalyticExpr::monomial(4.0 * i1 * C64::from_polar(1.0, -t), 1),
        g: AnalyticExpr::monomial(kappa, 2),
        z0: C64::new(0.0, 0.0),
    }
}

/// Pair generating `s[a₁, a₂, c₃, d₃]`:
/// `f = −25C²/(12A) z³`, `g = −12A/(5C) z` with `A = a₁ + ia₂`, `C = c₃ − id₃`.
pub fn second_family_pair(a1: f64, a2: f64, c3: f64, d3: f64) -> WeierstrassPair {
    let a = C64::new(a1, a2);
    let c = C64::new(c3, -d3);
    assert!(a.norm() > 0.0 && c.norm() > 0.0, "degenerate shape parameters");
    WeierstrassPair {
        f: AnalyticExpr::monomial(-25.0 * c * c / (12.0 * a), 3),
        g: AnalyticExpr::monomial(-12.0 * a / (5.0 * c), 1),
        z0: C64::new(0.0, 0.0),
    }
}

/// `(a₁²+a₂²)⁵ / (c₃²+d₃²)⁶`, constant on congruence classes of the
/// second family.
pub fn s_invariant(a1: f64, a2: f64, c3: f64, d3: f64) -> f64 {
    (a1 * a1 + a2 * a2).powi(5) / (c3 * c3 + d3 * d3).powi(6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::chart_real;

    #[test]
    fn assoc_with_negative_product_is_exact() {
        for (a, i) in [(-3, 2), (2, -5)] {
            let s = assoc_family_rational(&ratio(a, 1), &ratio(i, 2), &ratio(3, 4));
            assert!(check_system_exact(&s.exact).iter().all(|r| r.is_zero()), "{}", s.name);
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn r1_point_and_system() {
        let s = r1(1.0, 500.0);
        let p = s.chart().point(1.0, 0.0).unwrap();
        assert_eq!(p, Vec3::new(501.0, 0.0, 0.0));
        assert!(check_system_exact(&s.exact).iter().all(|r| r.is_zero()));
        // f² = 24000, 24 a·i = 12000, −6 b·j = 12000
        let f3 = &s.exact.0[5][2];
        assert_eq!((f3 * f3).as_rational(), Some(ratio(24000, 1)));
        assert!(s.exact.0[4][2].is_zero());
    }

    #[test]
    fn zero_coefficients_are_degenerate() {
        let c = Degree6Coeffs::default();
        assert!(check_system(&c).iter().all(|&r| r == 0.0));
        assert!(degree6_chart(&c).is_degenerate());
    }

    #[test]
    fn perturbed_f_breaks_seventh_equation() {
        let s = r1(1.0, 500.0);
        let mut c = s.coeffs;
        c.f[2] += 1.0;
        let r = check_system(&c);
        // (f₃+1)² − f₃² = 2f₃ + 1
        assert!(close(r[6], -(2.0 * s.coeffs.f[2] + 1.0), 1e-9));
    }

    #[test]
    fn s_with_flat_part_only() {
        let s = s_family(1.0, 2.0, 0.0, 0.0);
        assert_eq!(s.coeffs.e, [0.0; 3]);
        assert_eq!(s.coeffs.f, [0.0; 3]);
    }

    #[test]
    fn s1_real_curve_matches_closed_chart() {
        // Ψ₁ = ((a₁z² − 25c₃²/(96a₁))z⁴, −i(a₁z² + 25c₃²/(96a₁))z⁴, c₃z⁵)
        let (a1, c3) = (3.0, 1.0);
        let ch = s1(a1, c3).chart();
        let k = 25.0 * c3 * c3 / (96.0 * a1);
        for &(u, v) in &[(0.05, -0.03), (0.1, 0.1), (-0.07, 0.02)] {
            let z = C64::new(u, v);
            let psi = [
                (a1 * z * z - k) * z.powi(4),
                -C64::new(0.0, 1.0) * (a1 * z * z + k) * z.powi(4),
                c3 * z.powi(5),
            ];
            let p = ch.point(u, v).unwrap();
            for n in 0..3 {
                assert!((p[n] - psi[n].re).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_pairs_reproduce_charts() {
        let s = r1(2.0, 7.0);
        let w = chart_real(&first_family_pair(2.0, 7.0, 0.0));
        let s5 = s_family(1.0, 2.0, 1.0, -1.0);
        let w5 = chart_real(&second_family_pair(1.0, 2.0, 1.0, -1.0));
        for &(u, v) in &[(0.3, -0.2), (0.7, 0.4)] {
            assert!((s.chart().point(u, v).unwrap() - w.point(u, v).unwrap()).norm() < 1e-12);
            assert!((s5.chart().point(u, v).unwrap() - w5.point(u, v).unwrap()).norm() < 1e-12);
        }
        let neg = r1(2.0, -7.0);
        let wn = chart_real(&first_family_pair(2.0, -7.0, 0.0));
        assert!((neg.chart().point(0.4, 0.9).unwrap() - wn.point(0.4, 0.9).unwrap()).norm() < 1e-12);
    }
}
