//! Holomorphic functions of one complex variable as expression trees.
//!
//! An [`AnalyticExpr`] is an immutable tree over constants, variables,
//! arithmetic, integer and rational powers, `exp` and `sqrt`. Evaluation
//! returns a [`Jet`] (value and first complex derivative) by forward-mode
//! differentiation; [`AnalyticExpr::differentiate`] builds the symbolic
//! derivative tree.
//!
//! Rational powers and square roots carry a [`Branch`] tag. `Principal`
//! uses the argument in `(-π, π]`. `Tracked` nodes pick their branch by
//! continuity along an evaluation path that starts on the principal branch
//! at the path's first point (see [`AnalyticExpr::eval_along`]).
//!
//! Text grammar (also emitted by the [`Display`](std::fmt::Display) impl):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' exponent)?
//! exponent := INT | '(' ['-'] INT ['/' INT] ')'      principal branch
//!           | '{' ['-'] INT '/' INT '}'               tracked branch
//! atom   := NUMBER | 'i' | 'pi' | VARIABLE | BINDING
//!         | ('exp' | 'sqrt' | 'tsqrt') '(' expr ')' | '(' expr ')'
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::ops;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum distance of a rational-power radicand from zero.
pub const BRANCH_POINT_TOL: f64 = 1e-8;

/// Largest argument jump of a tracked radicand accepted between two
/// consecutive path points before the step is subdivided.
const MAX_ARG_JUMP: f64 = PI / 4.0;

const MAX_PATH_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at {pos} is not a rational number")]
    ExponentNotRational { pos: usize },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("pole at {at}")]
    Pole { at: C64 },
    #[error("branch point at {at}")]
    BranchPoint { at: C64 },
    #[error("expression has tracked branches; an evaluation path is required")]
    MissingBranchPath,
    #[error("non-finite value at {at}")]
    NonFinite { at: C64 },
}

pub type Result<T, E = AnalyticError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Principal,
    Tracked,
}

/// Value and first complex derivative of an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub derivative: C64,
}

/// Reduced rational exponent `num/den` with `den > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticExpr {
    Const(C64),
    /// Variable by index; index 0 is the holomorphic variable `z`.
    Var(usize),
    Add(Box<AnalyticExpr>, Box<AnalyticExpr>),
    Sub(Box<AnalyticExpr>, Box<AnalyticExpr>),
    Mul(Box<AnalyticExpr>, Box<AnalyticExpr>),
    Div(Box<AnalyticExpr>, Box<AnalyticExpr>),
    Neg(Box<AnalyticExpr>),
    Powi(Box<AnalyticExpr>, i32),
    Powq(Box<AnalyticExpr>, Ratio, Branch),
    Exp(Box<AnalyticExpr>),
    Sqrt(Box<AnalyticExpr>, Branch),
}

use AnalyticExpr as E;

fn principal_arg(c: C64) -> f64 {
    let a = c.im.atan2(c.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

fn wrap_angle(mut a: f64) -> f64 {
    a -= 2.0 * PI * (a / (2.0 * PI)).round();
    a
}

// ----------------------------------------------------------------------
// construction

impl AnalyticExpr {
    pub fn constant(c: impl Into<C64>) -> Self {
        E::Const(c.into())
    }

    pub fn real(x: f64) -> Self {
        E::Const(C64::new(x, 0.0))
    }

    /// The holomorphic variable `z`.
    pub fn z() -> Self {
        E::Var(0)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => E::real(1.0),
            1 => self,
            _ => E::Powi(Box::new(self), n),
        }
    }

    /// `self^(num/den)`; reduces to an integer power when `den` divides `num`.
    pub fn powq(self, num: i64, den: i64, branch: Branch) -> Self {
        assert!(den != 0, "zero denominator in rational exponent");
        let g = num_integer::gcd(num, den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if d == 1 {
            self.powi(n as i32)
        } else if n == 1 && d == 2 {
            E::Sqrt(Box::new(self), branch)
        } else {
            E::Powq(Box::new(self), Ratio { num: n, den: d }, branch)
        }
    }

    pub fn exp(self) -> Self {
        E::Exp(Box::new(self))
    }

    pub fn sqrt(self, branch: Branch) -> Self {
        E::Sqrt(Box::new(self), branch)
    }

    /// Polynomial `Σ coeffs[k] z^k`, dropping exact zeros.
    pub fn polynomial(coeffs: &[C64]) -> Self {
        let mut acc: Option<AnalyticExpr> = None;
        for (k, &c) in coeffs.iter().enumerate() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let term = if k == 0 {
                E::Const(c)
            } else if c == C64::new(1.0, 0.0) {
                E::z().powi(k as i32)
            } else {
                E::Const(c) * E::z().powi(k as i32)
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or(E::real(0.0))
    }

    /// Monomial `c z^k`.
    pub fn monomial(c: C64, k: i32) -> Self {
        if k == 0 {
            E::Const(c)
        } else if c == C64::new(1.0, 0.0) {
            E::z().powi(k)
        } else {
            E::Const(c) * E::z().powi(k)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $var:ident) => {
        impl ops::$tr for AnalyticExpr {
            type Output = AnalyticExpr;
            fn $m(self, rhs: AnalyticExpr) -> AnalyticExpr {
                E::$var(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for AnalyticExpr {
    type Output = AnalyticExpr;
    fn neg(self) -> AnalyticExpr {
        E::Neg(Box::new(self))
    }
}

// ----------------------------------------------------------------------
// structural queries

impl AnalyticExpr {
    fn children(&self) -> Vec<&AnalyticExpr> {
        match self {
            E::Const(_) | E::Var(_) => vec![],
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => vec![a, b],
            E::Neg(a) | E::Powi(a, _) | E::Powq(a, _, _) | E::Exp(a) | E::Sqrt(a, _) => vec![a],
        }
    }

    pub fn has_tracked(&self) -> bool {
        matches!(self, E::Powq(_, _, Branch::Tracked) | E::Sqrt(_, Branch::Tracked))
            || self.children().iter().any(|c| c.has_tracked())
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            E::Var(k) => Some(*k),
            _ => self.children().iter().filter_map(|c| c.max_var()).max(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    /// Replace every tracked branch tag with `Principal`.
    pub fn to_principal(&self) -> Self {
        self.map_branch(Branch::Principal)
    }

    pub fn map_branch(&self, b: Branch) -> Self {
        let bx = |e: &AnalyticExpr| Box::new(e.map_branch(b));
        match self {
            E::Const(_) | E::Var(_) => self.clone(),
            E::Add(x, y) => E::Add(bx(x), bx(y)),
            E::Sub(x, y) => E::Sub(bx(x), bx(y)),
            E::Mul(x, y) => E::Mul(bx(x), bx(y)),
            E::Div(x, y) => E::Div(bx(x), bx(y)),
            E::Neg(x) => E::Neg(bx(x)),
            E::Powi(x, n) => E::Powi(bx(x), *n),
            E::Powq(x, r, _) => E::Powq(bx(x), *r, b),
            E::Exp(x) => E::Exp(bx(x)),
            E::Sqrt(x, _) => E::Sqrt(bx(x), b),
        }
    }

    /// Substitute `inner` for variable `var` (function composition).
    pub fn substitute(&self, var: usize, inner: &AnalyticExpr) -> Self {
        let s = |e: &AnalyticExpr| Box::new(e.substitute(var, inner));
        match self {
            E::Var(k) if *k == var => inner.clone(),
            E::Const(_) | E::Var(_) => self.clone(),
            E::Add(x, y) => E::Add(s(x), s(y)),
            E::Sub(x, y) => E::Sub(s(x), s(y)),
            E::Mul(x, y) => E::Mul(s(x), s(y)),
            E::Div(x, y) => E::Div(s(x), s(y)),
            E::Neg(x) => E::Neg(s(x)),
            E::Powi(x, n) => E::Powi(s(x), *n),
            E::Powq(x, r, b) => E::Powq(s(x), *r, *b),
            E::Exp(x) => E::Exp(s(x)),
            E::Sqrt(x, b) => E::Sqrt(s(x), *b),
        }
    }

    /// `outer ∘ inner` in the holomorphic variable.
    pub fn compose(&self, inner: &AnalyticExpr) -> Self {
        self.substitute(0, inner)
    }

    /// Coefficients in `z` when the expression is a polynomial in `z`
    /// (constants, sums, products, non-negative integer powers, division
    /// by constants). Index `k` holds the coefficient of `z^k`.
    pub fn as_polynomial(&self) -> Option<Vec<C64>> {
        fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        fn add(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
            let n = a.len().max(b.len());
            (0..n)
                .map(|k| {
                    a.get(k).copied().unwrap_or_default() + sign * b.get(k).copied().unwrap_or_default()
                })
                .collect()
        }
        match self {
            E::Const(c) => Some(vec![*c]),
            E::Var(0) => Some(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            E::Var(_) => None,
            E::Add(a, b) => Some(add(&a.as_polynomial()?, &b.as_polynomial()?, 1.0)),
            E::Sub(a, b) => Some(add(&a.as_polynomial()?, &b.as_polynomial()?, -1.0)),
            E::Mul(a, b) => Some(mul(&a.as_polynomial()?, &b.as_polynomial()?)),
            E::Div(a, b) => {
                let d = b.as_polynomial()?;
                if d.iter().skip(1).any(|c| c.norm() != 0.0) || d[0].norm() == 0.0 {
                    return None;
                }
                Some(a.as_polynomial()?.iter().map(|c| c / d[0]).collect())
            }
            E::Neg(a) => Some(a.as_polynomial()?.iter().map(|c| -c).collect()),
            E::Powi(a, n) if *n >= 0 => {
                let base = a.as_polynomial()?;
                let mut acc = vec![C64::new(1.0, 0.0)];
                for _ in 0..*n {
                    acc = mul(&acc, &base);
                }
                Some(acc)
            }
            E::Exp(a) | E::Sqrt(a, _) | E::Powq(a, _, _) if a.is_constant() => {
                Some(vec![self.eval_values(&[]).ok()?])
            }
            _ => None,
        }
    }
}

// ----------------------------------------------------------------------
// symbolic differentiation

fn is_zero(e: &AnalyticExpr) -> bool {
    matches!(e, E::Const(c) if *c == C64::new(0.0, 0.0))
}

fn is_one(e: &AnalyticExpr) -> bool {
    matches!(e, E::Const(c) if *c == C64::new(1.0, 0.0))
}

fn s_add(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr {
    match (&a, &b) {
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        (E::Const(x), E::Const(y)) => E::Const(x + y),
        _ => a + b,
    }
}

fn s_sub(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr {
    match (&a, &b) {
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => s_neg(b),
        (E::Const(x), E::Const(y)) => E::Const(x - y),
        _ => a - b,
    }
}

fn s_mul(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr {
    match (&a, &b) {
        _ if is_zero(&a) || is_zero(&b) => E::real(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        (E::Const(x), E::Const(y)) => E::Const(x * y),
        _ => a * b,
    }
}

fn s_div(a: AnalyticExpr, b: AnalyticExpr) -> AnalyticExpr {
    match (&a, &b) {
        _ if is_zero(&a) => E::real(0.0),
        _ if is_one(&b) => a,
        (E::Const(x), E::Const(y)) if y.norm() != 0.0 => E::Const(x / y),
        _ => a / b,
    }
}

fn s_neg(a: AnalyticExpr) -> AnalyticExpr {
    match a {
        E::Const(c) => E::Const(-c),
        E::Neg(x) => *x,
        _ => -a,
    }
}

impl AnalyticExpr {
    /// Symbolic complex derivative with respect to `z`.
    pub fn differentiate(&self) -> Self {
        self.partial(0)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Self {
        match self {
            E::Const(_) => E::real(0.0),
            E::Var(k) => E::real(if *k == var { 1.0 } else { 0.0 }),
            E::Add(a, b) => s_add(a.partial(var), b.partial(var)),
            E::Sub(a, b) => s_sub(a.partial(var), b.partial(var)),
            E::Mul(a, b) => s_add(
                s_mul(a.partial(var), (**b).clone()),
                s_mul((**a).clone(), b.partial(var)),
            ),
            E::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = s_sub(
                    s_mul(a.partial(var), (**b).clone()),
                    s_mul((**a).clone(), b.partial(var)),
                );
                s_div(num, (**b).clone().powi(2))
            }
            E::Neg(a) => s_neg(a.partial(var)),
            E::Powi(a, n) => {
                let da = a.partial(var);
                if is_zero(&da) {
                    return E::real(0.0);
                }
                s_mul(s_mul(E::real(*n as f64), (**a).clone().powi(n - 1)), da)
            }
            E::Powq(a, r, b) => {
                let da = a.partial(var);
                if is_zero(&da) {
                    return E::real(0.0);
                }
                let lowered = (**a).clone().powq(r.num - r.den, r.den, *b);
                s_mul(s_mul(E::real(r.as_f64()), lowered), da)
            }
            E::Exp(a) => s_mul(self.clone(), a.partial(var)),
            E::Sqrt(a, _) => {
                let da = a.partial(var);
                if is_zero(&da) {
                    return E::real(0.0);
                }
                s_div(da, s_mul(E::real(2.0), self.clone()))
            }
        }
    }
}

// ----------------------------------------------------------------------
// evaluation

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Tracked nodes are an error.
    Plain,
    /// First path point: tracked nodes start on the principal branch.
    Init,
    /// Continue tracked nodes from stored unwrapped arguments.
    Track,
}

struct BranchState {
    mode: Mode,
    /// Unwrapped radicand arguments, one per tracked node in traversal order.
    args: Vec<f64>,
    next: Vec<f64>,
    idx: usize,
    max_jump: f64,
}

impl BranchState {
    fn plain() -> Self {
        BranchState { mode: Mode::Plain, args: vec![], next: vec![], idx: 0, max_jump: 0.0 }
    }

    /// Unwrapped argument for the current tracked radicand.
    fn tracked_arg(&mut self, base: C64) -> Result<f64> {
        let a = principal_arg(base);
        let out = match self.mode {
            Mode::Plain => return Err(AnalyticError::MissingBranchPath),
            Mode::Init => a,
            Mode::Track => {
                let prev = self.args[self.idx];
                let delta = wrap_angle(a - prev);
                self.max_jump = self.max_jump.max(delta.abs());
                prev + delta
            }
        };
        self.next.push(out);
        self.idx += 1;
        Ok(out)
    }
}

type Dual = (C64, C64);

impl AnalyticExpr {
    fn eval_dual(&self, x: &[C64], dx: &[C64], st: &mut BranchState) -> Result<Dual> {
        let zero = C64::new(0.0, 0.0);
        let at = x.first().copied().unwrap_or(zero);
        let out = match self {
            E::Const(c) => (*c, zero),
            E::Var(k) => (
                *x.get(*k).expect("variable index out of range"),
                dx.get(*k).copied().unwrap_or(zero),
            ),
            E::Add(a, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let (v, dv) = b.eval_dual(x, dx, st)?;
                (u + v, du + dv)
            }
            E::Sub(a, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let (v, dv) = b.eval_dual(x, dx, st)?;
                (u - v, du - dv)
            }
            E::Mul(a, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let (v, dv) = b.eval_dual(x, dx, st)?;
                (u * v, du * v + u * dv)
            }
            E::Div(a, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let (v, dv) = b.eval_dual(x, dx, st)?;
                if v.norm() == 0.0 {
                    return Err(AnalyticError::Pole { at });
                }
                let q = u / v;
                (q, (du - q * dv) / v)
            }
            E::Neg(a) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                (-u, -du)
            }
            E::Powi(a, n) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                if *n < 0 && u.norm() == 0.0 {
                    return Err(AnalyticError::Pole { at });
                }
                let v = u.powi(*n);
                let d = if *n == 0 { zero } else { du * (*n as f64) * u.powi(n - 1) };
                (v, d)
            }
            E::Exp(a) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let v = u.exp();
                (v, v * du)
            }
            E::Powq(a, r, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let p = r.as_f64();
                let v = frac_pow(u, p, *b, st, at)?;
                (v, p * v / u * du)
            }
            E::Sqrt(a, b) => {
                let (u, du) = a.eval_dual(x, dx, st)?;
                let v = frac_pow(u, 0.5, *b, st, at)?;
                (v, du / (2.0 * v))
            }
        };
        if !(out.0.re.is_finite() && out.0.im.is_finite()) {
            return Err(AnalyticError::NonFinite { at });
        }
        Ok(out)
    }

    /// Value and derivative at `z`, all branches principal.
    ///
    /// Fails with [`AnalyticError::MissingBranchPath`] if the expression
    /// has tracked branch nodes.
    pub fn eval(&self, z: C64) -> Result<Jet> {
        let mut st = BranchState::plain();
        let (value, derivative) = self.eval_dual(&[z], &[C64::new(1.0, 0.0)], &mut st)?;
        Ok(Jet { value, derivative })
    }

    /// Value only, at a point of several variables.
    pub fn eval_values(&self, x: &[C64]) -> Result<C64> {
        let mut st = BranchState::plain();
        Ok(self.eval_dual(x, &[], &mut st)?.0)
    }

    /// Value and directional derivative along `seed` at a point of several
    /// variables.
    pub fn eval_directional(&self, x: &[C64], seed: &[C64]) -> Result<Dual> {
        let mut st = BranchState::plain();
        self.eval_dual(x, seed, &mut st)
    }

    /// Evaluate at the last point of `path`, resolving tracked branches by
    /// continuity from the principal branch at `path[0]`. Segments between
    /// path points are subdivided until every tracked radicand turns by
    /// less than π/4 per step.
    pub fn eval_along(&self, path: &[C64]) -> Result<Jet> {
        assert!(!path.is_empty(), "empty evaluation path");
        if !self.has_tracked() {
            return self.eval(*path.last().unwrap());
        }
        let one = [C64::new(1.0, 0.0)];
        let mut st = BranchState { mode: Mode::Init, args: vec![], next: vec![], idx: 0, max_jump: 0.0 };
        let mut jet = self.eval_dual(&[path[0]], &one, &mut st)?;
        st.args = std::mem::take(&mut st.next);
        st.mode = Mode::Track;
        for w in path.windows(2) {
            jet = self.advance(w[0], w[1], &mut st, 0)?;
        }
        Ok(Jet { value: jet.0, derivative: jet.1 })
    }

    /// Evaluate at `z` along the straight segment from `anchor`.
    pub fn eval_from(&self, anchor: C64, z: C64) -> Result<Jet> {
        self.eval_along(&[anchor, z])
    }

    fn advance(&self, from: C64, to: C64, st: &mut BranchState, depth: u32) -> Result<Dual> {
        let one = [C64::new(1.0, 0.0)];
        st.idx = 0;
        st.max_jump = 0.0;
        st.next.clear();
        let trial = self.eval_dual(&[to], &one, st)?;
        if st.max_jump <= MAX_ARG_JUMP {
            st.args = std::mem::take(&mut st.next);
            return Ok(trial);
        }
        if depth >= MAX_PATH_DEPTH {
            return Err(AnalyticError::BranchPoint { at: to });
        }
        let mid = 0.5 * (from + to);
        self.advance(from, mid, st, depth + 1)?;
        self.advance(mid, to, st, depth + 1)
    }
}

fn frac_pow(u: C64, p: f64, b: Branch, st: &mut BranchState, at: C64) -> Result<C64> {
    let r = u.norm();
    if r < BRANCH_POINT_TOL {
        return Err(AnalyticError::BranchPoint { at });
    }
    let arg = match b {
        Branch::Principal => principal_arg(u),
        Branch::Tracked => st.tracked_arg(u)?,
    };
    Ok(C64::from_polar(r.powf(p), p * arg))
}

// ----------------------------------------------------------------------
// printing

fn fmt_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn fmt_const(c: C64) -> String {
    let (re, im) = (c.re, c.im);
    let imag = |v: f64| {
        if v == 1.0 {
            "i".to_string()
        } else {
            format!("{}*i", fmt_real(v))
        }
    };
    if im == 0.0 {
        fmt_real(re)
    } else if re == 0.0 {
        if im < 0.0 {
            format!("-{}", imag(-im))
        } else {
            imag(im)
        }
    } else if im < 0.0 {
        format!("{}-{}", fmt_real(re), imag(-im))
    } else {
        format!("{}+{}", fmt_real(re), imag(im))
    }
}

impl AnalyticExpr {
    fn precedence(&self) -> u8 {
        match self {
            E::Add(..) | E::Sub(..) => 1,
            E::Mul(..) | E::Div(..) => 2,
            E::Neg(_) => 3,
            E::Powi(..) | E::Powq(..) => 4,
            E::Const(c) => {
                if c.re != 0.0 && c.im != 0.0 {
                    1
                } else if c.re < 0.0 || c.im < 0.0 {
                    3
                } else if c.im != 0.0 && c.im != 1.0 {
                    2
                } else {
                    5
                }
            }
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, names: &[&str], min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_expr(f, names)?;
            write!(f, ")")
        } else {
            self.write_expr(f, names)
        }
    }

    fn write_expr(&self, f: &mut fmt::Formatter<'_>, names: &[&str]) -> fmt::Result {
        match self {
            E::Const(c) => write!(f, "{}", fmt_const(*c)),
            E::Var(k) => write!(f, "{}", names.get(*k).copied().unwrap_or("z")),
            E::Add(a, b) => {
                a.write_prec(f, names, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, names, 2)
            }
            E::Sub(a, b) => {
                a.write_prec(f, names, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, names, 2)
            }
            E::Mul(a, b) => {
                a.write_prec(f, names, 2)?;
                write!(f, "*")?;
                b.write_prec(f, names, 3)
            }
            E::Div(a, b) => {
                a.write_prec(f, names, 2)?;
                write!(f, "/")?;
                b.write_prec(f, names, 3)
            }
            E::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, names, 3)
            }
            E::Powi(a, n) => {
                a.write_prec(f, names, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            E::Powq(a, r, b) => {
                a.write_prec(f, names, 5)?;
                match b {
                    Branch::Principal => write!(f, "^({}/{})", r.num, r.den),
                    Branch::Tracked => write!(f, "^{{{}/{}}}", r.num, r.den),
                }
            }
            E::Exp(a) => {
                write!(f, "exp(")?;
                a.write_expr(f, names)?;
                write!(f, ")")
            }
            E::Sqrt(a, b) => {
                write!(f, "{}(", if *b == Branch::Tracked { "tsqrt" } else { "sqrt" })?;
                a.write_expr(f, names)?;
                write!(f, ")")
            }
        }
    }

    /// Printer with custom variable names (index order).
    pub fn display_with<'a>(&'a self, names: &'a [&'a str]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a AnalyticExpr, &'a [&'a str]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_expr(f, self.1)
            }
        }
        D(self, names)
    }
}

impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_expr(f, &["z"])
    }
}

impl Serialize for AnalyticExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AnalyticExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

// ----------------------------------------------------------------------
// parsing

/// Variable names and constant bindings for [`parse_with`].
#[derive(Debug, Clone, Default)]
pub struct ParseContext<'a> {
    /// Variable names in index order. Empty means `z` (with `w` accepted
    /// as an alias).
    pub vars: &'a [&'a str],
    pub bindings: &'a [(&'a str, C64)],
}

/// Parse a formula in the holomorphic variable `z` (or `w`).
pub fn parse(text: &str) -> Result<AnalyticExpr> {
    parse_with(text, &ParseContext::default())
}

pub fn parse_with(text: &str, ctx: &ParseContext<'_>) -> Result<AnalyticExpr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, ctx };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a ParseContext<'a>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> AnalyticError {
        AnalyticError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<AnalyticExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<AnalyticExpr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.unary()?;
            } else if self.eat(b'/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<AnalyticExpr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(match inner {
                E::Const(c) => E::Const(-c),
                other => -other,
            });
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<AnalyticExpr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let start = self.pos;
        let not_rational = AnalyticError::ExponentNotRational { pos: start };
        let (num, den, branch) = match self.peek() {
            Some(b'(') | Some(b'{') => {
                let open = self.src[self.pos];
                self.pos += 1;
                let close = if open == b'(' { b')' } else { b'}' };
                let num = self.signed_int().ok_or(not_rational.clone())?;
                let den = if self.eat(b'/') { self.signed_int().ok_or(not_rational.clone())? } else { 1 };
                if !self.eat(close) || den == 0 {
                    return Err(not_rational);
                }
                let branch = if open == b'{' { Branch::Tracked } else { Branch::Principal };
                (num, den, branch)
            }
            _ => {
                let n = self.signed_int().ok_or(not_rational)?;
                (n, 1, Branch::Principal)
            }
        };
        Ok(base.powq(num, den, branch))
    }

    /// Integer-valued numeric literal with optional sign.
    fn signed_int(&mut self) -> Option<i64> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let v = self.number_literal()?;
        if v != v.trunc() || v.abs() > 1e15 {
            return None;
        }
        Some(if neg { -(v as i64) } else { v as i64 })
    }

    fn number_literal(&mut self) -> Option<f64> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i == start {
            return None;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).ok()?;
        let v = text.parse::<f64>().ok()?;
        self.pos = i;
        Some(v)
    }

    fn ident(&mut self) -> Option<String> {
        let s = self.src;
        let start = self.pos;
        let mut i = self.pos;
        if i < s.len() && (s[i].is_ascii_alphabetic() || s[i] == b'_') {
            while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
                i += 1;
            }
            self.pos = i;
            Some(String::from_utf8_lossy(&s[start..i]).into_owned())
        } else {
            None
        }
    }

    fn atom(&mut self) -> Result<AnalyticExpr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number_literal().ok_or_else(|| self.err("malformed number"))?;
                Ok(E::real(v))
            }
            Some(_) => {
                let start = self.pos;
                let name = self.ident().ok_or_else(|| self.err("unexpected character"))?;
                match name.as_str() {
                    "exp" | "sqrt" | "tsqrt" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(match name.as_str() {
                            "exp" => arg.exp(),
                            "sqrt" => arg.sqrt(Branch::Principal),
                            _ => arg.sqrt(Branch::Tracked),
                        })
                    }
                    "i" => Ok(E::Const(C64::new(0.0, 1.0))),
                    "pi" => Ok(E::real(PI)),
                    _ => {
                        let vars: &[&str] = if self.ctx.vars.is_empty() { &["z"] } else { self.ctx.vars };
                        if let Some(k) = vars.iter().position(|v| *v == name) {
                            return Ok(E::Var(k));
                        }
                        if self.ctx.vars.is_empty() && name == "w" {
                            return Ok(E::Var(0));
                        }
                        if let Some((_, v)) = self.ctx.bindings.iter().find(|(n, _)| *n == name) {
                            return Ok(E::Const(*v));
                        }
                        Err(AnalyticError::UnknownIdentifier { pos: start, name })
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn parse_variable_and_exp() {
        assert_eq!(parse("z").unwrap(), E::Var(0));
        let e = parse("exp(-z)").unwrap();
        assert!(close(e.eval(c(0.0, 0.0)).unwrap().value, c(1.0, 0.0), 1e-15));
    }

    #[test]
    fn parse_with_bound_parameter() {
        let ctx = ParseContext { vars: &[], bindings: &[("t", c(0.0, 0.0))] };
        let e = parse_with("4*500*exp(-i*t)*z", &ctx).unwrap();
        let j = e.eval(c(0.3, -0.7)).unwrap();
        assert!(close(j.derivative, c(2000.0, 0.0), 1e-14));
        assert!(close(j.value, c(600.0, -1400.0), 1e-14));
    }

    #[test]
    fn square_jet() {
        let j = parse("z^2").unwrap().eval(c(1.0, 1.0)).unwrap();
        assert!(close(j.value, c(0.0, 2.0), 1e-15));
        assert!(close(j.derivative, c(2.0, 2.0), 1e-15));
    }

    #[test]
    fn exp_jet() {
        let j = parse("exp(z)").unwrap().eval(c(0.0, 0.0)).unwrap();
        assert_eq!(j.value, c(1.0, 0.0));
        assert_eq!(j.derivative, c(1.0, 0.0));
    }

    #[test]
    fn fractional_power_at_i() {
        let e = parse("(-w^2)^(1/5)").unwrap();
        let w = c(0.0, 1.0);
        let j = e.eval(w).unwrap();
        assert!(close(j.value, c(1.0, 0.0), 1e-14));
        // central difference along the real direction
        let h = 1e-6;
        let fd = (e.eval(w + h).unwrap().value - e.eval(w - h).unwrap().value) / (2.0 * h);
        assert!((j.derivative - fd).norm() <= 1e-6 * (1.0 + j.derivative.norm()));
        // d/dw (-w^2)^(1/5) = (1/5)(-w^2)^(-4/5) (-2w) = -2i/5 at w = i
        assert!(close(j.derivative, c(0.0, -0.4), 1e-12));
    }

    #[test]
    fn symbolic_derivatives() {
        let d = parse("z^2").unwrap().differentiate();
        assert!(close(d.eval(c(0.5, 2.0)).unwrap().value, c(1.0, 4.0), 1e-15));
        let d = parse("exp(z)").unwrap().differentiate();
        let z = c(0.2, -1.1);
        assert!(close(d.eval(z).unwrap().value, z.exp(), 1e-15));
        let b = c(1.5, -0.5);
        let e = AnalyticExpr::monomial(b, 4);
        let d = e.differentiate();
        assert!(close(d.eval(z).unwrap().value, 4.0 * b * z.powi(3), 1e-14));
    }

    #[test]
    fn exponent_errors() {
        assert!(matches!(parse("z^z"), Err(AnalyticError::ExponentNotRational { .. })));
        assert!(matches!(parse("z^2.5"), Err(AnalyticError::ExponentNotRational { .. })));
        assert!(matches!(parse("z^(1/0)"), Err(AnalyticError::ExponentNotRational { .. })));
        assert!(matches!(parse("z +"), Err(AnalyticError::Syntax { .. })));
        assert!(matches!(parse("q*z"), Err(AnalyticError::UnknownIdentifier { .. })));
        assert!(matches!(parse("2 z"), Err(AnalyticError::Syntax { .. })));
    }

    #[test]
    fn poles_and_branch_points() {
        assert!(matches!(parse("1/z").unwrap().eval(c(0.0, 0.0)), Err(AnalyticError::Pole { .. })));
        assert!(matches!(parse("z^(-2)").unwrap().eval(c(0.0, 0.0)), Err(AnalyticError::Pole { .. })));
        assert!(matches!(
            parse("sqrt(z)").unwrap().eval(c(1e-9, 0.0)),
            Err(AnalyticError::BranchPoint { .. })
        ));
        assert!(matches!(parse("tsqrt(z)").unwrap().eval(c(1.0, 0.0)), Err(AnalyticError::MissingBranchPath)));
    }

    #[test]
    fn tracked_branch_continues_across_cut() {
        let e = parse("tsqrt(z)").unwrap();
        // half a turn from 1 to -1 through the upper half plane lands on i
        let path: Vec<C64> = (0..=8).map(|k| C64::from_polar(1.0, PI * k as f64 / 8.0)).collect();
        let v = e.eval_along(&path).unwrap().value;
        assert!(close(v, c(0.0, 1.0), 1e-12));
        // a full turn around the branch point flips the sign
        let path: Vec<C64> = (0..=16).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 16.0)).collect();
        let v = e.eval_along(&path).unwrap().value;
        assert!(close(v, c(-1.0, 0.0), 1e-12));
        // below the cut the principal value is -i, the tracked one is +i
        let p = parse("sqrt(z)").unwrap();
        let below = c(-1.0, -1e-3);
        assert!(p.eval(below).unwrap().value.im < 0.0);
        let path = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), below];
        assert!(e.eval_along(&path).unwrap().value.im > 0.0);
    }

    #[test]
    fn polynomial_extraction() {
        let e = parse("3*z^2 - (1+i)*z + 2").unwrap();
        let p = e.as_polynomial().unwrap();
        assert_eq!(p.len(), 3);
        assert!(close(p[2], c(3.0, 0.0), 0.0));
        assert!(close(p[1], c(-1.0, -1.0), 0.0));
        assert!(parse("exp(z)").unwrap().as_polynomial().is_none());
        assert!(parse("1/z").unwrap().as_polynomial().is_none());
    }

    #[test]
    fn printer_round_trip_examples() {
        for text in [
            "z",
            "-z^2 + 3",
            "(1+2*i)*z^3 - exp(-z)/(z - 0.5)",
            "(-w^2)^(1/5)",
            "(z+1)^{2/3}*tsqrt(z)",
            "z^(-3)",
            "-(z - 1)*(-2.5e-7*i)",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            assert_eq!(back, e, "{text} -> {printed}");
        }
    }

    #[test]
    fn substitution_composes() {
        let g = parse("z^2 + 1").unwrap();
        let inner = parse("2*z - i").unwrap();
        let h = g.compose(&inner);
        let z = c(0.3, 0.4);
        let expect = (2.0 * z - c(0.0, 1.0)).powi(2) + 1.0;
        assert!(close(h.eval(z).unwrap().value, expect, 1e-14));
    }
}
