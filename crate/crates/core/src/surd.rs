//! Exact arithmetic in `ℚ(√2, √3, √5, …)`: finite sums `Σ q_s √s` with
//! rational `q_s` and distinct square-free positive integers `s`.
//!
//! Square roots of distinct square-free integers are linearly independent
//! over ℚ, so a sum is zero exactly when all its coefficients are.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SurdSum {
    terms: BTreeMap<BigUint, BigRational>,
}

/// Split `n = k² s` with `s` square-free. Trial division up to 10⁶, then
/// a perfect-square test on the cofactor.
fn square_free(n: &BigUint) -> (BigUint, BigUint) {
    let mut rest = n.clone();
    let mut k = BigUint::one();
    let mut s = BigUint::one();
    let mut p: u64 = 2;
    while p <= 1_000_000 {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            k *= pb.pow(e / 2);
            if e % 2 == 1 {
                s *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        k *= r;
    } else {
        s *= rest;
    }
    (k, s)
}

impl SurdSum {
    pub fn zero() -> Self {
        SurdSum::default()
    }

    pub fn rational(q: BigRational) -> Self {
        let mut t = BTreeMap::new();
        if !q.is_zero() {
            t.insert(BigUint::one(), q);
        }
        SurdSum { terms: t }
    }

    pub fn int(n: i64) -> Self {
        SurdSum::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Self {
        SurdSum::rational(BigRational::from_float(x).expect("finite input"))
    }

    /// `√q` for a non-negative rational `q`.
    pub fn sqrt_rational(q: &BigRational) -> Self {
        assert!(!q.is_negative(), "square root of a negative rational");
        if q.is_zero() {
            return SurdSum::zero();
        }
        // √(n/d) = √(n d) / d
        let nd = (q.numer() * q.denom()).to_biguint().expect("non-negative");
        let (k, s) = square_free(&nd);
        let coeff = BigRational::new(BigInt::from(k), q.denom().clone());
        let mut t = BTreeMap::new();
        t.insert(s, coeff);
        SurdSum { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Single rational value, if the sum has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    /// Rational multiple of a single square root, as `(q, s)` with value `q√s`.
    pub fn as_single(&self) -> Option<(BigRational, BigUint)> {
        if self.terms.len() == 1 {
            let (s, q) = self.terms.iter().next().unwrap();
            Some((q.clone(), s.clone()))
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(s, q)| {
                let qf = q.to_f64().unwrap_or(f64::NAN);
                if s.is_one() {
                    qf
                } else {
                    qf * s.to_f64().unwrap_or(f64::NAN).sqrt()
                }
            })
            .sum()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return SurdSum::zero();
        }
        SurdSum { terms: self.terms.iter().map(|(s, c)| (s.clone(), c * q)).collect() }
    }

    fn add_term(&mut self, s: BigUint, q: BigRational) {
        let e = self.terms.entry(s).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
}

impl Add for &SurdSum {
    type Output = SurdSum;
    fn add(self, rhs: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        for (s, q) in &rhs.terms {
            out.add_term(s.clone(), q.clone());
        }
        out
    }
}

impl Sub for &SurdSum {
    type Output = SurdSum;
    fn sub(self, rhs: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        for (s, q) in &rhs.terms {
            out.add_term(s.clone(), -q.clone());
        }
        out
    }
}

impl Mul for &SurdSum {
    type Output = SurdSum;
    fn mul(self, rhs: &SurdSum) -> SurdSum {
        let mut out = SurdSum::zero();
        for (s, p) in &self.terms {
            for (t, q) in &rhs.terms {
                // √s √t = g √((s/g)(t/g)) with g = gcd(s, t)
                let g = s.gcd(t);
                let r = (s / &g) * (t / &g);
                let c = p * q * BigRational::from_integer(BigInt::from(g));
                out.add_term(r, c);
            }
        }
        out
    }
}

impl Neg for &SurdSum {
    type Output = SurdSum;
    fn neg(self) -> SurdSum {
        SurdSum { terms: self.terms.iter().map(|(s, q)| (s.clone(), -q.clone())).collect() }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for SurdSum {
            type Output = SurdSum;
            fn $m(self, rhs: SurdSum) -> SurdSum {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for SurdSum {
    type Output = SurdSum;
    fn neg(self) -> SurdSum {
        -&self
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (s, q)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if s.is_one() {
                write!(f, "{q}")?;
            } else {
                write!(f, "({q})√{s}")?;
            }
        }
        Ok(())
    }
}

/// Rational `p/q` with small integers.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
