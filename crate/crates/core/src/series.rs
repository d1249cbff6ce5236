//! Truncated power series with exact rational coefficients.
//!
//! A [`FormalSeries`] of order `N` stores the coefficients of `g^0 .. g^N`
//! and every operation is exact modulo `g^(N+1)`. Binary operations on
//! series of different orders truncate to the smaller order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FormalSeries {
    coeffs: Vec<Rational>,
}

impl FormalSeries {
    pub fn zero(order: usize) -> Self {
        FormalSeries {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `g` itself.
    pub fn var(order: usize) -> Self {
        Self::monomial(Rational::one(), 1, order)
    }

    pub fn monomial(c: Rational, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    /// Builds a series from coefficients; `order` is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        FormalSeries { coeffs }
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(int).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `g^k`; zero above the truncation order is NOT implied,
    /// so asking for `k > order` panics.
    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, c: Rational) {
        self.coeffs[k] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs: Vec<Rational> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, Rational::zero());
        FormalSeries { coeffs }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplication by `g^k`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        for i in 0..=n.saturating_sub(k) {
            if i + k <= n {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Exact division by `g^k`; the order drops by `k`. Fails unless the
    /// first `k` coefficients vanish.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order() || self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::NotInvertible);
        }
        Ok(FormalSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::NotInvertible);
        }
        let n = self.order();
        // self = f / d with integer f; 1/f has coefficients u_k / c^(k+1), c = f_0
        let (f, d) = self.integer_form(n);
        let c = f[0].clone();
        let mut c_pows = vec![BigInt::one()];
        for i in 1..=n + 1 {
            let next = &c_pows[i - 1] * &c;
            c_pows.push(next);
        }
        let mut u: Vec<BigInt> = Vec::with_capacity(n + 1);
        u.push(BigInt::one());
        for k in 1..=n {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                if !f[i].is_zero() {
                    acc += &f[i] * &u[k - i] * &c_pows[i - 1];
                }
            }
            u.push(-acc);
        }
        let coeffs = u.into_iter().enumerate().map(|(k, uk)| Rational::new(uk * &d, c_pows[k + 1].clone())).collect();
        Ok(FormalSeries { coeffs })
    }

    /// Integer numerators and common denominator of the first `n + 1` coefficients.
    fn integer_form(&self, n: usize) -> (Vec<BigInt>, BigInt) {
        let d = self.coeffs[..=n].iter().fold(BigInt::one(), |acc, q| num::integer::lcm(acc, q.denom().clone()));
        let f = self.coeffs[..=n].iter().map(|q| q.numer() * (&d / q.denom())).collect();
        (f, d)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inverse()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Substitutes a series with zero constant term for the variable.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::InvalidArgument(
                "composition needs an inner series with zero constant term".into(),
            ));
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut out = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            out = &(&out * &inner) + &Self::constant(self.coeffs[k].clone(), n);
        }
        Ok(out)
    }

    /// Floating-point evaluation of the truncated polynomial.
    pub fn eval_f64(&self, g: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * g + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Coefficients as integers, if they all are.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { Some(c.to_integer()) } else { None })
            .collect()
    }

    /// First index where two series differ, comparing up to the smaller order.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let n = self.order().min(other.order());
        (0..=n).find(|&k| self.coeffs[k] != other.coeffs[k])
    }
}

impl fmt::Debug for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "({})g", c)?,
                _ => write!(f, "({})g^{}", c, k)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(g^{})", self.order() + 1)
    }
}

impl<'a> Add<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;

    fn add(self, rhs: &'a FormalSeries) -> FormalSeries {
        let n = self.order().min(rhs.order());
        FormalSeries {
            coeffs: (0..=n).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Sub<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;

    fn sub(self, rhs: &'a FormalSeries) -> FormalSeries {
        let n = self.order().min(rhs.order());
        FormalSeries {
            coeffs: (0..=n).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Mul<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;

    fn mul(self, rhs: &'a FormalSeries) -> FormalSeries {
        // integer convolution over common denominators, one reduction per coefficient
        let n = self.order().min(rhs.order());
        let (a, da) = self.integer_form(n);
        let (b, db) = rhs.integer_form(n);
        let mut out = vec![BigInt::zero(); n + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().take(n + 1 - i).enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        let den = da * db;
        let coeffs = out.into_iter().map(|c| Rational::new(c, den.clone())).collect();
        FormalSeries { coeffs }
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;

    fn neg(self) -> FormalSeries {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FormalSeries> for FormalSeries {
            type Output = FormalSeries;
            fn $m(self, rhs: FormalSeries) -> FormalSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs: Vec<String>,
}

impl Serialize for FormalSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            order: self.order(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| format!("{}/{}", c.numer(), c.denom()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SeriesRepr::deserialize(d)?;
        if repr.coeffs.len() != repr.order + 1 {
            return Err(D::Error::custom("coefficient count must be order + 1"));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(FormalSeries { coeffs })
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_series(order: usize) -> impl Strategy<Value = FormalSeries> {
        prop::collection::vec((-20i64..20, 1i64..6), order + 1)
            .prop_map(|v| FormalSeries::from_coeffs(v.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    #[test]
    fn geometric_series_inverse() {
        let one_minus_g = &FormalSeries::one(6) - &FormalSeries::var(6);
        let inv = one_minus_g.inverse().unwrap();
        assert_eq!(inv, FormalSeries::from_integers([1, 1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn zero_constant_term_is_not_invertible() {
        assert!(matches!(FormalSeries::var(3).inverse(), Err(Error::NotInvertible)));
    }

    #[test]
    fn pow_and_shift() {
        let s = &FormalSeries::one(5) + &FormalSeries::var(5);
        assert_eq!(s.pow(3), FormalSeries::from_integers([1, 3, 3, 1, 0, 0]));
        assert_eq!(s.shift(2), FormalSeries::from_integers([0, 0, 1, 1, 0, 0]));
    }

    #[test]
    fn compose_with_geometric() {
        // 1/(1-y) with y = g/(1-g) gives (1-g)/(1-2g)
        let one = FormalSeries::one(6);
        let g = FormalSeries::var(6);
        let y = g.div(&(&one - &g)).unwrap();
        let outer = FormalSeries::from_integers([1; 7]);
        let got = outer.compose(&y).unwrap();
        let want = (&one - &g).div(&(&one - &g.scale(&int(2)))).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn json_shape() {
        let s = FormalSeries::from_coeffs(vec![rat(1, 2), int(-3)]);
        let js = serde_json::to_value(&s).unwrap();
        assert_eq!(js, serde_json::json!({"order": 1, "coeffs": ["1/2", "-3/1"]}));
        let back: FormalSeries = serde_json::from_value(js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FormalSeries>(r#"{"order":2,"coeffs":["1"]}"#).is_err());
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_series(5), b in arb_series(5), c in arb_series(5)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn inverse_is_two_sided(a in arb_series(6)) {
            prop_assume!(!a.coeff(0).is_zero());
            let inv = a.inverse().unwrap();
            prop_assert_eq!(&a * &inv, FormalSeries::one(6));
        }

        #[test]
        fn json_roundtrip(a in arb_series(4)) {
            let text = serde_json::to_string(&a).unwrap();
            let back: FormalSeries = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
