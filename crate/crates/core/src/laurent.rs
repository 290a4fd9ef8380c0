//! Exact scalars: Laurent polynomials in `v` over the rationals, balanced
//! quantum combinatorics, and the quadratic ring `Q[sqrt(q)]` that receives
//! the specialization `v -> ±sqrt(q)^{±1}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaurentError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("division is not exact: remainder {remainder}")]
    InexactDivision { remainder: String },
    #[error("cannot parse Laurent polynomial from {0:?}")]
    Parse(String),
}

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Finitely supported map from exponents of `v` to nonzero rationals.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Rational::one(), 0)
    }

    /// `c * v^e`.
    pub fn monomial(c: Rational, e: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn v_pow(e: i64) -> Self {
        Self::monomial(Rational::one(), e)
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(rational(n))
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Rational {
        self.coeffs.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Rational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add_term(&mut self, e: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    /// Multiplication by `v^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// The bar involution `v -> v^{-1}`.
    pub fn bar(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division; fails when the divisor does not divide `self`.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        let (dlo, dhi) = match (divisor.min_exponent(), divisor.max_exponent()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(LaurentError::DivisionByZero),
        };
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let lead = divisor.coeff(dhi);
        let mut rem = self.clone();
        let mut quot = Self::zero();
        let floor = self.min_exponent().unwrap() - dlo;
        while let Some(top) = rem.max_exponent() {
            let shift = top - dhi;
            if shift < floor {
                break;
            }
            let c = rem.coeff(top) / &lead;
            let term = divisor.shift(shift).scale(&c);
            rem -= &term;
            quot.add_term(shift, c);
        }
        if rem.is_zero() {
            Ok(quot)
        } else {
            Err(LaurentError::InexactDivision {
                remainder: rem.to_string(),
            })
        }
    }

    /// Substitutes `v = sign * sqrt(q)`.
    pub fn evaluate_at_sqrt_q(&self, q: u64, sign: Sign) -> SqrtQScalar {
        let mut even = Rational::zero();
        let mut odd = Rational::zero();
        let qr = Rational::from_integer(BigInt::from(q));
        for (e, c) in self.terms() {
            // v^e = sign^e * q^{floor(e/2)} * sqrt(q)^{e mod 2}
            let half = e.div_euclid(2);
            let mut term = c * pow_rational(&qr, half);
            if sign == Sign::Minus && e.rem_euclid(2) == 1 {
                term = -term;
            }
            if e.rem_euclid(2) == 0 {
                even += term;
            } else {
                odd += term;
            }
        }
        SqrtQScalar::new(even, odd, q)
    }
}

fn pow_rational(base: &Rational, e: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= base;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

/// `c*v^e` terms, exponents descending, joined by ` + `; zero renders as `0`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*v^{e}")?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = LaurentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let err = || LaurentError::Parse(s.to_string());
        let mut p = Self::zero();
        for term in s.split(" + ") {
            let (c, e) = term.trim().split_once("*v^").ok_or_else(err)?;
            let c: Rational = c.parse().map_err(|_| err())?;
            let e: i64 = e.parse().map_err(|_| err())?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, c.clone());
        }
    }
}

impl SubAssign<&LaurentPoly> for LaurentPoly {
    fn sub_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, -c.clone());
        }
    }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident, $t:ty) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $method(self, rhs: $t) -> $t {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add, LaurentPoly);
forward_owned!(Sub, sub, LaurentPoly);
forward_owned!(Mul, mul, LaurentPoly);

/// Balanced quantum integer `[m]_v = v^{m-1} + v^{m-3} + ... + v^{1-m}`.
pub fn quantum_integer(m: u32) -> LaurentPoly {
    let m = i64::from(m);
    LaurentPoly::from_terms((0..m).map(|k| (m - 1 - 2 * k, Rational::one())))
}

pub fn quantum_factorial(m: u32) -> LaurentPoly {
    (1..=m).fold(LaurentPoly::one(), |acc, l| &acc * &quantum_integer(l))
}

/// `[m]! / ([t]! [m-t]!)`, zero when `t` lies outside `0..=m`.
pub fn quantum_binomial(m: u32, t: i64) -> LaurentPoly {
    if t < 0 || t > i64::from(m) {
        return LaurentPoly::zero();
    }
    let t = t as u32;
    let den = &quantum_factorial(t) * &quantum_factorial(m - t);
    quantum_factorial(m)
        .div_exact(&den)
        .expect("quantum factorial quotient must be exact")
}

pub fn bar_involution(f: &LaurentPoly) -> LaurentPoly {
    f.bar()
}

/// Dense polynomial in `q` with integer coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, q: i64) -> BigInt {
        let q = BigInt::from(q);
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * &q + c)
    }

    /// Reads this polynomial as a Laurent polynomial with `q = v^2`.
    pub fn to_laurent_in_v_squared(&self) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (2 * k as i64, Rational::from_integer(c.clone()))),
        )
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*q"),
                _ => format!("{c}*q^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Number of `m`-dimensional subspaces of `F_q^d`, as a polynomial in `q`.
pub fn gaussian_binomial_q(d: u32, m: u32) -> QPoly {
    // q-Pascal: G(d, m) = G(d-1, m-1) + q^m G(d-1, m)
    let d = d as usize;
    let m = m as usize;
    if m > d {
        return QPoly::default();
    }
    let mut rows: Vec<Vec<Vec<BigInt>>> = vec![vec![vec![BigInt::one()]]];
    for n in 1..=d {
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut c: Vec<BigInt> = Vec::new();
            if k >= 1 {
                add_into(&mut c, &rows[n - 1][k - 1], 0);
            }
            if k < n {
                add_into(&mut c, &rows[n - 1][k], k);
            }
            row.push(c);
        }
        rows.push(row);
    }
    QPoly::from_coeffs(rows[d][m].clone())
}

fn add_into(acc: &mut Vec<BigInt>, src: &[BigInt], shift: usize) {
    if acc.len() < src.len() + shift {
        acc.resize(src.len() + shift, BigInt::zero());
    }
    for (k, c) in src.iter().enumerate() {
        acc[k + shift] += c;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// `even + odd * sqrt(q)` for a prime `q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SqrtQScalar {
    pub even: Rational,
    pub odd: Rational,
    pub q: u64,
}

impl SqrtQScalar {
    pub fn new(even: Rational, odd: Rational, q: u64) -> Self {
        Self { even, odd, q }
    }

    pub fn zero(q: u64) -> Self {
        Self::new(Rational::zero(), Rational::zero(), q)
    }

    pub fn one(q: u64) -> Self {
        Self::from_rational(Rational::one(), q)
    }

    pub fn from_rational(r: Rational, q: u64) -> Self {
        Self::new(r, Rational::zero(), q)
    }

    pub fn sqrt_q(q: u64) -> Self {
        Self::new(Rational::zero(), Rational::one(), q)
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.q, other.q, "SqrtQScalar values over different q");
    }

    pub fn norm(&self) -> Rational {
        let q = Rational::from_integer(BigInt::from(self.q));
        &self.even * &self.even - q * &self.odd * &self.odd
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // q is prime, so the norm vanishes only at zero.
        let n = self.norm();
        Some(Self::new(&self.even / &n, -&self.odd / &n, self.q))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(self.q);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    /// Returns `Some(r)` when the value is the rational `r`.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.odd.is_zero().then_some(&self.even)
    }

    /// If the value is `±q^{k/2}`, returns `(sign, k)`.
    pub fn as_signed_sqrt_power(&self) -> Option<(Sign, i64)> {
        let (value, odd_part) = if self.odd.is_zero() {
            (self.even.clone(), false)
        } else if self.even.is_zero() {
            (self.odd.clone(), true)
        } else {
            return None;
        };
        let sign = if value.is_negative() { Sign::Minus } else { Sign::Plus };
        let mut value = value.abs();
        let q = Rational::from_integer(BigInt::from(self.q));
        let mut k: i64 = 0;
        if value.is_zero() {
            return None;
        }
        while value > Rational::one() {
            value /= &q;
            k += 1;
        }
        while value < Rational::one() {
            value *= &q;
            k -= 1;
        }
        if !value.is_one() {
            return None;
        }
        Some((sign, 2 * k + i64::from(odd_part)))
    }
}

impl fmt::Debug for SqrtQScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SqrtQScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd.is_zero() {
            write!(f, "{}", self.even)
        } else {
            write!(f, "{} + {}*sqrt({})", self.even, self.odd, self.q)
        }
    }
}

impl Add<&SqrtQScalar> for &SqrtQScalar {
    type Output = SqrtQScalar;
    fn add(self, rhs: &SqrtQScalar) -> SqrtQScalar {
        self.check(rhs);
        SqrtQScalar::new(&self.even + &rhs.even, &self.odd + &rhs.odd, self.q)
    }
}

impl Sub<&SqrtQScalar> for &SqrtQScalar {
    type Output = SqrtQScalar;
    fn sub(self, rhs: &SqrtQScalar) -> SqrtQScalar {
        self.check(rhs);
        SqrtQScalar::new(&self.even - &rhs.even, &self.odd - &rhs.odd, self.q)
    }
}

impl Mul<&SqrtQScalar> for &SqrtQScalar {
    type Output = SqrtQScalar;
    fn mul(self, rhs: &SqrtQScalar) -> SqrtQScalar {
        self.check(rhs);
        let q = Rational::from_integer(BigInt::from(self.q));
        SqrtQScalar::new(
            &self.even * &rhs.even + q * &self.odd * &rhs.odd,
            &self.even * &rhs.odd + &self.odd * &rhs.even,
            self.q,
        )
    }
}

impl Neg for &SqrtQScalar {
    type Output = SqrtQScalar;
    fn neg(self) -> SqrtQScalar {
        SqrtQScalar::new(-&self.even, -&self.odd, self.q)
    }
}

impl AddAssign<&SqrtQScalar> for SqrtQScalar {
    fn add_assign(&mut self, rhs: &SqrtQScalar) {
        *self = &*self + rhs;
    }
}

forward_owned!(Add, add, SqrtQScalar);
forward_owned!(Sub, sub, SqrtQScalar);
forward_owned!(Mul, mul, SqrtQScalar);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|&(e, c)| (e, rational(c))))
    }

    #[test]
    fn quantum_integers_match_division_oracle() {
        let denom = lp(&[(1, 1), (-1, -1)]);
        for m in 1..8i64 {
            let num = lp(&[(m, 1), (-m, -1)]);
            assert_eq!(num.div_exact(&denom).unwrap(), quantum_integer(m as u32));
        }
        assert!(quantum_integer(0).is_zero());
        assert_eq!(quantum_integer(1), LaurentPoly::one());
        assert_eq!(quantum_integer(3), lp(&[(2, 1), (0, 1), (-2, 1)]));
    }

    #[test]
    fn quantum_factorial_small_values() {
        assert_eq!(quantum_factorial(0), LaurentPoly::one());
        assert_eq!(quantum_factorial(1), LaurentPoly::one());
        assert_eq!(quantum_factorial(2), lp(&[(1, 1), (-1, 1)]));
    }

    #[test]
    fn quantum_binomial_examples() {
        assert_eq!(quantum_binomial(2, 1), lp(&[(1, 1), (-1, 1)]));
        assert_eq!(quantum_binomial(5, 0), LaurentPoly::one());
        assert!(quantum_binomial(3, 4).is_zero());
        assert!(quantum_binomial(3, -1).is_zero());
    }

    #[test]
    fn binomial_symmetry_and_pascal() {
        for m in 0..=8u32 {
            for t in 0..=i64::from(m) {
                let b = quantum_binomial(m, t);
                assert_eq!(b, quantum_binomial(m, i64::from(m) - t));
                assert_eq!(b.bar(), b);
                if m >= 1 {
                    let rhs = &quantum_binomial(m - 1, t).shift(t)
                        + &quantum_binomial(m - 1, t - 1).shift(t - i64::from(m));
                    assert_eq!(b, rhs, "pascal m={m} t={t}");
                }
            }
        }
    }

    #[test]
    fn gaussian_binomial_matches_quantum_binomial() {
        for d in 0..=6u32 {
            for m in 0..=d {
                let lhs = quantum_binomial(d, i64::from(m)).shift(i64::from(m * (d - m)));
                assert_eq!(lhs, gaussian_binomial_q(d, m).to_laurent_in_v_squared());
            }
        }
        assert_eq!(gaussian_binomial_q(3, 3).eval(7), BigInt::one());
        assert_eq!(gaussian_binomial_q(1, 2), QPoly::default());
    }

    #[test]
    fn gaussian_binomial_counts_lines_by_brute_force() {
        // lines in F_q^2 for q = 2, 3: count nonzero vectors / (q - 1)
        for q in [2u64, 3] {
            let nonzero = q * q - 1;
            let lines = nonzero / (q - 1);
            assert_eq!(gaussian_binomial_q(2, 1).eval(q as i64), BigInt::from(lines));
        }
    }

    #[test]
    fn bar_examples() {
        assert_eq!(lp(&[(2, 1), (0, 3)]).bar(), lp(&[(-2, 1), (0, 3)]));
        assert!(LaurentPoly::zero().bar().is_zero());
        let b = quantum_binomial(4, 2);
        assert_eq!(bar_involution(&b), b);
    }

    #[test]
    fn evaluation_examples() {
        let half = Rational::new(BigInt::from(3), BigInt::from(2));
        assert_eq!(
            lp(&[(1, 1), (-1, 1)]).evaluate_at_sqrt_q(2, Sign::Plus),
            SqrtQScalar::new(Rational::zero(), half, 2)
        );
        assert_eq!(
            lp(&[(2, 1)]).evaluate_at_sqrt_q(3, Sign::Minus),
            SqrtQScalar::from_rational(rational(3), 3)
        );
        assert_eq!(LaurentPoly::one().evaluate_at_sqrt_q(5, Sign::Plus), SqrtQScalar::one(5));
    }

    #[test]
    fn inexact_division_is_reported() {
        let err = lp(&[(2, 1), (0, 1)]).div_exact(&lp(&[(1, 1), (0, 1)])).unwrap_err();
        assert!(matches!(err, LaurentError::InexactDivision { .. }));
        assert_eq!(
            LaurentPoly::one().div_exact(&LaurentPoly::zero()),
            Err(LaurentError::DivisionByZero)
        );
    }

    #[test]
    fn signed_sqrt_power_detection() {
        let s = SqrtQScalar::sqrt_q(3).pow(-3).unwrap();
        assert_eq!(s.as_signed_sqrt_power(), Some((Sign::Plus, -3)));
        let t = -&SqrtQScalar::from_rational(rational(9), 3);
        assert_eq!(t.as_signed_sqrt_power(), Some((Sign::Minus, 4)));
        assert_eq!(SqrtQScalar::from_rational(rational(2), 3).as_signed_sqrt_power(), None);
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-4i64..=4, -5i64..=5, 1i64..=3), 0..5).prop_map(|ts| {
            LaurentPoly::from_terms(
                ts.into_iter()
                    .map(|(e, n, d)| (e, Rational::new(BigInt::from(n), BigInt::from(d)))),
            )
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(f in arb_poly()) {
            let back: LaurentPoly = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn ring_axioms(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
            prop_assert_eq!(&f * &g, &g * &f);
            prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert!(f.terms().all(|(_, c)| !c.is_zero()));
            prop_assert_eq!(f.bar().bar(), f);
        }

        #[test]
        fn evaluation_is_a_ring_homomorphism(
            f in arb_poly(), g in arb_poly(), q in prop::sample::select(vec![2u64, 3, 5, 7]),
            minus in any::<bool>()
        ) {
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            let ef = f.evaluate_at_sqrt_q(q, sign);
            let eg = g.evaluate_at_sqrt_q(q, sign);
            prop_assert_eq!((&f * &g).evaluate_at_sqrt_q(q, sign), &ef * &eg);
            prop_assert_eq!((&f + &g).evaluate_at_sqrt_q(q, sign), &ef + &eg);
        }

        #[test]
        fn exact_division_inverts_multiplication(f in arb_poly(), g in arb_poly()) {
            prop_assume!(!g.is_zero());
            prop_assert_eq!((&f * &g).div_exact(&g).unwrap(), f);
        }
    }
}
