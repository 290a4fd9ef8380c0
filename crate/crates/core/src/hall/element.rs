//! Finitely supported linear combinations of basis vectors with canonical
//! (sorted, zero-free) storage.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ffrep::IsoClassId;
use crate::laurent::{LaurentPoly, Sign, SqrtQScalar};

/// Scalars an element can carry.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn write_json(&self, out: &mut Map<String, Value>);
}

impl Coefficient for LaurentPoly {
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn write_json(&self, out: &mut Map<String, Value>) {
        out.insert("laurent".into(), Value::String(self.to_string()));
    }
}

impl Coefficient for SqrtQScalar {
    fn is_zero(&self) -> bool {
        SqrtQScalar::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn write_json(&self, out: &mut Map<String, Value>) {
        out.insert("even".into(), Value::String(self.even.to_string()));
        out.insert("odd".into(), Value::String(self.odd.to_string()));
    }
}

/// Keys of a basis: single classes or pairs of classes.
pub trait BasisKey: Clone + Ord + fmt::Debug + Send + Sync {
    fn write_json(&self, out: &mut Map<String, Value>);
}

impl BasisKey for IsoClassId {
    fn write_json(&self, out: &mut Map<String, Value>) {
        out.insert("class".into(), Value::String(self.to_string()));
    }
}

impl BasisKey for (IsoClassId, IsoClassId) {
    fn write_json(&self, out: &mut Map<String, Value>) {
        out.insert("left".into(), Value::String(self.0.to_string()));
        out.insert("right".into(), Value::String(self.1.to_string()));
    }
}

#[derive(Clone, PartialEq)]
pub struct Element<K: BasisKey, S: Coefficient> {
    terms: BTreeMap<K, S>,
}

pub type HallElement = Element<IsoClassId, LaurentPoly>;
pub type TensorElement = Element<(IsoClassId, IsoClassId), LaurentPoly>;
pub type SpecializedElement = Element<IsoClassId, SqrtQScalar>;
pub type SpecializedTensor = Element<(IsoClassId, IsoClassId), SqrtQScalar>;

impl<K: BasisKey, S: Coefficient> Default for Element<K, S> {
    fn default() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }
}

impl<K: BasisKey, S: Coefficient> Element<K, S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(key: K, coeff: S) -> Self {
        let mut e = Self::zero();
        e.add_term(key, &coeff);
        e
    }

    pub fn add_term(&mut self, key: K, coeff: &S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(c) => {
                c.add_assign(coeff);
                if c.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, coeff.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, key: &K) -> Option<&S> {
        self.terms.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &S)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out += other;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), &c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|c| c.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        self.map_coefficients(|c| c.mul(s))
    }

    /// Applies `f` to each coefficient, dropping terms that become zero.
    pub fn map_coefficients<T: Coefficient>(&self, f: impl Fn(&S) -> T) -> Element<K, T> {
        let mut out = Element::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), &f(c));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(k, c)| {
                    let mut m = Map::new();
                    k.write_json(&mut m);
                    c.write_json(&mut m);
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

impl<K: BasisKey, S: Coefficient> std::ops::AddAssign<&Element<K, S>> for Element<K, S> {
    fn add_assign(&mut self, other: &Element<K, S>) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c);
        }
    }
}

impl<K: BasisKey, S: Coefficient> fmt::Debug for Element<K, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl fmt::Display for HallElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(k, c)| format!("({c})·u[{k}]"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|((a, b), c)| format!("({c})·u[{a}]⊗u[{b}]"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Which square root of `q` (or of `q^{-1}`) the formal variable becomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `v = ±√q`
    Sqrt,
    /// `v = ±1/√q`
    Inv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Specialization {
    pub sign: Sign,
    pub branch: Branch,
}

impl Specialization {
    pub const ALL: [Specialization; 4] = [
        Specialization::new(Sign::Plus, Branch::Inv),
        Specialization::new(Sign::Minus, Branch::Inv),
        Specialization::new(Sign::Plus, Branch::Sqrt),
        Specialization::new(Sign::Minus, Branch::Sqrt),
    ];

    pub const fn new(sign: Sign, branch: Branch) -> Self {
        Self { sign, branch }
    }

    pub fn evaluate(&self, f: &LaurentPoly, q: u64) -> SqrtQScalar {
        match self.branch {
            Branch::Sqrt => f.evaluate_at_sqrt_q(q, self.sign),
            Branch::Inv => f.bar().evaluate_at_sqrt_q(q, self.sign),
        }
    }

    pub fn apply<K: BasisKey>(&self, e: &Element<K, LaurentPoly>, q: u64) -> Element<K, SqrtQScalar> {
        e.map_coefficients(|c| self.evaluate(c, q))
    }
}

impl fmt::Display for Specialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.branch {
            Branch::Sqrt => write!(f, "v={}sqrt(q)", self.sign.as_char()),
            Branch::Inv => write!(f, "v={}1/sqrt(q)", self.sign.as_char()),
        }
    }
}

/// How two sides of an identity are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Convention {
    /// Equality of Laurent polynomials in `v` at the fixed prime.
    Generic,
    Specialized(Specialization),
}

impl Convention {
    pub const ALL: [Convention; 5] = [
        Convention::Generic,
        Convention::Specialized(Specialization::ALL[0]),
        Convention::Specialized(Specialization::ALL[1]),
        Convention::Specialized(Specialization::ALL[2]),
        Convention::Specialized(Specialization::ALL[3]),
    ];

    /// Compares two elements, returning the differing keys on failure.
    pub fn equal<K: BasisKey>(
        &self,
        lhs: &Element<K, LaurentPoly>,
        rhs: &Element<K, LaurentPoly>,
        q: u64,
    ) -> bool {
        match self {
            Convention::Generic => lhs == rhs,
            Convention::Specialized(s) => s.apply(lhs, q) == s.apply(rhs, q),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Convention::Generic => "generic".into(),
            Convention::Specialized(s) => s.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!(self.label())
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
