//! Quivers, dimension vectors, and the bilinear forms that produce every twist
//! exponent used by the Hall operators.

use std::fmt;
use std::ops::{Add, Index};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("quiver has a directed cycle through vertex {0}")]
    Cyclic(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),
    #[error("dimension vector has {got} entries, quiver has {expected} vertices")]
    DimMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read quiver file: {0}")]
    Io(String),
}

/// A finite acyclic quiver with vertices in a fixed input order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<(usize, usize)>,
}

impl Quiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<(usize, usize)>) -> Result<Self, QuiverError> {
        for (k, v) in vertices.iter().enumerate() {
            if vertices[..k].contains(v) {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        for &(s, t) in &arrows {
            for x in [s, t] {
                if x >= vertices.len() {
                    return Err(QuiverError::UnknownVertex(x.to_string()));
                }
            }
        }
        let q = Self { vertices, arrows };
        q.topological_order()?;
        Ok(q)
    }

    /// Quiver on vertices named `1..=n` with the given 1-based arrows.
    pub fn numbered(n: usize, arrows: &[(usize, usize)]) -> Self {
        let vertices = (1..=n).map(|k| k.to_string()).collect();
        let arrows = arrows.iter().map(|&(s, t)| (s - 1, t - 1)).collect();
        Self::new(vertices, arrows).expect("built-in quiver is acyclic")
    }

    pub fn point() -> Self {
        Self::numbered(1, &[])
    }

    pub fn a2() -> Self {
        Self::numbered(2, &[(1, 2)])
    }

    pub fn a3() -> Self {
        Self::numbered(3, &[(1, 2), (2, 3)])
    }

    pub fn kronecker() -> Self {
        Self::numbered(2, &[(1, 2), (1, 2)])
    }

    pub fn disconnected() -> Self {
        Self::numbered(2, &[])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, QuiverError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| QuiverError::UnknownVertex(name.to_string()))
    }

    pub fn vertex_name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn topological_order(&self) -> Result<Vec<usize>, QuiverError> {
        let n = self.vertices.len();
        let mut indegree = vec![0usize; n];
        for &(_, t) in &self.arrows {
            indegree[t] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &(s, t) in &self.arrows {
                if s == v {
                    indegree[t] -= 1;
                    if indegree[t] == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|v| !order.contains(v)).unwrap();
            return Err(QuiverError::Cyclic(self.vertices[stuck].clone()));
        }
        Ok(order)
    }

    pub fn load(path: &Path) -> Result<Self, QuiverError> {
        let text = std::fs::read_to_string(path).map_err(|e| QuiverError::Io(e.to_string()))?;
        text.parse()
    }

    /// Canonical text form: the file format with no comments.
    pub fn canonical_text(&self) -> String {
        let mut out = format!("vertices: {}\n", self.vertices.join(" "));
        for &(s, t) in &self.arrows {
            out.push_str(&format!("arrow: {} -> {}\n", self.vertices[s], self.vertices[t]));
        }
        out
    }

    /// Short stable digest of the canonical text.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn zero_dim(&self) -> DimVector {
        DimVector(vec![0; self.vertex_count()])
    }

    pub fn unit_dim(&self, i: usize) -> DimVector {
        self.multiple_of_vertex(i, 1)
    }

    pub fn multiple_of_vertex(&self, i: usize, m: u32) -> DimVector {
        let mut d = self.zero_dim();
        d.0[i] = m;
        d
    }

    fn check_dims(&self, dims: &[&DimVector]) -> Result<(), QuiverError> {
        for d in dims {
            if d.len() != self.vertex_count() {
                return Err(QuiverError::DimMismatch {
                    expected: self.vertex_count(),
                    got: d.len(),
                });
            }
        }
        Ok(())
    }

    /// `Σ α_i β_i − Σ_ρ α_{s(ρ)} β_{t(ρ)}`
    pub fn euler_form(&self, a: &DimVector, b: &DimVector) -> Result<i64, QuiverError> {
        self.check_dims(&[a, b])?;
        Ok(self.euler(&a.signed(), &b.signed()))
    }

    pub fn symmetric_form(&self, a: &DimVector, b: &DimVector) -> Result<i64, QuiverError> {
        self.check_dims(&[a, b])?;
        Ok(self.symmetric(&a.signed(), &b.signed()))
    }

    /// `Σ α_i β_i + Σ_ρ α_{s(ρ)} β_{t(ρ)}`
    pub fn induction_twist(&self, a: &DimVector, b: &DimVector) -> Result<i64, QuiverError> {
        self.check_dims(&[a, b])?;
        Ok(self.induction_exponent(&a.signed(), &b.signed()))
    }

    /// Arrow part `Σ_ρ α_{s(ρ)} β_{t(ρ)}`, the fibre dimension of extension spaces.
    pub fn arrow_pairing(&self, a: &[i64], b: &[i64]) -> i64 {
        self.arrows.iter().map(|&(s, t)| a[s] * b[t]).sum()
    }

    pub fn diagonal_pairing(a: &[i64], b: &[i64]) -> i64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub(crate) fn euler(&self, a: &[i64], b: &[i64]) -> i64 {
        Self::diagonal_pairing(a, b) - self.arrow_pairing(a, b)
    }

    pub(crate) fn symmetric(&self, a: &[i64], b: &[i64]) -> i64 {
        self.euler(a, b) + self.euler(b, a)
    }

    pub(crate) fn induction_exponent(&self, a: &[i64], b: &[i64]) -> i64 {
        Self::diagonal_pairing(a, b) + self.arrow_pairing(a, b)
    }

    /// Strata of the incidence variety used by the derivation product rules.
    ///
    /// Returns the range `a = max(0, m − β_i)`, `b = min(m, α_i)` with both
    /// exponents `P_t = (α − ti, (m − t)i)` and `P'_t = (ti, β − (m − t)i)`.
    pub fn stratum_data(
        &self,
        alpha: &DimVector,
        beta: &DimVector,
        i: usize,
        m: u32,
    ) -> Result<StratumData, QuiverError> {
        self.check_dims(&[alpha, beta])?;
        let m = i64::from(m);
        let lo = (m - i64::from(beta[i])).max(0);
        let hi = m.min(i64::from(alpha[i]));
        let unit = |k: i64| {
            let mut d = vec![0i64; self.vertex_count()];
            d[i] = k;
            d
        };
        let strata = (lo..=hi)
            .map(|t| {
                let alpha_rest: Vec<i64> = sub_signed(&alpha.signed(), &unit(t));
                let beta_rest: Vec<i64> = sub_signed(&beta.signed(), &unit(m - t));
                Stratum {
                    t: t as u32,
                    p: self.symmetric(&alpha_rest, &unit(m - t)),
                    p_prime: self.symmetric(&unit(t), &beta_rest),
                }
            })
            .collect();
        Ok(StratumData { a: lo, b: hi, strata })
    }
}

fn sub_signed(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub t: u32,
    pub p: i64,
    pub p_prime: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumData {
    pub a: i64,
    pub b: i64,
    pub strata: Vec<Stratum>,
}

impl FromStr for Quiver {
    type Err = QuiverError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut vertices: Option<Vec<String>> = None;
        let mut arrows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: &str| QuiverError::Parse {
                line: lineno + 1,
                message: message.to_string(),
            };
            if let Some(rest) = line.strip_prefix("vertices:") {
                if vertices.is_some() {
                    return Err(perr("vertices declared twice"));
                }
                vertices = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("arrow:") {
                let names = vertices
                    .as_ref()
                    .ok_or_else(|| perr("arrow before vertices line"))?;
                let (s, t) = rest
                    .split_once("->")
                    .ok_or_else(|| perr("expected `arrow: SRC -> DST`"))?;
                let find = |name: &str| {
                    names
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| QuiverError::UnknownVertex(name.to_string()))
                };
                arrows.push((find(s.trim())?, find(t.trim())?));
            } else {
                return Err(perr("expected `vertices:` or `arrow:`"));
            }
        }
        let vertices = vertices.ok_or(QuiverError::Parse {
            line: 0,
            message: "missing vertices line".into(),
        })?;
        Quiver::new(vertices, arrows)
    }
}

/// Dense dimension vector in vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimVector(pub Vec<u32>);

impl DimVector {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn signed(&self) -> Vec<i64> {
        self.0.iter().map(|&x| i64::from(x)).collect()
    }

    /// Componentwise `self − other`, or `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &DimVector) -> Option<DimVector> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(DimVector)
    }

    pub fn le(&self, other: &DimVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `Σ_i α_i²`, the dimension of `G_V`.
    pub fn group_dimension(&self) -> u64 {
        self.0.iter().map(|&a| u64::from(a) * u64::from(a)).sum()
    }

    /// All `γ` with `0 ≤ γ ≤ self`, in lexicographic order.
    pub fn sub_vectors(&self) -> Vec<DimVector> {
        let mut out = vec![Vec::new()];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u32>| {
                    (0..=a).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(DimVector).collect()
    }

    /// All dimension vectors on `n` vertices with total dimension exactly `total`.
    pub fn with_total(n: usize, total: u32) -> Vec<DimVector> {
        fn rec(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<DimVector>) {
            if n == 1 {
                prefix.push(total);
                out.push(DimVector(prefix.clone()));
                prefix.pop();
                return;
            }
            for x in (0..=total).rev() {
                prefix.push(x);
                rec(n - 1, total - x, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if total == 0 {
                out.push(DimVector(Vec::new()));
            }
            return out;
        }
        rec(n, total, &mut Vec::new(), &mut out);
        out
    }

    /// Comma-separated form used on the command line.
    pub fn to_csv(&self) -> String {
        self.0.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}

impl Index<usize> for DimVector {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl Add<&DimVector> for &DimVector {
    type Output = DimVector;
    fn add(self, rhs: &DimVector) -> DimVector {
        DimVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_csv())
    }
}

impl FromStr for DimVector {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map(DimVector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(v: &[u32]) -> DimVector {
        DimVector(v.to_vec())
    }

    #[test]
    fn euler_form_examples() {
        let a2 = Quiver::a2();
        assert_eq!(a2.euler_form(&d(&[1, 0]), &d(&[0, 1])).unwrap(), -1);
        assert_eq!(a2.euler_form(&d(&[0, 1]), &d(&[1, 0])).unwrap(), 0);
        let k = Quiver::kronecker();
        assert_eq!(k.euler_form(&d(&[1, 1]), &d(&[1, 1])).unwrap(), 0);
        assert_eq!(
            a2.euler_form(&d(&[1]), &d(&[0, 1])),
            Err(QuiverError::DimMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn symmetric_form_examples() {
        let a2 = Quiver::a2();
        assert_eq!(a2.symmetric_form(&d(&[1, 0]), &d(&[0, 1])).unwrap(), -1);
        for q in [Quiver::a2(), Quiver::a3(), Quiver::kronecker(), Quiver::point()] {
            for i in 0..q.vertex_count() {
                assert_eq!(q.symmetric_form(&q.unit_dim(i), &q.unit_dim(i)).unwrap(), 2);
            }
        }
        let k = Quiver::kronecker();
        assert_eq!(k.symmetric_form(&d(&[1, 0]), &d(&[0, 1])).unwrap(), -2);
    }

    #[test]
    fn induction_twist_examples() {
        let a2 = Quiver::a2();
        assert_eq!(a2.induction_twist(&d(&[1, 0]), &d(&[0, 1])).unwrap(), 1);
        assert_eq!(a2.induction_twist(&d(&[0, 1]), &d(&[1, 0])).unwrap(), 0);
    }

    #[test]
    fn stratum_examples() {
        let a2 = Quiver::a2();
        let s = a2.stratum_data(&d(&[1, 0]), &d(&[0, 1]), 0, 1).unwrap();
        assert_eq!((s.a, s.b), (1, 1));
        assert_eq!(s.strata[0].p, 0);
        let s = a2.stratum_data(&d(&[1, 1]), &d(&[1, 0]), 0, 1).unwrap();
        assert_eq!((s.a, s.b), (0, 1));
        let s = a2.stratum_data(&d(&[2, 0]), &d(&[0, 1]), 0, 2).unwrap();
        assert_eq!((s.a, s.b), (2, 2));
        assert_eq!(s.strata.len(), 1);
        // empty range is not an error
        let s = a2.stratum_data(&d(&[0, 1]), &d(&[0, 1]), 0, 1).unwrap();
        assert!(s.strata.is_empty());
    }

    #[test]
    fn parse_and_reject() {
        let q: Quiver = "# comment\nvertices: a b c\narrow: a -> b\narrow: a -> b # twice\n"
            .parse()
            .unwrap();
        assert_eq!(q.arrows(), &[(0, 1), (0, 1)]);
        let cyc = "vertices: a b\narrow: a -> b\narrow: b -> a\n".parse::<Quiver>();
        assert!(matches!(cyc, Err(QuiverError::Cyclic(_))));
        let lp = "vertices: a\narrow: a -> a\n".parse::<Quiver>();
        assert!(matches!(lp, Err(QuiverError::Cyclic(_))));
        let bad = "vertices: a\narrow: a -> z\n".parse::<Quiver>();
        assert_eq!(bad, Err(QuiverError::UnknownVertex("z".into())));
        let reparsed: Quiver = q.canonical_text().parse().unwrap();
        assert_eq!(reparsed, q);
        assert_eq!(reparsed.content_hash(), q.content_hash());
    }

    #[test]
    fn dim_vector_helpers() {
        assert_eq!("1,2,0".parse::<DimVector>().unwrap(), d(&[1, 2, 0]));
        assert_eq!(d(&[1, 1]).sub_vectors().len(), 4);
        assert_eq!(DimVector::with_total(2, 2), vec![d(&[2, 0]), d(&[1, 1]), d(&[0, 2])]);
        assert_eq!(d(&[2, 1]).checked_sub(&d(&[0, 2])), None);
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-3i64..=3, n)
    }

    proptest! {
        #[test]
        fn forms_are_bilinear(a in arb_vec(3), b in arb_vec(3), c in arb_vec(3), k in -3i64..=3) {
            let q = Quiver::numbered(3, &[(1, 2), (1, 3), (2, 3), (2, 3)]);
            let ab: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
            for f in [Quiver::euler, Quiver::symmetric, Quiver::induction_exponent] {
                prop_assert_eq!(f(&q, &ab, &c), f(&q, &a, &c) + k * f(&q, &b, &c));
                prop_assert_eq!(f(&q, &c, &ab), f(&q, &c, &a) + k * f(&q, &c, &b));
            }
            prop_assert_eq!(q.symmetric(&a, &b), q.symmetric(&b, &a));
            prop_assert_eq!(
                q.induction_exponent(&a, &b) - q.euler(&a, &b),
                2 * q.arrow_pairing(&a, &b)
            );
        }

        #[test]
        fn strata_cover_the_range(
            alpha in prop::collection::vec(0u32..4, 2),
            beta in prop::collection::vec(0u32..4, 2),
            i in 0usize..2, m in 0u32..4
        ) {
            let q = Quiver::a2();
            let (alpha, beta) = (DimVector(alpha), DimVector(beta));
            let s = q.stratum_data(&alpha, &beta, i, m).unwrap();
            prop_assert_eq!(s.strata.len() as i64, (s.b - s.a + 1).max(0));
            for st in &s.strata {
                prop_assert!(st.t <= alpha[i]);
                prop_assert!(m - st.t <= beta[i]);
            }
        }
    }
}
