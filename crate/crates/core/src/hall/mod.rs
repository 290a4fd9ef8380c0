//! The twisted Hall algebra of a quiver over `F_p`: products, restriction,
//! derivations, the stratified derivations, and the geometric pairing.
//!
//! Coefficients are Laurent polynomials in `v` whose integer parts are point
//! counts at the fixed prime. Comparisons happen either as Laurent
//! polynomials or after substituting a [`Specialization`].

mod element;
mod strata;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use element::{
    BasisKey, Branch, Coefficient, Convention, Element, HallElement, SpecializedElement,
    SpecializedTensor, Specialization, TensorElement,
};
pub use strata::{StratifiedDerivation, StratumValue};

use crate::ffrep::{FfrepError, IsoClassId, RepCatalog};
use crate::laurent::{quantum_binomial, rational, LaurentPoly, Sign, SqrtQScalar};
use crate::quiver::{DimVector, Quiver, QuiverError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HallError {
    #[error(transparent)]
    Ffrep(#[from] FfrepError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error("grading mismatch: {0}")]
    Grading(String),
}

/// Exponent convention for the product `u_N ∗ u_L = v^{e(α,β)} Σ F^M_{N,L} u_M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    /// `m_{α,β} = Σ α_i β_i + Σ_ρ α_s β_t`
    Geometric,
    /// `⟨α,β⟩`
    Ringel,
    /// Geometric plus one whenever `|α| = 1 ≤ |β|`. Not a 2-cocycle, so the
    /// product it defines is not associative; only used as a negative control.
    Corrupted,
}

impl Twist {
    pub fn exponent(self, quiver: &Quiver, alpha: &DimVector, beta: &DimVector) -> i64 {
        let (a, b) = (alpha.signed(), beta.signed());
        match self {
            Twist::Geometric => quiver.induction_exponent(&a, &b),
            Twist::Ringel => quiver.euler(&a, &b),
            Twist::Corrupted => {
                quiver.induction_exponent(&a, &b)
                    + i64::from(alpha.total() == 1 && beta.total() >= 1)
            }
        }
    }
}

/// A Hall algebra context: one quiver at one prime.
#[derive(Clone, Debug)]
pub struct Hall {
    catalog: Arc<RepCatalog>,
}

impl Hall {
    pub fn new(catalog: Arc<RepCatalog>) -> Self {
        Self { catalog }
    }

    pub fn with_budget(quiver: Quiver, p: u32, budget: u64) -> Result<Self, HallError> {
        Ok(Self::new(Arc::new(RepCatalog::new(Arc::new(quiver), p, budget)?)))
    }

    pub fn catalog(&self) -> &RepCatalog {
        &self.catalog
    }

    pub fn quiver(&self) -> &Quiver {
        self.catalog.quiver()
    }

    pub fn p(&self) -> u32 {
        self.catalog.p()
    }

    pub fn q(&self) -> u64 {
        self.catalog.q()
    }

    fn check_vertex(&self, i: usize) -> Result<(), HallError> {
        if i >= self.quiver().vertex_count() {
            return Err(QuiverError::UnknownVertex(i.to_string()).into());
        }
        Ok(())
    }

    fn validate(&self, id: &IsoClassId) -> Result<(), HallError> {
        self.catalog.table(&id.dim)?.lookup(id)?;
        Ok(())
    }

    /// All basis vectors of the given grading, in table order.
    pub fn basis(&self, dim: &DimVector) -> Result<Vec<IsoClassId>, HallError> {
        Ok(self.catalog.table(dim)?.ids().cloned().collect())
    }

    pub fn class_id(&self, dim: &DimVector, index: u32) -> Result<IsoClassId, HallError> {
        Ok(self.catalog.table(dim)?.by_index(index)?.clone())
    }

    /// `u_M`
    pub fn unit_class(&self, id: &IsoClassId) -> Result<HallElement, HallError> {
        self.validate(id)?;
        Ok(HallElement::term(id.clone(), LaurentPoly::one()))
    }

    /// The unit `u_0` of the algebra.
    pub fn one(&self) -> Result<HallElement, HallError> {
        let zero = self.quiver().zero_dim();
        self.unit_class(&self.class_id(&zero, 0)?)
    }

    /// `L_{mi} = u_{S_i^{⊕m}}`, the only class of dimension `mi`.
    pub fn constant_class(&self, i: usize, m: u32) -> Result<HallElement, HallError> {
        self.check_vertex(i)?;
        let dim = self.quiver().multiple_of_vertex(i, m);
        self.unit_class(&self.class_id(&dim, 0)?)
    }

    pub fn induce(
        &self,
        f: &HallElement,
        g: &HallElement,
        twist: Twist,
    ) -> Result<HallElement, HallError> {
        let mut out = HallElement::zero();
        for (n, a) in f.iter() {
            for (l, b) in g.iter() {
                let coeff = a * b;
                out += &self.induce_basis(n, l, twist)?.scale(&coeff);
            }
        }
        Ok(out)
    }

    /// `u_N ∗ u_L` for a single pair.
    pub fn induce_basis(
        &self,
        n: &IsoClassId,
        l: &IsoClassId,
        twist: Twist,
    ) -> Result<HallElement, HallError> {
        self.validate(n)?;
        self.validate(l)?;
        let (alpha, beta) = (&n.dim, &l.dim);
        let table = self.catalog.filtration_table(alpha, beta)?;
        let tm = self.catalog.table(&(alpha + beta))?;
        let e = twist.exponent(self.quiver(), alpha, beta);
        let mut out = HallElement::zero();
        for &(m, count) in table.get(n.index as usize, l.index as usize) {
            out.add_term(
                tm.class(m as usize).id.clone(),
                &LaurentPoly::monomial(rational(count as i64), e),
            );
        }
        Ok(out)
    }

    pub fn geometric_induction(
        &self,
        f: &HallElement,
        g: &HallElement,
    ) -> Result<HallElement, HallError> {
        self.induce(f, g, Twist::Geometric)
    }

    pub fn ringel_product(&self, f: &HallElement, g: &HallElement) -> Result<HallElement, HallError> {
        self.induce(f, g, Twist::Ringel)
    }

    /// Product of several factors, left to right.
    pub fn product(&self, factors: &[HallElement], twist: Twist) -> Result<HallElement, HallError> {
        let mut acc = self.one()?;
        for f in factors {
            acc = self.induce(&acc, f, twist)?;
        }
        Ok(acc)
    }

    /// `Res^{α+β}_{α,β}`: `u_M ↦ v^{−⟨α,β⟩} Σ e^M_{N,L} u_N ⊗ u_L` on the part of
    /// `f` graded by `α + β`; other gradings are sent to zero.
    pub fn geometric_restriction(
        &self,
        f: &HallElement,
        alpha: &DimVector,
        beta: &DimVector,
    ) -> Result<TensorElement, HallError> {
        let total = alpha + beta;
        let ext = self.catalog.extension_table(alpha, beta)?;
        let (ta, tb) = (self.catalog.table(alpha)?, self.catalog.table(beta)?);
        let e = -self.quiver().euler(&alpha.signed(), &beta.signed());
        let mut out = TensorElement::zero();
        for (m, c) in f.iter() {
            if m.dim != total {
                continue;
            }
            self.validate(m)?;
            for n in 0..ta.len() {
                for l in 0..tb.len() {
                    let count = ext.count(n, l, m.index as usize);
                    if count == 0 {
                        continue;
                    }
                    let coeff = c * &LaurentPoly::monomial(rational(count as i64), e);
                    out.add_term((ta.class(n).id.clone(), tb.class(l).id.clone()), &coeff);
                }
            }
        }
        Ok(out)
    }

    /// `ₘᵢℛ(u_M) = v^{−⟨mi, α−mi⟩} Σ_L e^M_{S_i^{⊕m}, L} u_L`, i.e. the second
    /// tensor factor of the restriction to `(mi, α − mi)`.
    pub fn derive_sub(&self, f: &HallElement, i: usize, m: u32) -> Result<HallElement, HallError> {
        self.derive(f, i, m, true)
    }

    /// `ℛₘᵢ(u_M) = v^{−⟨α−mi, mi⟩} Σ_N e^M_{N, S_i^{⊕m}} u_N`.
    pub fn derive_quot(&self, f: &HallElement, i: usize, m: u32) -> Result<HallElement, HallError> {
        self.derive(f, i, m, false)
    }

    fn derive(
        &self,
        f: &HallElement,
        i: usize,
        m: u32,
        sub: bool,
    ) -> Result<HallElement, HallError> {
        self.check_vertex(i)?;
        let mi = self.quiver().multiple_of_vertex(i, m);
        let mut out = HallElement::zero();
        for (id, c) in f.iter() {
            self.validate(id)?;
            let Some(rest) = id.dim.checked_sub(&mi) else {
                continue;
            };
            let (alpha, beta) = if sub { (&mi, &rest) } else { (&rest, &mi) };
            let ext = self.catalog.extension_table(alpha, beta)?;
            let tr = self.catalog.table(&rest)?;
            let e = -self.quiver().euler(&alpha.signed(), &beta.signed());
            for k in 0..tr.len() {
                let count = if sub {
                    ext.count(0, k, id.index as usize)
                } else {
                    ext.count(k, 0, id.index as usize)
                };
                if count != 0 {
                    let coeff = c * &LaurentPoly::monomial(rational(count as i64), e);
                    out.add_term(tr.class(k).id.clone(), &coeff);
                }
            }
        }
        Ok(out)
    }

    /// `f ⊗ g`
    pub fn tensor(&self, f: &HallElement, g: &HallElement) -> TensorElement {
        let mut out = TensorElement::zero();
        for (a, x) in f.iter() {
            for (b, y) in g.iter() {
                out.add_term((a.clone(), b.clone()), &(x * y));
            }
        }
        out
    }

    /// `{u_M, u_N} = δ_{M,N} / a_M`, extended bilinearly.
    pub fn pairing(&self, f: &HallElement, g: &HallElement) -> Result<LaurentPoly, HallError> {
        let grading = |e: &HallElement| e.keys().next().map(|k| k.dim.clone());
        if let (Some(a), Some(b)) = (grading(f), grading(g)) {
            if f.keys().chain(g.keys()).any(|k| k.dim != a) || a != b {
                return Err(HallError::Grading(format!(
                    "pairing needs one common grading, got {a} and {b}"
                )));
            }
        }
        let mut out = LaurentPoly::zero();
        for (id, c) in f.iter() {
            if let Some(d) = g.get(id) {
                let t = self.catalog.table(&id.dim)?;
                let a = t.class(t.lookup(id)?).automorphisms;
                let inv = crate::laurent::Rational::new(1.into(), a.into());
                out += &(c * d).scale(&inv);
            }
        }
        Ok(out)
    }

    /// `{f₁ ⊗ f₂, g₁ ⊗ g₂} = {f₁, g₁}{f₂, g₂}`, summed over terms.
    pub fn tensor_pairing(&self, f: &TensorElement, g: &TensorElement) -> Result<LaurentPoly, HallError> {
        let mut out = LaurentPoly::zero();
        for ((a, b), c) in f.iter() {
            if let Some(d) = g.get(&(a.clone(), b.clone())) {
                let ua = self.unit_class(a)?;
                let ub = self.unit_class(b)?;
                let w = &self.pairing(&ua, &ua)? * &self.pairing(&ub, &ub)?;
                out += &(&(c * d) * &w);
            }
        }
        Ok(out)
    }

    /// Computes `L_{ti} ∗ L_{(m−t)i} = c · L_{mi}` and compares `c` with
    /// `f_{m,t}(v)` under each specialization.
    pub fn divided_power_class_relation(
        &self,
        i: usize,
        t: u32,
        s: u32,
    ) -> Result<DividedPowerDatum, HallError> {
        let product =
            self.geometric_induction(&self.constant_class(i, t)?, &self.constant_class(i, s)?)?;
        let target = self.constant_class(i, t + s)?;
        let key = target.keys().next().unwrap().clone();
        let coefficient = product.get(&key).cloned().unwrap_or_else(LaurentPoly::zero);
        if product.len() > 1 {
            return Err(HallError::Grading("product left the constant class".into()));
        }
        let binomial = quantum_binomial(t + s, i64::from(t));
        let q = self.q();
        let factors = Specialization::ALL
            .iter()
            .map(|sp| {
                let ratio = sp.evaluate(&coefficient, q).inverse().and_then(|inv| {
                    (&sp.evaluate(&binomial, q) * &inv).as_signed_sqrt_power()
                });
                (*sp, ratio)
            })
            .collect();
        Ok(DividedPowerDatum {
            vertex: i,
            t,
            m: t + s,
            p: self.p(),
            coefficient,
            binomial,
            factors,
        })
    }

    /// `∏_{k=1}^{m} 1/(1 − v^{2k})` under a specialization.
    pub fn constant_norm_product(&self, m: u32, sp: Specialization) -> SqrtQScalar {
        let q = self.q();
        let mut acc = SqrtQScalar::one(q);
        for k in 1..=m {
            let d = LaurentPoly::one() - LaurentPoly::v_pow(2 * i64::from(k));
            acc = &acc * &sp.evaluate(&d, q).inverse().expect("1 - q^k is nonzero");
        }
        acc
    }
}

/// Outcome of comparing `L_{ti} ∗ L_{(m−t)i}` with `f_{m,t}(v) L_{mi}`.
#[derive(Clone, Debug)]
pub struct DividedPowerDatum {
    pub vertex: usize,
    pub t: u32,
    pub m: u32,
    pub p: u32,
    /// `c` with `L_{ti} ∗ L_{(m−t)i} = c · L_{mi}`.
    pub coefficient: LaurentPoly,
    pub binomial: LaurentPoly,
    /// `f_{m,t} / c` as `±q^{k/2}` per specialization, when it is a monomial.
    pub factors: Vec<(Specialization, Option<(Sign, i64)>)>,
}

impl DividedPowerDatum {
    pub fn factor(&self, sp: Specialization) -> Option<(Sign, i64)> {
        self.factors.iter().find(|(s, _)| *s == sp).and_then(|(_, f)| *f)
    }
}
