//! Derivations of a product, with each counted pair `(x, W)` attributed to
//! the stratum given by `dim(W_i ∩ W'_i)`.

use std::collections::BTreeMap;

use super::{Hall, HallElement, HallError, Twist};
use crate::ffrep::{stable_subspaces, Extensions, IsoClassId, Rep};
use crate::laurent::{quantum_binomial, rational, LaurentPoly};

#[derive(Clone, Debug)]
pub struct StratumValue {
    pub t: u32,
    /// Exponent `P_t` (sub side) or `P'_t` (quotient side).
    pub shift: i64,
    /// Raw pair counts per resulting class.
    pub counts: Vec<(IsoClassId, u64)>,
    /// The stratum's contribution, twist included.
    pub observed: HallElement,
    /// `f_{m,t}(v) v^{−P_t} (ₜᵢℛ(u_A) ∗ ₍ₘ₋ₜ₎ᵢℛ(u_B))` or its quotient mirror.
    pub predicted: HallElement,
}

#[derive(Clone, Debug)]
pub struct StratifiedDerivation {
    pub a: i64,
    pub b: i64,
    pub strata: Vec<StratumValue>,
    /// `ₘᵢℛ(u_A ∗ u_B)` (or `ℛₘᵢ`) computed without stratifying.
    pub total: HallElement,
}

impl StratifiedDerivation {
    pub fn observed_sum(&self) -> HallElement {
        let mut acc = HallElement::zero();
        for s in &self.strata {
            acc += &s.observed;
        }
        acc
    }

    /// Strata with `t ≥ t0`, summed.
    pub fn observed_tail(&self, t0: u32) -> HallElement {
        let mut acc = HallElement::zero();
        for s in self.strata.iter().filter(|s| s.t >= t0) {
            acc += &s.observed;
        }
        acc
    }

    pub fn predicted_tail(&self, t0: u32) -> HallElement {
        let mut acc = HallElement::zero();
        for s in self.strata.iter().filter(|s| s.t >= t0) {
            acc += &s.predicted;
        }
        acc
    }
}

impl Hall {
    /// Stratified `ₘᵢℛ(u_A ∗ u_B)`.
    pub fn stratified_derive_sub(
        &self,
        a: &IsoClassId,
        b: &IsoClassId,
        i: usize,
        m: u32,
    ) -> Result<StratifiedDerivation, HallError> {
        self.stratified(a, b, i, m, true)
    }

    /// Stratified `ℛₘᵢ(u_A ∗ u_B)`.
    pub fn stratified_derive_quot(
        &self,
        a: &IsoClassId,
        b: &IsoClassId,
        i: usize,
        m: u32,
    ) -> Result<StratifiedDerivation, HallError> {
        self.stratified(a, b, i, m, false)
    }

    fn stratified(
        &self,
        a: &IsoClassId,
        b: &IsoClassId,
        i: usize,
        m: u32,
        sub: bool,
    ) -> Result<StratifiedDerivation, HallError> {
        let (ua, ub) = (self.unit_class(a)?, self.unit_class(b)?);
        let q = self.quiver();
        let (alpha, beta) = (&a.dim, &b.dim);
        let gamma = alpha + beta;
        let data = q.stratum_data(alpha, beta, i, m)?;
        let product = self.geometric_induction(&ua, &ub)?;
        let total = if sub {
            self.derive_sub(&product, i, m)?
        } else {
            self.derive_quot(&product, i, m)?
        };
        let mut strata = Vec::new();
        let mi = q.multiple_of_vertex(i, m);
        if let Some(rest) = gamma.checked_sub(&mi) {
            let tg = self.catalog().table(&gamma)?;
            let (ta, tb) = (self.catalog().table(alpha)?, self.catalog().table(beta)?);
            let tr = self.catalog().table(&rest)?;
            let zero_m = Rep::zero(q, &mi);
            let f = self.catalog().field();
            let gi = gamma[i] as usize;
            let m_us = m as usize;
            // W'_i: trailing γ_i − m coordinates (sub side) or trailing m (quotient side)
            let fixed: Vec<usize> = if sub { (m_us..gi).collect() } else { (gi - m_us..gi).collect() };
            let mut counts: BTreeMap<u32, BTreeMap<usize, u64>> = BTreeMap::new();
            for k in 0..tr.len() {
                let other = &tr.class(k).representative;
                let ext = if sub {
                    Extensions::new(q, tg.space(), &zero_m, other)
                } else {
                    Extensions::new(q, tg.space(), other, &zero_m)
                };
                for point in ext.points() {
                    let x = tg.space().decode(point);
                    for w in stable_subspaces(q, &x, beta, f) {
                        if ta.class_of_point(ta.space().encode(&w.quotient)) != a.index as usize
                            || tb.class_of_point(tb.space().encode(&w.sub)) != b.index as usize
                        {
                            continue;
                        }
                        let inter = w.parts[i].intersection_with_coordinates(&fixed, f) as i64;
                        let t = if sub {
                            i64::from(m) - i64::from(beta[i]) + inter
                        } else {
                            i64::from(m) - inter
                        };
                        *counts
                            .entry(t as u32)
                            .or_default()
                            .entry(k)
                            .or_insert(0) += 1;
                    }
                }
            }
            let twist = Twist::Geometric.exponent(q, alpha, beta)
                - if sub {
                    q.euler(&mi.signed(), &rest.signed())
                } else {
                    q.euler(&rest.signed(), &mi.signed())
                };
            let mut ts: Vec<u32> = data.strata.iter().map(|s| s.t).collect();
            let extra: Vec<u32> = counts.keys().copied().filter(|t| !ts.contains(t)).collect();
            ts.extend(extra);
            ts.sort_unstable();
            for t in ts {
                let shift = data
                    .strata
                    .iter()
                    .find(|s| s.t == t)
                    .map(|s| if sub { s.p } else { s.p_prime });
                let raw = counts.remove(&t).unwrap_or_default();
                let mut observed = HallElement::zero();
                let mut list = Vec::new();
                for (k, c) in raw {
                    let id = tr.class(k).id.clone();
                    observed.add_term(id.clone(), &LaurentPoly::monomial(rational(c as i64), twist));
                    list.push((id, c));
                }
                let predicted = match shift {
                    Some(shift) => {
                        let (da, db) = if sub {
                            (self.derive_sub(&ua, i, t)?, self.derive_sub(&ub, i, m - t)?)
                        } else {
                            (self.derive_quot(&ua, i, t)?, self.derive_quot(&ub, i, m - t)?)
                        };
                        let factor = quantum_binomial(m, i64::from(t)).shift(-shift);
                        self.geometric_induction(&da, &db)?.scale(&factor)
                    }
                    None => HallElement::zero(),
                };
                strata.push(StratumValue {
                    t,
                    shift: shift.unwrap_or_default(),
                    counts: list,
                    observed,
                    predicted,
                });
            }
        }
        Ok(StratifiedDerivation {
            a: data.a,
            b: data.b,
            strata,
            total,
        })
    }
}
