//! Finite-field representations: enumeration of `E_V`, isomorphism classes,
//! stable subspaces, and the filtration and extension counts built on them.

mod catalog;
mod classify;
pub mod field;
mod rep;
mod subspace;

use std::sync::Arc;

use thiserror::Error;

pub use catalog::{Extensions, RepCatalog, SplitTable, DEFAULT_BUDGET};
pub use classify::{parse_class_label, ClassInfo, ClassificationTable, IsoClassId, TableRecord};
pub use field::{Mat, PrimeField, SUPPORTED_PRIMES};
pub use rep::{
    brute_force_automorphisms, enumerate_points, gl_order, group_order, hom_basis, hom_dimension,
    PointSpace, Rep,
};
pub use subspace::{grassmannian, stable_subspaces, StableSubspace, VertexSubspace};

use crate::quiver::{DimVector, Quiver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfrepError {
    #[error("prime {0} is not supported (use one of 2, 3, 5, 7, 11)")]
    UnsupportedPrime(u32),
    #[error("enumeration needs {points} points, budget is {budget}")]
    BudgetExceeded { points: u64, budget: u64 },
    #[error("group order overflows 128 bits")]
    Overflow,
    #[error("malformed representation: {0}")]
    Shape(String),
    #[error("unknown isomorphism class {0}")]
    UnknownClass(String),
    #[error("inconsistent classification data: {0}")]
    Corrupt(String),
}

/// One-shot classification without keeping a catalog around.
pub fn classify(
    quiver: &Quiver,
    dim: &DimVector,
    p: u32,
    budget: u64,
) -> Result<Arc<ClassificationTable>, FfrepError> {
    RepCatalog::new(Arc::new(quiver.clone()), p, budget)?.table(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::gaussian_binomial_q;

    fn catalog(q: Quiver, p: u32) -> RepCatalog {
        RepCatalog::new(Arc::new(q), p, DEFAULT_BUDGET).unwrap()
    }

    fn d(v: &[u32]) -> DimVector {
        DimVector::new(v.to_vec())
    }

    #[test]
    fn class_counts() {
        for p in [2, 3, 5] {
            let a2 = catalog(Quiver::a2(), p);
            assert_eq!(a2.table(&d(&[1, 1])).unwrap().len(), 2);
            assert_eq!(a2.table(&d(&[2, 2])).unwrap().len(), 3);
            let k = catalog(Quiver::kronecker(), p);
            assert_eq!(k.table(&d(&[1, 1])).unwrap().len(), p as usize + 2);
            let a3 = catalog(Quiver::a3(), p);
            assert_eq!(a3.table(&d(&[1, 1, 1])).unwrap().len(), 4);
        }
    }

    #[test]
    fn orbits_partition_and_stabilizers_divide() {
        let k = catalog(Quiver::kronecker(), 3);
        for dim in [d(&[1, 2]), d(&[2, 1]), d(&[2, 2])] {
            let t = k.table(&dim).unwrap();
            let total: u64 = t.classes.iter().map(|c| c.orbit_size).sum();
            assert_eq!(total, t.space().size());
            for c in &t.classes {
                assert_eq!(c.automorphisms * u128::from(c.orbit_size), t.group_order);
                let brute =
                    brute_force_automorphisms(k.quiver(), &c.representative, k.field(), 1 << 16)
                        .unwrap();
                assert_eq!(u128::from(brute), c.automorphisms);
            }
        }
    }

    #[test]
    fn labels_are_independent_of_the_chosen_point() {
        let a3 = catalog(Quiver::a3(), 3);
        let t = a3.table(&d(&[1, 2, 1])).unwrap();
        for k in 0..t.space().size() {
            let x = t.space().decode(k);
            let id = t.iso_class_of(&x).unwrap();
            let fp = classify::fingerprint(
                a3.quiver(),
                &x,
                &d(&[1, 2, 1])
                    .sub_vectors()
                    .into_iter()
                    .filter(|g| !g.is_zero() && g != &d(&[1, 2, 1]))
                    .map(|g| a3.table(&g).unwrap())
                    .collect::<Vec<_>>(),
                a3.field(),
            );
            assert_eq!(&*id.fingerprint, fp.as_slice());
        }
    }

    #[test]
    fn single_vertex_filtrations_are_gaussian_binomials() {
        let pt = catalog(Quiver::point(), 3);
        for n in 1..=4u32 {
            for m in 0..=n {
                let f = pt.filtration_table(&d(&[n - m]), &d(&[m])).unwrap();
                let expected = gaussian_binomial_q(n, m).eval(3);
                assert_eq!(f.count(0, 0, 0).to_string(), expected.to_string());
            }
        }
    }

    #[test]
    fn extension_counts_satisfy_riedtmann() {
        // e · a_M = F · a_N · a_L · q^{Σ α_i β_i}
        for (q, p) in [(Quiver::a2(), 3), (Quiver::kronecker(), 2), (Quiver::a3(), 2)] {
            let c = catalog(q, p);
            let dims = DimVector::with_total(c.quiver().vertex_count(), 3);
            for total in dims {
                for beta in total.sub_vectors() {
                    let alpha = total.checked_sub(&beta).unwrap();
                    let f = c.filtration_table(&alpha, &beta).unwrap();
                    let e = c.extension_table(&alpha, &beta).unwrap();
                    let (ta, tb, tm) = (
                        c.table(&alpha).unwrap(),
                        c.table(&beta).unwrap(),
                        c.table(&total).unwrap(),
                    );
                    let diag = Quiver::diagonal_pairing(&alpha.signed(), &beta.signed());
                    let qd = u128::from(p).pow(diag as u32);
                    for n in 0..ta.len() {
                        for l in 0..tb.len() {
                            let sum: u64 = e.get(n, l).iter().map(|x| x.1).sum();
                            let fibre = c.quiver().arrow_pairing(&alpha.signed(), &beta.signed());
                            assert_eq!(sum, u64::from(p).pow(fibre as u32));
                            for m in 0..tm.len() {
                                let lhs = u128::from(e.count(n, l, m)) * tm.class(m).automorphisms;
                                let rhs = u128::from(f.count(n, l, m))
                                    * ta.class(n).automorphisms
                                    * tb.class(l).automorphisms
                                    * qd;
                                assert_eq!(lhs, rhs, "{alpha} {beta} {n} {l} {m}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        let c = catalog(Quiver::a2(), 2);
        let id = c.resolve("1,1:1").unwrap();
        assert_eq!(id.to_string(), "1,1:1");
        assert!(c.resolve("1,1:7").is_err());
        assert!(c.resolve("1,1,1:0").is_err());
        let rep = c.representative(&id).unwrap();
        assert_eq!(c.iso_class_of(&rep).unwrap(), id);
    }

    #[test]
    fn table_records_round_trip() {
        let c = catalog(Quiver::kronecker(), 2);
        let t = c.table(&d(&[2, 1])).unwrap();
        let rec = t.to_record(c.quiver());
        let back = ClassificationTable::from_record(c.quiver(), rec.clone()).unwrap();
        assert_eq!(back.len(), t.len());
        assert!(ClassificationTable::from_record(&Quiver::a2(), rec).is_err());
    }
}
