//! Representations with fixed coordinate spaces, the affine space `E_V` they
//! form, and the `G_V`-action on it.

use serde::{Deserialize, Serialize};

use super::field::{nullspace, Mat, PrimeField};
use super::FfrepError;
use crate::quiver::{DimVector, Quiver};

/// A representation `x ∈ E_V`: one matrix `V_{s(ρ)} → V_{t(ρ)}` per arrow,
/// stored as `dim V_t × dim V_s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rep {
    pub dim: DimVector,
    pub maps: Vec<Mat>,
}

impl Rep {
    pub fn zero(quiver: &Quiver, dim: &DimVector) -> Self {
        let maps = quiver
            .arrows()
            .iter()
            .map(|&(s, t)| Mat::zeros(dim[t] as usize, dim[s] as usize))
            .collect();
        Self {
            dim: dim.clone(),
            maps,
        }
    }

    /// Checks that every matrix has the shape dictated by `quiver` and `dim`.
    pub fn validate(&self, quiver: &Quiver, f: PrimeField) -> Result<(), FfrepError> {
        if self.dim.len() != quiver.vertex_count() || self.maps.len() != quiver.arrows().len() {
            return Err(FfrepError::Shape("wrong number of vertices or arrows".into()));
        }
        for (m, &(s, t)) in self.maps.iter().zip(quiver.arrows()) {
            if m.rows != self.dim[t] as usize || m.cols != self.dim[s] as usize {
                return Err(FfrepError::Shape(format!(
                    "arrow {}->{} needs a {}x{} matrix",
                    quiver.vertex_name(s),
                    quiver.vertex_name(t),
                    self.dim[t],
                    self.dim[s]
                )));
            }
            if m.data.iter().any(|&x| u32::from(x) >= f.p()) {
                return Err(FfrepError::Shape("entry outside the field".into()));
            }
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &Rep, quiver: &Quiver) -> Rep {
        let dim = &self.dim + &other.dim;
        let maps = quiver
            .arrows()
            .iter()
            .enumerate()
            .map(|(h, &(s, t))| {
                let (a, b) = (&self.maps[h], &other.maps[h]);
                let mut m = Mat::zeros(dim[t] as usize, dim[s] as usize);
                for r in 0..a.rows {
                    for c in 0..a.cols {
                        m.set(r, c, a.get(r, c));
                    }
                }
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        m.set(a.rows + r, a.cols + c, b.get(r, c));
                    }
                }
                m
            })
            .collect();
        Rep { dim, maps }
    }
}

/// The coordinate space `E_V ≅ F_p^D` with points indexed by base-`p` digits,
/// most significant first, running through the arrow matrices row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSpace {
    pub dim: DimVector,
    field: PrimeField,
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    digits: usize,
    size: u64,
}

impl PointSpace {
    pub fn new(quiver: &Quiver, dim: &DimVector, field: PrimeField) -> Result<Self, FfrepError> {
        if dim.len() != quiver.vertex_count() {
            return Err(FfrepError::Shape("dimension vector length".into()));
        }
        let shapes: Vec<(usize, usize)> = quiver
            .arrows()
            .iter()
            .map(|&(s, t)| (dim[t] as usize, dim[s] as usize))
            .collect();
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut digits = 0usize;
        for &(r, c) in &shapes {
            offsets.push(digits);
            digits += r * c;
        }
        let size = u64::from(field.p())
            .checked_pow(digits as u32)
            .filter(|&s| s <= u64::MAX / 2)
            .ok_or(FfrepError::BudgetExceeded {
                points: u64::MAX,
                budget: 0,
            })?;
        Ok(Self {
            dim: dim.clone(),
            field,
            shapes,
            offsets,
            digits,
            size,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// `D = Σ_ρ dim V_s · dim V_t`.
    pub fn digits(&self) -> usize {
        self.digits
    }

    /// `|E_V| = p^D`.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Weight of digit position `k` in the point index.
    pub fn weight(&self, k: usize) -> u64 {
        u64::from(self.field.p()).pow((self.digits - 1 - k) as u32)
    }

    /// Digit position of entry `(r, c)` of the matrix on arrow `h`.
    pub fn position(&self, h: usize, r: usize, c: usize) -> usize {
        self.offsets[h] + r * self.shapes[h].1 + c
    }

    pub fn decode(&self, mut index: u64) -> Rep {
        let p = u64::from(self.field.p());
        let mut flat = vec![0u8; self.digits];
        for k in (0..self.digits).rev() {
            flat[k] = (index % p) as u8;
            index /= p;
        }
        let maps = self
            .shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(r, c), &o)| Mat::from_rows(r, c, flat[o..o + r * c].to_vec()))
            .collect();
        Rep {
            dim: self.dim.clone(),
            maps,
        }
    }

    pub fn encode(&self, x: &Rep) -> u64 {
        let p = u64::from(self.field.p());
        x.maps
            .iter()
            .flat_map(|m| m.data.iter())
            .fold(0u64, |acc, &d| acc * p + u64::from(d))
    }
}

/// Enumerates `E_V` when `p^D` is within `budget`.
pub fn enumerate_points(
    quiver: &Quiver,
    dim: &DimVector,
    field: PrimeField,
    budget: u64,
) -> Result<impl Iterator<Item = Rep>, FfrepError> {
    let space = PointSpace::new(quiver, dim, field)?;
    check_budget(&space, budget)?;
    Ok((0..space.size()).map(move |k| space.decode(k)))
}

pub(crate) fn check_budget(space: &PointSpace, budget: u64) -> Result<(), FfrepError> {
    if space.size() > budget {
        return Err(FfrepError::BudgetExceeded {
            points: space.size(),
            budget,
        });
    }
    Ok(())
}

/// `|GL_n(F_p)| = Π_{k<n} (p^n − p^k)`.
pub fn gl_order(n: u32, p: u32) -> Result<u128, FfrepError> {
    let p = u128::from(p);
    let pn = p.checked_pow(n).ok_or(FfrepError::Overflow)?;
    (0..n).try_fold(1u128, |acc, k| {
        acc.checked_mul(pn - p.pow(k)).ok_or(FfrepError::Overflow)
    })
}

/// `|G_V| = Π_i |GL_{α_i}(F_p)|`.
pub fn group_order(dim: &DimVector, p: u32) -> Result<u128, FfrepError> {
    dim.entries().iter().try_fold(1u128, |acc, &n| {
        acc.checked_mul(gl_order(n, p)?).ok_or(FfrepError::Overflow)
    })
}

/// Basis of `Hom(x, y)`, each element one matrix `V^x_k → V^y_k` per vertex.
pub fn hom_basis(quiver: &Quiver, x: &Rep, y: &Rep, f: PrimeField) -> Vec<Vec<Mat>> {
    let n = quiver.vertex_count();
    let mut offsets = Vec::with_capacity(n);
    let mut unknowns = 0usize;
    for k in 0..n {
        offsets.push(unknowns);
        unknowns += (y.dim[k] * x.dim[k]) as usize;
    }
    let var = |k: usize, r: usize, c: usize| offsets[k] + r * x.dim[k] as usize + c;
    let mut equations = Vec::new();
    for (h, &(s, t)) in quiver.arrows().iter().enumerate() {
        let (xh, yh) = (&x.maps[h], &y.maps[h]);
        // f_t · x_h − y_h · f_s = 0, entrywise at (r, c) ∈ [y_t] × [x_s]
        for r in 0..y.dim[t] as usize {
            for c in 0..x.dim[s] as usize {
                let mut eq = vec![0u8; unknowns];
                for j in 0..x.dim[t] as usize {
                    let e = &mut eq[var(t, r, j)];
                    *e = f.add(*e, xh.get(j, c));
                }
                for j in 0..y.dim[s] as usize {
                    let e = &mut eq[var(s, j, c)];
                    *e = f.sub(*e, yh.get(r, j));
                }
                equations.push(eq);
            }
        }
    }
    nullspace(equations, unknowns, f)
        .into_iter()
        .map(|v| {
            (0..n)
                .map(|k| {
                    let (r, c) = (y.dim[k] as usize, x.dim[k] as usize);
                    Mat::from_rows(r, c, v[offsets[k]..offsets[k] + r * c].to_vec())
                })
                .collect()
        })
        .collect()
}

pub fn hom_dimension(quiver: &Quiver, x: &Rep, y: &Rep, f: PrimeField) -> u32 {
    hom_basis(quiver, x, y, f).len() as u32
}

/// Counts invertible endomorphisms by running through all of `End(x)`.
/// Only meant as an independent check on small cases.
pub fn brute_force_automorphisms(
    quiver: &Quiver,
    x: &Rep,
    f: PrimeField,
    limit: u64,
) -> Option<u64> {
    let basis = hom_basis(quiver, x, x, f);
    let p = u64::from(f.p());
    let total = p.checked_pow(basis.len() as u32)?;
    if total > limit {
        return None;
    }
    let n = quiver.vertex_count();
    let mut count = 0u64;
    for mut k in 0..total {
        let mut g: Vec<Mat> = (0..n)
            .map(|v| Mat::zeros(x.dim[v] as usize, x.dim[v] as usize))
            .collect();
        for b in &basis {
            let coeff = (k % p) as u8;
            k /= p;
            if coeff == 0 {
                continue;
            }
            for (gv, bv) in g.iter_mut().zip(b) {
                for (e, &d) in gv.data.iter_mut().zip(&bv.data) {
                    *e = f.add(*e, f.mul(coeff, d));
                }
            }
        }
        if g.iter().all(|m| m.is_invertible(f)) {
            count += 1;
        }
    }
    Some(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn encode_decode_round_trip() {
        let q = Quiver::kronecker();
        let dim = DimVector::new(vec![1, 2]);
        let space = PointSpace::new(&q, &dim, f(3)).unwrap();
        assert_eq!(space.digits(), 4);
        assert_eq!(space.size(), 81);
        for k in 0..space.size() {
            assert_eq!(space.encode(&space.decode(k)), k);
        }
        let x = space.decode(1);
        assert_eq!(x.maps[1].get(1, 0), 1);
        assert_eq!(space.weight(space.position(1, 1, 0)), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let q = Quiver::a2();
        let dim = DimVector::new(vec![3, 3]);
        let err = enumerate_points(&q, &dim, f(2), 100).err().unwrap();
        assert!(matches!(err, FfrepError::BudgetExceeded { points: 512, .. }));
        assert_eq!(enumerate_points(&q, &dim, f(2), 512).unwrap().count(), 512);
    }

    #[test]
    fn group_orders() {
        assert_eq!(gl_order(0, 5).unwrap(), 1);
        assert_eq!(gl_order(2, 2).unwrap(), 6);
        assert_eq!(gl_order(2, 3).unwrap(), 48);
        assert_eq!(group_order(&DimVector::new(vec![1, 2]), 3).unwrap(), 96);
    }

    #[test]
    fn hom_spaces_of_a2() {
        let q = Quiver::a2();
        let k = f(2);
        let d11 = DimVector::new(vec![1, 1]);
        let p1 = Rep {
            dim: d11.clone(),
            maps: vec![Mat::from_rows(1, 1, vec![1])],
        };
        let s1 = Rep::zero(&q, &DimVector::new(vec![1, 0]));
        let s2 = Rep::zero(&q, &DimVector::new(vec![0, 1]));
        assert_eq!(hom_dimension(&q, &p1, &p1, k), 1);
        assert_eq!(hom_dimension(&q, &s2, &p1, k), 1);
        assert_eq!(hom_dimension(&q, &p1, &s2, k), 0);
        assert_eq!(hom_dimension(&q, &p1, &s1, k), 1);
        let split = s1.direct_sum(&s2, &q);
        assert_eq!(hom_dimension(&q, &split, &split, k), 2);
        assert_eq!(brute_force_automorphisms(&q, &split, k, 1 << 10), Some(1));
        assert_eq!(brute_force_automorphisms(&q, &p1, f(3), 1 << 10), Some(2));
    }
}
