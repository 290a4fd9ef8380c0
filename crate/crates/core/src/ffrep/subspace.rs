//! Subspaces in reduced row echelon form and `x`-stable subspaces of a
//! representation, together with the induced sub- and quotient structures.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::field::{Mat, PrimeField};
use super::rep::Rep;
use crate::quiver::{DimVector, Quiver};

/// A `d`-dimensional subspace of `F_p^n` given by its RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSubspace {
    pub n: usize,
    pub rows: Vec<Vec<u8>>,
    pub pivots: Vec<usize>,
}

impl VertexSubspace {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `v − Σ_r v[pivot_r] · row_r`; zero exactly when `v` lies in the subspace.
    pub fn reduce(&self, v: &[u8], f: PrimeField) -> Vec<u8> {
        let mut out = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = out[pc];
            if c != 0 {
                for (o, &x) in out.iter_mut().zip(row) {
                    *o = f.sub(*o, f.mul(c, x));
                }
            }
        }
        out
    }

    /// Coordinates of `v` in the RREF basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[u8], f: PrimeField) -> Option<Vec<u8>> {
        if self.reduce(v, f).iter().any(|&x| x != 0) {
            return None;
        }
        Some(self.pivots.iter().map(|&pc| v[pc]).collect())
    }

    /// Columns not used as pivots; `e_c` for these form a basis of the quotient.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.n).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// `dim(self ∩ span(e_c : c ∈ cols))`.
    pub fn intersection_with_coordinates(&self, cols: &[usize], f: PrimeField) -> usize {
        // the intersection is the kernel of projecting onto the other coordinates
        let others: Vec<usize> = (0..self.n).filter(|c| !cols.contains(c)).collect();
        let m = Mat::from_rows(
            self.dim(),
            others.len(),
            self.rows
                .iter()
                .flat_map(|r| others.iter().map(|&c| r[c]).collect::<Vec<_>>())
                .collect(),
        );
        self.dim() - m.rank(f)
    }
}

type GrassKey = (usize, usize, u32);

fn grass_cache() -> &'static Mutex<HashMap<GrassKey, Arc<Vec<VertexSubspace>>>> {
    static CACHE: OnceLock<Mutex<HashMap<GrassKey, Arc<Vec<VertexSubspace>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// All `d`-dimensional subspaces of `F_p^n`.
pub fn grassmannian(n: usize, d: usize, f: PrimeField) -> Arc<Vec<VertexSubspace>> {
    let key = (n, d, f.p());
    if let Some(hit) = grass_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mut out = Vec::new();
    if d <= n {
        for pivots in combinations(n, d) {
            // free slots: row r, column c > pivot_r that is not itself a pivot
            let slots: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &pc)| {
                    let pivots = &pivots;
                    (pc + 1..n)
                        .filter(move |c| !pivots.contains(c))
                        .map(move |c| (r, c))
                })
                .collect();
            let p = u64::from(f.p());
            for mut k in 0..p.pow(slots.len() as u32) {
                let mut rows = vec![vec![0u8; n]; d];
                for (r, &pc) in pivots.iter().enumerate() {
                    rows[r][pc] = 1;
                }
                for &(r, c) in &slots {
                    rows[r][c] = (k % p) as u8;
                    k /= p;
                }
                out.push(VertexSubspace {
                    n,
                    rows,
                    pivots: pivots.clone(),
                });
            }
        }
    }
    let out = Arc::new(out);
    grass_cache().lock().unwrap().insert(key, out.clone());
    out
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            rec(c + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// An `x`-stable subspace `W` with `x|_W` and `x_{V/W}` in the induced bases.
#[derive(Clone, Debug)]
pub struct StableSubspace {
    pub parts: Vec<VertexSubspace>,
    pub sub: Rep,
    pub quotient: Rep,
}

/// All `x`-stable `W ⊆ V` with `dim W = beta`.
pub fn stable_subspaces(
    quiver: &Quiver,
    x: &Rep,
    beta: &DimVector,
    f: PrimeField,
) -> Vec<StableSubspace> {
    let n = quiver.vertex_count();
    if !beta.le(&x.dim) {
        return Vec::new();
    }
    let options: Vec<Arc<Vec<VertexSubspace>>> = (0..n)
        .map(|k| grassmannian(x.dim[k] as usize, beta[k] as usize, f))
        .collect();
    let mut out = Vec::new();
    let mut chosen: Vec<&VertexSubspace> = Vec::with_capacity(n);
    search(quiver, x, f, &options, &mut chosen, &mut out);
    out
}

fn search<'a>(
    quiver: &Quiver,
    x: &Rep,
    f: PrimeField,
    options: &'a [Arc<Vec<VertexSubspace>>],
    chosen: &mut Vec<&'a VertexSubspace>,
    out: &mut Vec<StableSubspace>,
) {
    let k = chosen.len();
    if k == options.len() {
        out.push(induced(quiver, x, chosen, f));
        return;
    }
    for w in options[k].iter() {
        chosen.push(w);
        let ok = quiver
            .arrows()
            .iter()
            .enumerate()
            .filter(|(_, &(s, t))| s.max(t) == k)
            .all(|(h, &(s, t))| {
                chosen[s]
                    .rows
                    .iter()
                    .all(|row| chosen[t].coordinates(&x.maps[h].apply(row, f), f).is_some())
            });
        if ok {
            search(quiver, x, f, options, chosen, out);
        }
        chosen.pop();
    }
}

fn induced(quiver: &Quiver, x: &Rep, parts: &[&VertexSubspace], f: PrimeField) -> StableSubspace {
    let beta = DimVector::new(parts.iter().map(|w| w.dim() as u32).collect());
    let alpha = DimVector::new(
        parts
            .iter()
            .zip(x.dim.entries())
            .map(|(w, &n)| n - w.dim() as u32)
            .collect(),
    );
    let mut sub = Rep::zero(quiver, &beta);
    let mut quotient = Rep::zero(quiver, &alpha);
    for (h, &(s, t)) in quiver.arrows().iter().enumerate() {
        let xh = &x.maps[h];
        for (r, row) in parts[s].rows.iter().enumerate() {
            let coords = parts[t].coordinates(&xh.apply(row, f), f).unwrap();
            for (j, &c) in coords.iter().enumerate() {
                sub.maps[h].set(j, r, c);
            }
        }
        let free_t = parts[t].free_columns();
        for (r, c) in parts[s].free_columns().into_iter().enumerate() {
            let image = parts[t].reduce(&xh.column(c), f);
            for (j, &ct) in free_t.iter().enumerate() {
                quotient.maps[h].set(j, r, image[ct]);
            }
        }
    }
    StableSubspace {
        parts: parts.iter().map(|&w| w.clone()).collect(),
        sub,
        quotient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::gaussian_binomial_q;

    #[test]
    fn grassmannian_sizes_match_gaussian_binomials() {
        for p in [2u32, 3] {
            let f = PrimeField::new(p).unwrap();
            for n in 0..=4usize {
                for d in 0..=n {
                    let expected = gaussian_binomial_q(n as u32, d as u32).eval(i64::from(p));
                    assert_eq!(grassmannian(n, d, f).len().to_string(), expected.to_string());
                }
            }
        }
    }

    #[test]
    fn every_subspace_is_stable_for_zero_maps() {
        let q = Quiver::a2();
        let f = PrimeField::new(2).unwrap();
        let x = Rep::zero(&q, &DimVector::new(vec![2, 1]));
        assert_eq!(stable_subspaces(&q, &x, &DimVector::new(vec![1, 1]), f).len(), 3);
    }

    #[test]
    fn indecomposable_projective_has_one_simple_sub() {
        let q = Quiver::a2();
        let f = PrimeField::new(3).unwrap();
        let x = Rep {
            dim: DimVector::new(vec![1, 1]),
            maps: vec![Mat::from_rows(1, 1, vec![1])],
        };
        assert_eq!(stable_subspaces(&q, &x, &DimVector::new(vec![0, 1]), f).len(), 1);
        assert!(stable_subspaces(&q, &x, &DimVector::new(vec![1, 0]), f).is_empty());
    }

    #[test]
    fn quotient_structure_is_induced() {
        // 1 -> 2 with x = [1 0]: a copy of P_1 plus S_1
        let q = Quiver::a2();
        let f = PrimeField::new(2).unwrap();
        let x = Rep {
            dim: DimVector::new(vec![2, 1]),
            maps: vec![Mat::from_rows(1, 2, vec![1, 0])],
        };
        let subs = stable_subspaces(&q, &x, &DimVector::new(vec![1, 1]), f);
        assert_eq!(subs.len(), 3);
        let nonzero = subs.iter().filter(|w| w.sub.maps[0].get(0, 0) != 0).count();
        assert_eq!(nonzero, 2);
        for w in &subs {
            assert_eq!(w.quotient.dim, DimVector::new(vec![1, 0]));
        }
    }

    #[test]
    fn coordinate_intersection() {
        let f = PrimeField::new(2).unwrap();
        let w = VertexSubspace {
            n: 3,
            rows: vec![vec![1, 0, 1], vec![0, 1, 0]],
            pivots: vec![0, 1],
        };
        assert_eq!(w.intersection_with_coordinates(&[1], f), 1);
        assert_eq!(w.intersection_with_coordinates(&[0], f), 0);
        assert_eq!(w.intersection_with_coordinates(&[0, 2], f), 1);
    }
}
