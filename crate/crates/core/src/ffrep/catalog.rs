//! Per-(quiver, p) registry of classification tables and the structure
//! constants computed from them. Everything is computed once and shared.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::classify::{fingerprint, orbit_roots, ClassificationTable, IsoClassId};
use super::field::PrimeField;
use super::rep::{check_budget, PointSpace, Rep};
use super::subspace::stable_subspaces;
use super::FfrepError;
use crate::quiver::{DimVector, Quiver};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Counts indexed by a pair of classes `(N, L)` of dimensions `(α, β)`, each
/// entry a sorted list of `(M, count)` over classes of `α + β`.
#[derive(Clone, Debug)]
pub struct SplitTable {
    pub alpha: DimVector,
    pub beta: DimVector,
    width: usize,
    data: Vec<Vec<(u32, u64)>>,
}

impl SplitTable {
    fn new(alpha: &DimVector, beta: &DimVector, n: usize, l: usize) -> Self {
        Self {
            alpha: alpha.clone(),
            beta: beta.clone(),
            width: l,
            data: vec![Vec::new(); n * l],
        }
    }

    pub fn get(&self, n: usize, l: usize) -> &[(u32, u64)] {
        &self.data[n * self.width + l]
    }

    pub fn count(&self, n: usize, l: usize, m: usize) -> u64 {
        self.get(n, l)
            .iter()
            .find(|(k, _)| *k as usize == m)
            .map_or(0, |&(_, c)| c)
    }

    fn from_maps(alpha: &DimVector, beta: &DimVector, n: usize, l: usize, maps: Vec<BTreeMap<u32, u64>>) -> Self {
        let mut t = Self::new(alpha, beta, n, l);
        for (slot, m) in t.data.iter_mut().zip(maps) {
            *slot = m.into_iter().collect();
        }
        t
    }
}

type PairKey = (DimVector, DimVector);

pub struct RepCatalog {
    quiver: Arc<Quiver>,
    field: PrimeField,
    budget: u64,
    tables: Mutex<HashMap<DimVector, Arc<ClassificationTable>>>,
    filtrations: Mutex<HashMap<PairKey, Arc<SplitTable>>>,
    extensions: Mutex<HashMap<PairKey, Arc<SplitTable>>>,
}

impl std::fmt::Debug for RepCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RepCatalog")
            .field("quiver", &self.quiver)
            .field("p", &self.field.p())
            .field("budget", &self.budget)
            .finish()
    }
}

impl RepCatalog {
    pub fn new(quiver: Arc<Quiver>, p: u32, budget: u64) -> Result<Self, FfrepError> {
        Ok(Self {
            quiver,
            field: PrimeField::new(p)?,
            budget,
            tables: Mutex::default(),
            filtrations: Mutex::default(),
            extensions: Mutex::default(),
        })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn quiver_arc(&self) -> Arc<Quiver> {
        self.quiver.clone()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn q(&self) -> u64 {
        u64::from(self.field.p())
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn check_dim(&self, dim: &DimVector) -> Result<(), FfrepError> {
        if dim.len() != self.quiver.vertex_count() {
            return Err(FfrepError::Shape(format!(
                "dimension vector {dim} does not fit a quiver with {} vertices",
                self.quiver.vertex_count()
            )));
        }
        Ok(())
    }

    /// Adds a table obtained elsewhere (e.g. from the disk cache).
    pub fn insert_table(&self, table: ClassificationTable) -> Arc<ClassificationTable> {
        let table = Arc::new(table);
        self.tables
            .lock()
            .unwrap()
            .entry(table.dim.clone())
            .or_insert(table)
            .clone()
    }

    pub fn cached_table(&self, dim: &DimVector) -> Option<Arc<ClassificationTable>> {
        self.tables.lock().unwrap().get(dim).cloned()
    }

    /// Classification of `E_V` for `dim V = dim`.
    pub fn table(&self, dim: &DimVector) -> Result<Arc<ClassificationTable>, FfrepError> {
        self.check_dim(dim)?;
        if let Some(t) = self.cached_table(dim) {
            return Ok(t);
        }
        let space = PointSpace::new(&self.quiver, dim, self.field)?;
        check_budget(&space, self.budget)?;
        let smaller: Vec<Arc<ClassificationTable>> = dim
            .sub_vectors()
            .into_iter()
            .filter(|g| !g.is_zero() && g != dim)
            .map(|g| self.table(&g))
            .collect::<Result<_, _>>()?;
        let roots = orbit_roots(&self.quiver, &space)?;
        let mut reps: Vec<u32> = roots
            .iter()
            .enumerate()
            .filter(|&(k, &r)| k as u32 == r)
            .map(|(_, &r)| r)
            .collect();
        reps.sort_unstable();
        let fingerprints: Vec<Vec<u32>> = reps
            .par_iter()
            .map(|&r| fingerprint(&self.quiver, &space.decode(u64::from(r)), &smaller, self.field))
            .collect();
        let position: HashMap<u32, u32> =
            reps.iter().enumerate().map(|(k, &r)| (r, k as u32)).collect();
        let point_class = roots.iter().map(|r| position[r]).collect();
        let table =
            ClassificationTable::from_parts(&self.quiver, dim, self.field, point_class, fingerprints)?;
        Ok(self.insert_table(table))
    }

    pub fn iso_class_of(&self, x: &Rep) -> Result<IsoClassId, FfrepError> {
        x.validate(&self.quiver, self.field)?;
        Ok(self.table(&x.dim)?.iso_class_of(x)?.clone())
    }

    pub fn representative(&self, id: &IsoClassId) -> Result<Rep, FfrepError> {
        let t = self.table(&id.dim)?;
        let k = t.lookup(id)?;
        Ok(t.class(k).representative.clone())
    }

    /// Resolves a `dim:index` label.
    pub fn resolve(&self, label: &str) -> Result<IsoClassId, FfrepError> {
        let (dim, index) = super::classify::parse_class_label(label)?;
        self.check_dim(&dim)
            .map_err(|_| FfrepError::UnknownClass(label.to_string()))?;
        Ok(self.table(&dim)?.by_index(index)?.clone())
    }

    /// `F^M_{N,L}` for all classes: the number of `x_M`-stable `W` with
    /// `x_M|_W ≅ L` (dimension `beta`) and `x_{V/W} ≅ N` (dimension `alpha`).
    pub fn filtration_table(
        &self,
        alpha: &DimVector,
        beta: &DimVector,
    ) -> Result<Arc<SplitTable>, FfrepError> {
        let key = (alpha.clone(), beta.clone());
        if let Some(t) = self.filtrations.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let (ta, tb, tm) = (self.table(alpha)?, self.table(beta)?, self.table(&(alpha + beta))?);
        let per_m: Vec<Vec<(usize, usize)>> = tm
            .classes
            .par_iter()
            .map(|c| {
                stable_subspaces(&self.quiver, &c.representative, beta, self.field)
                    .into_iter()
                    .map(|w| {
                        let n = ta.class_of_point(ta.space().encode(&w.quotient));
                        let l = tb.class_of_point(tb.space().encode(&w.sub));
                        (n, l)
                    })
                    .collect()
            })
            .collect();
        let mut maps = vec![BTreeMap::new(); ta.len() * tb.len()];
        for (m, pairs) in per_m.into_iter().enumerate() {
            for (n, l) in pairs {
                *maps[n * tb.len() + l].entry(m as u32).or_insert(0u64) += 1;
            }
        }
        let t = Arc::new(SplitTable::from_maps(alpha, beta, ta.len(), tb.len(), maps));
        Ok(self.filtrations.lock().unwrap().entry(key).or_insert(t).clone())
    }

    /// `e^M_{N,L}`: the number of `x ∈ E_{α+β}` with the trailing coordinate
    /// subspace `W` (dimension `beta`) stable, `x|_W = y_L`, `x_{V/W} = z_N`,
    /// and `x ≅ M`.
    pub fn extension_table(
        &self,
        alpha: &DimVector,
        beta: &DimVector,
    ) -> Result<Arc<SplitTable>, FfrepError> {
        let key = (alpha.clone(), beta.clone());
        if let Some(t) = self.extensions.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let (ta, tb, tm) = (self.table(alpha)?, self.table(beta)?, self.table(&(alpha + beta))?);
        let pairs: Vec<(usize, usize)> = (0..ta.len())
            .flat_map(|n| (0..tb.len()).map(move |l| (n, l)))
            .collect();
        let maps: Vec<BTreeMap<u32, u64>> = pairs
            .par_iter()
            .map(|&(n, l)| {
                let mut counts = BTreeMap::new();
                let ext = Extensions::new(
                    &self.quiver,
                    tm.space(),
                    &ta.class(n).representative,
                    &tb.class(l).representative,
                );
                for point in ext.points() {
                    *counts.entry(tm.class_of_point(point) as u32).or_insert(0u64) += 1;
                }
                counts
            })
            .collect();
        let t = Arc::new(SplitTable::from_maps(alpha, beta, ta.len(), tb.len(), maps));
        Ok(self.extensions.lock().unwrap().entry(key).or_insert(t).clone())
    }

    pub fn filtration_number(
        &self,
        m: &IsoClassId,
        n: &IsoClassId,
        l: &IsoClassId,
    ) -> Result<u64, FfrepError> {
        self.split_lookup(m, n, l, false)
    }

    pub fn extension_count(
        &self,
        m: &IsoClassId,
        n: &IsoClassId,
        l: &IsoClassId,
    ) -> Result<u64, FfrepError> {
        self.split_lookup(m, n, l, true)
    }

    fn split_lookup(
        &self,
        m: &IsoClassId,
        n: &IsoClassId,
        l: &IsoClassId,
        extension: bool,
    ) -> Result<u64, FfrepError> {
        if &n.dim + &l.dim != m.dim {
            return Ok(0);
        }
        let table = if extension {
            self.extension_table(&n.dim, &l.dim)?
        } else {
            self.filtration_table(&n.dim, &l.dim)?
        };
        let kn = self.table(&n.dim)?.lookup(n)?;
        let kl = self.table(&l.dim)?.lookup(l)?;
        let km = self.table(&m.dim)?.lookup(m)?;
        Ok(table.count(kn, kl, km))
    }
}

/// All `x` in block lower-triangular form `[[z, 0], [ξ, y]]` over a fixed
/// quotient `z` and sub `y`, as point indices of `E_{α+β}`.
pub struct Extensions {
    base: u64,
    p: u64,
    weights: Vec<u64>,
}

impl Extensions {
    pub fn new(quiver: &Quiver, space: &PointSpace, z: &Rep, y: &Rep) -> Self {
        let (alpha, beta) = (&z.dim, &y.dim);
        let mut base = 0u64;
        let mut weights = Vec::new();
        for (h, &(s, t)) in quiver.arrows().iter().enumerate() {
            let (at, as_) = (alpha[t] as usize, alpha[s] as usize);
            for r in 0..at {
                for c in 0..as_ {
                    base += u64::from(z.maps[h].get(r, c)) * space.weight(space.position(h, r, c));
                }
            }
            for r in 0..beta[t] as usize {
                for c in 0..beta[s] as usize {
                    let pos = space.position(h, at + r, as_ + c);
                    base += u64::from(y.maps[h].get(r, c)) * space.weight(pos);
                }
                for c in 0..as_ {
                    weights.push(space.weight(space.position(h, at + r, c)));
                }
            }
        }
        Self {
            base,
            p: u64::from(space.field().p()),
            weights,
        }
    }

    /// `p^{Σ_ρ α_s β_t}`
    pub fn count(&self) -> u64 {
        self.p.pow(self.weights.len() as u32)
    }

    pub fn points(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.count()).map(move |mut k| {
            let mut idx = self.base;
            for &w in &self.weights {
                idx += (k % self.p) * w;
                k /= self.p;
            }
            idx
        })
    }
}
