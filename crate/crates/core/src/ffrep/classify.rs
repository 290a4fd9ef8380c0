//! Exact `G_V`-orbit decomposition of `E_V` and canonical class labels.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use super::field::{Mat, PrimeField};
use super::rep::{group_order, hom_dimension, PointSpace, Rep};
use super::FfrepError;
use crate::quiver::{DimVector, Quiver};

/// Label of an isomorphism class.
///
/// Classes of one table are numbered by the first point of their orbit in
/// `E_V`. `fingerprint` lists `dim End(M)` followed by `dim Hom(N, M)` for
/// every class `N` of every smaller nonzero dimension vector; it does not
/// depend on `p` for quivers of finite type. `tiebreak` numbers the classes
/// sharing a fingerprint. The derived order is `(dim, index)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoClassId {
    pub dim: DimVector,
    pub index: u32,
    pub fingerprint: Arc<[u32]>,
    pub tiebreak: u32,
}

impl fmt::Display for IsoClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dim.to_csv(), self.index)
    }
}

impl Serialize for IsoClassId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses the `dim:index` form into its two parts.
pub fn parse_class_label(label: &str) -> Result<(DimVector, u32), FfrepError> {
    let bad = || FfrepError::UnknownClass(label.to_string());
    let (dim, index) = label.rsplit_once(':').ok_or_else(bad)?;
    let dim: DimVector = dim.parse().map_err(|_| bad())?;
    let index = index.trim().parse().map_err(|_| bad())?;
    Ok((dim, index))
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub id: IsoClassId,
    pub representative: Rep,
    pub first_point: u64,
    pub orbit_size: u64,
    pub automorphisms: u128,
}

#[derive(Clone, Debug)]
pub struct ClassificationTable {
    pub dim: DimVector,
    pub p: u32,
    pub group_order: u128,
    pub classes: Vec<ClassInfo>,
    space: PointSpace,
    point_class: Vec<u32>,
}

impl ClassificationTable {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn class(&self, index: usize) -> &ClassInfo {
        &self.classes[index]
    }

    pub fn ids(&self) -> impl Iterator<Item = &IsoClassId> {
        self.classes.iter().map(|c| &c.id)
    }

    pub fn class_of_point(&self, index: u64) -> usize {
        self.point_class[index as usize] as usize
    }

    pub fn point_classes(&self) -> &[u32] {
        &self.point_class
    }

    pub fn iso_class_of(&self, x: &Rep) -> Result<&IsoClassId, FfrepError> {
        if x.dim != self.dim {
            return Err(FfrepError::Shape(format!(
                "representation of dimension {} looked up in table for {}",
                x.dim, self.dim
            )));
        }
        Ok(&self.classes[self.class_of_point(self.space.encode(x))].id)
    }

    /// Checks that `id` labels a class of this table.
    pub fn lookup(&self, id: &IsoClassId) -> Result<usize, FfrepError> {
        let k = id.index as usize;
        match self.classes.get(k) {
            Some(c) if c.id == *id => Ok(k),
            _ => Err(FfrepError::UnknownClass(id.to_string())),
        }
    }

    pub fn by_index(&self, index: u32) -> Result<&IsoClassId, FfrepError> {
        self.classes
            .get(index as usize)
            .map(|c| &c.id)
            .ok_or_else(|| FfrepError::UnknownClass(format!("{}:{}", self.dim.to_csv(), index)))
    }

    pub(crate) fn from_parts(
        quiver: &Quiver,
        dim: &DimVector,
        field: PrimeField,
        point_class: Vec<u32>,
        fingerprints: Vec<Vec<u32>>,
    ) -> Result<Self, FfrepError> {
        let space = PointSpace::new(quiver, dim, field)?;
        if point_class.len() as u64 != space.size() {
            return Err(FfrepError::Corrupt("point table has the wrong length".into()));
        }
        let g = group_order(dim, field.p())?;
        let n = fingerprints.len();
        let mut first = vec![u64::MAX; n];
        let mut sizes = vec![0u64; n];
        for (k, &c) in point_class.iter().enumerate() {
            let c = c as usize;
            if c >= n {
                return Err(FfrepError::Corrupt("class index out of range".into()));
            }
            first[c] = first[c].min(k as u64);
            sizes[c] += 1;
        }
        let mut classes = Vec::with_capacity(n);
        for c in 0..n {
            if sizes[c] == 0 {
                return Err(FfrepError::Corrupt("empty class".into()));
            }
            if c > 0 && first[c] < first[c - 1] {
                return Err(FfrepError::Corrupt("classes out of order".into()));
            }
            let tiebreak = fingerprints[..c].iter().filter(|f| **f == fingerprints[c]).count() as u32;
            let orbit = u128::from(sizes[c]);
            if g % orbit != 0 {
                return Err(FfrepError::Corrupt(format!(
                    "orbit of size {orbit} does not divide |G| = {g}"
                )));
            }
            classes.push(ClassInfo {
                id: IsoClassId {
                    dim: dim.clone(),
                    fingerprint: fingerprints[c].clone().into(),
                    tiebreak,
                    index: c as u32,
                },
                representative: space.decode(first[c]),
                first_point: first[c],
                orbit_size: sizes[c],
                automorphisms: g / orbit,
            });
        }
        Ok(Self {
            dim: dim.clone(),
            p: field.p(),
            group_order: g,
            classes,
            space,
            point_class,
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum Generator {
    /// `I + E_{jk}` at a vertex.
    Transvection { vertex: usize, j: usize, k: usize },
    /// `diag(ω, 1, …, 1)` at a vertex.
    Scale { vertex: usize, w: u8, w_inv: u8 },
}

fn generators(dim: &DimVector, f: PrimeField) -> Vec<Generator> {
    let w = f.primitive_root();
    let w_inv = f.inv(w).unwrap();
    let mut out = Vec::new();
    for (vertex, &n) in dim.entries().iter().enumerate() {
        let n = n as usize;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    out.push(Generator::Transvection { vertex, j, k });
                }
            }
        }
        if n > 0 && f.p() > 2 {
            out.push(Generator::Scale { vertex, w, w_inv });
        }
    }
    out
}

/// `x ↦ g_t x g_s^{-1}` on every arrow.
fn act(quiver: &Quiver, x: &mut Rep, g: Generator, f: PrimeField) {
    for (m, &(s, t)) in x.maps.iter_mut().zip(quiver.arrows()) {
        match g {
            Generator::Transvection { vertex, j, k } => {
                if t == vertex {
                    add_row(m, j, k, f);
                }
                if s == vertex {
                    for r in 0..m.rows {
                        let v = f.sub(m.get(r, k), m.get(r, j));
                        m.set(r, k, v);
                    }
                }
            }
            Generator::Scale { vertex, w, w_inv } => {
                if t == vertex {
                    for c in 0..m.cols {
                        m.set(0, c, f.mul(w, m.get(0, c)));
                    }
                }
                if s == vertex {
                    for r in 0..m.rows {
                        m.set(r, 0, f.mul(w_inv, m.get(r, 0)));
                    }
                }
            }
        }
    }
}

fn add_row(m: &mut Mat, j: usize, k: usize, f: PrimeField) {
    for c in 0..m.cols {
        let v = f.add(m.get(j, c), m.get(k, c));
        m.set(j, c, v);
    }
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut a: u32) -> u32 {
        while self.0[a as usize] != a {
            let up = self.0[self.0[a as usize] as usize];
            self.0[a as usize] = up;
            a = up;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root so roots are first points
        if ra < rb {
            self.0[rb as usize] = ra;
        } else if rb < ra {
            self.0[ra as usize] = rb;
        }
    }
}

/// Partitions `E_V` into orbits. Returns the orbit root of every point, each
/// root being the smallest index in its orbit.
pub(crate) fn orbit_roots(
    quiver: &Quiver,
    space: &PointSpace,
) -> Result<Vec<u32>, FfrepError> {
    let size = space.size();
    if size > u64::from(u32::MAX) {
        return Err(FfrepError::BudgetExceeded {
            points: size,
            budget: u64::from(u32::MAX),
        });
    }
    let f = space.field();
    let gens = generators(&space.dim, f);
    let mut uf = UnionFind((0..size as u32).collect());
    for k in 0..size {
        let x = space.decode(k);
        for &g in &gens {
            let mut y = x.clone();
            act(quiver, &mut y, g, f);
            uf.union(k as u32, space.encode(&y) as u32);
        }
    }
    Ok((0..size as u32).map(|k| uf.find(k)).collect())
}

/// Fingerprint of `x` against the representatives of the smaller tables.
pub(crate) fn fingerprint(
    quiver: &Quiver,
    x: &Rep,
    smaller: &[Arc<ClassificationTable>],
    f: PrimeField,
) -> Vec<u32> {
    let mut out = vec![hom_dimension(quiver, x, x, f)];
    for t in smaller {
        for c in &t.classes {
            out.push(hom_dimension(quiver, &c.representative, x, f));
        }
    }
    out
}

/// Serializable form of a table, used by the on-disk cache.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRecord {
    pub quiver_hash: String,
    pub p: u32,
    pub dim: DimVector,
    pub fingerprints: Vec<Vec<u32>>,
    pub point_class: Vec<u32>,
}

impl ClassificationTable {
    pub fn to_record(&self, quiver: &Quiver) -> TableRecord {
        TableRecord {
            quiver_hash: quiver.content_hash(),
            p: self.p,
            dim: self.dim.clone(),
            fingerprints: self.classes.iter().map(|c| c.id.fingerprint.to_vec()).collect(),
            point_class: self.point_class.clone(),
        }
    }

    pub fn from_record(quiver: &Quiver, record: TableRecord) -> Result<Self, FfrepError> {
        if record.quiver_hash != quiver.content_hash() {
            return Err(FfrepError::Corrupt("cached table belongs to another quiver".into()));
        }
        let field = PrimeField::new(record.p)?;
        Self::from_parts(quiver, &record.dim, field, record.point_class, record.fingerprints)
    }
}
