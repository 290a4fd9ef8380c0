//! Multi-prime polynomiality of the integer counts behind the identities.
//!
//! Counts are collected at several primes under labels that do not depend
//! on `p` (dimension vector plus fingerprint), fitted by interpolation
//! through the fit primes, and the fit is required to have integer
//! coefficients and to reproduce the held-out prime exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;

use super::{IdentityError, IdentityId, NamedQuiver, Report, Status};
use crate::ffrep::{IsoClassId, DEFAULT_BUDGET};
use crate::hall::{Hall, Twist};
use crate::laurent::{QPoly, Rational};
use crate::quiver::{DimVector, Quiver};

type Res<T> = Result<T, IdentityError>;

#[derive(Clone, Debug)]
pub struct PolynomialityConfig {
    pub fit_primes: Vec<u32>,
    /// Extra interpolation points, used only when the degree bound exceeds
    /// what the fit primes determine.
    pub extra_primes: Vec<u32>,
    pub held_out: u32,
    pub maxdim: u32,
    pub point_maxdim: u32,
    pub budget: u64,
    pub corrupt: bool,
    /// Only the Hall and extension numbers; skips the stratum and Serre counts.
    pub subset: bool,
}

impl Default for PolynomialityConfig {
    fn default() -> Self {
        Self {
            fit_primes: vec![2, 3, 5],
            extra_primes: vec![11],
            held_out: 7,
            maxdim: 3,
            point_maxdim: 4,
            budget: DEFAULT_BUDGET,
            corrupt: false,
            subset: false,
        }
    }
}

impl PolynomialityConfig {
    pub fn primes(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self
            .fit_primes
            .iter()
            .chain(&self.extra_primes)
            .chain(std::iter::once(&self.held_out))
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// One count, as a function of the prime.
#[derive(Clone, Debug)]
pub struct CountSeries {
    pub identity: IdentityId,
    pub kind: &'static str,
    pub key: String,
    /// Upper bound on the degree in `q`, from the dimension of the variety
    /// whose points are counted.
    pub degree_bound: u32,
    pub values: BTreeMap<u32, u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitOutcome {
    Fitted(QPoly),
    /// More unknowns than interpolation points.
    Inconclusive,
    Failed(String),
}

/// Interpolates through `points`; `None` unless every coefficient is an integer.
pub fn fit_integer_polynomial(points: &[(u32, u64)]) -> Option<QPoly> {
    let n = points.len();
    let mut coeffs = vec![Rational::zero(); n];
    for (k, &(xk, yk)) in points.iter().enumerate() {
        // basis polynomial ∏_{j≠k} (q − x_j) / (x_k − x_j), lowest degree first
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for (j, &(xj, _)) in points.iter().enumerate() {
            if j == k {
                continue;
            }
            let xj = Rational::from_integer(BigInt::from(xj));
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (d, c) in basis.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * &xj;
            }
            basis = next;
            denom *= Rational::from_integer(BigInt::from(xk)) - xj;
        }
        let scale = Rational::from_integer(BigInt::from(yk)) / denom;
        for (d, c) in basis.into_iter().enumerate() {
            coeffs[d] += c * &scale;
        }
    }
    coeffs
        .into_iter()
        .map(|c| c.is_integer().then(|| c.to_integer()))
        .collect::<Option<Vec<BigInt>>>()
        .map(QPoly::from_coeffs)
}

fn fits(poly: &QPoly, series: &CountSeries, primes: &[u32]) -> bool {
    primes
        .iter()
        .all(|p| poly.eval(i64::from(*p)) == BigInt::from(series.values.get(p).copied().unwrap_or(0)))
}

fn fit_series(series: &CountSeries, cfg: &PolynomialityConfig) -> FitOutcome {
    let value = |p: u32| series.values.get(&p).copied().unwrap_or(0);
    let mut points: Vec<u32> = cfg.fit_primes.clone();
    let mut extras = cfg.extra_primes.iter();
    loop {
        let data: Vec<(u32, u64)> = points.iter().map(|&p| (p, value(p))).collect();
        let checks: Vec<u32> = cfg
            .primes()
            .into_iter()
            .filter(|p| !points.contains(p))
            .collect();
        if let Some(poly) = fit_integer_polynomial(&data) {
            let low = poly.degree().unwrap_or(0) as u32 <= series.degree_bound;
            if low && fits(&poly, series, &checks) {
                return FitOutcome::Fitted(poly);
            }
        }
        // a polynomial of degree ≤ bound is pinned by bound + 1 points
        if (series.degree_bound as usize) < points.len() {
            let held = value(cfg.held_out);
            return FitOutcome::Failed(format!(
                "no integer polynomial of degree ≤ {} through {:?}; value {held} at {}",
                series.degree_bound, data, cfg.held_out
            ));
        }
        match extras.next() {
            Some(&p) => points.push(p),
            None => return FitOutcome::Inconclusive,
        }
    }
}

/// `dim:fingerprint`, the same at every prime for quivers of finite type.
fn label(id: &IsoClassId) -> Result<String, IdentityError> {
    if id.tiebreak != 0 {
        return Err(IdentityError::Labels(format!(
            "class {id} shares its fingerprint with another class"
        )));
    }
    let fp: Vec<String> = id.fingerprint.iter().map(|x| x.to_string()).collect();
    Ok(format!("{}#{}", id.dim.to_csv(), fp.join(".")))
}

fn nonzero_splits(gamma: &DimVector) -> Vec<(DimVector, DimVector)> {
    gamma
        .sub_vectors()
        .into_iter()
        .filter_map(|a| {
            let b = gamma.checked_sub(&a)?;
            (!a.is_zero() && !b.is_zero()).then_some((a, b))
        })
        .collect()
}

fn arrow_product(q: &Quiver, a: &DimVector, b: &DimVector) -> u32 {
    q.arrows().iter().map(|&(s, t)| a[s] * b[t] + a[t] * b[s]).sum()
}

fn diagonal(a: &DimVector, b: &DimVector) -> u32 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| x * y).sum()
}

type Point = (IdentityId, &'static str, String, u32, u64);

/// Every count used by the Green, product-rule, stratification and Serre
/// checks on gradings of total dimension `≤ maxdim`, at the prime of `hall`.
pub fn collect_count_series(hall: &Hall, maxdim: u32, subset: bool) -> Res<Vec<Point>> {
    let q = hall.quiver();
    let catalog = hall.catalog();
    let n = q.vertex_count();
    let gammas: Vec<DimVector> = (1..=maxdim).flat_map(|t| DimVector::with_total(n, t)).collect();
    let mut out = Vec::new();
    for gamma in &gammas {
        for (alpha, beta) in nonzero_splits(gamma) {
            let (ta, tb, tg) = (catalog.table(&alpha)?, catalog.table(&beta)?, catalog.table(gamma)?);
            let filt = catalog.filtration_table(&alpha, &beta)?;
            let ext = catalog.extension_table(&alpha, &beta)?;
            for a in 0..ta.len() {
                for b in 0..tb.len() {
                    for m in 0..tg.len() {
                        let key = format!(
                            "{} {} -> {}",
                            label(&ta.class(a).id)?,
                            label(&tb.class(b).id)?,
                            label(&tg.class(m).id)?
                        );
                        out.push((
                            IdentityId::Green,
                            "hall_number",
                            key.clone(),
                            diagonal(&alpha, &beta),
                            filt.count(a, b, m),
                        ));
                        out.push((
                            IdentityId::ProductRule,
                            "extension",
                            key,
                            arrow_product(q, &alpha, &beta),
                            ext.count(a, b, m),
                        ));
                    }
                }
            }
        }
    }
    if subset {
        return Ok(out);
    }
    let cases: Vec<(DimVector, DimVector, usize, u32)> = gammas
        .iter()
        .flat_map(|g| {
            nonzero_splits(g).into_iter().flat_map(move |(a, b)| {
                (0..n).flat_map(move |i| {
                    let (a, b) = (a.clone(), b.clone());
                    (1..=2u32.min(g[i])).map(move |m| (a.clone(), b.clone(), i, m))
                })
            })
        })
        .collect();
    let strata: Vec<Res<Vec<Point>>> = cases
        .par_iter()
        .map(|(alpha, beta, i, m)| {
            let gamma = alpha + beta;
            let bound = gamma
                .entries()
                .iter()
                .map(|x| x * x)
                .sum::<u32>()
                + arrow_product(q, &gamma, &gamma);
            let mut pts = Vec::new();
            for x in hall.basis(alpha)? {
                for y in hall.basis(beta)? {
                    for sub in [true, false] {
                        let s = if sub {
                            hall.stratified_derive_sub(&x, &y, *i, *m)?
                        } else {
                            hall.stratified_derive_quot(&x, &y, *i, *m)?
                        };
                        for st in &s.strata {
                            for (c, count) in &st.counts {
                                let key = format!(
                                    "{} i={i} m={m} t={} {} {} -> {}",
                                    if sub { "sub" } else { "quot" },
                                    st.t,
                                    label(&x)?,
                                    label(&y)?,
                                    label(c)?
                                );
                                pts.push((IdentityId::Stratification, "stratum", key, bound, *count));
                            }
                        }
                    }
                }
            }
            Ok(pts)
        })
        .collect();
    for s in strata {
        out.extend(s?);
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let form = q.symmetric(&q.unit_dim(i).signed(), &q.unit_dim(j).signed());
            let top = (1 - form) as u32;
            let gamma = &q.multiple_of_vertex(i, top) + &q.unit_dim(j);
            if gamma.total() > maxdim + 1 {
                continue;
            }
            let bound: u32 = gamma.entries().iter().map(|x| x * x).sum();
            for m in 0..=top {
                let term = hall.product(
                    &[
                        hall.constant_class(i, m)?,
                        hall.constant_class(j, 1)?,
                        hall.constant_class(i, top - m)?,
                    ],
                    Twist::Geometric,
                )?;
                for (c, coeff) in term.iter() {
                    for (e, value) in coeff.terms() {
                        let count = value
                            .is_integer()
                            .then(|| value.to_integer())
                            .and_then(|v| u64::try_from(v).ok())
                            .ok_or_else(|| IdentityError::Labels(format!("non-integral count {value}")))?;
                        let key = format!("i={i} j={j} m={m} v^{e} -> {}", label(c)?);
                        out.push((IdentityId::SerreGenerators, "serre", key, bound, count));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Class counts per grading agree across `halls` and every label is unique.
fn prime_independent(halls: &[Hall], maxdim: u32) -> Res<Option<String>> {
    let n = halls[0].quiver().vertex_count();
    for t in 0..=maxdim {
        for d in DimVector::with_total(n, t) {
            let mut sizes = Vec::new();
            for h in halls {
                let table = h.catalog().table(&d)?;
                if table.ids().any(|id| id.tiebreak != 0) {
                    return Ok(Some(format!("fingerprints do not separate the classes of {d}")));
                }
                sizes.push(table.len());
            }
            if sizes.windows(2).any(|w| w[0] != w[1]) {
                return Ok(Some(format!("number of classes of {d} depends on p: {sizes:?}")));
            }
        }
    }
    Ok(None)
}

pub fn verify_polynomiality(nq: &NamedQuiver, cfg: &PolynomialityConfig) -> Res<Report> {
    let primes = cfg.primes();
    let maxdim = if nq.quiver.vertex_count() == 1 {
        cfg.point_maxdim
    } else {
        cfg.maxdim
    };
    let mut report = Report::new(IdentityId::Polynomiality, &nq.name, primes.clone())
        .param("fit_primes", &cfg.fit_primes)
        .param("extra_primes", &cfg.extra_primes)
        .param("held_out", cfg.held_out)
        .param("maxdim", maxdim)
        .param("subset", cfg.subset);
    if cfg.corrupt {
        report = report.param("corrupted", true);
    }
    let halls = primes
        .iter()
        .map(|&p| Hall::with_budget(nq.quiver.clone(), p, cfg.budget))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(why) = prime_independent(&halls, maxdim)? {
        report.status = Status::Info;
        report.notes.push(format!("skipped: {why}"));
        return Ok(report);
    }
    let mut series: BTreeMap<(IdentityId, &'static str, String), CountSeries> = BTreeMap::new();
    for h in &halls {
        for (identity, kind, key, bound, count) in collect_count_series(h, maxdim, cfg.subset)? {
            series
                .entry((identity, kind, key.clone()))
                .or_insert_with(|| CountSeries {
                    identity,
                    kind,
                    key,
                    degree_bound: bound,
                    values: BTreeMap::new(),
                })
                .values
                .insert(h.p(), count);
        }
    }
    if cfg.corrupt {
        if let Some(s) = series.values_mut().next() {
            *s.values.entry(cfg.held_out).or_insert(0) += 1;
        }
    }
    #[derive(Default)]
    struct Tallies {
        fitted: u64,
        inconclusive: u64,
        failed: u64,
        max_degree: usize,
        samples: Vec<serde_json::Value>,
    }
    let mut per: BTreeMap<IdentityId, Tallies> = BTreeMap::new();
    for s in series.values() {
        let t = per.entry(s.identity).or_default();
        match fit_series(s, cfg) {
            FitOutcome::Fitted(poly) => {
                t.fitted += 1;
                t.max_degree = t.max_degree.max(poly.degree().unwrap_or(0));
                if t.samples.len() < 3 && poly.degree().unwrap_or(0) > 0 {
                    t.samples.push(json!({ "key": s.key, "kind": s.kind, "poly": poly.to_string() }));
                }
            }
            FitOutcome::Inconclusive => t.inconclusive += 1,
            FitOutcome::Failed(why) => {
                t.failed += 1;
                if report.witness.is_none() {
                    let values: BTreeMap<String, u64> =
                        s.values.iter().map(|(p, v)| (p.to_string(), *v)).collect();
                    report.witness = Some(super::Witness::new(
                        format!("{} {}: {}", s.identity, s.kind, s.key),
                        "exact",
                        json!(values),
                        json!(why),
                    ));
                }
            }
        }
        report.checked += 1;
    }
    let spot: Vec<&str> = per
        .iter()
        .filter(|(_, t)| t.fitted > 0 && t.failed == 0)
        .map(|(id, _)| id.as_str())
        .collect();
    let summary: serde_json::Map<String, serde_json::Value> = per
        .iter()
        .map(|(id, t)| {
            (
                id.as_str().to_string(),
                json!({
                    "fitted": t.fitted,
                    "inconclusive": t.inconclusive,
                    "failed": t.failed,
                    "max_degree": t.max_degree,
                    "samples": t.samples,
                }),
            )
        })
        .collect();
    let failed = per.values().any(|t| t.failed > 0);
    let needed = per.len().min(3);
    report.status = if failed || spot.len() < needed {
        Status::Fail
    } else {
        Status::Pass
    };
    report.data = json!({ "series": series.len(), "by_identity": summary, "spot_checked": spot });
    Ok(report)
}
