//! The verification engine. Every identity family is a named check that
//! produces a [`Report`]; [`run_suite`] sweeps quivers and primes, runs the
//! checks concurrently and merges their reports in a fixed order.
//!
//! Hall-level checks compare both sides under every [`Convention`] at once
//! and record which conventions hold. A family is consistent when one
//! convention holds for every quiver and prime it was run on.

mod checks;
mod polynomial;
mod symbolic;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ffrep::DEFAULT_BUDGET;
use crate::hall::{BasisKey, Convention, Element, Hall, HallError, Specialization};
use crate::laurent::{LaurentPoly, Sign, SqrtQScalar};
use crate::quiver::{DimVector, Quiver};

pub use checks::*;
pub use polynomial::{
    collect_count_series, fit_integer_polynomial, verify_polynomiality, CountSeries, FitOutcome,
    PolynomialityConfig,
};
pub use symbolic::{verify_experiments, verify_symbolic, SymbolicConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Orbits,
    Associativity,
    Green,
    ProductRule,
    Stratification,
    SerreGenerators,
    SerreElements,
    SerreDerivations,
    Pairing,
    OperatorRelations,
    Symbolic,
    Polynomiality,
    /// Open questions: computed and recorded, never failing.
    Experiments,
}

impl IdentityId {
    pub const ALL: [IdentityId; 13] = [
        IdentityId::Orbits,
        IdentityId::Associativity,
        IdentityId::Green,
        IdentityId::ProductRule,
        IdentityId::Stratification,
        IdentityId::SerreGenerators,
        IdentityId::SerreElements,
        IdentityId::SerreDerivations,
        IdentityId::Pairing,
        IdentityId::OperatorRelations,
        IdentityId::Symbolic,
        IdentityId::Polynomiality,
        IdentityId::Experiments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::Orbits => "orbits",
            IdentityId::Associativity => "associativity",
            IdentityId::Green => "green",
            IdentityId::ProductRule => "product_rule",
            IdentityId::Stratification => "stratification",
            IdentityId::SerreGenerators => "serre_generators",
            IdentityId::SerreElements => "serre_elements",
            IdentityId::SerreDerivations => "serre_derivations",
            IdentityId::Pairing => "pairing",
            IdentityId::OperatorRelations => "operator_relations",
            IdentityId::Symbolic => "symbolic",
            IdentityId::Polynomiality => "polynomiality",
            IdentityId::Experiments => "experiments",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error(transparent)]
    Hall(#[from] HallError),
    #[error(transparent)]
    Uminus(#[from] crate::uminus::UminusError),
    #[error("{0}")]
    Labels(String),
}

impl From<crate::quiver::QuiverError> for IdentityError {
    fn from(e: crate::quiver::QuiverError) -> Self {
        IdentityError::Hall(e.into())
    }
}

impl From<crate::ffrep::FfrepError> for IdentityError {
    fn from(e: crate::ffrep::FfrepError) -> Self {
        IdentityError::Hall(e.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown identity `{0}` (known: {known})", known = known_ids())]
pub struct UnknownIdentity(pub String);

fn known_ids() -> String {
    IdentityId::ALL.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}

impl FromStr for IdentityId {
    type Err = UnknownIdentity;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IdentityId::ALL
            .into_iter()
            .find(|i| i.as_str() == s.trim())
            .ok_or_else(|| UnknownIdentity(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not run (budget, malformed input).
    Error,
    /// Recorded findings; never a failure.
    Info,
}

impl Status {
    pub fn is_failure(self) -> bool {
        matches!(self, Status::Fail | Status::Error)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
            Status::Info => "info",
        })
    }
}

/// A failing input with both sides in full.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub input: String,
    pub convention: String,
    pub lhs: Value,
    pub rhs: Value,
}

impl Witness {
    pub fn new(input: String, convention: &str, lhs: Value, rhs: Value) -> Self {
        Self {
            input,
            convention: convention.to_string(),
            lhs,
            rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConventionOutcome {
    pub convention: String,
    pub pass: bool,
}

/// Which convention decides a report's status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConventionChoice {
    /// Pass if any convention holds; the suite then demands one convention
    /// per family across every report.
    #[default]
    Auto,
    /// Like `Auto`, restricted to one sign of `v` (generic equality counts
    /// for both signs).
    Sign(Sign),
    Fixed(Convention),
}

impl ConventionChoice {
    fn admits(self, c: &Convention) -> bool {
        match (self, c) {
            (ConventionChoice::Auto, _) | (ConventionChoice::Sign(_), Convention::Generic) => true,
            (ConventionChoice::Sign(s), Convention::Specialized(sp)) => sp.sign == s,
            (ConventionChoice::Fixed(f), c) => f == *c,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub identity: IdentityId,
    pub quiver: String,
    pub primes: Vec<u32>,
    pub params: Map<String, Value>,
    pub status: Status,
    /// The convention the status refers to.
    pub convention: Option<String>,
    pub conventions: Vec<ConventionOutcome>,
    pub checked: u64,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
    /// Family-specific records (bridge factors, fits, experiment tables).
    pub data: Value,
    #[serde(skip)]
    pub timing: Duration,
}

impl Report {
    pub fn new(identity: IdentityId, quiver: &str, primes: Vec<u32>) -> Self {
        Self {
            identity,
            quiver: quiver.to_string(),
            primes,
            params: Map::new(),
            status: Status::Pass,
            convention: None,
            conventions: Vec::new(),
            checked: 0,
            witness: None,
            notes: Vec::new(),
            data: Value::Null,
            timing: Duration::ZERO,
        }
    }

    pub fn error(identity: IdentityId, quiver: &str, primes: Vec<u32>, err: impl fmt::Display) -> Self {
        let mut r = Self::new(identity, quiver, primes);
        r.status = Status::Error;
        r.notes.push(err.to_string());
        r
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_string(), json!(value));
        self
    }

    pub fn passed(&self) -> bool {
        !self.status.is_failure()
    }

    /// Whether `c` held on every comparison of this report. Reports without
    /// a convention table hold under every convention.
    pub fn holds_under(&self, c: &str) -> bool {
        self.conventions.is_empty()
            || self.conventions.iter().any(|o| o.convention == c && o.pass)
    }

    /// Deterministic payload: everything but the timing.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// One JSON line; the timing sits in its own top-level field.
    pub fn to_json_line(&self, with_timing: bool) -> String {
        let mut v = json!({ "report": self.to_json() });
        if with_timing {
            v["timing_ms"] = json!(self.timing.as_millis() as u64);
        }
        serde_json::to_string(&v).expect("reports serialize")
    }
}

/// Per-convention bookkeeping shared by the Hall-level checks.
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    q: u64,
    outcomes: Vec<(Convention, bool, Option<Witness>)>,
    checked: u64,
}

impl Tally {
    pub(crate) fn new(q: u64) -> Self {
        Self::with(q, &Convention::ALL)
    }

    pub(crate) fn specialized(q: u64) -> Self {
        let list: Vec<Convention> =
            Specialization::ALL.iter().map(|s| Convention::Specialized(*s)).collect();
        Self::with(q, &list)
    }

    pub(crate) fn with(q: u64, conventions: &[Convention]) -> Self {
        Self {
            q,
            outcomes: conventions.iter().map(|c| (*c, true, None)).collect(),
            checked: 0,
        }
    }

    pub(crate) fn compare<K: BasisKey>(
        &mut self,
        input: impl Fn() -> String,
        lhs: &Element<K, LaurentPoly>,
        rhs: &Element<K, LaurentPoly>,
    ) {
        self.checked += 1;
        if lhs == rhs {
            return;
        }
        let q = self.q;
        for (c, ok, w) in self.outcomes.iter_mut().filter(|o| o.1) {
            if c.equal(lhs, rhs, q) {
                continue;
            }
            *ok = false;
            let (l, r) = match c {
                Convention::Generic => (lhs.to_json(), rhs.to_json()),
                Convention::Specialized(s) => (
                    json!({ "laurent": lhs.to_json(), "specialized": s.apply(lhs, q).to_json() }),
                    json!({ "laurent": rhs.to_json(), "specialized": s.apply(rhs, q).to_json() }),
                ),
            };
            *w = Some(Witness::new(input(), &c.label(), l, r));
        }
    }

    /// Records a scalar comparison evaluated separately per convention.
    pub(crate) fn compare_with(
        &mut self,
        input: impl Fn() -> String,
        mut judge: impl FnMut(&Convention) -> Result<(), (Value, Value)>,
    ) {
        self.checked += 1;
        for (c, ok, w) in self.outcomes.iter_mut().filter(|o| o.1) {
            if let Err((l, r)) = judge(c) {
                *ok = false;
                *w = Some(Witness::new(input(), &c.label(), l, r));
            }
        }
    }

    /// Folds `other` in; earlier witnesses win.
    pub(crate) fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        for (mine, theirs) in self.outcomes.iter_mut().zip(other.outcomes) {
            if mine.1 && !theirs.1 {
                mine.1 = false;
                mine.2 = theirs.2;
            }
        }
    }

    pub(crate) fn finish(self, mut report: Report, choice: ConventionChoice) -> Report {
        report.checked += self.checked;
        report.conventions = self
            .outcomes
            .iter()
            .map(|(c, ok, _)| ConventionOutcome {
                convention: c.label(),
                pass: *ok,
            })
            .collect();
        let pick = match choice {
            ConventionChoice::Fixed(c) => self.outcomes.iter().find(|o| o.0 == c),
            _ => {
                let admitted = || self.outcomes.iter().filter(|o| choice.admits(&o.0));
                admitted()
                    .find(|o| o.1)
                    .or_else(|| admitted().find(|o| o.0 == preferred(choice)))
                    .or_else(|| admitted().next())
            }
        };
        match pick {
            Some((c, ok, w)) => {
                report.convention = Some(c.label());
                report.status = if *ok { Status::Pass } else { Status::Fail };
                report.witness = w.clone();
            }
            None => {
                // the fixed convention does not apply to this family
                report.status = if self.outcomes.iter().any(|o| o.1) {
                    Status::Pass
                } else {
                    Status::Fail
                };
                report.witness = self.outcomes.iter().find_map(|o| o.2.clone());
                report.notes.push("requested convention not applicable; any convention accepted".into());
            }
        }
        report
    }
}

/// Convention whose witness is shown when nothing holds.
fn preferred(choice: ConventionChoice) -> Convention {
    let sign = match choice {
        ConventionChoice::Sign(s) => s,
        _ => Sign::Plus,
    };
    Convention::Specialized(Specialization::new(sign, crate::hall::Branch::Inv))
}

/// Everything a per-prime check needs.
#[derive(Clone, Debug)]
pub struct CheckContext {
    pub name: String,
    pub hall: Hall,
    pub maxdim: u32,
    pub corrupt: bool,
    pub choice: ConventionChoice,
}

impl CheckContext {
    pub fn new(name: &str, hall: Hall, maxdim: u32) -> Self {
        Self {
            name: name.to_string(),
            hall,
            maxdim,
            corrupt: false,
            choice: ConventionChoice::Auto,
        }
    }

    pub fn corrupted(mut self) -> Self {
        self.corrupt = true;
        self
    }

    pub fn with_choice(mut self, choice: ConventionChoice) -> Self {
        self.choice = choice;
        self
    }

    pub fn quiver(&self) -> &Quiver {
        self.hall.quiver()
    }

    pub(crate) fn report(&self, id: IdentityId) -> Report {
        let mut r = Report::new(id, &self.name, vec![self.hall.p()]).param("maxdim", self.maxdim);
        if self.corrupt {
            r = r.param("corrupted", true);
        }
        r
    }

    /// Nonzero gradings of total dimension `≤ maxdim`.
    pub(crate) fn gradings(&self, maxdim: u32) -> Vec<DimVector> {
        let n = self.quiver().vertex_count();
        (1..=maxdim).flat_map(|t| DimVector::with_total(n, t)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct NamedQuiver {
    pub name: String,
    pub quiver: Quiver,
}

impl NamedQuiver {
    pub fn new(name: &str, quiver: Quiver) -> Self {
        Self {
            name: name.to_string(),
            quiver,
        }
    }
}

/// `A₂`, `A₃`, Kronecker, two vertices without arrows, and the point.
pub fn default_quivers() -> Vec<NamedQuiver> {
    vec![
        NamedQuiver::new("A2", Quiver::a2()),
        NamedQuiver::new("A3", Quiver::a3()),
        NamedQuiver::new("kronecker", Quiver::kronecker()),
        NamedQuiver::new("disconnected", Quiver::disconnected()),
        NamedQuiver::new("point", Quiver::point()),
    ]
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub quivers: Vec<NamedQuiver>,
    pub primes: Vec<u32>,
    pub maxdim: u32,
    /// Cap used for one-vertex quivers.
    pub point_maxdim: u32,
    pub budget: u64,
    pub families: Vec<IdentityId>,
    pub choice: ConventionChoice,
    pub corrupt: bool,
    pub polynomiality: PolynomialityConfig,
    pub symbolic: SymbolicConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            quivers: default_quivers(),
            primes: vec![2, 3],
            maxdim: 4,
            point_maxdim: 5,
            budget: DEFAULT_BUDGET,
            families: IdentityId::ALL.to_vec(),
            choice: ConventionChoice::Auto,
            corrupt: false,
            polynomiality: PolynomialityConfig::default(),
            symbolic: SymbolicConfig::default(),
        }
    }
}

/// Per family: which conventions held on every report.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionRow {
    pub identity: IdentityId,
    pub reports: usize,
    /// Conventions holding on all reports, in [`Convention::ALL`] order;
    /// `["exact"]` for families that compare integers only.
    pub holding: Vec<String>,
    pub pinned: Option<String>,
    pub consistent: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConventionTable {
    pub rows: Vec<ConventionRow>,
}

impl ConventionTable {
    pub fn build(reports: &[Report], choice: ConventionChoice) -> Self {
        let mut by_family: BTreeMap<IdentityId, Vec<&Report>> = BTreeMap::new();
        for r in reports {
            by_family.entry(r.identity).or_default().push(r);
        }
        let rows = by_family
            .into_iter()
            .filter(|(id, _)| *id != IdentityId::Experiments)
            .map(|(identity, rs)| {
                let tabled = rs.iter().any(|r| !r.conventions.is_empty());
                let broken = rs.iter().any(|r| r.status == Status::Error);
                let holding: Vec<String> = if !tabled {
                    if rs.iter().all(|r| r.passed()) {
                        vec!["exact".into()]
                    } else {
                        Vec::new()
                    }
                } else {
                    Convention::ALL
                        .iter()
                        .map(|c| c.label())
                        .filter(|c| {
                            rs.iter().any(|r| r.conventions.iter().any(|o| &o.convention == c))
                                && rs.iter().all(|r| r.holds_under(c))
                        })
                        .collect()
                };
                let compared = |c: &String| {
                    rs.iter().any(|r| r.conventions.iter().any(|o| &o.convention == c))
                };
                let admitted: Vec<String> = Convention::ALL
                    .iter()
                    .filter(|c| choice.admits(c))
                    .map(|c| c.label())
                    .filter(compared)
                    .collect();
                // families the choice does not apply to keep their own pick
                let pinned = if admitted.is_empty() {
                    holding.first().cloned()
                } else {
                    admitted.into_iter().find(|c| holding.contains(c))
                };
                ConventionRow {
                    identity,
                    reports: rs.len(),
                    consistent: pinned.is_some() && !broken,
                    holding,
                    pinned,
                }
            })
            .collect();
        Self { rows }
    }

    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| r.consistent)
    }

    pub fn row(&self, id: IdentityId) -> Option<&ConventionRow> {
        self.rows.iter().find(|r| r.identity == id)
    }

    pub fn pretty(&self) -> String {
        let mut out = format!("{:<20} {:>7}  {:<12} holding\n", "identity", "reports", "pinned");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<20} {:>7}  {:<12} {}\n",
                r.identity.as_str(),
                r.reports,
                r.pinned.as_deref().unwrap_or("NONE"),
                r.holding.join(" ")
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub reports: Vec<Report>,
    pub table: ConventionTable,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(Report::passed) && self.table.consistent()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Report> {
        self.reports.iter().filter(|r| !r.passed())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&format!(
                "{:<6} {:<20} {:<13} p={:<10} {:>8} checks  {}\n",
                r.status.to_string(),
                r.identity.as_str(),
                r.quiver,
                r.primes.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
                r.checked,
                r.convention.as_deref().unwrap_or("exact"),
            ));
        }
        out.push('\n');
        out.push_str(&self.table.pretty());
        out
    }
}

enum Job {
    PerPrime { id: IdentityId, quiver: usize, p: u32 },
    Polynomiality { quiver: usize },
}

/// Runs `job` and stamps its wall-clock time.
fn timed(f: impl FnOnce() -> Vec<Report>) -> Vec<Report> {
    let start = Instant::now();
    let mut reports = f();
    let each = start.elapsed() / reports.len().max(1) as u32;
    for r in &mut reports {
        r.timing = each;
    }
    reports
}

pub fn run_suite(config: &SuiteConfig) -> SuiteOutcome {
    let mut halls: BTreeMap<(usize, u32), Result<Hall, HallError>> = BTreeMap::new();
    for (k, nq) in config.quivers.iter().enumerate() {
        for &p in &config.primes {
            halls.insert((k, p), Hall::with_budget(nq.quiver.clone(), p, config.budget));
        }
    }
    let halls = Arc::new(halls);
    let mut jobs = Vec::new();
    for &id in &config.families {
        for k in 0..config.quivers.len() {
            if id == IdentityId::Polynomiality {
                jobs.push(Job::Polynomiality { quiver: k });
            } else {
                for &p in &config.primes {
                    jobs.push(Job::PerPrime { id, quiver: k, p });
                }
            }
        }
    }
    let reports: Vec<Report> = jobs
        .par_iter()
        .flat_map_iter(|job| match *job {
            Job::PerPrime { id, quiver, p } => {
                let nq = &config.quivers[quiver];
                let hall = match &halls[&(quiver, p)] {
                    Ok(h) => h.clone(),
                    Err(e) => return vec![Report::error(id, &nq.name, vec![p], e)],
                };
                let maxdim = if nq.quiver.vertex_count() == 1 {
                    config.point_maxdim
                } else {
                    config.maxdim
                };
                let mut ctx = CheckContext::new(&nq.name, hall, maxdim).with_choice(config.choice);
                ctx.corrupt = config.corrupt;
                timed(|| run_family(id, &ctx, &config.symbolic))
            }
            Job::Polynomiality { quiver } => {
                let nq = &config.quivers[quiver];
                let mut poly = config.polynomiality.clone();
                poly.corrupt |= config.corrupt;
                poly.budget = config.budget;
                timed(|| {
                    verify_polynomiality(nq, &poly)
                        .map(|r| vec![r])
                        .unwrap_or_else(|e| {
                            vec![Report::error(IdentityId::Polynomiality, &nq.name, poly.primes(), e)]
                        })
                })
            }
        })
        .collect();
    let table = ConventionTable::build(&reports, config.choice);
    SuiteOutcome { reports, table }
}

/// All reports of one family on one (quiver, prime).
pub fn run_family(id: IdentityId, ctx: &CheckContext, symbolic: &SymbolicConfig) -> Vec<Report> {
    let two_vertex = ctx.quiver().vertex_count() >= 2;
    let result = match id {
        IdentityId::Orbits => verify_orbits(ctx).map(|r| vec![r]),
        IdentityId::Associativity => verify_associativity(ctx).map(|r| vec![r]),
        IdentityId::Green => verify_green_compatibility(ctx).map(|r| vec![r]),
        IdentityId::ProductRule => verify_derivation_product_rule(ctx).map(|r| vec![r]),
        IdentityId::Stratification => verify_stratification(ctx).map(|r| vec![r]),
        IdentityId::SerreGenerators if two_vertex => verify_serre_generators(ctx).map(|r| vec![r]),
        IdentityId::SerreElements if two_vertex => verify_serre_elements(ctx).map(|r| vec![r]),
        IdentityId::SerreDerivations if two_vertex => {
            verify_serre_derivations(ctx).map(|r| vec![r])
        }
        IdentityId::SerreGenerators | IdentityId::SerreElements | IdentityId::SerreDerivations => {
            Ok(Vec::new())
        }
        IdentityId::Pairing => verify_pairing_adjunction(ctx).map(|r| vec![r]),
        IdentityId::OperatorRelations => verify_operator_relations(ctx).map(|r| vec![r]),
        IdentityId::Symbolic => verify_symbolic(ctx, symbolic).map(|r| vec![r]),
        IdentityId::Experiments => verify_experiments(ctx).map(|r| vec![r]),
        IdentityId::Polynomiality => Ok(Vec::new()),
    };
    result.unwrap_or_else(|e| vec![Report::error(id, &ctx.name, vec![ctx.hall.p()], e)])
}

/// `±q^{k/2}` as text.
pub(crate) fn describe_factor(f: Option<(crate::laurent::Sign, i64)>) -> String {
    match f {
        Some((s, k)) => format!("{}q^({}/2)", s.as_char(), k),
        None => "not a signed power of sqrt(q)".into(),
    }
}

pub(crate) fn scalar_json(s: &SqrtQScalar) -> Value {
    json!(s.to_string())
}

#[cfg(test)]
mod tests;
