//! The `hallq` command line: classification with an on-disk cache, single
//! operations on basis elements, and the verification suite.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::ffrep::{
    ClassificationTable, RepCatalog, TableRecord, DEFAULT_BUDGET, SUPPORTED_PRIMES,
};
use crate::hall::{Branch, Convention, Hall, HallElement, Specialization, Twist};
use crate::identities::{
    default_quivers, run_suite, ConventionChoice, IdentityId, NamedQuiver, Report, SuiteConfig,
    SuiteOutcome,
};
use crate::laurent::Sign;
use crate::quiver::{DimVector, Quiver};

pub const CACHE_ENV: &str = "HALLQ_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "hallq", version, about = "Twisted Ringel-Hall algebras over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the representations of one dimension vector.
    Classify(ClassifyArgs),
    /// Apply one Hall-algebra operation to basis classes.
    Op(OpArgs),
    /// Run identity families over a sweep of quivers and primes.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Sqrt,
    Inv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TwistArg {
    Geometric,
    Ringel,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Quiver file, or one of a2, a3, kronecker, disconnected, point.
    #[arg(long, default_value = "a2")]
    pub quiver: String,
    #[arg(short = 'p', value_delimiter = ',', default_value = "2", value_parser = parse_prime)]
    pub primes: Vec<u32>,
    /// Largest number of points of `E_V` an enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = parse_budget)]
    pub budget: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dimension vector in vertex order, e.g. `1,2,0`.
    #[arg(long)]
    pub dim: DimVector,
    /// Ignore and do not write the disk cache.
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OpKind {
    /// Product of the operands, left to right.
    Mul,
    /// Restriction of one class to `(--split, dim − --split)`.
    Res,
    /// Derivation with the sub-representation concentrated at `--vertex`.
    Dsub,
    /// Derivation with the quotient concentrated at `--vertex`.
    Dquot,
    /// The bilinear form on two elements of one grading.
    Pair,
}

#[derive(Args, Debug)]
pub struct OpArgs {
    pub op: OpKind,
    /// Classes as `dim:index`, e.g. `1,1:0`.
    #[arg(required = true)]
    pub operands: Vec<String>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub vertex: Option<String>,
    #[arg(short = 'm', default_value_t = 1)]
    pub m: u32,
    #[arg(long)]
    pub split: Option<DimVector>,
    #[arg(long, value_enum, default_value = "geometric")]
    pub twist: TwistArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Quiver files or built-in names; defaults to the built-in sweep.
    #[arg(long)]
    pub quiver: Vec<String>,
    #[arg(short = 'p', value_delimiter = ',', default_value = "2,3", value_parser = parse_prime)]
    pub primes: Vec<u32>,
    /// Run every family (the default).
    #[arg(long, conflicts_with = "only")]
    pub all: bool,
    /// Comma-separated identity families.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<IdentityId>,
    /// Largest total dimension; `--dim` caps the sweep the same way.
    #[arg(long, alias = "dim", default_value_t = 4)]
    pub maxdim: u32,
    #[arg(long, default_value_t = 5)]
    pub point_maxdim: u32,
    #[arg(long, value_enum, default_value = "auto")]
    pub sign: SignArg,
    /// Pins the branch of the specialization; needs `--sign + | -`.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = parse_budget)]
    pub budget: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Replace the twists by the corrupted fixtures; every family must fail.
    #[arg(long)]
    pub corrupt: bool,
    /// Polynomiality on a reduced set of count series.
    #[arg(long)]
    pub poly_subset: bool,
    /// Leave wall-clock times out of the report lines.
    #[arg(long)]
    pub no_timing: bool,
}

fn parse_prime(s: &str) -> Result<u32, String> {
    let p: u32 = s.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    if !SUPPORTED_PRIMES.contains(&p) {
        return Err(format!("prime {p} is not supported (use one of 2, 3, 5, 7, 11)"));
    }
    Ok(p)
}

fn parse_budget(s: &str) -> Result<u64, String> {
    match s.trim().parse::<u64>() {
        Ok(0) => Err("budget must be positive".into()),
        Ok(b) => Ok(b),
        Err(e) => Err(format!("{s}: {e}")),
    }
}

/// Parses `args` and runs the command, writing to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Command::Classify(a) => cmd_classify(&a, out).map(|_| ExitCode::SUCCESS),
        Command::Op(a) => cmd_op(&a, out).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

/// A built-in name or a quiver file, with the name reports use.
pub fn load_quiver(spec: &str) -> Result<NamedQuiver> {
    let path = Path::new(spec);
    if path.exists() {
        let quiver = Quiver::load(path).with_context(|| format!("loading {spec}"))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
        return Ok(NamedQuiver::new(name, quiver));
    }
    let quiver = match spec.to_ascii_lowercase().as_str() {
        "a2" => Quiver::a2(),
        "a3" => Quiver::a3(),
        "kronecker" => Quiver::kronecker(),
        "disconnected" => Quiver::disconnected(),
        "point" => Quiver::point(),
        _ => bail!("{spec}: no such file and not a built-in quiver"),
    };
    Ok(NamedQuiver::new(spec, quiver))
}

/// Directory of cached classification tables.
pub fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("hallq");
    }
    match std::env::var_os("HOME") {
        Some(h) => PathBuf::from(h).join(".cache").join("hallq"),
        None => std::env::temp_dir().join("hallq"),
    }
}

/// Classification tables on disk, one JSON [`TableRecord`] per
/// `(quiver hash, p, dim)`.
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    fn path(&self, quiver: &Quiver, p: u32, dim: &DimVector) -> PathBuf {
        let dim = dim.entries().iter().map(u32::to_string).collect::<Vec<_>>().join("-");
        self.dir.join(format!("{}-p{p}-d{dim}.json", quiver.content_hash()))
    }

    pub fn load(&self, quiver: &Quiver, p: u32, dim: &DimVector) -> Option<ClassificationTable> {
        let text = fs::read_to_string(self.path(quiver, p, dim)).ok()?;
        let record: TableRecord = serde_json::from_str(&text).ok()?;
        if record.p != p || &record.dim != dim {
            return None;
        }
        ClassificationTable::from_record(quiver, record).ok()
    }

    /// Writes through a temporary file and a rename, so readers never see a
    /// partial record.
    pub fn store(&self, quiver: &Quiver, table: &ClassificationTable) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let target = self.path(quiver, table.p, &table.dim);
        let text = serde_json::to_string(&table.to_record(quiver))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.persist(&target).map_err(|e| e.error)?;
        Ok(())
    }

    /// The table of `dim`, from disk when present; computed tables of every
    /// grading below `dim` are written back.
    pub fn table(&self, catalog: &RepCatalog, dim: &DimVector) -> Result<Arc<ClassificationTable>> {
        let quiver = catalog.quiver();
        for g in dim.sub_vectors() {
            if catalog.cached_table(&g).is_none() {
                if let Some(t) = self.load(quiver, catalog.p(), &g) {
                    catalog.insert_table(t);
                }
            }
        }
        let table = catalog.table(dim)?;
        for g in dim.sub_vectors() {
            if self.load(quiver, catalog.p(), &g).is_none() {
                if let Some(t) = catalog.cached_table(&g) {
                    self.store(quiver, &t)?;
                }
            }
        }
        Ok(table)
    }
}

pub fn table_json(table: &ClassificationTable) -> Value {
    let classes: Vec<Value> = table
        .classes
        .iter()
        .map(|c| {
            json!({
                "id": c.id.to_string(),
                "fingerprint": c.id.fingerprint.to_vec(),
                "orbit_size": c.orbit_size,
                "automorphisms": c.automorphisms.to_string(),
                "representative": c.representative.maps,
            })
        })
        .collect();
    json!({
        "dim": table.dim.to_csv(),
        "p": table.p,
        "group_order": table.group_order.to_string(),
        "classes": classes,
    })
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let nq = load_quiver(&a.common.quiver)?;
    let quiver = Arc::new(nq.quiver.clone());
    let cache = TableCache::new(cache_dir());
    for &p in &a.common.primes {
        let catalog = RepCatalog::new(quiver.clone(), p, a.common.budget)?;
        let table = if a.no_cache {
            catalog.table(&a.dim)?
        } else {
            cache.table(&catalog, &a.dim)?
        };
        match a.common.format {
            Format::Json => writeln!(out, "{}", table_json(&table))?,
            Format::Pretty => {
                writeln!(out, "{} dim {} p={}: {} classes", nq.name, table.dim, p, table.len())?;
                for c in &table.classes {
                    writeln!(
                        out,
                        "  {:<12} orbit {:>8}  |Aut| {:>8}  fingerprint {:?}",
                        c.id.to_string(),
                        c.orbit_size,
                        c.automorphisms,
                        c.id.fingerprint
                    )?;
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(["p", "class", "orbit_size", "automorphisms", "fingerprint"])?;
                for c in &table.classes {
                    let fp = c.id.fingerprint.iter().map(u32::to_string).collect::<Vec<_>>();
                    w.write_record([
                        p.to_string(),
                        c.id.to_string(),
                        c.orbit_size.to_string(),
                        c.automorphisms.to_string(),
                        fp.join(" "),
                    ])?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn cmd_op(a: &OpArgs, out: &mut dyn Write) -> Result<()> {
    let nq = load_quiver(&a.common.quiver)?;
    let quiver = Arc::new(nq.quiver.clone());
    let cache = TableCache::new(cache_dir());
    for &p in &a.common.primes {
        let catalog = Arc::new(RepCatalog::new(quiver.clone(), p, a.common.budget)?);
        let hall = Hall::new(catalog.clone());
        let mut classes = Vec::new();
        for label in &a.operands {
            let (dim, _) = crate::ffrep::parse_class_label(label)?;
            if dim.len() == quiver.vertex_count() {
                cache.table(&catalog, &dim)?;
            }
            classes.push(hall.unit_class(&catalog.resolve(label)?)?);
        }
        let arity = |n: usize| -> Result<()> {
            if classes.len() != n {
                bail!("{:?} takes {n} operand(s), got {}", a.op, classes.len());
            }
            Ok(())
        };
        let vertex = || -> Result<usize> {
            let name = a.vertex.as_deref().context("--vertex is required")?;
            Ok(quiver.vertex_index(name)?)
        };
        let result = match a.op {
            OpKind::Mul => {
                let twist = match a.twist {
                    TwistArg::Geometric => Twist::Geometric,
                    TwistArg::Ringel => Twist::Ringel,
                };
                Rendered::Element(hall.product(&classes, twist)?)
            }
            OpKind::Dsub | OpKind::Dquot => {
                arity(1)?;
                let i = vertex()?;
                Rendered::Element(if a.m == 0 {
                    classes[0].clone()
                } else if a.op == OpKind::Dsub {
                    hall.derive_sub(&classes[0], i, a.m)?
                } else {
                    hall.derive_quot(&classes[0], i, a.m)?
                })
            }
            OpKind::Res => {
                arity(1)?;
                let alpha = a.split.clone().context("--split is required")?;
                let total = &classes[0].keys().next().expect("basis class").dim;
                let beta = total
                    .checked_sub(&alpha)
                    .with_context(|| format!("--split {alpha} does not fit inside {total}"))?;
                Rendered::Tensor(hall.geometric_restriction(&classes[0], &alpha, &beta)?)
            }
            OpKind::Pair => {
                arity(2)?;
                let value = hall.pairing(&classes[0], &classes[1])?;
                let specialized: serde_json::Map<String, Value> = Specialization::ALL
                    .iter()
                    .map(|s| (s.to_string(), json!(s.evaluate(&value, hall.q()).to_string())))
                    .collect();
                Rendered::Scalar(value.to_string(), specialized)
            }
        };
        result.write(p, a.common.format, out)?;
    }
    Ok(())
}

enum Rendered {
    Element(HallElement),
    Tensor(crate::hall::TensorElement),
    Scalar(String, serde_json::Map<String, Value>),
}

impl Rendered {
    fn write(&self, p: u32, format: Format, out: &mut dyn Write) -> Result<()> {
        match (self, format) {
            (Rendered::Element(e), Format::Json) => {
                writeln!(out, "{}", json!({ "p": p, "element": e.to_json() }))?
            }
            (Rendered::Tensor(e), Format::Json) => {
                writeln!(out, "{}", json!({ "p": p, "tensor": e.to_json() }))?
            }
            (Rendered::Scalar(s, sp), Format::Json) => {
                writeln!(out, "{}", json!({ "p": p, "pairing": s, "specialized": sp }))?
            }
            (Rendered::Element(e), Format::Pretty) => writeln!(out, "p={p}: {}", pretty_or_zero(e))?,
            (Rendered::Tensor(e), Format::Pretty) => {
                let s = if e.is_zero() { "0".to_string() } else { e.to_string() };
                writeln!(out, "p={p}: {s}")?
            }
            (Rendered::Scalar(s, sp), Format::Pretty) => {
                writeln!(out, "p={p}: {s}")?;
                for (k, v) in sp {
                    writeln!(out, "  {k}: {}", v.as_str().unwrap_or_default())?;
                }
            }
            (_, Format::Csv) => {
                let mut w = csv::Writer::from_writer(&mut *out);
                match self {
                    Rendered::Element(e) => {
                        w.write_record(["p", "class", "coefficient"])?;
                        for (k, c) in e.iter() {
                            w.write_record([p.to_string(), k.to_string(), c.to_string()])?;
                        }
                    }
                    Rendered::Tensor(e) => {
                        w.write_record(["p", "left", "right", "coefficient"])?;
                        for ((a, b), c) in e.iter() {
                            w.write_record([p.to_string(), a.to_string(), b.to_string(), c.to_string()])?;
                        }
                    }
                    Rendered::Scalar(s, sp) => {
                        w.write_record(["p", "convention", "value"])?;
                        w.write_record([p.to_string(), "laurent".into(), s.clone()])?;
                        for (k, v) in sp {
                            w.write_record([p.to_string(), k.clone(), v.as_str().unwrap_or_default().into()])?;
                        }
                    }
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn pretty_or_zero(e: &HallElement) -> String {
    if e.is_zero() {
        "0".into()
    } else {
        e.to_string()
    }
}

pub fn convention_choice(sign: SignArg, branch: Option<BranchArg>) -> Result<ConventionChoice> {
    let sign = match sign {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
        SignArg::Auto if branch.is_some() => bail!("--branch needs --sign + or --sign -"),
        SignArg::Auto => return Ok(ConventionChoice::Auto),
    };
    Ok(match branch {
        None => ConventionChoice::Sign(sign),
        Some(b) => {
            let branch = match b {
                BranchArg::Sqrt => Branch::Sqrt,
                BranchArg::Inv => Branch::Inv,
            };
            ConventionChoice::Fixed(Convention::Specialized(Specialization::new(sign, branch)))
        }
    })
}

pub fn suite_config(a: &VerifyArgs) -> Result<SuiteConfig> {
    let mut config = SuiteConfig::default();
    if !a.quiver.is_empty() {
        config.quivers = a.quiver.iter().map(|q| load_quiver(q)).collect::<Result<_>>()?;
    } else {
        config.quivers = default_quivers();
    }
    config.primes = a.primes.clone();
    if !a.only.is_empty() {
        config.families = a.only.clone();
    }
    config.maxdim = a.maxdim;
    config.point_maxdim = a.point_maxdim;
    config.budget = a.budget;
    config.choice = convention_choice(a.sign, a.branch)?;
    config.corrupt = a.corrupt;
    config.polynomiality.subset = a.poly_subset;
    Ok(config)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let config = suite_config(a)?;
    let outcome = run_suite(&config);
    write_outcome(&outcome, a.format, !a.no_timing, out)?;
    Ok(if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn write_outcome(
    outcome: &SuiteOutcome,
    format: Format,
    with_timing: bool,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        Format::Json => {
            for r in &outcome.reports {
                writeln!(out, "{}", r.to_json_line(with_timing))?;
            }
            let failed: Vec<String> = outcome.failures().map(describe).collect();
            writeln!(
                out,
                "{}",
                json!({
                    "summary": {
                        "reports": outcome.reports.len(),
                        "failed": failed,
                        "passed": outcome.passed(),
                        "convention_table": outcome.table,
                    }
                })
            )?;
        }
        Format::Pretty => {
            write!(out, "{}", outcome.summary())?;
            for r in outcome.failures() {
                writeln!(out, "\nFAILED {}", describe(r))?;
                if let Some(w) = &r.witness {
                    writeln!(out, "  input: {}\n  under: {}", w.input, w.convention)?;
                    writeln!(out, "  lhs: {}\n  rhs: {}", w.lhs, w.rhs)?;
                }
                for n in &r.notes {
                    writeln!(out, "  note: {n}")?;
                }
            }
            writeln!(out, "\n{}", if outcome.passed() { "all passed" } else { "FAILURES" })?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["identity", "quiver", "primes", "status", "convention", "checked"])?;
            for r in &outcome.reports {
                let primes: Vec<String> = r.primes.iter().map(u32::to_string).collect();
                w.write_record([
                    r.identity.as_str().to_string(),
                    r.quiver.clone(),
                    primes.join(" "),
                    r.status.to_string(),
                    r.convention.clone().unwrap_or_default(),
                    r.checked.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn describe(r: &Report) -> String {
    let primes: Vec<String> = r.primes.iter().map(u32::to_string).collect();
    format!("{} on {} at p={}", r.identity, r.quiver, primes.join(","))
}
