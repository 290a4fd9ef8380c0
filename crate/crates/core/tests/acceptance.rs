//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hallq::ffrep::{grassmannian, PrimeField, DEFAULT_BUDGET};
use hallq::hall::{Branch, Convention, Hall, HallElement, Specialization, Twist};
use hallq::identities::{
    default_quivers, run_suite, IdentityId, NamedQuiver, PolynomialityConfig, Report, Status,
    SuiteConfig, SuiteOutcome,
};
use hallq::laurent::{quantum_binomial, rational, LaurentPoly, Sign};
use hallq::quiver::{DimVector, Quiver};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn sweep(families: &[IdentityId]) -> SuiteConfig {
    SuiteConfig {
        families: families.to_vec(),
        ..SuiteConfig::default()
    }
}

fn on(names: &[&str], config: SuiteConfig) -> SuiteConfig {
    SuiteConfig {
        quivers: default_quivers()
            .into_iter()
            .filter(|q| names.contains(&q.name.as_str()))
            .collect(),
        ..config
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("took {took:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn describe(r: &Report) -> String {
    let mut s = format!("{} on {} p={:?}: {}", r.identity, r.quiver, r.primes, r.status);
    if let Some(w) = &r.witness {
        s.push_str(&format!(" [{} under {}]", w.input, w.convention));
    }
    for n in &r.notes {
        s.push_str(&format!(" ({n})"));
    }
    s
}

/// Every report passed, and at least `min` of them exist.
fn all_pass(out: &SuiteOutcome, min: usize) -> Result<usize, String> {
    if let Some(r) = out.failures().next() {
        return Err(describe(r));
    }
    if out.reports.len() < min {
        return Err(format!("only {} reports, expected {min}", out.reports.len()));
    }
    Ok(out.reports.iter().map(|r| r.checked as usize).sum())
}

fn orbits() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&sweep(&[IdentityId::Orbits]));
    let checks = all_pass(&out, 10)?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{checks} orbit identities on 5 quivers at p=2,3"))
}

fn associativity() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&on(
        &["A2", "A3", "kronecker", "disconnected"],
        sweep(&[IdentityId::Associativity]),
    ));
    let checks = all_pass(&out, 8)?;
    for r in &out.reports {
        if !r.holds_under("generic") {
            return Err(format!("{}: not an exact equality", describe(r)));
        }
        let twists = r.params.get("twists").map(|t| t.to_string()).unwrap_or_default();
        if !(twists.contains("geometric") && twists.contains("ringel")) {
            return Err(format!("{}: twists checked {twists}", describe(r)));
        }
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{checks} triples, both twists, exact"))
}

fn green() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&on(&["A2", "kronecker"], sweep(&[IdentityId::Green])));
    let checks = all_pass(&out, 4)?;
    let row = out.table.row(IdentityId::Green).ok_or("no convention row")?;
    let pinned = row.pinned.clone().filter(|_| row.consistent).ok_or("no consistent convention")?;
    within(start, Duration::from_secs(600))?;
    print!("{}", out.table.pretty());
    Ok(format!("{checks} splits, convention {pinned} holds throughout"))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `₂ℛ(u_S ∗ u_S) = v(p+1)u_0` on the point, where `(p+1)v` is the
/// specialization of `f_{2,1} = v + v⁻¹` at `v = 1/√p`.
fn gaussian_case(p: u32) -> Result<(), String> {
    let hall = Hall::with_budget(Quiver::point(), p, DEFAULT_BUDGET).map_err(err)?;
    let s = hall.constant_class(0, 1).map_err(err)?;
    let square = hall.product(&[s.clone(), s], Twist::Geometric).map_err(err)?;
    let got = hall.derive_sub(&square, 0, 2).map_err(err)?;
    let coeff = LaurentPoly::monomial(rational(i64::from(p) + 1), 1);
    let want: HallElement = hall.one().map_err(err)?.scale(&coeff);
    if got != want {
        return Err(format!("p={p}: 2R(u_S * u_S) = {got}, expected {want}"));
    }
    let sp = Specialization::new(Sign::Plus, Branch::Inv);
    if sp.evaluate(&coeff, hall.q()) != sp.evaluate(&quantum_binomial(2, 1), hall.q()) {
        return Err(format!("p={p}: (p+1)v is not f_(2,1) at v = 1/sqrt(p)"));
    }
    Ok(())
}

/// The single-vertex value `₁ℛ(u_{S⊕S}) = v⁻¹(p+1)u_S`. On mismatch, also
/// evaluates the operator that would produce it (one term per line of
/// `F_p²`, counted independently) against the product rule on `u_S ∗ u_S`.
fn line_count_case(p: u32) -> Result<(), String> {
    let hall = Hall::with_budget(Quiver::point(), p, DEFAULT_BUDGET).map_err(err)?;
    let s = hall.constant_class(0, 1).map_err(err)?;
    let s2 = hall.constant_class(0, 2).map_err(err)?;
    let got = hall.derive_sub(&s2, 0, 1).map_err(err)?;
    let want = s.scale(&LaurentPoly::monomial(rational(i64::from(p) + 1), -1));
    if got == want {
        return Ok(());
    }
    let lines = grassmannian(2, 1, PrimeField::new(p).map_err(err)?).len() as i64;
    // u_S ∗ u_S = v(p+1) u_{S⊕S}, so the line-count operator sends it to
    let square = hall.product(&[s.clone(), s.clone()], Twist::Geometric).map_err(err)?;
    let c = square.get(&s2.keys().next().unwrap().clone()).cloned().unwrap_or_default();
    let lhs = s.scale(&(&c * &LaurentPoly::monomial(rational(lines), -1)));
    let data = hall.quiver().stratum_data(&dim(1), &dim(1), 0, 1).map_err(err)?;
    let mut rhs = HallElement::zero();
    for st in &data.strata {
        rhs += &s.scale(&LaurentPoly::v_pow(-st.p));
    }
    let holds: Vec<String> = Convention::ALL
        .iter()
        .filter(|conv| conv.equal(&lhs, &rhs, hall.q()))
        .map(|conv| conv.label())
        .collect();
    Err(format!(
        "p={p}: measured 1R(u_S2) = {got}, criterion states {want}; an operator giving the \
         latter sends u_S*u_S to {lhs}, but the product rule requires {rhs} (agreeing under: {})",
        if holds.is_empty() { "no convention".to_string() } else { holds.join(", ") }
    ))
}

fn product_rules() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&sweep(&[IdentityId::ProductRule]));
    let checks = all_pass(&out, 10)?;
    let f21 = &LaurentPoly::v_pow(1) + &LaurentPoly::v_pow(-1);
    if quantum_binomial(2, 1) != f21 {
        return Err(format!("f_(2,1) = {}", quantum_binomial(2, 1)));
    }
    for p in [2, 3] {
        gaussian_case(p)?;
    }
    let literal: Vec<String> = [2, 3].into_iter().filter_map(|p| line_count_case(p).err()).collect();
    if !literal.is_empty() {
        return Err(format!(
            "{checks} product-rule cases and the f_(2,1) Gaussian case at p=2,3 pass; \
             single-vertex value does not: {}",
            literal.join("; ")
        ));
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{checks} cases, m <= 2; single-vertex Gaussian count p+1 at p=2,3"))
}

fn dim(v: u32) -> DimVector {
    DimVector::new(vec![v])
}

fn stratification() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&sweep(&[IdentityId::Stratification]));
    let checks = all_pass(&out, 10)?;
    let several: u64 = out
        .reports
        .iter()
        .filter_map(|r| r.params.get("cases_with_several_strata")?.as_u64())
        .sum();
    if several == 0 {
        return Err("no case with a < b".into());
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{checks} strata and tails, {several} cases with several strata"))
}

fn serre() -> Verdict {
    let start = Instant::now();
    let elements = run_suite(&on(&["A2", "kronecker"], sweep(&[IdentityId::SerreElements])));
    let e = all_pass(&elements, 4)?;
    let operators = run_suite(&sweep(&[IdentityId::SerreDerivations]));
    let o = all_pass(&operators, 8)?;
    let kronecker_top = operators.reports.iter().any(|r| {
        r.quiver == "kronecker"
            && r.params
                .get("test_gradings")
                .map(|g| g.to_string().contains("dim=3,1") || g.to_string().contains("dim=1,3"))
                .unwrap_or(false)
    });
    if !kronecker_top {
        return Err("Kronecker grading 3i+j not among the operator test gradings".into());
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{e} Serre elements vanish; {o} operator identities"))
}

fn pairing() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&sweep(&[IdentityId::Pairing]));
    let checks = all_pass(&out, 10)?;
    let mut by_quiver: BTreeMap<&str, Vec<&Report>> = BTreeMap::new();
    for r in &out.reports {
        if r.data["factor_is_group_dimension_shift"] != serde_json::json!(true) {
            return Err(format!("{}: factor is not the normalization shift", describe(r)));
        }
        by_quiver.entry(r.quiver.as_str()).or_default().push(r);
    }
    for (q, rs) in by_quiver {
        let exps: Vec<&serde_json::Value> = rs.iter().map(|r| &r.data["bridge_exponents"]).collect();
        if exps.len() != 2 || exps[0] != exps[1] {
            return Err(format!("{q}: bridge exponents differ between p=2 and p=3"));
        }
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{checks} pairings, bridge q^(dim G shift), same exponents at p=2,3"))
}

fn symbolic() -> Verdict {
    let start = Instant::now();
    let config = sweep(&[IdentityId::Symbolic]);
    let (len, m, pairs) = (
        config.symbolic.max_word_len,
        config.symbolic.max_m,
        config.symbolic.random_pairs,
    );
    if len < 4 || m < 3 || pairs < 100 {
        return Err("symbolic configuration below the required sizes".into());
    }
    let out = run_suite(&config);
    let checks = all_pass(&out, 10)?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{checks} word identities (|xy| <= {len}, m <= {m}) and {pairs} random products per twist"))
}

fn polynomiality() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&SuiteConfig {
        quivers: vec![
            NamedQuiver::new("A2", Quiver::a2()),
            NamedQuiver::new("A3", Quiver::a3()),
            NamedQuiver::new("point", Quiver::point()),
        ],
        families: vec![IdentityId::Polynomiality],
        polynomiality: PolynomialityConfig::default(),
        ..SuiteConfig::default()
    });
    all_pass(&out, 3)?;
    let mut series = 0;
    for r in &out.reports {
        let spot = r.data["spot_checked"].as_array().map(Vec::len).unwrap_or(0);
        if r.status != Status::Pass || spot < 3 {
            return Err(format!("{}: {spot} identities spot-checked at the held-out prime", describe(r)));
        }
        series += r.checked;
    }
    within(start, Duration::from_secs(1800))?;
    Ok(format!("{series} count series fitted at 2,3,5 and reproduced at 7"))
}

fn negative_controls() -> Verdict {
    let start = Instant::now();
    let out = run_suite(&SuiteConfig {
        corrupt: true,
        ..SuiteConfig::default()
    });
    let mut families = BTreeMap::new();
    for r in out.reports.iter().filter(|r| r.status != Status::Info) {
        if r.status != Status::Fail || r.witness.is_none() {
            return Err(format!("corrupted {} survived", describe(r)));
        }
        *families.entry(r.identity).or_insert(0) += 1;
    }
    let expected = IdentityId::ALL.len() - 1;
    if families.len() != expected {
        return Err(format!("{} of {expected} families exercised", families.len()));
    }
    within(start, Duration::from_secs(120))?;
    let failed: usize = families.values().sum();
    Ok(format!("{failed} corrupted reports in {} families all fail with a witness", families.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("orbit bookkeeping", orbits),
        ("associativity", associativity),
        ("Green compatibility", green),
        ("derivation product rules", product_rules),
        ("stratified refinement", stratification),
        ("quantum Serre relations", serre),
        ("pairing adjunction", pairing),
        ("symbolic layer", symbolic),
        ("multi-prime polynomiality", polynomiality),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} ({secs:.1}s)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
