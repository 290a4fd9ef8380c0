use super::*;
use crate::hall::{Branch, HallElement};
use num_bigint::BigInt;
use proptest::prelude::*;

fn ctx(name: &str, q: Quiver, p: u32, maxdim: u32) -> CheckContext {
    CheckContext::new(name, Hall::with_budget(q, p, DEFAULT_BUDGET).unwrap(), maxdim)
}

fn per_prime_families() -> impl Iterator<Item = IdentityId> {
    IdentityId::ALL
        .into_iter()
        .filter(|id| !matches!(id, IdentityId::Polynomiality | IdentityId::Experiments))
}

fn small_config(families: Vec<IdentityId>) -> SuiteConfig {
    SuiteConfig {
        quivers: vec![
            NamedQuiver::new("A2", Quiver::a2()),
            NamedQuiver::new("point", Quiver::point()),
        ],
        maxdim: 3,
        point_maxdim: 3,
        families,
        polynomiality: PolynomialityConfig {
            maxdim: 2,
            point_maxdim: 3,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn identity_ids_round_trip() {
    for id in IdentityId::ALL {
        assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
        assert_eq!(serde_json::to_value(id).unwrap(), json!(id.as_str()));
    }
    assert!("serre".parse::<IdentityId>().is_err());
}

#[test]
fn every_family_passes_on_small_quivers() {
    for (name, q) in [("A2", Quiver::a2()), ("kronecker", Quiver::kronecker()), ("point", Quiver::point())] {
        let c = ctx(name, q, 2, 3);
        for id in per_prime_families() {
            for r in run_family(id, &c, &SymbolicConfig::default()) {
                assert!(r.passed(), "{id} on {name}: {:?} {:?}", r.witness, r.notes);
                assert!(r.checked > 0 || r.conventions.is_empty(), "{id} on {name} checked nothing");
            }
        }
    }
}

#[test]
fn serre_families_skip_one_vertex() {
    let c = ctx("point", Quiver::point(), 2, 3);
    for id in [IdentityId::SerreGenerators, IdentityId::SerreElements, IdentityId::SerreDerivations] {
        assert!(run_family(id, &c, &SymbolicConfig::default()).is_empty());
    }
}

#[test]
fn corrupted_fixtures_fail_with_witness() {
    for (name, q) in [("A2", Quiver::a2()), ("point", Quiver::point())] {
        let c = ctx(name, q.clone(), 3, 3).corrupted();
        for id in per_prime_families() {
            for r in run_family(id, &c, &SymbolicConfig::default()) {
                assert_eq!(r.status, Status::Fail, "{id} on {name} survived corruption");
                let w = r.witness.as_ref().expect("witness");
                assert!(!w.input.is_empty());
                assert_ne!(w.lhs, w.rhs);
            }
        }
    }
}

#[test]
fn green_needs_the_inverse_branch() {
    let r = verify_green_compatibility(&ctx("A2", Quiver::a2(), 2, 3)).unwrap();
    assert!(r.holds_under("v=+1/sqrt(q)"));
    assert!(r.holds_under("v=-1/sqrt(q)"));
    assert!(!r.holds_under("generic"));
    assert!(!r.holds_under("v=+sqrt(q)"));
}

#[test]
fn fixed_convention_decides_status() {
    let inv = Convention::Specialized(Specialization::new(Sign::Plus, Branch::Inv));
    let sqrt = Convention::Specialized(Specialization::new(Sign::Plus, Branch::Sqrt));
    let base = ctx("A2", Quiver::a2(), 2, 3);
    let r = verify_serre_elements(&base.clone().with_choice(ConventionChoice::Fixed(inv))).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert_eq!(r.convention.as_deref(), Some("v=+1/sqrt(q)"));
    let r = verify_serre_elements(&base.clone().with_choice(ConventionChoice::Fixed(sqrt))).unwrap();
    assert_eq!(r.status, Status::Pass);
    let r = verify_serre_elements(&base.clone().with_choice(ConventionChoice::Sign(Sign::Minus))).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.convention.as_deref(), Some("v=-sqrt(q)"));
    // families comparing Laurent polynomials only ignore a fixed specialization
    let r = verify_symbolic(&base.with_choice(ConventionChoice::Fixed(inv)), &SymbolicConfig::default())
        .unwrap();
    assert_eq!(r.status, Status::Pass);
}

#[test]
fn pairing_factor_is_the_normalization_shift() {
    for p in [2, 3] {
        let r = verify_pairing_adjunction(&ctx("A2", Quiver::a2(), p, 3)).unwrap();
        assert!(r.passed());
        assert_eq!(r.data["factor_is_group_dimension_shift"], json!(true));
        // 1,0 ⊗ 0,1: dim G goes from 1 + 1 to 2, no shift
        assert_eq!(
            r.data["bridge_exponents"]["split alpha=1,0 beta=0,1"]["half_powers"],
            json!(0)
        );
        // 1,0 ⊗ 1,0: dim G goes from 1 + 1 to 4, so q^{-2}, i.e. v^4 under v = 1/√q
        assert_eq!(
            r.data["bridge_exponents"]["split alpha=1,0 beta=1,0"]["half_powers"],
            json!(-4)
        );
    }
}

#[test]
fn suite_is_deterministic_and_consistent() {
    let config = small_config(IdentityId::ALL.to_vec());
    let a = run_suite(&config);
    let b = run_suite(&config);
    assert!(a.passed(), "{}", a.summary());
    assert!(a.table.consistent());
    let lines = |o: &SuiteOutcome| o.reports.iter().map(|r| r.to_json_line(false)).collect::<Vec<_>>();
    assert_eq!(lines(&a), lines(&b));
    assert!(!lines(&a)[0].contains("timing"));
    assert!(a.reports[0].to_json_line(true).contains("\"timing_ms\""));
    assert_eq!(
        a.table.row(IdentityId::Green).unwrap().pinned.as_deref(),
        Some("v=+1/sqrt(q)")
    );
    assert_eq!(a.table.row(IdentityId::Symbolic).unwrap().pinned.as_deref(), Some("generic"));
    assert!(a.table.row(IdentityId::Experiments).is_none());
}

#[test]
fn sign_choice_pins_a_consistent_table() {
    let mut config = small_config(vec![IdentityId::Green, IdentityId::SerreElements, IdentityId::Orbits]);
    config.choice = ConventionChoice::Sign(Sign::Minus);
    let out = run_suite(&config);
    assert!(out.passed(), "{}", out.summary());
    assert_eq!(out.table.row(IdentityId::Green).unwrap().pinned.as_deref(), Some("v=-1/sqrt(q)"));
    assert_eq!(
        out.table.row(IdentityId::SerreElements).unwrap().pinned.as_deref(),
        Some("v=-sqrt(q)")
    );
    assert_eq!(out.table.row(IdentityId::Orbits).unwrap().pinned.as_deref(), Some("exact"));
}

#[test]
fn a_fixed_branch_can_make_the_table_inconsistent() {
    let mut config = small_config(vec![IdentityId::SerreElements]);
    config.choice =
        ConventionChoice::Fixed(Convention::Specialized(Specialization::new(Sign::Plus, Branch::Inv)));
    let out = run_suite(&config);
    assert!(!out.passed());
    assert!(!out.table.consistent());
}

#[test]
fn interpolation_recovers_gaussian_counts() {
    // |Gr(1, 3)| = q² + q + 1
    let pts: Vec<(u32, u64)> = [2u32, 3, 5].iter().map(|&q| (q, u64::from(q * q + q + 1))).collect();
    let poly = fit_integer_polynomial(&pts).unwrap();
    assert_eq!(poly.coeffs(), &[BigInt::from(1), BigInt::from(1), BigInt::from(1)]);
    assert_eq!(poly.eval(7), BigInt::from(57));
    // 2^q is no polynomial; three points still interpolate, but not integrally
    let pts: Vec<(u32, u64)> = [2u32, 3, 5].iter().map(|&q| (q, 1u64 << q)).collect();
    assert!(fit_integer_polynomial(&pts).is_none());
}

#[test]
fn polynomiality_passes_and_detects_a_tampered_prime() {
    let cfg = PolynomialityConfig {
        maxdim: 2,
        point_maxdim: 3,
        ..Default::default()
    };
    let nq = NamedQuiver::new("A2", Quiver::a2());
    let r = verify_polynomiality(&nq, &cfg).unwrap();
    assert_eq!(r.status, Status::Pass, "{:?}", r.witness);
    assert!(r.data["spot_checked"].as_array().unwrap().len() >= 3);
    let bad = verify_polynomiality(&nq, &PolynomialityConfig { corrupt: true, ..cfg }).unwrap();
    assert_eq!(bad.status, Status::Fail);
    assert!(bad.witness.is_some());
}

#[test]
fn polynomiality_skips_kronecker() {
    let r = verify_polynomiality(
        &NamedQuiver::new("kronecker", Quiver::kronecker()),
        &PolynomialityConfig { maxdim: 2, ..Default::default() },
    )
    .unwrap();
    assert_eq!(r.status, Status::Info);
}

proptest! {
    #[test]
    fn interpolation_round_trips(coeffs in proptest::collection::vec(0u64..50, 1..4)) {
        let eval = |q: u64| coeffs.iter().rev().fold(0u64, |acc, c| acc * q + c);
        let pts: Vec<(u32, u64)> = [2u32, 3, 5].iter().map(|&q| (q, eval(u64::from(q)))).collect();
        let poly = fit_integer_polynomial(&pts).unwrap();
        prop_assert_eq!(poly.eval(7), BigInt::from(eval(7)));
        prop_assert_eq!(poly.eval(11), BigInt::from(eval(11)));
    }

    #[test]
    fn tally_keeps_the_first_witness(flips in proptest::collection::vec(any::<bool>(), 1..8)) {
        let one = HallElement::term(
            Hall::with_budget(Quiver::point(), 2, DEFAULT_BUDGET).unwrap().basis(&DimVector::new(vec![1])).unwrap()[0].clone(),
            LaurentPoly::one(),
        );
        let mut t = Tally::with(2, &[Convention::Generic]);
        for (k, f) in flips.iter().enumerate() {
            let rhs = if *f { one.scale(&LaurentPoly::v_pow(1)) } else { one.clone() };
            t.compare(|| k.to_string(), &one, &rhs);
        }
        let r = t.finish(Report::new(IdentityId::Symbolic, "point", vec![2]), ConventionChoice::Auto);
        match flips.iter().position(|f| *f) {
            Some(k) => {
                prop_assert_eq!(r.status, Status::Fail);
                prop_assert_eq!(r.witness.unwrap().input, k.to_string());
            }
            None => prop_assert_eq!(r.status, Status::Pass),
        }
        prop_assert_eq!(r.checked, flips.len() as u64);
    }
}
