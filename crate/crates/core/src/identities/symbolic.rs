//! Checks on the free algebra: the product rules of the twisted derivations
//! as word identities, the two-sided commutation, and multiplicativity of
//! the evaluation map. Also the recorded experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{describe_factor, CheckContext, IdentityError, IdentityId, Report, Status, Tally};
use crate::hall::{Convention, Specialization, Twist};
use crate::laurent::{rational, LaurentPoly};
use crate::uminus::{words_up_to, Evaluator, FreeAlgebra, FreeElement, Side, Word};

type Res<T> = Result<T, IdentityError>;

#[derive(Clone, Debug)]
pub struct SymbolicConfig {
    /// Longest word `xy` in the product-rule check.
    pub max_word_len: usize,
    pub max_m: u32,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for SymbolicConfig {
    fn default() -> Self {
        Self {
            max_word_len: 4,
            max_m: 3,
            random_pairs: 100,
            seed: 0x5eed,
        }
    }
}

/// `ᵢr^m(xy)` against the product-rule expansion for every split `xy` of
/// every word of length `≤ max_word_len` and `m ≤ max_m`, on both sides;
/// `ᵢr ∘ r_j = r_j ∘ ᵢr` on the same words; and
/// `eval(xy) = eval(x) ∗ eval(y)` on random pairs for both twists.
pub fn verify_symbolic(ctx: &CheckContext, cfg: &SymbolicConfig) -> Res<Report> {
    let algebra = FreeAlgebra::new(ctx.quiver());
    let n = algebra.vertex_count();
    let hall = &ctx.hall;
    let mut tally = Tally::with(hall.q(), &[Convention::Generic]);
    let words = words_up_to(n, cfg.max_word_len);
    let mut rules = 0u64;
    for x in &words {
        for y in words.iter().filter(|y| x.len() + y.len() <= cfg.max_word_len) {
            let (fx, fy) = (FreeElement::word(x.clone()), FreeElement::word(y.clone()));
            let xy = fx.multiply(&fy);
            for i in 0..n {
                for side in [Side::Left, Side::Right] {
                    let mut lhs = xy.clone();
                    for m in 1..=cfg.max_m {
                        lhs = algebra.derivation(&lhs, i, side);
                        let mut rhs = algebra.product_rule_rhs(&fx, &fy, i, m, side);
                        if ctx.corrupt && m == 1 && !x.is_empty() && !y.is_empty() {
                            rhs = rhs.scale(&LaurentPoly::v_pow(1));
                        }
                        rules += 1;
                        tally.compare(
                            || format!("{side:?} r_{i}^{m} of {x:?}·{y:?}"),
                            &free_as_hall(&lhs),
                            &free_as_hall(&rhs),
                        );
                    }
                }
            }
        }
    }
    let mut commuting = 0u64;
    for w in &words {
        let fw = FreeElement::word(w.clone());
        for i in 0..n {
            for j in 0..n {
                let a = algebra.derivation_right(&algebra.derivation_left(&fw, i), j);
                let b = algebra.derivation_left(&algebra.derivation_right(&fw, j), i);
                commuting += 1;
                tally.compare(
                    || format!("left r_{i} and right r_{j} on {w:?}"),
                    &free_as_hall(&a),
                    &free_as_hall(&b),
                );
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(hall.p()));
    let twist_list: &[Twist] = if ctx.corrupt {
        &[Twist::Corrupted]
    } else {
        &[Twist::Ringel, Twist::Geometric]
    };
    for &twist in twist_list {
        let mut ev = Evaluator::with_twist(hall, twist);
        for k in 0..cfg.random_pairs {
            let x = random_element(&mut rng, n);
            let y = random_element(&mut rng, n);
            let lhs = ev.evaluate(&x.multiply(&y))?;
            let rhs = hall.induce(&ev.evaluate(&x)?, &ev.evaluate(&y)?, twist)?;
            tally.compare(|| format!("{twist:?} pair #{k}: eval({x:?} · {y:?})"), &lhs, &rhs);
        }
    }
    let report = ctx
        .report(IdentityId::Symbolic)
        .param("max_word_len", cfg.max_word_len)
        .param("max_m", cfg.max_m)
        .param("random_pairs", cfg.random_pairs)
        .param("seed", cfg.seed)
        .param("product_rule_checks", rules)
        .param("commutation_checks", commuting);
    Ok(tally.finish(report, ctx.choice))
}

/// Words as a `HallElement`-shaped map so the comparison machinery applies:
/// each word becomes a key of the zero-dimensional grading.
fn free_as_hall(x: &FreeElement) -> crate::hall::Element<WordKey, LaurentPoly> {
    let mut out = crate::hall::Element::zero();
    for (w, c) in x.terms() {
        out.add_term(WordKey(w.clone()), c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct WordKey(Word);

impl crate::hall::BasisKey for WordKey {
    fn write_json(&self, obj: &mut serde_json::Map<String, Value>) {
        obj.insert("word".into(), json!(self.0));
    }
}

/// One or two words of length `≤ 2` with coefficients `c·v^e`.
fn random_element(rng: &mut ChaCha8Rng, n: usize) -> FreeElement {
    let mut out = FreeElement::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let len = rng.gen_range(0..=2);
        let w: Word = (0..len).map(|_| rng.gen_range(0..n)).collect();
        let mut c = rng.gen_range(-3i64..=3);
        if c == 0 {
            c = 1;
        }
        let e = rng.gen_range(-2i64..=2);
        out.add_term(w, &LaurentPoly::monomial(rational(c), e));
    }
    out
}

/// Records, without asserting:
/// - whether `eval(ᵢr^m(w)) = v^{m(m−1)/2} D(ₘᵢℛ(D eval(w)))` on words of
///   length `≤ 3`, with `D` the bar involution on coefficients and the
///   identity on classes, for each twist, each side of the free derivation
///   and each side of the Hall derivation;
/// - the factor relating `L_{ti} ∗ L_{si}` to `f_{t+s,t} L_{(t+s)i}`.
pub fn verify_experiments(ctx: &CheckContext) -> Res<Report> {
    let hall = &ctx.hall;
    let q = hall.q();
    let algebra = FreeAlgebra::new(ctx.quiver());
    let n = algebra.vertex_count();
    let words = words_up_to(n, 3);
    let mut comparisons = Vec::new();
    for twist in [Twist::Ringel, Twist::Geometric] {
        let mut ev = Evaluator::with_twist(hall, twist);
        for side in [Side::Left, Side::Right] {
            for hall_sub in [true, false] {
                let mut tally = Tally::new(q);
                for w in &words {
                    let fw = FreeElement::word(w.clone());
                    let dual = ev.evaluate(&fw)?.map_coefficients(LaurentPoly::bar);
                    for i in 0..n {
                        for m in 1..=2u32 {
                            let free = ev.evaluate(&algebra.iterated_derivation(&fw, i, m, side))?;
                            let derived = if hall_sub {
                                hall.derive_sub(&dual, i, m)?
                            } else {
                                hall.derive_quot(&dual, i, m)?
                            };
                            let shift = LaurentPoly::v_pow(i64::from(m * (m - 1) / 2));
                            let rhs = derived.map_coefficients(LaurentPoly::bar).scale(&shift);
                            tally.compare(|| format!("{w:?} i={i} m={m}"), &free, &rhs);
                        }
                    }
                }
                let r = tally.finish(Report::new(IdentityId::Experiments, &ctx.name, vec![hall.p()]), ctx.choice);
                let holding: Vec<String> =
                    r.conventions.iter().filter(|o| o.pass).map(|o| o.convention.clone()).collect();
                comparisons.push(json!({
                    "twist": twist,
                    "free_side": side,
                    "hall_derivation": if hall_sub { "sub" } else { "quot" },
                    "holding": holding,
                    "first_mismatch": r.witness,
                }));
            }
        }
    }
    let mut divided = Vec::new();
    for i in 0..n {
        for m in 2..=3u32 {
            for t in 1..m {
                let d = hall.divided_power_class_relation(i, t, m - t)?;
                let factors: serde_json::Map<String, Value> = Specialization::ALL
                    .iter()
                    .map(|sp| (sp.to_string(), json!(describe_factor(d.factor(*sp)))))
                    .collect();
                divided.push(json!({
                    "vertex": i,
                    "t": t,
                    "m": m,
                    "coefficient": d.coefficient.to_string(),
                    "factors": factors,
                }));
            }
        }
    }
    let mut report = ctx.report(IdentityId::Experiments);
    report.status = Status::Info;
    report.data = json!({
        "bar_conjugated_derivation": comparisons,
        "divided_powers": divided,
    });
    Ok(report)
}
