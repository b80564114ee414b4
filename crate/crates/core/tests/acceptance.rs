//! Acceptance run: ten criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p powerspace-core --test acceptance`. The process
//! exits nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use powerspace_core::laws::{associativity_sides, random_monad_instance, random_pair};
use powerspace_core::oracle::{self, GridBounds};
use powerspace_core::poset::Elem;
use powerspace_core::sample;
use powerspace_core::semantics::Program;
use powerspace_core::{
    check_cone_axioms, check_homomorphism, converge_p, cx_cone, denote, extend, family_max, leq,
    llcurly, map_pp, rational_cone, waybelow_prec, DirectedFamily, FinitePoset, MonotoneMap,
    OrderDecision, PosetMap, Rational, Refutation, Relation, SimpleValuation, Space,
};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn mass(v: &SimpleValuation, s: &BTreeSet<Elem>) -> Rational {
    v.entries().filter(|(b, _)| s.contains(b)).map(|(_, r)| r.clone()).sum()
}

fn up_closure(p: &FinitePoset, s: &BTreeSet<Elem>) -> BTreeSet<Elem> {
    p.elements().filter(|&y| s.iter().any(|&x| p.le(x, y))).collect()
}

fn is_upper(p: &FinitePoset, s: &BTreeSet<Elem>) -> bool {
    up_closure(p, s) == *s
}

/// Supports of at most 4 points and denominators of at most 8.
fn small_pair(rng: &mut ChaCha8Rng, p: &Space) -> (SimpleValuation, SimpleValuation) {
    let fits = |v: &SimpleValuation| {
        v.support_len() <= 4 && v.mass().values().all(|r| *r.denom() <= 8.into())
    };
    loop {
        let (x, y) = random_pair(rng, p);
        if fits(&x) && fits(&y) {
            return (x, y);
        }
    }
}

/// Re-checks a certificate using only evaluations and the order.
fn certificate_holds(relation: Relation, d: &OrderDecision, x: &SimpleValuation, y: &SimpleValuation) -> bool {
    let p = x.space();
    let strict = relation == Relation::LlCurly;
    match (d.verdict, &d.witness, &d.refutation) {
        (true, Some(plan), None) => {
            let mut rows: BTreeMap<Elem, Rational> = BTreeMap::new();
            let mut cols: BTreeMap<Elem, Rational> = BTreeMap::new();
            for (&(b, c), t) in plan.entries() {
                if !t.is_positive() || !p.le(b, c) || y.coefficient(c).is_zero() {
                    return false;
                }
                *rows.entry(b).or_default() += t;
                *cols.entry(c).or_default() += t;
            }
            let rows_exact = x.entries().all(|(b, r)| rows.get(&b) == Some(r))
                && rows.keys().all(|&b| x.coefficient(b).is_positive());
            let cols_ok = cols.iter().all(|(&c, t)| {
                let s = y.coefficient(c);
                if strict {
                    *t < s
                } else {
                    *t <= s
                }
            });
            rows_exact && cols_ok
        }
        (false, None, Some(Refutation::SeparatingUpperSet { upper_set, .. })) => {
            !strict && is_upper(p, upper_set) && mass(x, upper_set) > mass(y, upper_set)
        }
        (false, None, Some(Refutation::HallSubset { subset, .. })) => {
            let in_support = !subset.is_empty() && subset.iter().all(|&b| x.coefficient(b).is_positive());
            let supply = mass(x, subset);
            let capacity = mass(y, &up_closure(p, subset));
            in_support && if strict { supply >= capacity } else { supply > capacity }
        }
        _ => false,
    }
}

struct Suite1 {
    pairs: Vec<(SimpleValuation, SimpleValuation)>,
    posets: usize,
}

fn criterion_suite() -> Suite1 {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let posets = sample::all_posets(5);
    let mut pairs = Vec::new();
    for p in &posets {
        let p: Space = Arc::new(p.clone());
        for _ in 0..12 {
            pairs.push(small_pair(&mut rng, &p));
        }
    }
    Suite1 {
        pairs,
        posets: posets.len(),
    }
}

fn c1(s: &Suite1) -> Verdict {
    let mut agree = 0;
    let mut positive = 0;
    for (x, y) in &s.pairs {
        let flow = leq(x, y).expect("leq").verdict;
        let pointwise = oracle::leq_pointwise(x, y).expect("oracle").is_none();
        agree += usize::from(flow == pointwise);
        positive += usize::from(pointwise);
    }
    let n = s.pairs.len();
    verdict(
        agree == n && s.posets >= 50 && n >= 1000,
        format!(
            "{agree}/{n} pairs agree over {} non-isomorphic posets (≤5 elements); {positive} true, {} false",
            s.posets,
            n - positive
        ),
    )
}

fn c2(s: &Suite1) -> Verdict {
    let mut checked = 0;
    let mut sound = 0;
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for (x, y) in &s.pairs {
        for relation in [Relation::Leq, Relation::LlCurly] {
            let d = relation.decide(x, y).expect("decision");
            checked += 1;
            let ok = certificate_holds(relation, &d, x, y) && d.validate(relation, x, y).is_ok();
            sound += usize::from(ok);
            let kind = match &d.refutation {
                None => "plan",
                Some(Refutation::SeparatingUpperSet { .. }) => "separating upper set",
                Some(Refutation::HallSubset { .. }) => "Hall subset",
            };
            *kinds.entry(kind).or_default() += 1;
        }
    }
    let kinds: Vec<String> = kinds.iter().map(|(k, n)| format!("{n} {k}")).collect();
    verdict(
        sound == checked,
        format!("{sound}/{checked} certificates re-validate ({})", kinds.join(", ")),
    )
}

fn c3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1200;
    let mut agree = 0;
    let mut positive = 0;
    for _ in 0..n {
        let p = sample::random_space(&mut rng, 5);
        let (x, y) = random_pair(&mut rng, &p);
        let strict = llcurly(&x, &y).expect("llcurly").verdict;
        let by_subsets = oracle::prec_by_subsets(&x, &y).expect("oracle");
        let ok = match waybelow_prec(&x, &y) {
            Ok(d) => d.verdict == strict && strict == by_subsets,
            Err(_) => false,
        };
        agree += usize::from(ok);
        positive += usize::from(strict);
    }
    verdict(
        agree == n,
        format!("{agree}/{n} pairs: prec ⟺ llcurly ⟺ subset definition; {positive} true"),
    )
}

fn c4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut spaces: Vec<Space> = sample::all_posets(4).into_iter().map(Arc::new).collect();
    spaces.extend((0..6).map(|_| Arc::new(sample::random_poset(&mut rng, 5, 0.4))));
    let scalars = vec![q(0, 1), q(1, 1), q(1, 3), q(5, 2)];
    let mut failures = 0;
    let mut min_cases = usize::MAX;
    for p in &spaces {
        let mut samples = vec![SimpleValuation::zero(p)];
        samples.extend((0..5).map(|_| sample::random_valuation(&mut rng, p, 3, 6)));
        let report = check_cone_axioms(&cx_cone(p), &samples, &scalars).expect("cone");
        failures += report.axioms.iter().filter(|c| !c.passed()).count();
        min_cases = min_cases.min(report.axioms[1].cases);
    }
    let numbers = vec![q(0, 1), q(1, 2), q(3, 1), q(7, 5), q(2, 3), q(1, 1)];
    let rational = check_cone_axioms(&rational_cone(), &numbers, &scalars).expect("cone");
    failures += rational.axioms.iter().filter(|c| !c.passed()).count();
    verdict(
        failures == 0 && min_cases >= 200,
        format!(
            "8 axioms on {} spaces, ≥{min_cases} triples per space, plus the rational cone ({} triples); {failures} failing axioms",
            spaces.len(),
            rational.axioms[1].cases
        ),
    )
}

/// `h(ξ) = Σ_U c_U·ξ(U)` over all upper sets with random weights `c_U >= 0`.
/// Every such `h` is a cone homomorphism into the rationals.
fn random_functional(rng: &mut ChaCha8Rng, p: &FinitePoset) -> Vec<(BTreeSet<Elem>, Rational)> {
    oracle::upper_sets_by_scan(p)
        .expect("scan")
        .into_iter()
        .filter_map(|u| {
            rng.random_bool(0.5)
                .then(|| (u, q(rng.random_range(0..=4), rng.random_range(1..=3))))
        })
        .collect()
}

fn apply_functional(h: &[(BTreeSet<Elem>, Rational)], xi: &SimpleValuation) -> Rational {
    h.iter().map(|(u, c)| c * mass(xi, u)).sum()
}

fn c5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spaces: Vec<Space> = sample::all_posets(4).into_iter().map(Arc::new).collect();
    let mut unit_points = 0;
    let mut unit_fail = 0;
    let mut hom_fail = 0;
    let mut compared = 0;
    let mut disagree = 0;
    for p in &spaces {
        for _ in 0..2 {
            let h = random_functional(&mut rng, p);
            let graph: Vec<Rational> = p
                .elements()
                .map(|x| apply_functional(&h, &SimpleValuation::point(p, x).expect("point")))
                .collect();
            let f = MonotoneMap::new(p, rational_cone(), graph).expect("h∘i is monotone");
            for x in p.elements() {
                unit_points += 1;
                let image = extend(&f, &SimpleValuation::point(p, x).expect("point")).expect("extend");
                unit_fail += usize::from(&image != f.image(x));
            }
            let samples: Vec<SimpleValuation> =
                (0..5).map(|_| sample::random_valuation(&mut rng, p, 4, 6)).collect();
            let scalars = vec![q(0, 1), q(2, 3), q(3, 1)];
            let report =
                check_homomorphism(&rational_cone(), |x| extend(&f, x), &samples, &scalars, Some(&f)).expect("check");
            hom_fail += usize::from(!report.passed());
            let sampled = check_homomorphism(
                &rational_cone(),
                |x| Ok(apply_functional(&h, x)),
                &samples,
                &scalars,
                Some(&f),
            )
            .expect("check");
            hom_fail += usize::from(!sampled.is_homomorphism() || !sampled.unit.as_ref().is_some_and(|u| u.passed()));
            for xi in &samples {
                compared += 1;
                disagree += usize::from(apply_functional(&h, xi) != extend(&f, xi).expect("extend"));
            }
        }
        let target = sample::random_space(&mut rng, 3);
        let (_, g) = sample::random_cx_map(&mut rng, p, &target, 4);
        let samples: Vec<SimpleValuation> = (0..3).map(|_| sample::random_valuation(&mut rng, p, 3, 4)).collect();
        let report = check_homomorphism(&cx_cone(&target), |x| extend(&g, x), &samples, &[q(1, 2)], Some(&g))
            .expect("check");
        hom_fail += usize::from(!report.passed());
    }
    verdict(
        unit_fail == 0 && hom_fail == 0 && disagree == 0 && compared >= 200,
        format!(
            "extend(f)∘i = f at {unit_points} points; homomorphism checks failing: {hom_fail}; sampled h with h∘i = f agrees with extend(f) on {}/{compared} valuations",
            compared - disagree
        ),
    )
}

fn c6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 600;
    let mut ok = 0;
    for _ in 0..n {
        let x = sample::random_space(&mut rng, 5);
        let y = sample::random_space(&mut rng, 5);
        let z = sample::random_space(&mut rng, 5);
        let f = sample::random_poset_map(&mut rng, &x, &y);
        let g = sample::random_poset_map(&mut rng, &y, &z);
        let xi = sample::random_valuation(&mut rng, &x, 4, 8);
        let identity = map_pp(&PosetMap::identity(&x), &xi).expect("map") == xi;
        let gf = f.then(&g).expect("compose");
        let composition =
            map_pp(&gf, &xi).expect("map") == map_pp(&g, &map_pp(&f, &xi).expect("map")).expect("map");
        ok += usize::from(identity && composition);
    }
    verdict(ok == n, format!("{ok}/{n} cases satisfy P(id) = id and P(g∘f) = P(g)∘P(f)"))
}

/// All valuations with support of at most 3 points and coefficients in {1/2, 1}.
fn small_valuations(p: &Space) -> Vec<SimpleValuation> {
    let n = p.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let support: Vec<Elem> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if support.len() > 3 {
            continue;
        }
        for coeffs in 0u32..(1 << support.len()) {
            let entries = support
                .iter()
                .enumerate()
                .map(|(i, &b)| (b, if coeffs & (1 << i) != 0 { q(1, 1) } else { q(1, 2) }));
            out.push(SimpleValuation::new(p, entries).expect("valuation"));
        }
    }
    out
}

fn c7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let families = 600;
    let mut sound = 0;
    let mut converging = 0;
    for _ in 0..families {
        let p = sample::random_space(&mut rng, 5);
        let size = rng.random_range(1..=4);
        let family = sample::random_family(&mut rng, &p, size, 4, 6);
        let xi = if rng.random_bool(0.6) {
            sample::random_below(&mut rng, family.max(), &q(1, 3))
        } else {
            sample::random_valuation(&mut rng, &p, 3, 6)
        };
        let c = converge_p(&family, &xi).expect("converge");
        let top = family_max(family.members()).expect("max");
        sound += usize::from(!c.verdict || leq(&xi, &top).expect("leq").verdict);
        converging += usize::from(c.verdict);
    }

    let mut pairs = 0;
    let mut singleton_agree = 0;
    for p in sample::all_posets(4) {
        let p: Space = Arc::new(p);
        let vals = small_valuations(&p);
        for eta in &vals {
            let family = DirectedFamily::new([eta.clone()]).expect("family");
            for xi in &vals {
                pairs += 1;
                let a = leq(xi, eta).expect("leq").verdict;
                let b = converge_p(&family, xi).expect("converge").verdict;
                singleton_agree += usize::from(a == b);
            }
        }
    }

    let mut brute = 0;
    let mut brute_agree = 0;
    let mut brute_true = 0;
    for p in sample::all_posets(4) {
        let p: Space = Arc::new(p);
        for _ in 0..20 {
            let size = rng.random_range(1..=3);
            let family = sample::random_grid_family(&mut rng, &p, size, 3, 2, 2);
            let xi = if rng.random_bool(0.5) {
                sample::random_below(&mut rng, family.max(), &q(1, 2))
            } else {
                sample::random_grid_valuation(&mut rng, &p, 3, 2, 2)
            };
            let exact = converge_p(&family, &xi).expect("converge").verdict;
            let by_definition = oracle::converge_by_definition(&family, &xi, GridBounds::default()).expect("brute");
            brute += 1;
            brute_agree += usize::from(exact == by_definition);
            brute_true += usize::from(exact);
        }
    }

    verdict(
        sound == families && singleton_agree == pairs && brute_agree == brute,
        format!(
            "⇒_P ⟹ ≤ max on {sound}/{families} families ({converging} converge); leq ⟺ {{η}} ⇒_P ξ on {singleton_agree}/{pairs} exhaustive pairs; bounded definition agrees on {brute_agree}/{brute} ({brute_true} converge)"
        ),
    )
}

fn c8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let want = 300;
    let mut triples = 0;
    let mut found = 0;
    let mut attempts = 0;
    while triples < want && attempts < 20 * want {
        attempts += 1;
        let p = sample::random_space(&mut rng, 5);
        let size = rng.random_range(1..=4);
        let family = sample::random_family(&mut rng, &p, size, 4, 6);
        let xi = sample::random_below(&mut rng, family.max(), &q(1, 3));
        let mu = sample::random_below(&mut rng, &xi, &q(1, 3)).scale(&q(1, 2)).expect("scale");
        if !converge_p(&family, &xi).expect("converge").verdict || !llcurly(&mu, &xi).expect("llcurly").verdict {
            continue;
        }
        triples += 1;
        found += usize::from(family.members().iter().any(|m| llcurly(&mu, m).expect("llcurly").verdict));
    }
    verdict(
        triples >= want && found == triples,
        format!("{found}/{triples} triples have a member in ⇑μ"),
    )
}

fn c9(s: &Suite1) -> Verdict {
    let mut checked = 0;
    let mut ok = 0;
    for (x, y) in &s.pairs {
        for v in [x, y] {
            checked += 1;
            let range = v.range().expect("range");
            let by_scan = oracle::range_by_scan(v).expect("scan");
            ok += usize::from(range.len() <= 1 << v.support_len() && range == by_scan);
        }
    }
    let mut chains = Vec::new();
    let mut chains_ok = true;
    for n in [4i64, 8, 16] {
        let names: Vec<String> = (1..=n).map(|i| q(i, n).to_string()).collect();
        let p: Space = Arc::new(sample::chain(&names));
        let uniform = SimpleValuation::from_named(&p, names.iter().map(|s| (s.as_str(), q(1, n)))).expect("uniform");
        let range = uniform.range().expect("range");
        let expected: BTreeSet<Rational> = (0..=n).map(|k| q(k, n)).collect();
        chains_ok &= range == expected;
        chains.push(format!("n={n}: |range|={}", range.len()));
    }
    verdict(
        ok == checked && chains_ok,
        format!(
            "{ok}/{checked} valuations have range ≤ 2^|support| matching the scan; uniform chain {}",
            chains.join(", ")
        ),
    )
}

fn c10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 320;
    let mut ok = 0;
    for _ in 0..n {
        let p = sample::random_space(&mut rng, 4);
        let (e, k1, k2, x) = random_monad_instance(&mut rng, &p);
        let left = denote(&Program::bind(Program::ret(x.clone()), k1.clone()), &p).expect("denote")
            == denote(&k1[&x], &p).expect("denote");
        let right = denote(&Program::bind(e.clone(), sample::identity_table(&p)), &p).expect("denote")
            == denote(&e, &p).expect("denote");
        let (lhs, rhs) = associativity_sides(&e, &k1, &k2);
        let assoc = denote(&lhs, &p).expect("denote") == denote(&rhs, &p).expect("denote");
        ok += usize::from(left && right && assoc);
    }
    verdict(ok == n, format!("{ok}/{n} programs satisfy left identity, right identity and associativity"))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let suite = criterion_suite();
    let criteria: Vec<Criterion> = vec![
        ("leq matches the pointwise oracle", Box::new(|| c1(&suite))),
        ("certificates re-validate", Box::new(|| c2(&suite))),
        ("prec agrees with llcurly", Box::new(c3)),
        ("cone axioms hold exactly", Box::new(c4)),
        ("freeness of the valuation cone", Box::new(c5)),
        ("functor laws", Box::new(c6)),
        ("⇒_P soundness and characterization", Box::new(c7)),
        ("⇑μ openness", Box::new(c8)),
        ("finite ranges", Box::new(|| c9(&suite))),
        ("monad laws for bind", Box::new(c10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        failed += usize::from(!v.passed);
        println!(
            "criterion {:>2} {}: {name}: {} ({:.1}s)",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
