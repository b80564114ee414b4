//! Seeded property suites over randomly generated inputs.
//!
//! Each suite draws `cases` independent cases. A case gets its own seed from
//! the suite's generator, and every failure report carries that seed. Among
//! the failures of one property the smallest counterexample is kept.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cone::{
    check_cone_axioms, check_homomorphism, cx_cone, extend, map_pp, rational_cone, MonotoneMap, PosetMap,
};
use crate::error::{Error, Result};
use crate::json::{valuation_json, PosetDoc};
use crate::oracle::{self, GridBounds};
use crate::poset::FinitePoset;
use crate::rational::Rational;
use crate::relations::{
    converge_p, interpolate, leq, llcurly, separate, waybelow_prec, DirectedFamily, Relation,
};
use crate::sample::{self, ProgramShape};
use crate::semantics::{denote, parse, Program};
use crate::valuation::{SimpleValuation, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Order,
    Cone,
    Free,
    Functor,
    Converge,
    Semantics,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Order,
        Suite::Cone,
        Suite::Free,
        Suite::Functor,
        Suite::Converge,
        Suite::Semantics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Order => "order",
            Suite::Cone => "cone",
            Suite::Free => "free",
            Suite::Functor => "functor",
            Suite::Converge => "converge",
            Suite::Semantics => "semantics",
        }
    }

    /// A suite name, or `all`.
    pub fn select(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            name.parse().map(|s| vec![s])
        }
    }

    fn salt(self) -> u64 {
        0x9e37_79b9_7f4a_7c15u64.wrapping_mul(self as u64 + 1)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_owned()))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    /// Run `cases` cases on every poset up to `max_elements` (at most 6)
    /// instead of on random posets.
    pub exhaustive: bool,
    pub max_elements: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            cases: 100,
            exhaustive: false,
            max_elements: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub property: String,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(skip)]
    size: usize,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub properties: Vec<PropertyOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.property == name)
    }
}

struct Tally {
    outcomes: Vec<PropertyOutcome>,
    case_seed: u64,
}

impl Tally {
    fn record(&mut self, property: &str, ok: bool, size: usize, witness: impl FnOnce() -> Value) {
        let idx = match self.outcomes.iter().position(|o| o.property == property) {
            Some(i) => i,
            None => {
                self.outcomes.push(PropertyOutcome {
                    property: property.to_owned(),
                    cases: 0,
                    failures: 0,
                    counterexample: None,
                    size: usize::MAX,
                });
                self.outcomes.len() - 1
            }
        };
        let out = &mut self.outcomes[idx];
        out.cases += 1;
        if !ok {
            out.failures += 1;
            if size < out.size {
                out.size = size;
                let mut w = witness();
                if let Value::Object(map) = &mut w {
                    map.insert("case_seed".into(), json!(self.case_seed));
                }
                out.counterexample = Some(w);
            }
        }
    }
}

fn space_json(p: &FinitePoset) -> Value {
    serde_json::to_value(PosetDoc::from_poset(p, None)).expect("poset serializes")
}

fn v(x: &SimpleValuation) -> Value {
    valuation_json(x)["mass"].clone()
}

fn size_of(p: &FinitePoset, vals: &[&SimpleValuation]) -> usize {
    p.len() * 100 + vals.iter().map(|x| x.support_len()).sum::<usize>()
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ suite.salt());
    let mut tally = Tally {
        outcomes: Vec::new(),
        case_seed: 0,
    };
    let spaces: Vec<Option<Space>> = if config.exhaustive {
        sample::all_posets(config.max_elements.min(sample::ALL_POSETS_MAX))
            .into_iter()
            .map(|p| Some(Arc::new(p)))
            .collect()
    } else {
        vec![None]
    };
    let mut total = 0;
    for fixed in &spaces {
        for _ in 0..config.cases {
            total += 1;
            tally.case_seed = rng.next_u64();
            let mut case_rng = ChaCha8Rng::seed_from_u64(tally.case_seed);
            let space = fixed
                .clone()
                .unwrap_or_else(|| sample::random_space(&mut case_rng, config.max_elements.max(1)));
            let result = match suite {
                Suite::Order => order_case(&mut case_rng, &space, &mut tally),
                Suite::Cone => cone_case(&mut case_rng, &space, &mut tally),
                Suite::Free => free_case(&mut case_rng, &space, &mut tally),
                Suite::Functor => functor_case(&mut case_rng, &space, config.max_elements, &mut tally),
                Suite::Converge => converge_case(&mut case_rng, &space, &mut tally),
                Suite::Semantics => semantics_case(&mut case_rng, &space, &mut tally),
            };
            if let Err(e) = result {
                tally.record("runs without error", false, space.len(), || {
                    json!({ "space": space_json(&space), "error": e.kind(), "message": e.to_string() })
                });
            }
        }
    }
    SuiteReport {
        suite: suite.name().into(),
        seed: config.seed,
        cases: total,
        properties: tally.outcomes,
    }
}

pub fn run_suites(suites: &[Suite], config: &SuiteConfig) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, config)).collect()
}

/// A pair `(ξ, η)` drawn so that both verdicts of `≤` and `⋘` occur often.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, p: &Space) -> (SimpleValuation, SimpleValuation) {
    let unit = Rational::new(1, rng.random_range(1..=4));
    match rng.random_range(0..4) {
        0 => (sample::random_valuation(rng, p, 4, 8), sample::random_valuation(rng, p, 4, 8)),
        1 => {
            let xi = sample::random_valuation(rng, p, 4, 8);
            let eta = sample::random_above(rng, &xi, &unit);
            (xi, eta)
        }
        2 => {
            let eta = sample::random_valuation(rng, p, 4, 8);
            let xi = sample::random_below(rng, &eta, &unit);
            (xi, eta)
        }
        _ => {
            let eta = sample::random_valuation(rng, p, 4, 8);
            let xi = sample::random_below(rng, &eta, &unit).scale(&Rational::new(1, 2)).expect("nonnegative");
            (xi, eta)
        }
    }
}

fn order_case(rng: &mut ChaCha8Rng, p: &Space, t: &mut Tally) -> Result<()> {
    let (xi, eta) = random_pair(rng, p);
    let size = size_of(p, &[&xi, &eta]);
    let w = || json!({ "space": space_json(p), "xi": v(&xi), "eta": v(&eta) });

    let d = leq(&xi, &eta)?;
    let oracle_leq = oracle::leq_pointwise(&xi, &eta)?.is_none();
    t.record("leq agrees with the pointwise oracle", d.verdict == oracle_leq, size, w);
    t.record("leq certificate re-validates", d.validate(Relation::Leq, &xi, &eta).is_ok(), size, w);

    let s = llcurly(&xi, &eta)?;
    t.record("llcurly certificate re-validates", s.validate(Relation::LlCurly, &xi, &eta).is_ok(), size, w);
    t.record("llcurly implies leq", !s.verdict || d.verdict, size, w);
    let prec = waybelow_prec(&xi, &eta)?;
    let by_subsets = oracle::prec_by_subsets(&xi, &eta)?;
    t.record(
        "prec agrees with llcurly and the subset oracle",
        prec.verdict == s.verdict && prec.verdict == by_subsets,
        size,
        w,
    );

    if s.verdict {
        let nu = sample::random_below(rng, &xi, &Rational::new(1, 2));
        let zeta = interpolate(&xi, &nu, &eta)?;
        let ok = llcurly(&xi, &zeta)?.verdict && llcurly(&nu, &zeta)?.verdict && llcurly(&zeta, &eta)?.verdict;
        t.record("interpolate lands strictly between", ok, size, w);
    }
    if !d.verdict {
        let zeta = separate(&xi, &eta)?;
        let ok = llcurly(&zeta, &xi)?.verdict && !leq(&zeta, &eta)?.verdict;
        t.record("separate stays way below and outside", ok, size, w);
    }

    let range = xi.range()?;
    let bound_ok = range.len() <= 1usize << xi.support_len();
    t.record("range is bounded by 2^|support|", bound_ok, size, w);
    t.record("range agrees with the upper-set scan", range == oracle::range_by_scan(&xi)?, size, w);

    let sum = xi.add(&eta)?;
    let additive = oracle::evaluation_table(&sum)?
        .iter()
        .map(|(u, r)| Ok(*r == xi.eval(u)? + eta.eval(u)?))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    t.record("eval is additive", additive, size, w);
    Ok(())
}

fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let d = rng.random_range(1..=6);
    Rational::new(rng.random_range(0..=3 * d), d)
}

fn cone_case(rng: &mut ChaCha8Rng, p: &Space, t: &mut Tally) -> Result<()> {
    let samples: Vec<SimpleValuation> = (0..3).map(|_| sample::random_valuation(rng, p, 3, 6)).collect();
    let scalars: Vec<Rational> = (0..3).map(|_| random_scalar(rng)).collect();
    let report = check_cone_axioms(&cx_cone(p), &samples, &scalars)?;
    let size = size_of(p, &samples.iter().collect::<Vec<_>>());
    for c in report.axioms.iter().chain(&report.continuity_surrogate) {
        t.record(&format!("cx-cone {}", c.axiom), c.passed(), size, || {
            json!({ "space": space_json(p), "counterexample": c.counterexample })
        });
    }

    let numbers: Vec<Rational> = (0..3).map(|_| random_scalar(rng)).collect();
    let report = check_cone_axioms(&rational_cone(), &numbers, &scalars)?;
    for c in report.axioms.iter().chain(&report.continuity_surrogate) {
        t.record(&format!("rational-cone {}", c.axiom), c.passed(), 0, || {
            json!({ "counterexample": c.counterexample })
        });
    }
    Ok(())
}

/// `h(ξ) = Σ_y w_y·ξ(↑y)`: a homomorphism into the rationals built from
/// evaluations on principal upper sets. It sends `η_x` to `Σ_{y ≤ x} w_y`.
fn through_opens(p: &FinitePoset, weights: &[Rational], xi: &SimpleValuation) -> Result<Rational> {
    p.elements().try_fold(Rational::zero(), |acc, y| Ok(acc + &weights[y] * xi.eval(&p.up_of(y))?))
}

fn free_case(rng: &mut ChaCha8Rng, p: &Space, t: &mut Tally) -> Result<()> {
    let weights = sample::random_weights(rng, p, 4);
    let graph = sample::accumulate(p, &weights, Rational::zero(), |a, b| a + b);
    let f = MonotoneMap::new(p, rational_cone(), graph)?;
    let samples: Vec<SimpleValuation> = (0..4).map(|_| sample::random_valuation(rng, p, 4, 6)).collect();
    let scalars: Vec<Rational> = (0..2).map(|_| random_scalar(rng)).collect();
    let size = size_of(p, &samples.iter().collect::<Vec<_>>());
    let w = || {
        json!({
            "space": space_json(p),
            "f": f.graph().iter().map(Rational::to_string).collect::<Vec<_>>(),
            "samples": samples.iter().map(v).collect::<Vec<_>>(),
        })
    };

    let unit_ok = p
        .elements()
        .map(|x| Ok(&extend(&f, &SimpleValuation::point(p, x)?)? == f.image(x)))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    t.record("extend(f)(η_x) = f(x) at every point", unit_ok, size, w);

    let report = check_homomorphism(&rational_cone(), |x| extend(&f, x), &samples, &scalars, Some(&f))?;
    t.record("extend(f) is a homomorphism", report.passed(), size, w);

    let h = |x: &SimpleValuation| through_opens(p, &weights, x);
    let report = check_homomorphism(&rational_cone(), h, &samples, &scalars, Some(&f))?;
    t.record("a homomorphism with h∘i = f equals extend(f)", report.passed(), size, w);

    if f.graph().iter().any(Rational::is_positive) {
        let doubled = |x: &SimpleValuation| extend(&f, &x.scale(&Rational::from_integer(2))?);
        let report = check_homomorphism(&rational_cone(), doubled, &samples, &scalars, Some(&f))?;
        let rejected = report.is_homomorphism() && !report.unit.as_ref().is_some_and(|u| u.passed());
        t.record("a homomorphism with h∘i ≠ f is told apart", rejected, size, w);
    }

    let mut monotone = true;
    for a in &samples {
        for b in &samples {
            if leq(a, b)?.verdict && extend(&f, a)? > extend(&f, b)? {
                monotone = false;
            }
        }
    }
    t.record("extend(f) is monotone", monotone, size, w);

    let q = sample::random_space(rng, 4);
    let (nu, g) = sample::random_cx_map(rng, p, &q, 4);
    let through = |x: &SimpleValuation| -> Result<SimpleValuation> {
        p.elements().try_fold(SimpleValuation::zero(&q), |acc, y| {
            acc.add(&nu[y].scale(&x.eval(&p.up_of(y))?)?)
        })
    };
    let report = check_homomorphism(&cx_cone(&q), through, &samples, &scalars, Some(&g))?;
    t.record("valuation-valued homomorphism with h∘i = f equals extend(f)", report.passed(), size, w);
    Ok(())
}

fn functor_case(rng: &mut ChaCha8Rng, x: &Space, max_n: usize, t: &mut Tally) -> Result<()> {
    let y = sample::random_space(rng, max_n.max(1));
    let z = sample::random_space(rng, max_n.max(1));
    let f = sample::random_poset_map(rng, x, &y);
    let g = sample::random_poset_map(rng, &y, &z);
    let xi = sample::random_valuation(rng, x, 4, 8);
    let eta = sample::random_above(rng, &xi, &Rational::new(1, 2));
    let size = x.len() * 100 + y.len() * 10 + z.len() + xi.support_len();
    let w = || {
        json!({
            "x": space_json(x), "y": space_json(&y), "z": space_json(&z),
            "f": f.graph().iter().map(|&e| y.name(e)).collect::<Vec<_>>(),
            "g": g.graph().iter().map(|&e| z.name(e)).collect::<Vec<_>>(),
            "xi": v(&xi), "eta": v(&eta),
        })
    };

    t.record("P(id) = id", map_pp(&PosetMap::identity(x), &xi)? == xi, size, w);
    let composed = map_pp(&f.then(&g)?, &xi)?;
    t.record("P(g∘f) = P(g)∘P(f)", composed == map_pp(&g, &map_pp(&f, &xi)?)?, size, w);
    t.record("P(f) = extend(η∘f)", map_pp(&f, &xi)? == extend(&f.to_points(), &xi)?, size, w);
    t.record("P(f) preserves total mass", map_pp(&f, &xi)?.total_mass() == xi.total_mass(), size, w);
    let mono = leq(&map_pp(&f, &xi)?, &map_pp(&f, &eta)?)?.verdict;
    t.record("P(f) is monotone", mono, size, w);

    let weights = sample::random_weights(rng, &y, 4);
    let graph = sample::accumulate(&y, &weights, Rational::zero(), |a, b| a + b);
    let h = MonotoneMap::new(&y, rational_cone(), graph)?;
    let natural = extend(&h.precompose(&f)?, &xi)? == extend(&h, &map_pp(&f, &xi)?)?;
    t.record("extend(h∘f) = extend(h)∘P(f)", natural, size, w);
    Ok(())
}

fn converge_case(rng: &mut ChaCha8Rng, p: &Space, t: &mut Tally) -> Result<()> {
    let fam_size = rng.random_range(1..=4);
    let family = sample::random_family(rng, p, fam_size, 4, 6);
    let top = family.max().clone();
    let unit = Rational::new(1, 3);
    let xi = match rng.random_range(0..3) {
        0 => sample::random_below(rng, &top, &unit),
        1 => sample::random_above(rng, &top, &unit),
        _ => sample::random_valuation(rng, p, 4, 6),
    };
    let size = size_of(p, &[&xi, &top]) + family.len();
    let w = || {
        json!({
            "space": space_json(p),
            "family": family.members().iter().map(v).collect::<Vec<_>>(),
            "xi": v(&xi),
        })
    };

    let c = converge_p(&family, &xi)?;
    t.record("converge_P implies ξ ≤ max", !c.verdict || leq(&xi, &top)?.verdict, size, w);
    t.record(
        "converge_P agrees with the assignment oracle",
        c.verdict == oracle::converge_by_assignments(&family, &xi)?,
        size,
        w,
    );
    if let Some(a) = &c.assignment {
        let lifted = SimpleValuation::new(p, xi.entries().map(|(b, r)| (a[&b], r.clone())))?;
        let ok = a.iter().all(|(&b, &m)| p.le(b, m)) && leq(&lifted, &top)?.verdict;
        t.record("the witness assignment lifts ξ below max", ok, size, w);
    }

    let eta = sample::random_valuation(rng, p, 3, 6);
    let single = DirectedFamily::new([eta.clone()])?;
    let agree = converge_p(&single, &xi)?.verdict == leq(&xi, &eta)?.verdict;
    t.record("converge_P({η}, ξ) iff ξ ≤ η", agree, size, w);
    let own = DirectedFamily::new([xi.clone()])?;
    t.record("{ξ} ⇒_P ξ", converge_p(&own, &xi)?.verdict, size, w);

    if c.verdict {
        let mu = sample::random_below(rng, &xi, &unit).scale(&Rational::new(1, 2))?;
        if llcurly(&mu, &xi)?.verdict {
            let mut hit = false;
            for m in family.members() {
                hit |= llcurly(&mu, m)?.verdict;
            }
            t.record("⇑μ is open: some member lies in it", hit, size, w);
        }
    }

    if p.len() <= 4 {
        let members = rng.random_range(1..=3);
        let fam = sample::random_grid_family(rng, p, members, 3, 2, 2);
        let xi = match rng.random_range(0..2) {
            0 => sample::random_below(rng, fam.max(), &Rational::new(1, 2)),
            _ => sample::random_grid_valuation(rng, p, 3, 2, 2),
        };
        let exact = converge_p(&fam, &xi)?.verdict;
        let brute = oracle::converge_by_definition(&fam, &xi, GridBounds::default())?;
        t.record("converge_P agrees with the bounded definition", exact == brute, size_of(p, &[&xi]), || {
            json!({
                "space": space_json(p),
                "family": fam.members().iter().map(v).collect::<Vec<_>>(),
                "xi": v(&xi),
            })
        });
    }
    Ok(())
}

/// Total mass predicted from the syntax: `ret` weighs 1, `choice` averages,
/// `scale` multiplies, `par` adds and `bind` weighs each continuation by the
/// mass the body puts on its state.
pub fn structural_mass(program: &Program, space: &Space) -> Result<Rational> {
    Ok(match program {
        Program::Ret(_) => Rational::one(),
        Program::Choice(q, l, r) => {
            q * structural_mass(l, space)? + (Rational::one() - q) * structural_mass(r, space)?
        }
        Program::Scale(a, e) => a * structural_mass(e, space)?,
        Program::Par(l, r) => structural_mass(l, space)? + structural_mass(r, space)?,
        Program::Bind(e, table) => {
            let body = denote(e, space)?;
            let mut total = Rational::zero();
            for (b, r) in body.entries() {
                let k = table
                    .get(space.name(b))
                    .ok_or_else(|| Error::MissingBinderEntry(space.name(b).to_owned()))?;
                total += r * structural_mass(k, space)?;
            }
            total
        }
    })
}

/// A random program, two monotone tables and a state, for the monad laws.
pub fn random_monad_instance<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
) -> (Program, BTreeMap<String, Program>, BTreeMap<String, Program>, String) {
    let shape = ProgramShape {
        depth: 2,
        ..ProgramShape::default()
    };
    let e = sample::random_program(rng, space, &shape);
    let k1 = sample::random_table(rng, space, &ProgramShape { depth: 1, ..shape.clone() });
    let k2 = sample::random_table(rng, space, &ProgramShape { depth: 1, ..shape });
    let x = space.name(rng.random_range(0..space.len())).to_owned();
    (e, k1, k2, x)
}

/// `bind (bind e k1) k2` and `bind e (s ↦ bind (k1 s) k2)`.
pub fn associativity_sides(
    e: &Program,
    k1: &BTreeMap<String, Program>,
    k2: &BTreeMap<String, Program>,
) -> (Program, Program) {
    let lhs = Program::bind(Program::bind(e.clone(), k1.clone()), k2.clone());
    let nested = k1
        .iter()
        .map(|(s, k)| (s.clone(), Program::bind(k.clone(), k2.clone())))
        .collect();
    (lhs, Program::bind(e.clone(), nested))
}

fn semantics_case(rng: &mut ChaCha8Rng, p: &Space, t: &mut Tally) -> Result<()> {
    let (e, k1, k2, x) = random_monad_instance(rng, p);
    let size = p.len() * 1000 + e.size();
    let w = || {
        json!({
            "space": space_json(p),
            "program": e.to_string(),
            "k1": k1.iter().map(|(s, k)| (s.clone(), k.to_string())).collect::<BTreeMap<_, _>>(),
            "k2": k2.iter().map(|(s, k)| (s.clone(), k.to_string())).collect::<BTreeMap<_, _>>(),
            "state": x,
        })
    };

    let left = denote(&Program::bind(Program::ret(x.clone()), k1.clone()), p)?;
    t.record("bind (ret x) k = k x", left.equal(&denote(&k1[&x], p)?)?, size, w);
    let de = denote(&e, p)?;
    let right = denote(&Program::bind(e.clone(), sample::identity_table(p)), p)?;
    t.record("bind e ret = e", right.equal(&de)?, size, w);
    let (lhs, rhs) = associativity_sides(&e, &k1, &k2);
    t.record("bind is associative", denote(&lhs, p)?.equal(&denote(&rhs, p)?)?, size, w);

    let mass = de.eval(&p.carrier())?;
    t.record("total mass matches the program structure", mass == structural_mass(&e, p)?, size, w);
    t.record("printing and parsing round-trips", parse(&e.to_string(), p)? == e, size, w);

    let mut mono = true;
    for s in p.elements() {
        for s2 in p.elements().filter(|&s2| p.le(s, s2)) {
            let a = denote(&Program::ret(p.name(s)), p)?;
            let b = denote(&Program::ret(p.name(s2)), p)?;
            mono &= leq(&a, &b)?.verdict;
        }
    }
    t.record("ret is monotone in its state", mono, size, w);
    Ok(())
}
