//! Cones, the unit `x ↦ η_x`, and the bar extension.
//!
//! Simple valuations over a finite poset form the free cone on it: every
//! monotone `f` from the poset into a cone extends uniquely to the homomorphism
//! `f̄(Σ r_i·η_{b_i}) = ⨄ r_i ∗ f(b_i)`. This module provides the extension,
//! checkers for the cone axioms and for homomorphisms, and the pushforward
//! `P(f)(Σ r_i·η_{b_i}) = Σ r_i·η_{f(b_i)}` along monotone maps between posets.
//!
//! Joint continuity of the operations cannot be certified on an abstract cone
//! at this scale. The axiom report therefore adds monotonicity checks of `⊎`
//! and `∗` on the samples as a surrogate and says so in its note.

use std::fmt::Debug;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poset::Elem;
use crate::rational::Rational;
use crate::relations;
use crate::valuation::{ensure_same_space, SimpleValuation, Space};

/// A directed-space cone at finite scale: a carrier with zero, addition, a
/// nonnegative rational scalar action, an order and an equality test.
pub trait Cone {
    type Elem: Clone + Debug;

    fn name(&self) -> String;
    fn contains(&self, x: &Self::Elem) -> bool;
    fn zero(&self) -> Self::Elem;
    fn plus(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;
    /// `k ∗ x`; callers guarantee `k >= 0`.
    fn smul(&self, k: &Rational, x: &Self::Elem) -> Result<Self::Elem>;
    fn leq(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    fn equal(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
    /// JSON rendering for reports and the command line.
    fn render(&self, x: &Self::Elem) -> Value;
}

/// The nonnegative rationals with the usual operations and order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RationalCone;

pub fn rational_cone() -> RationalCone {
    RationalCone
}

impl Cone for RationalCone {
    type Elem = Rational;

    fn name(&self) -> String {
        "rational-cone".into()
    }

    fn contains(&self, x: &Rational) -> bool {
        !x.is_negative()
    }

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn plus(&self, x: &Rational, y: &Rational) -> Result<Rational> {
        Ok(x + y)
    }

    fn smul(&self, k: &Rational, x: &Rational) -> Result<Rational> {
        Ok(k * x)
    }

    fn leq(&self, x: &Rational, y: &Rational) -> bool {
        x <= y
    }

    fn equal(&self, x: &Rational, y: &Rational) -> bool {
        x == y
    }

    fn render(&self, x: &Rational) -> Value {
        Value::String(x.to_string())
    }
}

/// Simple valuations on a fixed space, ordered pointwise.
#[derive(Debug, Clone)]
pub struct CxCone {
    space: Space,
}

pub fn cx_cone(space: &Space) -> CxCone {
    CxCone {
        space: space.clone(),
    }
}

impl CxCone {
    pub fn space(&self) -> &Space {
        &self.space
    }
}

impl Cone for CxCone {
    type Elem = SimpleValuation;

    fn name(&self) -> String {
        format!("cx-cone({} points)", self.space.len())
    }

    fn contains(&self, x: &SimpleValuation) -> bool {
        ensure_same_space(&self.space, x.space()).is_ok()
    }

    fn zero(&self) -> SimpleValuation {
        SimpleValuation::zero(&self.space)
    }

    fn plus(&self, x: &SimpleValuation, y: &SimpleValuation) -> Result<SimpleValuation> {
        x.add(y)
    }

    fn smul(&self, k: &Rational, x: &SimpleValuation) -> Result<SimpleValuation> {
        x.scale(k)
    }

    fn leq(&self, x: &SimpleValuation, y: &SimpleValuation) -> bool {
        relations::leq(x, y).map(|d| d.verdict).unwrap_or(false)
    }

    fn equal(&self, x: &SimpleValuation, y: &SimpleValuation) -> bool {
        x.equal(y).unwrap_or(false)
    }

    fn render(&self, x: &SimpleValuation) -> Value {
        let mass: serde_json::Map<String, Value> = x
            .entries()
            .map(|(e, r)| (self.space.name(e).to_owned(), Value::String(r.to_string())))
            .collect();
        json!({ "mass": mass })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one law over all sampled cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCheck {
    pub axiom: String,
    pub status: Status,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl LawCheck {
    fn new(axiom: impl Into<String>) -> Self {
        LawCheck {
            axiom: axiom.into(),
            status: Status::Pass,
            cases: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.status = Status::Fail;
            if self.counterexample.is_none() {
                self.counterexample = Some(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub cone: String,
    pub axioms: Vec<LawCheck>,
    /// Monotonicity of `⊎` and `∗`, standing in for joint continuity.
    pub continuity_surrogate: Vec<LawCheck>,
    pub note: String,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().chain(&self.continuity_surrogate).all(LawCheck::passed)
    }

    pub fn check(&self, axiom_prefix: &str) -> Option<&LawCheck> {
        self.axioms
            .iter()
            .chain(&self.continuity_surrogate)
            .find(|c| c.axiom.starts_with(axiom_prefix))
    }
}

pub const AXIOMS: [&str; 8] = [
    "1: x+y=y+x",
    "2: (x+y)+z=x+(y+z)",
    "3: 0+x=x",
    "4: (kl)·x=k·(l·x)",
    "5: (k+l)·x=(k·x)+(l·x)",
    "6: k·(x+y)=(k·x)+(k·y)",
    "7: 1·x=x",
    "8: k·0=0",
];

/// Wraps a cone so every operation result is checked against the carrier.
struct Checked<'a, C: Cone>(&'a C);

impl<C: Cone> Checked<'_, C> {
    fn land(&self, op: &str, x: C::Elem) -> Result<C::Elem> {
        if self.0.contains(&x) {
            Ok(x)
        } else {
            Err(Error::CarrierViolation(format!("{op} produced {x:?}")))
        }
    }

    fn plus(&self, x: &C::Elem, y: &C::Elem) -> Result<C::Elem> {
        self.land("plus", self.0.plus(x, y)?)
    }

    fn smul(&self, k: &Rational, x: &C::Elem) -> Result<C::Elem> {
        self.land("smul", self.0.smul(k, x)?)
    }
}

/// Checks the eight cone equations exactly on every sample triple and scalar
/// pair, plus monotonicity of both operations.
pub fn check_cone_axioms<C: Cone>(
    cone: &C,
    samples: &[C::Elem],
    scalars: &[Rational],
) -> Result<AxiomReport> {
    if let Some(k) = scalars.iter().find(|k| k.is_negative()) {
        return Err(Error::NegativeScalar(k.clone()));
    }
    if let Some(x) = samples.iter().find(|x| !cone.contains(x)) {
        return Err(Error::CarrierViolation(format!("sample {x:?} is outside the carrier")));
    }
    let c = Checked(cone);
    let zero = c.land("zero", cone.zero())?;
    let one = Rational::one();
    let r = |x: &C::Elem| cone.render(x);
    let s = |k: &Rational| Value::String(k.to_string());
    let eq = |a: &C::Elem, b: &C::Elem| cone.equal(a, b);

    let mut checks: Vec<LawCheck> = AXIOMS.iter().map(|a| LawCheck::new(*a)).collect();
    for x in samples {
        checks[2].record(eq(&c.plus(&zero, x)?, x), || json!({ "x": r(x) }));
        checks[6].record(eq(&c.smul(&one, x)?, x), || json!({ "x": r(x) }));
        for y in samples {
            let xy = c.plus(x, y)?;
            checks[0].record(eq(&xy, &c.plus(y, x)?), || json!({ "x": r(x), "y": r(y) }));
            for z in samples {
                let lhs = c.plus(&xy, z)?;
                let rhs = c.plus(x, &c.plus(y, z)?)?;
                checks[1].record(eq(&lhs, &rhs), || json!({ "x": r(x), "y": r(y), "z": r(z) }));
            }
            for k in scalars {
                let lhs = c.smul(k, &xy)?;
                let rhs = c.plus(&c.smul(k, x)?, &c.smul(k, y)?)?;
                checks[5].record(eq(&lhs, &rhs), || json!({ "k": s(k), "x": r(x), "y": r(y) }));
            }
        }
        for k in scalars {
            for l in scalars {
                let lhs = c.smul(&(k * l), x)?;
                let rhs = c.smul(k, &c.smul(l, x)?)?;
                checks[3].record(eq(&lhs, &rhs), || json!({ "k": s(k), "l": s(l), "x": r(x) }));
                let lhs = c.smul(&(k + l), x)?;
                let rhs = c.plus(&c.smul(k, x)?, &c.smul(l, x)?)?;
                checks[4].record(eq(&lhs, &rhs), || json!({ "k": s(k), "l": s(l), "x": r(x) }));
            }
        }
    }
    for k in scalars {
        checks[7].record(eq(&c.smul(k, &zero)?, &zero), || json!({ "k": s(k) }));
    }

    let mut plus_mono = LawCheck::new("plus monotone: x≤x' ⟹ x+y≤x'+y");
    let mut smul_vec = LawCheck::new("smul monotone in the vector: x≤x' ⟹ k·x≤k·x'");
    let mut smul_scalar = LawCheck::new("smul monotone in the scalar: k≤l ⟹ k·x≤l·x");
    for x in samples {
        for x2 in samples {
            if !cone.leq(x, x2) {
                continue;
            }
            for y in samples {
                let ok = cone.leq(&c.plus(x, y)?, &c.plus(x2, y)?);
                plus_mono.record(ok, || json!({ "x": r(x), "x'": r(x2), "y": r(y) }));
            }
            for k in scalars {
                let ok = cone.leq(&c.smul(k, x)?, &c.smul(k, x2)?);
                smul_vec.record(ok, || json!({ "k": s(k), "x": r(x), "x'": r(x2) }));
            }
        }
        for k in scalars {
            for l in scalars.iter().filter(|l| k <= *l) {
                let ok = cone.leq(&c.smul(k, x)?, &c.smul(l, x)?);
                smul_scalar.record(ok, || json!({ "k": s(k), "l": s(l), "x": r(x) }));
            }
        }
    }

    Ok(AxiomReport {
        cone: cone.name(),
        axioms: checks,
        continuity_surrogate: vec![plus_mono, smul_vec, smul_scalar],
        note: "joint continuity is not certified; monotonicity of both operations on the samples is checked instead".into(),
    })
}

/// A monotone map from a finite poset into a cone.
#[derive(Debug, Clone)]
pub struct MonotoneMap<C: Cone> {
    source: Space,
    cone: C,
    graph: Vec<C::Elem>,
}

impl<C: Cone> MonotoneMap<C> {
    /// `graph[x]` is the image of element `x`. Monotonicity is checked on
    /// every comparable pair.
    pub fn new(source: &Space, cone: C, graph: Vec<C::Elem>) -> Result<Self> {
        if graph.len() != source.len() {
            return Err(Error::Document(format!(
                "map has {} images for {} elements",
                graph.len(),
                source.len()
            )));
        }
        if let Some((x, img)) = graph.iter().enumerate().find(|(_, y)| !cone.contains(y)) {
            return Err(Error::CarrierViolation(format!(
                "image {img:?} of {:?} lies outside {}",
                source.name(x),
                cone.name()
            )));
        }
        for x in source.elements() {
            for y in source.elements() {
                if source.lt(x, y) && !cone.leq(&graph[x], &graph[y]) {
                    return Err(Error::NonMonotoneMap {
                        lower: source.name(x).to_owned(),
                        upper: source.name(y).to_owned(),
                    });
                }
            }
        }
        Ok(MonotoneMap {
            source: source.clone(),
            cone,
            graph,
        })
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn cone(&self) -> &C {
        &self.cone
    }

    pub fn image(&self, x: Elem) -> &C::Elem {
        &self.graph[x]
    }

    pub fn graph(&self) -> &[C::Elem] {
        &self.graph
    }

    /// `self ∘ g` for a monotone `g` into this map's source.
    pub fn precompose(&self, g: &PosetMap) -> Result<MonotoneMap<C>>
    where
        C: Clone,
    {
        ensure_same_space(g.target(), &self.source)?;
        let graph = g.source().elements().map(|x| self.graph[g.apply(x)].clone()).collect();
        MonotoneMap::new(g.source(), self.cone.clone(), graph)
    }
}

/// `⨄_b r_b ∗ image(b)` over the support of `xi`, starting from the cone's zero.
pub fn bar_extension<C: Cone>(
    cone: &C,
    xi: &SimpleValuation,
    mut image: impl FnMut(Elem) -> Result<C::Elem>,
) -> Result<C::Elem> {
    xi.entries().try_fold(cone.zero(), |acc, (b, r)| {
        let term = cone.smul(r, &image(b)?)?;
        cone.plus(&acc, &term)
    })
}

/// The unique homomorphism `f̄` with `f̄(η_x) = f(x)`, applied to `xi`.
pub fn extend<C: Cone>(f: &MonotoneMap<C>, xi: &SimpleValuation) -> Result<C::Elem> {
    ensure_same_space(&f.source, xi.space())?;
    bar_extension(&f.cone, xi, |b| Ok(f.graph[b].clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomomorphismReport {
    pub additive: LawCheck,
    pub homogeneous: LawCheck,
    /// `h(η_x) = f(x)` for every point, when a unit map is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<LawCheck>,
    /// `h(ξ) = f̄(ξ)` on every sample, when a unit map is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees_with_extension: Option<LawCheck>,
}

impl HomomorphismReport {
    pub fn is_homomorphism(&self) -> bool {
        self.additive.passed() && self.homogeneous.passed()
    }

    pub fn passed(&self) -> bool {
        self.is_homomorphism()
            && self.unit.as_ref().is_none_or(LawCheck::passed)
            && self.agrees_with_extension.as_ref().is_none_or(LawCheck::passed)
    }
}

/// Checks `h(ξ+η) = h(ξ)⊎h(η)` and `h(a·ξ) = a∗h(ξ)` on the samples. With
/// `unit = Some(f)`, also checks `h∘i = f` and agreement with `f̄`; a
/// homomorphism passing the unit check must agree with `f̄` everywhere.
pub fn check_homomorphism<C: Cone>(
    cone: &C,
    h: impl Fn(&SimpleValuation) -> Result<C::Elem>,
    samples: &[SimpleValuation],
    scalars: &[Rational],
    unit: Option<&MonotoneMap<C>>,
) -> Result<HomomorphismReport> {
    if let Some(k) = scalars.iter().find(|k| k.is_negative()) {
        return Err(Error::NegativeScalar(k.clone()));
    }
    let v = |x: &SimpleValuation| Value::String(x.to_string());
    let mut additive = LawCheck::new("h(ξ+η)=h(ξ)⊎h(η)");
    let mut homogeneous = LawCheck::new("h(a·ξ)=a∗h(ξ)");
    for (i, x) in samples.iter().enumerate() {
        let hx = h(x)?;
        for y in &samples[i..] {
            let lhs = h(&x.add(y)?)?;
            let rhs = cone.plus(&hx, &h(y)?)?;
            additive.record(cone.equal(&lhs, &rhs), || json!({ "xi": v(x), "eta": v(y) }));
        }
        for a in scalars {
            let lhs = h(&x.scale(a)?)?;
            let rhs = cone.smul(a, &hx)?;
            homogeneous.record(cone.equal(&lhs, &rhs), || {
                json!({ "a": a.to_string(), "xi": v(x) })
            });
        }
    }

    let (unit_check, agreement) = match unit {
        None => (None, None),
        Some(f) => {
            let mut unit_check = LawCheck::new("h(η_x)=f(x)");
            for x in f.source.elements() {
                let point = SimpleValuation::point(&f.source, x)?;
                let ok = cone.equal(&h(&point)?, &f.graph[x]);
                unit_check.record(ok, || json!({ "x": f.source.name(x) }));
            }
            let mut agreement = LawCheck::new("h(ξ)=f̄(ξ)");
            for x in samples {
                let ok = cone.equal(&h(x)?, &extend(f, x)?);
                agreement.record(ok, || json!({ "xi": v(x) }));
            }
            (Some(unit_check), Some(agreement))
        }
    };
    Ok(HomomorphismReport {
        additive,
        homogeneous,
        unit: unit_check,
        agrees_with_extension: agreement,
    })
}

/// A monotone map between finite posets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetMap {
    source: Space,
    target: Space,
    graph: Vec<Elem>,
}

impl PosetMap {
    pub fn new(source: &Space, target: &Space, graph: Vec<Elem>) -> Result<Self> {
        if graph.len() != source.len() {
            return Err(Error::Document(format!(
                "map has {} images for {} elements",
                graph.len(),
                source.len()
            )));
        }
        for &y in &graph {
            target.check(y)?;
        }
        for x in source.elements() {
            for y in source.elements() {
                if source.lt(x, y) && !target.le(graph[x], graph[y]) {
                    return Err(Error::NonMonotoneMap {
                        lower: source.name(x).to_owned(),
                        upper: source.name(y).to_owned(),
                    });
                }
            }
        }
        Ok(PosetMap {
            source: source.clone(),
            target: target.clone(),
            graph,
        })
    }

    pub fn identity(space: &Space) -> Self {
        PosetMap {
            source: space.clone(),
            target: space.clone(),
            graph: space.elements().collect(),
        }
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn apply(&self, x: Elem) -> Elem {
        self.graph[x]
    }

    pub fn graph(&self) -> &[Elem] {
        &self.graph
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &PosetMap) -> Result<PosetMap> {
        ensure_same_space(&self.target, &next.source)?;
        Ok(PosetMap {
            source: self.source.clone(),
            target: next.target.clone(),
            graph: self.graph.iter().map(|&y| next.graph[y]).collect(),
        })
    }

    /// `x ↦ η_{f(x)}`, as a map into the valuation cone of the target.
    pub fn to_points(&self) -> MonotoneMap<CxCone> {
        let cone = cx_cone(&self.target);
        let graph = self
            .graph
            .iter()
            .map(|&y| SimpleValuation::from_canonical(&self.target, [(y, Rational::one())].into()))
            .collect();
        MonotoneMap {
            source: self.source.clone(),
            cone,
            graph,
        }
    }
}

/// Pushforward `Σ r_b·η_b ↦ Σ r_b·η_{f(b)}`, merging coefficients of identified points.
pub fn map_pp(f: &PosetMap, xi: &SimpleValuation) -> Result<SimpleValuation> {
    ensure_same_space(&f.source, xi.space())?;
    SimpleValuation::new(&f.target, xi.entries().map(|(b, r)| (f.graph[b], r.clone())))
}
