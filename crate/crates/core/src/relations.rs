//! Order relations on simple valuations, each decided with a checkable
//! certificate.
//!
//! * `ξ ≤ η` holds iff a transport plan moves every coefficient of `ξ` upward
//!   into `η` without overfilling any point of `η`. A failure yields a Hall
//!   subset `K`, and `U = ↑K` separates: `ξ(U) > η(U)`.
//! * `ξ ≺ μ` asks `Σ_{b ∈ K} r_b < μ(↑K)` for every nonempty `K ⊆ supp ξ`.
//! * `μ ⋘ ν` asks for a plan with every column strictly below capacity.
//!
//! On a finite poset the interior of `↑b` is `↑b` itself, so `≺` and `⋘`
//! reduce to the same strict Hall condition and are cross-checked.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poset::{Elem, Subset};
use crate::rational::Rational;
use crate::transport::{self, Feasibility, HallViolation, TransportInstance, TransportPlan};
use crate::valuation::{ensure_same_space, SimpleValuation, Space};

/// Supports above this size skip the subset enumeration in [`waybelow_prec`].
pub const PREC_ENUM_CAP: usize = 20;

/// Budget of order checks spent looking for a lifted assignment in [`converge_p`].
const LIFT_SEARCH_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Leq,
    Prec,
    LlCurly,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Leq => "leq",
            Relation::Prec => "prec",
            Relation::LlCurly => "llcurly",
        }
    }

    pub fn is_strict(self) -> bool {
        !matches!(self, Relation::Leq)
    }

    pub fn decide(self, lhs: &SimpleValuation, rhs: &SimpleValuation) -> Result<OrderDecision> {
        match self {
            Relation::Leq => leq(lhs, rhs),
            Relation::Prec => waybelow_prec(lhs, rhs),
            Relation::LlCurly => llcurly(lhs, rhs),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leq" => Ok(Relation::Leq),
            "prec" => Ok(Relation::Prec),
            "llcurly" => Ok(Relation::LlCurly),
            other => Err(Error::Document(format!("unknown relation {other:?}"))),
        }
    }
}

/// Why a relation fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    /// An upper set `U` with `lhs(U) > rhs(U)`.
    SeparatingUpperSet {
        upper_set: Subset,
        lhs: Rational,
        rhs: Rational,
    },
    /// A nonempty `K ⊆ supp lhs` whose mass is not below `rhs(↑K)`
    /// (strictly exceeds it, for the non-strict relation).
    HallSubset {
        subset: Subset,
        supply: Rational,
        reach_capacity: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderDecision {
    pub verdict: bool,
    /// Transport plan keyed by `(lhs point, rhs point)`.
    pub witness: Option<TransportPlan>,
    pub refutation: Option<Refutation>,
}

impl OrderDecision {
    fn holds(plan: TransportPlan) -> Self {
        OrderDecision {
            verdict: true,
            witness: Some(plan),
            refutation: None,
        }
    }

    fn fails(refutation: Refutation) -> Self {
        OrderDecision {
            verdict: false,
            witness: None,
            refutation: Some(refutation),
        }
    }

    /// Re-checks the certificate against the inputs from scratch.
    pub fn validate(
        &self,
        relation: Relation,
        lhs: &SimpleValuation,
        rhs: &SimpleValuation,
    ) -> std::result::Result<(), String> {
        let space = lhs.space();
        match (self.verdict, &self.witness, &self.refutation) {
            (true, Some(plan), None) => {
                for (&(b, c), t) in plan.entries() {
                    if !t.is_positive() {
                        return Err(format!("nonpositive entry at ({b}, {c})"));
                    }
                    if !space.le(b, c) {
                        return Err(format!(
                            "mass moves from {} to {}, which is not above it",
                            space.name(b),
                            space.name(c)
                        ));
                    }
                    if lhs.coefficient(b).is_zero() || rhs.coefficient(c).is_zero() {
                        return Err(format!("entry ({b}, {c}) is off the supports"));
                    }
                }
                for (b, r) in lhs.entries() {
                    if &plan.row_sum(b) != r {
                        return Err(format!("row {} does not ship exactly {r}", space.name(b)));
                    }
                }
                for (c, s) in rhs.entries() {
                    let got = plan.col_sum(c);
                    let ok = if relation.is_strict() { &got < s } else { &got <= s };
                    if !ok {
                        return Err(format!("column {} receives {got} against {s}", space.name(c)));
                    }
                }
                Ok(())
            }
            (false, None, Some(Refutation::SeparatingUpperSet { upper_set, lhs: l, rhs: r })) => {
                if relation != Relation::Leq {
                    return Err("separating upper sets only refute leq".into());
                }
                let (el, er) = (
                    lhs.eval(upper_set).map_err(|e| e.to_string())?,
                    rhs.eval(upper_set).map_err(|e| e.to_string())?,
                );
                if (&el, &er) != (l, r) {
                    return Err(format!("claimed {l} > {r}, recomputed {el} vs {er}"));
                }
                if el > er {
                    Ok(())
                } else {
                    Err(format!("{el} does not exceed {er}"))
                }
            }
            (false, None, Some(Refutation::HallSubset { subset, supply, reach_capacity })) => {
                if subset.is_empty() || subset.iter().any(|&b| lhs.coefficient(b).is_zero()) {
                    return Err("Hall subset must be a nonempty part of the lhs support".into());
                }
                let up = space.up_set(subset).map_err(|e| e.to_string())?;
                let s = lhs.mass_in(subset);
                let cap = rhs.mass_in(&up);
                if (&s, &cap) != (supply, reach_capacity) {
                    return Err(format!("claimed {supply} vs {reach_capacity}, recomputed {s} vs {cap}"));
                }
                let refuted = if relation.is_strict() { s >= cap } else { s > cap };
                if refuted {
                    Ok(())
                } else {
                    Err(format!("{s} against {cap} refutes nothing"))
                }
            }
            _ => Err("verdict and certificate do not match".into()),
        }
    }
}

/// Transport instance from the support of `lhs` to the support of `rhs`,
/// allowing `b -> c` exactly when `b <= c`.
struct Coupling {
    rows: Vec<Elem>,
    cols: Vec<Elem>,
    instance: TransportInstance,
}

impl Coupling {
    fn new(lhs: &SimpleValuation, rhs: &SimpleValuation, strict: bool) -> Result<Self> {
        ensure_same_space(lhs.space(), rhs.space())?;
        let space = lhs.space();
        let rows: Vec<Elem> = lhs.support().collect();
        let cols: Vec<Elem> = rhs.support().collect();
        let allowed: Vec<(usize, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, &b)| {
                cols.iter()
                    .enumerate()
                    .filter(move |&(_, &c)| space.le(b, c))
                    .map(move |(j, _)| (i, j))
            })
            .collect();
        let instance = TransportInstance::new(
            lhs.mass().values().cloned().collect(),
            rhs.mass().values().cloned().collect(),
            allowed,
            strict,
        )?;
        Ok(Coupling { rows, cols, instance })
    }

    fn element_plan(&self, plan: &TransportPlan) -> TransportPlan {
        TransportPlan::from_entries(
            plan.entries()
                .iter()
                .map(|(&(i, j), t)| ((self.rows[i], self.cols[j]), t.clone())),
        )
    }

    fn element_rows(&self, v: &HallViolation) -> Subset {
        v.rows.iter().map(|&i| self.rows[i]).collect()
    }

    fn solve(&self) -> Feasibility {
        transport::feasible_transport(&self.instance)
    }
}

/// Pointwise order `ξ ≤ η`.
pub fn leq(xi: &SimpleValuation, eta: &SimpleValuation) -> Result<OrderDecision> {
    let coupling = Coupling::new(xi, eta, false)?;
    Ok(match coupling.solve() {
        Feasibility::Plan(plan) => OrderDecision::holds(coupling.element_plan(&plan)),
        Feasibility::Violation(v) => {
            let upper_set = xi.space().up_set(&coupling.element_rows(&v))?;
            OrderDecision::fails(Refutation::SeparatingUpperSet {
                lhs: xi.mass_in(&upper_set),
                rhs: eta.mass_in(&upper_set),
                upper_set,
            })
        }
    })
}

/// Strict transport `μ ⋘ ν`.
pub fn llcurly(mu: &SimpleValuation, nu: &SimpleValuation) -> Result<OrderDecision> {
    let coupling = Coupling::new(mu, nu, true)?;
    Ok(match coupling.solve() {
        Feasibility::Plan(plan) => OrderDecision::holds(coupling.element_plan(&plan)),
        Feasibility::Violation(v) => OrderDecision::fails(Refutation::HallSubset {
            subset: coupling.element_rows(&v),
            supply: v.supply,
            reach_capacity: v.reach_capacity,
        }),
    })
}

/// First nonempty `K ⊆ supp ξ` (in bitmask order) with `Σ_K r_b >= μ(↑K)`.
fn prec_violation_by_subsets(xi: &SimpleValuation, mu: &SimpleValuation) -> Option<(Subset, Rational, Rational)> {
    let support: Vec<Elem> = xi.support().collect();
    let k = support.len();
    (1u64..(1u64 << k)).find_map(|bits| {
        let subset: Subset = (0..k).filter(|i| bits >> i & 1 == 1).map(|i| support[i]).collect();
        let supply = xi.mass_in(&subset);
        // K is a subset of the carrier, so up_set cannot fail here.
        let up = xi.space().up_set(&subset).ok()?;
        let reach = mu.mass_in(&up);
        (supply >= reach).then_some((subset, supply, reach))
    })
}

/// `ξ ≺ μ`, decided by subset enumeration and by strict transport; the two
/// must agree.
pub fn waybelow_prec(xi: &SimpleValuation, mu: &SimpleValuation) -> Result<OrderDecision> {
    let by_flow = llcurly(xi, mu)?;
    if xi.support_len() > PREC_ENUM_CAP {
        return Ok(by_flow);
    }
    let by_subsets = prec_violation_by_subsets(xi, mu);
    if by_subsets.is_none() != by_flow.verdict {
        return Err(Error::Internal(format!(
            "subset criterion and strict transport disagree on {xi} ≺ {mu}"
        )));
    }
    Ok(match by_subsets {
        None => by_flow,
        Some((subset, supply, reach_capacity)) => OrderDecision::fails(Refutation::HallSubset {
            subset,
            supply,
            reach_capacity,
        }),
    })
}

/// `min over nonempty K ⊆ supp μ of ν(↑K) − μ(K)`; `None` when `μ` is zero.
pub fn strict_slack(mu: &SimpleValuation, nu: &SimpleValuation) -> Result<Option<Rational>> {
    let coupling = Coupling::new(mu, nu, true)?;
    Ok(transport::min_strict_slack(&coupling.instance).map(|(s, _)| s))
}

fn require(decision: &OrderDecision, what: impl FnOnce() -> String) -> Result<()> {
    if decision.verdict {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(what()))
    }
}

fn certify(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Internal(what()))
    }
}

/// Given `μ, ν ⋘ ξ`, returns `ξ′` with `μ, ν ⋘ ξ′ ⋘ ξ`.
///
/// `ξ′ = Σ_c (s_c − ε)·η_c` over the support of `ξ`, where `ε` is the
/// smallest of the two strict slacks and the least coefficient of `ξ`,
/// divided by `2·|supp ξ|`.
pub fn interpolate(
    mu: &SimpleValuation,
    nu: &SimpleValuation,
    xi: &SimpleValuation,
) -> Result<SimpleValuation> {
    require(&llcurly(mu, xi)?, || format!("{mu} ⋘ {xi} fails"))?;
    require(&llcurly(nu, xi)?, || format!("{nu} ⋘ {xi} fails"))?;

    let out = if xi.is_zero() {
        xi.clone()
    } else {
        let mut bound = xi.mass().values().min().cloned().unwrap_or_default();
        for slack in [strict_slack(mu, xi)?, strict_slack(nu, xi)?].into_iter().flatten() {
            bound = bound.min(slack);
        }
        let eps = bound / Rational::from_integer(2 * xi.support_len() as i64);
        let mass: BTreeMap<Elem, Rational> = xi.entries().map(|(c, s)| (c, s - &eps)).collect();
        SimpleValuation::new(xi.space(), mass)?
    };

    certify(llcurly(mu, &out)?.verdict, || format!("{mu} ⋘ {out} not certified"))?;
    certify(llcurly(nu, &out)?.verdict, || format!("{nu} ⋘ {out} not certified"))?;
    certify(llcurly(&out, xi)?.verdict, || format!("{out} ⋘ {xi} not certified"))?;
    Ok(out)
}

/// Given `μ ≰ ν`, returns `ξ′ ⋘ μ` with `ξ′ ≰ ν`.
///
/// Shrinks every coefficient of `μ` by `ε = ½·min(min_b r_b, margin/|supp μ|)`,
/// where `margin = μ(U) − ν(U)` on the separating upper set from [`leq`].
pub fn separate(mu: &SimpleValuation, nu: &SimpleValuation) -> Result<SimpleValuation> {
    let decision = leq(mu, nu)?;
    let Some(Refutation::SeparatingUpperSet { lhs, rhs, .. }) = decision.refutation else {
        return Err(Error::PreconditionFailed(format!("{mu} ≤ {nu} holds")));
    };
    let margin = lhs - rhs;
    let k = Rational::from_integer(mu.support_len() as i64);
    let least = mu.mass().values().min().cloned().unwrap_or_default();
    let eps = least.min(margin / k) / Rational::from_integer(2);
    let mass: BTreeMap<Elem, Rational> = mu
        .entries()
        .map(|(b, r)| (b, r - &eps))
        .filter(|(_, r)| r.is_positive())
        .collect();
    let out = SimpleValuation::new(mu.space(), mass)?;

    certify(llcurly(&out, mu)?.verdict, || format!("{out} ⋘ {mu} not certified"))?;
    certify(!leq(&out, nu)?.verdict, || format!("{out} ≰ {nu} not certified"))?;
    Ok(out)
}

/// A finite family of simple valuations that is directed under `≤`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedFamily {
    space: Space,
    members: Vec<SimpleValuation>,
    max: usize,
}

impl DirectedFamily {
    /// Checks directedness. Duplicate members are dropped, keeping first occurrences.
    pub fn new(members: impl IntoIterator<Item = SimpleValuation>) -> Result<Self> {
        let mut unique: Vec<SimpleValuation> = Vec::new();
        for m in members {
            if let Some(first) = unique.first() {
                ensure_same_space(first.space(), m.space())?;
            }
            if !unique.contains(&m) {
                unique.push(m);
            }
        }
        let space = unique
            .first()
            .map(|m| m.space().clone())
            .ok_or_else(|| Error::NotDirected("empty family".into()))?;

        // A finite set is directed iff it has a greatest element, and that
        // element carries the largest total mass.
        let top_mass = unique.iter().map(SimpleValuation::total_mass).max().unwrap_or_default();
        let mut max = None;
        for (i, cand) in unique.iter().enumerate() {
            if cand.total_mass() != top_mass {
                continue;
            }
            let mut above_all = true;
            for other in &unique {
                if !leq(other, cand)?.verdict {
                    above_all = false;
                    break;
                }
            }
            if above_all {
                max = Some(i);
                break;
            }
        }
        let max = max.ok_or_else(|| {
            Error::NotDirected("no member lies above all others".into())
        })?;
        Ok(DirectedFamily {
            space,
            members: unique,
            max,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn members(&self) -> &[SimpleValuation] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The greatest member.
    pub fn max(&self) -> &SimpleValuation {
        &self.members[self.max]
    }
}

/// The greatest member of a finite family; fails with `NotDirected` if none exists.
pub fn family_max(members: &[SimpleValuation]) -> Result<SimpleValuation> {
    DirectedFamily::new(members.iter().cloned()).map(|f| f.max().clone())
}

/// Outcome of a `𝒟 ⇒_P ξ` decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergence {
    pub verdict: bool,
    /// Support point `b` of `ξ` mapped to a point `m >= b`, with
    /// `Σ r_b·η_m <= max 𝒟`.
    pub assignment: Option<BTreeMap<Elem, Elem>>,
    /// On failure, an upper set where `ξ` exceeds the family's maximum.
    pub obstruction: Option<Refutation>,
}

/// Decides `𝒟 ⇒_P ξ` for a finite directed family.
///
/// Any directed `D_i` converging to `b_i` has a maximum `m_i >= b_i` that
/// already meets the tuple condition, and the quantifier over coefficients
/// `r′ < r` closes up against the family's maximum `M`. So the relation holds
/// iff some lift `b_i ↦ m_i >= b_i` has `Σ r_{b_i}·η_{m_i} <= M`. Since
/// `η_b <= η_m` whenever `b <= m`, the identity lift is the least candidate:
/// the verdict is `ξ <= M`. The search then looks for a lift that lands on the
/// support of `M` where possible, which is the more informative witness.
pub fn converge_p(family: &DirectedFamily, xi: &SimpleValuation) -> Result<Convergence> {
    ensure_same_space(family.space(), xi.space())?;
    let top = family.max();
    let decision = leq(xi, top)?;
    if !decision.verdict {
        return Ok(Convergence {
            verdict: false,
            assignment: None,
            obstruction: decision.refutation,
        });
    }
    let identity: BTreeMap<Elem, Elem> = xi.support().map(|b| (b, b)).collect();
    let assignment = LiftSearch::new(xi, top).run()?.unwrap_or(identity);
    Ok(Convergence {
        verdict: true,
        assignment: Some(assignment),
        obstruction: None,
    })
}

/// Depth-first search over lifts `b_i ↦ m_i`, pruning partial sums that are
/// already not below the target and memoizing failed partial states.
struct LiftSearch<'a> {
    space: &'a Space,
    points: Vec<(Elem, Rational)>,
    candidates: Vec<Vec<Elem>>,
    target: &'a SimpleValuation,
    failed: HashSet<(usize, Vec<(Elem, Rational)>)>,
    budget: usize,
}

impl<'a> LiftSearch<'a> {
    fn new(xi: &'a SimpleValuation, target: &'a SimpleValuation) -> Self {
        let space = xi.space();
        let top_support: BTreeSet<Elem> = target.support().collect();
        let candidates = xi
            .support()
            .map(|b| {
                let mut c: Vec<Elem> = top_support
                    .iter()
                    .copied()
                    .filter(|&m| space.le(b, m))
                    .collect();
                if !c.contains(&b) {
                    c.push(b);
                }
                c.extend(space.up_of(b).into_iter().filter(|m| !top_support.contains(m) && *m != b));
                c
            })
            .collect();
        LiftSearch {
            space,
            points: xi.entries().map(|(b, r)| (b, r.clone())).collect(),
            candidates,
            target,
            failed: HashSet::new(),
            budget: LIFT_SEARCH_BUDGET,
        }
    }

    fn run(mut self) -> Result<Option<BTreeMap<Elem, Elem>>> {
        let mut chosen = Vec::with_capacity(self.points.len());
        let found = self.extend(0, &mut chosen, &BTreeMap::new())?;
        Ok(found.then(|| {
            self.points
                .iter()
                .zip(&chosen)
                .map(|(&(b, _), &m)| (b, m))
                .collect()
        }))
    }

    fn extend(
        &mut self,
        depth: usize,
        chosen: &mut Vec<Elem>,
        partial: &BTreeMap<Elem, Rational>,
    ) -> Result<bool> {
        if depth == self.points.len() {
            return Ok(true);
        }
        let key = (depth, partial.iter().map(|(&e, r)| (e, r.clone())).collect::<Vec<_>>());
        if self.failed.contains(&key) {
            return Ok(false);
        }
        let r = self.points[depth].1.clone();
        for m in self.candidates[depth].clone() {
            if self.budget == 0 {
                return Ok(false);
            }
            self.budget -= 1;
            let mut next = partial.clone();
            *next.entry(m).or_default() += &r;
            let candidate = SimpleValuation::from_canonical(self.space, next.clone());
            if !leq(&candidate, self.target)?.verdict {
                continue;
            }
            chosen.push(m);
            if self.extend(depth + 1, chosen, &next)? {
                return Ok(true);
            }
            chosen.pop();
        }
        self.failed.insert(key);
        Ok(false)
    }
}
