//! Exact transportation feasibility.
//!
//! Rows carry supplies `r_b`, columns carry capacities `s_c`, and mass may
//! move from row `b` to column `c` only along an allowed pair. A plan ships
//! every row's supply exactly while keeping each column at or below (strict
//! mode: strictly below) its capacity.
//!
//! Instances are solved as bipartite max-flow problems. All rationals are
//! multiplied by the least common denominator, the integer network is solved
//! with Dinic's algorithm, and the flow is divided back down. When no plan
//! exists, the source side of a minimum cut yields a set of rows whose supply
//! exceeds the capacity they can reach.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportInstance {
    supplies: Vec<Rational>,
    capacities: Vec<Rational>,
    allowed: BTreeSet<(usize, usize)>,
    strict: bool,
}

impl TransportInstance {
    pub fn new(
        supplies: Vec<Rational>,
        capacities: Vec<Rational>,
        allowed: impl IntoIterator<Item = (usize, usize)>,
        strict: bool,
    ) -> Result<Self> {
        for (label, values) in [("row", &supplies), ("column", &capacities)] {
            if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_positive()) {
                return Err(Error::NonPositiveCoefficient(format!("{label} {i}"), v.clone()));
            }
        }
        let allowed: BTreeSet<(usize, usize)> = allowed.into_iter().collect();
        if let Some(&(b, c)) = allowed
            .iter()
            .find(|&&(b, c)| b >= supplies.len() || c >= capacities.len())
        {
            return Err(Error::UnknownElement(format!("pair ({b}, {c})")));
        }
        Ok(TransportInstance {
            supplies,
            capacities,
            allowed,
            strict,
        })
    }

    pub fn supplies(&self) -> &[Rational] {
        &self.supplies
    }

    pub fn capacities(&self) -> &[Rational] {
        &self.capacities
    }

    pub fn allowed(&self) -> &BTreeSet<(usize, usize)> {
        &self.allowed
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn rows(&self) -> usize {
        self.supplies.len()
    }

    pub fn cols(&self) -> usize {
        self.capacities.len()
    }

    pub fn total_supply(&self) -> Rational {
        self.supplies.iter().sum()
    }

    /// Columns reachable from at least one row of `rows`.
    pub fn reach(&self, rows: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.allowed
            .iter()
            .filter(|(b, _)| rows.contains(b))
            .map(|&(_, c)| c)
            .collect()
    }

    pub fn with_strict(&self, strict: bool) -> Self {
        TransportInstance {
            strict,
            ..self.clone()
        }
    }
}

/// Nonzero entries `t_{b,c}` of a transport matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransportPlan {
    entries: BTreeMap<(usize, usize), Rational>,
}

impl TransportPlan {
    pub fn from_entries(entries: impl IntoIterator<Item = ((usize, usize), Rational)>) -> Self {
        let mut map: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (k, v) in entries {
            *map.entry(k).or_default() += v;
        }
        map.retain(|_, v| !v.is_zero());
        TransportPlan { entries: map }
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Rational> {
        &self.entries
    }

    pub fn get(&self, b: usize, c: usize) -> Rational {
        self.entries.get(&(b, c)).cloned().unwrap_or_default()
    }

    pub fn row_sum(&self, b: usize) -> Rational {
        self.entries
            .iter()
            .filter(|((r, _), _)| *r == b)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn col_sum(&self, c: usize) -> Rational {
        self.entries
            .iter()
            .filter(|((_, k), _)| *k == c)
            .map(|(_, v)| v)
            .sum()
    }

    /// Re-substitutes the plan into the instance's constraints.
    pub fn validate(&self, inst: &TransportInstance) -> std::result::Result<(), String> {
        for (&(b, c), v) in &self.entries {
            if !v.is_positive() {
                return Err(format!("entry ({b}, {c}) = {v} is not positive"));
            }
            if !inst.allowed.contains(&(b, c)) {
                return Err(format!("entry ({b}, {c}) is outside the allowed relation"));
            }
        }
        for (b, r) in inst.supplies.iter().enumerate() {
            let sum = self.row_sum(b);
            if &sum != r {
                return Err(format!("row {b} ships {sum}, supply is {r}"));
            }
        }
        for (c, s) in inst.capacities.iter().enumerate() {
            let sum = self.col_sum(c);
            let ok = if inst.strict { &sum < s } else { &sum <= s };
            if !ok {
                let rel = if inst.strict { "<" } else { "<=" };
                return Err(format!("column {c} receives {sum}, needs {rel} {s}"));
            }
        }
        Ok(())
    }
}

/// A nonempty row set `K` with `Σ_K r_b > Σ_{R(K)} s_c` (strict mode: `>=`),
/// which rules out every plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallViolation {
    pub rows: BTreeSet<usize>,
    pub supply: Rational,
    pub reach_capacity: Rational,
}

impl HallViolation {
    fn for_rows(inst: &TransportInstance, rows: BTreeSet<usize>) -> Self {
        let supply = rows.iter().map(|&b| &inst.supplies[b]).sum();
        let reach_capacity = inst
            .reach(&rows)
            .iter()
            .map(|&c| &inst.capacities[c])
            .sum();
        HallViolation {
            rows,
            supply,
            reach_capacity,
        }
    }

    pub fn validate(&self, inst: &TransportInstance) -> std::result::Result<(), String> {
        if self.rows.is_empty() {
            return Err("empty row set".into());
        }
        if self.rows.iter().any(|&b| b >= inst.rows()) {
            return Err("row index out of range".into());
        }
        let fresh = Self::for_rows(inst, self.rows.clone());
        if fresh.supply != self.supply || fresh.reach_capacity != self.reach_capacity {
            return Err(format!(
                "recomputed sums {} / {} differ from claimed {} / {}",
                fresh.supply, fresh.reach_capacity, self.supply, self.reach_capacity
            ));
        }
        let violated = if inst.strict {
            self.supply >= self.reach_capacity
        } else {
            self.supply > self.reach_capacity
        };
        if violated {
            Ok(())
        } else {
            Err(format!(
                "supply {} does not exceed reachable capacity {}",
                self.supply, self.reach_capacity
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Plan(TransportPlan),
    Violation(HallViolation),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Plan(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: Rational,
    pub plan: TransportPlan,
}

/// Maximum total shipment with column sums `<= s_c` (the strict flag is ignored).
pub fn max_flow(inst: &TransportInstance) -> MaxFlow {
    let solved = solve(inst, &inst.capacities, None);
    MaxFlow {
        value: solved.value,
        plan: solved.plan,
    }
}

/// Decides whether a plan exists and returns it, or a Hall violation.
///
/// Strict instances are decided by the strict subset criterion
/// `Σ_K r_b < Σ_{R(K)} s_c` for every nonempty `K`. When it holds with minimum
/// slack `δ`, shrinking every capacity by `δ / (2·|cols|)` keeps the ordinary
/// Hall condition true, so a plan for the shrunk instance is a strict witness.
pub fn feasible_transport(inst: &TransportInstance) -> Feasibility {
    if inst.strict {
        feasible_strict(inst)
    } else {
        let solved = solve(inst, &inst.capacities, None);
        if solved.value == inst.total_supply() {
            Feasibility::Plan(solved.plan)
        } else {
            let rows: BTreeSet<usize> = solved.source_side_rows;
            Feasibility::Violation(HallViolation::for_rows(inst, rows))
        }
    }
}

/// `min over nonempty K of (Σ_{R(K)} s_c − Σ_K r_b)` and a minimizing `K`,
/// or `None` when there are no rows.
///
/// For each row `b`, pinning `b` to the source side of the cut makes the min
/// cut value equal `Σ r − max_{K ∋ b}(Σ_K r − Σ_{R(K)} s)`; the best `b` wins.
pub fn min_strict_slack(inst: &TransportInstance) -> Option<(Rational, BTreeSet<usize>)> {
    let total = inst.total_supply();
    (0..inst.rows())
        .map(|b| {
            let solved = solve(inst, &inst.capacities, Some(b));
            (solved.value - &total, solved.source_side_rows)
        })
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)))
}

fn feasible_strict(inst: &TransportInstance) -> Feasibility {
    let Some((slack, rows)) = min_strict_slack(inst) else {
        return Feasibility::Plan(TransportPlan::default());
    };
    if !slack.is_positive() {
        return Feasibility::Violation(HallViolation::for_rows(inst, rows));
    }
    // slack > 0 forces some reachable column, so cols() >= 1.
    let eps = &slack / Rational::from_integer(2 * inst.cols() as i64);
    let shrunk: Vec<Rational> = inst
        .capacities
        .iter()
        .map(|s| (s - &eps).max(Rational::zero()))
        .collect();
    let solved = solve(inst, &shrunk, None);
    assert!(
        solved.value == inst.total_supply(),
        "shrunk strict instance lost feasibility: slack {slack}, eps {eps}"
    );
    Feasibility::Plan(solved.plan)
}

struct Solved {
    value: Rational,
    plan: TransportPlan,
    source_side_rows: BTreeSet<usize>,
}

fn solve(inst: &TransportInstance, capacities: &[Rational], pinned: Option<usize>) -> Solved {
    let m = inst.rows();
    let n = inst.cols();
    let scale = common_denominator(inst.supplies.iter().chain(capacities));
    let supply: Vec<BigInt> = inst.supplies.iter().map(|r| r.scaled_to_integer(&scale)).collect();
    let cap: Vec<BigInt> = capacities.iter().map(|s| s.scaled_to_integer(&scale)).collect();
    let infinite: BigInt = supply.iter().chain(&cap).sum::<BigInt>() + BigInt::one();

    let source = 0;
    let sink = m + n + 1;
    let row = |b: usize| 1 + b;
    let col = |c: usize| 1 + m + c;

    let mut net = Network::new(m + n + 2);
    for (b, r) in supply.iter().enumerate() {
        let c = if pinned == Some(b) { infinite.clone() } else { r.clone() };
        net.add_edge(source, row(b), c);
    }
    let middle: Vec<((usize, usize), usize)> = inst
        .allowed
        .iter()
        .map(|&(b, c)| ((b, c), net.add_edge(row(b), col(c), infinite.clone())))
        .collect();
    for (c, s) in cap.iter().enumerate() {
        net.add_edge(col(c), sink, s.clone());
    }

    let value = net.max_flow(source, sink);
    let reachable = net.reachable_from(source);
    let to_rational = |x: BigInt| Rational::from_big(x, scale.clone());
    let plan = TransportPlan::from_entries(
        middle
            .into_iter()
            .map(|(key, e)| (key, to_rational(net.flow_on(e)))),
    );
    Solved {
        value: to_rational(value),
        plan,
        source_side_rows: (0..m).filter(|&b| reachable[row(b)]).collect(),
    }
}

/// Residual network for Dinic's algorithm over arbitrary-precision integers.
struct Network {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<BigInt>,
    original: Vec<BigInt>,
    level: Vec<Option<usize>>,
    cursor: Vec<usize>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            residual: Vec::new(),
            original: Vec::new(),
            level: vec![None; nodes],
            cursor: vec![0; nodes],
        }
    }

    /// Adds `u -> v`; the reverse residual edge is at `id ^ 1`.
    fn add_edge(&mut self, u: usize, v: usize, cap: BigInt) -> usize {
        let id = self.to.len();
        self.adj[u].push(id);
        self.to.push(v);
        self.residual.push(cap.clone());
        self.original.push(cap);
        self.adj[v].push(id + 1);
        self.to.push(u);
        self.residual.push(BigInt::zero());
        self.original.push(BigInt::zero());
        id
    }

    fn flow_on(&self, e: usize) -> BigInt {
        &self.original[e] - &self.residual[e]
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = None);
        self.level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let next = self.level[u].map(|l| l + 1);
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.level[v].is_none() && self.residual[e].is_positive() {
                    self.level[v] = next;
                    queue.push_back(v);
                }
            }
        }
        self.level[t].is_some()
    }

    fn dfs(&mut self, u: usize, t: usize, limit: &BigInt) -> BigInt {
        if u == t {
            return limit.clone();
        }
        while self.cursor[u] < self.adj[u].len() {
            let e = self.adj[u][self.cursor[u]];
            let v = self.to[e];
            let forward = match (self.level[u], self.level[v]) {
                (Some(lu), Some(lv)) => lv == lu + 1,
                _ => false,
            };
            if forward && self.residual[e].is_positive() {
                let bound = std::cmp::min(limit, &self.residual[e]).clone();
                let pushed = self.dfs(v, t, &bound);
                if pushed.is_positive() {
                    self.residual[e] -= &pushed;
                    self.residual[e ^ 1] += &pushed;
                    return pushed;
                }
            }
            self.cursor[u] += 1;
        }
        BigInt::zero()
    }

    fn max_flow(&mut self, s: usize, t: usize) -> BigInt {
        let mut total = BigInt::zero();
        let unbounded: BigInt = self.original.iter().sum::<BigInt>() + BigInt::one();
        while self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.dfs(s, t, &unbounded);
                if pushed.is_zero() {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.residual[e].is_positive() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
