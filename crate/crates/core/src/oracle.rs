//! Brute-force reference implementations used to cross-check the deciders.
//!
//! Nothing here calls the flow solver. Upper sets come from a plain scan of
//! all subsets and valuations are compared by evaluating them directly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::poset::{Elem, FinitePoset, Subset};
use crate::rational::{common_denominator, Rational};
use crate::relations::DirectedFamily;
use crate::transport::TransportInstance;
use crate::valuation::{ensure_same_space, SimpleValuation};

/// Largest poset the subset scans accept.
pub const ORACLE_CAP: usize = 16;

fn guard(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        Err(Error::SizeLimitExceeded { size: n, cap: ORACLE_CAP })
    } else {
        Ok(())
    }
}

fn subset_of_mask(n: usize, mask: u32) -> Subset {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// All upper sets, found by testing each of the `2^n` subsets for closure.
pub fn upper_sets_by_scan(p: &FinitePoset) -> Result<Vec<Subset>> {
    let n = p.len();
    guard(n)?;
    Ok((0u32..(1 << n))
        .filter(|&mask| {
            (0..n).all(|x| mask & (1 << x) == 0 || (0..n).all(|y| !p.le(x, y) || mask & (1 << y) != 0))
        })
        .map(|mask| subset_of_mask(n, mask))
        .collect())
}

fn mass_on(v: &SimpleValuation, u: &Subset) -> Rational {
    v.entries().filter(|(b, _)| u.contains(b)).map(|(_, r)| r).sum()
}

/// `ξ ≤ η` checked on every upper set; returns the first violating set.
pub fn leq_pointwise(xi: &SimpleValuation, eta: &SimpleValuation) -> Result<Option<Subset>> {
    ensure_same_space(xi.space(), eta.space())?;
    Ok(upper_sets_by_scan(xi.space())?
        .into_iter()
        .find(|u| mass_on(xi, u) > mass_on(eta, u)))
}

/// Hall's condition over every nonempty set of rows: supply is at most
/// (strict mode: below) the capacity of the columns it can reach.
pub fn transport_by_hall(inst: &TransportInstance) -> Result<bool> {
    let m = inst.rows();
    guard(m)?;
    for mask in 1u32..(1 << m) {
        let rows: BTreeSet<usize> = subset_of_mask(m, mask);
        let supply: Rational = rows.iter().map(|&b| &inst.supplies()[b]).sum();
        let reach: BTreeSet<usize> = inst
            .allowed()
            .iter()
            .filter(|(b, _)| rows.contains(b))
            .map(|&(_, c)| c)
            .collect();
        let capacity: Rational = reach.iter().map(|&c| &inst.capacities()[c]).sum();
        let ok = if inst.is_strict() { supply < capacity } else { supply <= capacity };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every assignment `b ↦ m_b` with `b ≤ m_b`, in lexicographic order.
fn assignments(p: &FinitePoset, support: &[Elem]) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for &b in support {
        let ups: Vec<Elem> = p.elements().filter(|&m| p.le(b, m)).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                ups.iter().map(move |&m| {
                    let mut next = prefix.clone();
                    next.push(m);
                    next
                })
            })
            .collect();
    }
    out
}

/// The finite `⇒_P` characterization by exhaustive search: some assignment
/// `b ↦ m_b ≥ b` puts `Σ r_b·η_{m_b}` below some member of the family.
pub fn converge_by_assignments(family: &DirectedFamily, xi: &SimpleValuation) -> Result<bool> {
    ensure_same_space(family.space(), xi.space())?;
    let p = xi.space();
    let support: Vec<Elem> = xi.support().collect();
    for choice in assignments(p, &support) {
        let lifted = SimpleValuation::new(
            p,
            support.iter().zip(&choice).map(|(&b, &m)| (m, xi.coefficient(b))),
        )?;
        for member in family.members() {
            if leq_pointwise(&lifted, member)?.is_none() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Limits for [`converge_by_definition`].
#[derive(Debug, Clone, Copy)]
pub struct GridBounds {
    /// Largest directed set tried for each support point.
    pub max_directed: usize,
    /// `r′` ranges over multiples of `1/grid` strictly below each coefficient.
    pub grid: i64,
}

impl Default for GridBounds {
    fn default() -> Self {
        GridBounds { max_directed: 3, grid: 8 }
    }
}

fn converges_by_definition(d: &Subset, x: Elem, opens: &[Subset]) -> bool {
    opens.iter().all(|u| !u.contains(&x) || d.iter().any(|e| u.contains(e)))
}

fn directed_by_definition(p: &FinitePoset, d: &Subset) -> bool {
    !d.is_empty()
        && d.iter()
            .all(|&a| d.iter().all(|&b| d.iter().any(|&c| p.le(a, c) && p.le(b, c))))
}

/// The definition of `⇒_P` restricted to a finite search space: for each
/// support point `b_i` pick a directed `D_i` (at most `max_directed`
/// elements) converging to `b_i`, such that for every `d ∈ Π D_i` and every
/// grid vector `r′ < r` some member dominates `Σ r′_i·η_{d_i}`.
///
/// Agrees with the exact characterization whenever the gap between distinct
/// values of the family and of `ξ` on upper sets exceeds
/// `|supp ξ|/grid`, e.g. half-integer coefficients, support at most 3, grid 8.
pub fn converge_by_definition(
    family: &DirectedFamily,
    xi: &SimpleValuation,
    bounds: GridBounds,
) -> Result<bool> {
    ensure_same_space(family.space(), xi.space())?;
    let p = xi.space();
    let n = p.len();
    guard(n)?;
    let opens = upper_sets_by_scan(p)?;

    let grid = Rational::from_integer(bounds.grid);
    let mut all: Vec<&Rational> = xi.mass().values().collect();
    for m in family.members() {
        all.extend(m.mass().values());
    }
    all.push(&grid);
    let scale = common_denominator(all.iter().copied()) * bounds.grid;
    let to_units = |r: &Rational| -> i64 {
        r.scaled_to_integer(&scale).to_i64().expect("oracle magnitudes fit in i64")
    };
    let step = to_units(&Rational::new(1, bounds.grid));

    let support: Vec<Elem> = xi.support().collect();
    let coeffs: Vec<i64> = support.iter().map(|&b| to_units(&xi.coefficient(b))).collect();
    let members: Vec<Vec<i64>> = family
        .members()
        .iter()
        .map(|m| opens.iter().map(|u| to_units(&mass_on(m, u))).collect())
        .collect();

    let candidate_sets: Vec<Vec<Subset>> = support
        .iter()
        .map(|&b| {
            (1u32..(1 << n))
                .map(|mask| subset_of_mask(n, mask))
                .filter(|d| d.len() <= bounds.max_directed)
                .filter(|d| directed_by_definition(p, d) && converges_by_definition(d, b, &opens))
                .collect()
        })
        .collect();

    let grid_points: Vec<Vec<i64>> = coeffs
        .iter()
        .map(|&r| (0..).map(|k| k * step).take_while(|&v| v < r).collect())
        .collect();

    let mut memo: HashMap<Vec<Elem>, bool> = HashMap::new();
    let mut dominated = |d: &[Elem]| -> bool {
        if let Some(&hit) = memo.get(d) {
            return hit;
        }
        let mut ok = true;
        let mut idx = vec![0usize; d.len()];
        'grid: loop {
            let lhs: Vec<i64> = opens
                .iter()
                .map(|u| (0..d.len()).filter(|&i| u.contains(&d[i])).map(|i| grid_points[i][idx[i]]).sum())
                .collect();
            if !members.iter().any(|m| lhs.iter().zip(m).all(|(l, r)| l <= r)) {
                ok = false;
                break;
            }
            for i in 0..d.len() {
                idx[i] += 1;
                if idx[i] < grid_points[i].len() {
                    continue 'grid;
                }
                idx[i] = 0;
            }
            break;
        }
        memo.insert(d.to_vec(), ok);
        ok
    };

    let mut choice = vec![0usize; support.len()];
    if candidate_sets.iter().any(Vec::is_empty) {
        return Ok(false);
    }
    loop {
        let sets: Vec<&Subset> = choice.iter().enumerate().map(|(i, &c)| &candidate_sets[i][c]).collect();
        if tuples(&sets).iter().all(|d| dominated(d)) {
            return Ok(true);
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(false);
            }
            choice[i] += 1;
            if choice[i] < candidate_sets[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn tuples(sets: &[&Subset]) -> Vec<Vec<Elem>> {
    sets.iter().fold(vec![Vec::new()], |acc, s| {
        acc.into_iter()
            .flat_map(|prefix| {
                s.iter().map(move |&e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect()
    })
}

/// Range of a valuation computed as `{ξ(U) : U upper}` over every upper set.
pub fn range_by_scan(xi: &SimpleValuation) -> Result<BTreeSet<Rational>> {
    Ok(upper_sets_by_scan(xi.space())?.iter().map(|u| mass_on(xi, u)).collect())
}

/// `ξ ≺ μ` by its subset definition: `ξ(K) < μ(↑K)` for every nonempty
/// `K ⊆ supp ξ`, computed without the flow solver.
pub fn prec_by_subsets(xi: &SimpleValuation, mu: &SimpleValuation) -> Result<bool> {
    ensure_same_space(xi.space(), mu.space())?;
    let p = xi.space();
    let support: Vec<Elem> = xi.support().collect();
    guard(support.len())?;
    for mask in 1u32..(1 << support.len()) {
        let k: Subset = (0..support.len()).filter(|&i| mask & (1 << i) != 0).map(|i| support[i]).collect();
        let up: Subset = p.elements().filter(|&y| k.iter().any(|&x| p.le(x, y))).collect();
        if mass_on(xi, &k) >= mass_on(mu, &up) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluations on every upper set, keyed by the set.
pub fn evaluation_table(xi: &SimpleValuation) -> Result<BTreeMap<Subset, Rational>> {
    Ok(upper_sets_by_scan(xi.space())?
        .into_iter()
        .map(|u| {
            let r = mass_on(xi, &u);
            (u, r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::valuation::Space;

    fn diamond() -> Space {
        Arc::new(crate::poset::tests::diamond())
    }

    fn val(p: &Space, entries: &[(&str, &str)]) -> SimpleValuation {
        SimpleValuation::from_named(p, entries.iter().map(|&(n, r)| (n, r.parse().unwrap()))).unwrap()
    }

    #[test]
    fn scan_counts() {
        assert_eq!(upper_sets_by_scan(&diamond()).unwrap().len(), 6);
    }

    #[test]
    fn pointwise_examples() {
        let p = diamond();
        let half = val(&p, &[("a", "1/2"), ("b", "1/2")]);
        let top = val(&p, &[("⊤", "1")]);
        assert_eq!(leq_pointwise(&half, &top).unwrap(), None);
        assert!(leq_pointwise(&top, &half).unwrap().is_some());
    }

    #[test]
    fn convergence_examples() {
        let p = diamond();
        let fam = DirectedFamily::new([val(&p, &[("⊤", "1")])]).unwrap();
        let a = val(&p, &[("a", "1")]);
        assert!(converge_by_assignments(&fam, &a).unwrap());
        assert!(converge_by_definition(&fam, &a, GridBounds::default()).unwrap());
        let fam = DirectedFamily::new([val(&p, &[("⊤", "1/2")])]).unwrap();
        let top = val(&p, &[("⊤", "1")]);
        assert!(!converge_by_assignments(&fam, &top).unwrap());
        assert!(!converge_by_definition(&fam, &top, GridBounds::default()).unwrap());
        assert!(converge_by_definition(&fam, &SimpleValuation::zero(&p), GridBounds::default()).unwrap());
    }

    #[test]
    fn grid_too_coarse_is_visible() {
        // 1/3 is not on the 1/8 grid: every r′ < 1/3 fits under 1/4.
        let p = diamond();
        let fam = DirectedFamily::new([val(&p, &[("⊤", "1/4")])]).unwrap();
        let xi = val(&p, &[("⊤", "1/3")]);
        assert!(!converge_by_assignments(&fam, &xi).unwrap());
        assert!(converge_by_definition(&fam, &xi, GridBounds::default()).unwrap());
    }
}
