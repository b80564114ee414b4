//! Seeded generators for posets, valuations, maps, families and programs.
//!
//! Everything takes an explicit `Rng`, so a fixed seed reproduces a run.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::cone::{CxCone, MonotoneMap, PosetMap};
use crate::poset::{Elem, FinitePoset};
use crate::rational::Rational;
use crate::relations::DirectedFamily;
use crate::semantics::Program;
use crate::valuation::{SimpleValuation, Space};

/// Largest size accepted by [`all_posets`].
pub const ALL_POSETS_MAX: usize = 6;

fn element_name(i: usize) -> String {
    format!("e{i}")
}

fn from_relation(n: usize, le: &[Vec<bool>]) -> FinitePoset {
    let names: Vec<String> = (0..n).map(element_name).collect();
    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && le[i][j])
        .map(|(i, j)| (names[i].clone(), names[j].clone()))
        .collect::<Vec<_>>();
    FinitePoset::build(names.clone(), pairs).expect("generated relation is a partial order")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn canonical_code(n: usize, le: &[Vec<bool>], perms: &[Vec<usize>]) -> u64 {
    perms
        .iter()
        .map(|p| {
            let mut code = 0u64;
            for i in 0..n {
                for j in 0..n {
                    code = (code << 1) | u64::from(le[p[i]][p[j]]);
                }
            }
            code
        })
        .min()
        .unwrap_or(0)
}

/// One representative of every isomorphism class of posets with `n` elements.
pub fn posets_of_size(n: usize) -> Vec<FinitePoset> {
    assert!(n <= ALL_POSETS_MAX, "poset enumeration is limited to {ALL_POSETS_MAX} elements");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            le[i][j] = mask & (1 << k) != 0;
        }
        let closed = (0..n).all(|i| {
            (0..n).all(|j| !le[i][j] || (0..n).all(|k| !le[j][k] || le[i][k]))
        });
        if closed && seen.insert(canonical_code(n, &le, &perms)) {
            out.push(from_relation(n, &le));
        }
    }
    out
}

/// Every poset with `1..=max_n` elements, up to isomorphism.
pub fn all_posets(max_n: usize) -> Vec<FinitePoset> {
    (1..=max_n).flat_map(posets_of_size).collect()
}

/// A chain on `names`, ordered as given.
pub fn chain<S: Into<String> + Clone>(names: &[S]) -> FinitePoset {
    let pairs: Vec<(String, String)> = names
        .windows(2)
        .map(|w| (w[0].clone().into(), w[1].clone().into()))
        .collect();
    FinitePoset::build(names.iter().cloned().map(Into::into), pairs).expect("a chain is a poset")
}

/// A random poset on `n` elements: each pair `i < j` is related with
/// probability `density` before transitive closure.
pub fn random_poset<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> FinitePoset {
    let mut le = vec![vec![false; n]; n];
    for (i, row) in le.iter_mut().enumerate() {
        row[i] = true;
        for cell in row.iter_mut().skip(i + 1) {
            *cell = rng.random_bool(density);
        }
    }
    from_relation(n, &le)
}

pub fn random_space<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> Space {
    let n = rng.random_range(1..=max_n.max(1));
    let density = rng.random_range(0.2..0.7);
    Arc::new(random_poset(rng, n, density))
}

/// Coefficients `k/d` with `d <= max_denom` and `k <= 2d`; support size up
/// to `max_support`, possibly empty.
pub fn random_valuation<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
    max_support: usize,
    max_denom: i64,
) -> SimpleValuation {
    let size = rng.random_range(0..=max_support.min(space.len()));
    let points: Vec<Elem> = space.elements().collect();
    let mass: BTreeMap<Elem, Rational> = points
        .choose_multiple(rng, size)
        .map(|&x| {
            let d = rng.random_range(1..=max_denom.max(1));
            (x, Rational::new(rng.random_range(1..=2 * d), d))
        })
        .collect();
    SimpleValuation::new(space, mass).expect("positive coefficients")
}

/// A valuation whose coefficients are multiples of `1/denom`, at most `max_units/denom`.
pub fn random_grid_valuation<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
    max_support: usize,
    denom: i64,
    max_units: i64,
) -> SimpleValuation {
    let size = rng.random_range(0..=max_support.min(space.len()));
    let points: Vec<Elem> = space.elements().collect();
    let mass: BTreeMap<Elem, Rational> = points
        .choose_multiple(rng, size)
        .map(|&x| (x, Rational::new(rng.random_range(1..=max_units.max(1)), denom)))
        .collect();
    SimpleValuation::new(space, mass).expect("positive coefficients")
}

/// A random `ξ ≤ v`: mass of `v` is cut into chunks of size `unit` (a
/// remainder chunk included) and each chunk is dropped, kept, or moved to a
/// random element below its point.
pub fn random_below<R: Rng + ?Sized>(rng: &mut R, v: &SimpleValuation, unit: &Rational) -> SimpleValuation {
    let space = v.space();
    let mut out: Vec<(Elem, Rational)> = Vec::new();
    for (c, s) in v.entries() {
        let below: Vec<Elem> = space.down_of(c).into_iter().collect();
        let mut left = s.clone();
        while left.is_positive() {
            let chunk = left.clone().min(unit.clone());
            left -= &chunk;
            match rng.random_range(0..3) {
                0 => {}
                1 => out.push((c, chunk)),
                _ => out.push((*below.choose(rng).expect("c is below itself"), chunk)),
            }
        }
    }
    SimpleValuation::new(space, out).expect("positive chunks")
}

/// A random `η ≥ v`, dual to [`random_below`], plus a little fresh mass.
pub fn random_above<R: Rng + ?Sized>(rng: &mut R, v: &SimpleValuation, unit: &Rational) -> SimpleValuation {
    let space = v.space();
    let mut out: Vec<(Elem, Rational)> = Vec::new();
    for (c, s) in v.entries() {
        let above: Vec<Elem> = space.up_of(c).into_iter().collect();
        let mut left = s.clone();
        while left.is_positive() {
            let chunk = left.clone().min(unit.clone());
            left -= &chunk;
            out.push((*above.choose(rng).expect("c is above itself"), chunk));
        }
    }
    if rng.random_bool(0.3) {
        let x = rng.random_range(0..space.len());
        out.push((x, unit.clone()));
    }
    SimpleValuation::new(space, out).expect("positive chunks")
}

/// A directed family: a random maximum together with members below it.
pub fn random_family<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
    size: usize,
    max_support: usize,
    max_denom: i64,
) -> DirectedFamily {
    let top = random_valuation(rng, space, max_support, max_denom);
    let unit = Rational::new(1, max_denom.max(1));
    let mut members = vec![top.clone()];
    for _ in 1..size.max(1) {
        members.push(random_below(rng, &top, &unit));
    }
    DirectedFamily::new(members).expect("every member lies below the first")
}

/// A directed family whose coefficients are multiples of `1/denom`.
pub fn random_grid_family<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
    size: usize,
    max_support: usize,
    denom: i64,
    max_units: i64,
) -> DirectedFamily {
    let top = random_grid_valuation(rng, space, max_support, denom, max_units);
    let unit = Rational::new(1, denom);
    let mut members = vec![top.clone()];
    for _ in 1..size.max(1) {
        members.push(random_below(rng, &top, &unit));
    }
    DirectedFamily::new(members).expect("every member lies below the first")
}

fn bottom_up(space: &FinitePoset) -> Vec<Elem> {
    let mut order: Vec<Elem> = space.elements().collect();
    order.sort_by_key(|&x| (space.down_of(x).len(), x));
    order
}

/// A random monotone map. Elements are assigned bottom-up, each image chosen
/// among the common upper bounds of the images below; a constant map is the
/// fallback when that keeps failing.
pub fn random_poset_map<R: Rng + ?Sized>(rng: &mut R, source: &Space, target: &Space) -> PosetMap {
    let order = bottom_up(source);
    'attempt: for _ in 0..16 {
        let mut graph: Vec<Option<Elem>> = vec![None; source.len()];
        for &x in &order {
            let lower: Vec<Elem> = source
                .down_of(x)
                .into_iter()
                .filter(|&y| y != x)
                .map(|y| graph[y].expect("assigned bottom-up"))
                .collect();
            let candidates: Vec<Elem> = target
                .elements()
                .filter(|&c| lower.iter().all(|&l| target.le(l, c)))
                .collect();
            match candidates.choose(rng) {
                Some(&c) => graph[x] = Some(c),
                None => continue 'attempt,
            }
        }
        let graph = graph.into_iter().map(|g| g.expect("assigned")).collect();
        return PosetMap::new(source, target, graph).expect("monotone by construction");
    }
    let c = rng.random_range(0..target.len());
    PosetMap::new(source, target, vec![c; source.len()]).expect("constant maps are monotone")
}

/// Weights `w_y >= 0` for `f(x) = Σ_{y ≤ x} w_y`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, space: &FinitePoset, max_denom: i64) -> Vec<Rational> {
    space
        .elements()
        .map(|_| {
            if rng.random_bool(0.3) {
                Rational::zero()
            } else {
                let d = rng.random_range(1..=max_denom.max(1));
                Rational::new(rng.random_range(0..=2 * d), d)
            }
        })
        .collect()
}

/// `x ↦ Σ_{y ≤ x} w_y`, which is monotone for nonnegative weights.
pub fn accumulate<T: Clone>(
    space: &FinitePoset,
    weights: &[T],
    zero: T,
    plus: impl Fn(&T, &T) -> T,
) -> Vec<T> {
    space
        .elements()
        .map(|x| space.down_of(x).iter().fold(zero.clone(), |acc, &y| plus(&acc, &weights[y])))
        .collect()
}

/// A monotone map into the valuation cone of `target`, built by accumulating
/// random valuations down-set by down-set.
pub fn random_cx_map<R: Rng + ?Sized>(
    rng: &mut R,
    source: &Space,
    target: &Space,
    max_denom: i64,
) -> (Vec<SimpleValuation>, MonotoneMap<CxCone>) {
    let weights: Vec<SimpleValuation> = source
        .elements()
        .map(|_| random_valuation(rng, target, 2, max_denom))
        .collect();
    let graph = accumulate(source, &weights, SimpleValuation::zero(target), |a, b| {
        a.add(b).expect("same space")
    });
    let map = MonotoneMap::new(source, crate::cone::cx_cone(target), graph).expect("monotone by construction");
    (weights, map)
}

/// Knobs for [`random_program`].
#[derive(Debug, Clone)]
pub struct ProgramShape {
    pub depth: usize,
    pub max_denom: i64,
    pub allow_bind: bool,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape {
            depth: 3,
            max_denom: 4,
            allow_bind: true,
        }
    }
}

fn random_probability<R: Rng + ?Sized>(rng: &mut R, max_denom: i64) -> Rational {
    let d = rng.random_range(2..=max_denom.max(2));
    Rational::new(rng.random_range(1..d), d)
}

pub fn random_program<R: Rng + ?Sized>(rng: &mut R, space: &Space, shape: &ProgramShape) -> Program {
    let ret = |rng: &mut R| Program::ret(space.name(rng.random_range(0..space.len())));
    if shape.depth == 0 {
        return ret(rng);
    }
    let inner = ProgramShape {
        depth: shape.depth - 1,
        ..shape.clone()
    };
    let kinds = if shape.allow_bind { 5 } else { 4 };
    match rng.random_range(0..kinds) {
        0 => ret(rng),
        1 => Program::choice(
            random_probability(rng, shape.max_denom),
            random_program(rng, space, &inner),
            random_program(rng, space, &inner),
        ),
        2 => {
            let d = rng.random_range(1..=shape.max_denom.max(1));
            Program::scale(Rational::new(rng.random_range(0..=2 * d), d), random_program(rng, space, &inner))
        }
        3 => Program::par(random_program(rng, space, &inner), random_program(rng, space, &inner)),
        _ => Program::bind(random_program(rng, space, &inner), random_table(rng, space, &inner)),
    }
}

/// A binder table defined on every state and monotone by construction:
/// `k(s)` is the `par` of per-state pieces over the down-set of `s`.
pub fn random_table<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Space,
    shape: &ProgramShape,
) -> BTreeMap<String, Program> {
    let pieces: Vec<Option<Program>> = space
        .elements()
        .map(|_| rng.random_bool(0.6).then(|| random_program(rng, space, shape)))
        .collect();
    space
        .elements()
        .map(|s| {
            let below: Vec<&Program> = space.down_of(s).iter().filter_map(|&y| pieces[y].as_ref()).collect();
            let k = match below.split_first() {
                None => Program::scale(Rational::zero(), Program::ret(space.name(s))),
                Some((first, rest)) => rest
                    .iter()
                    .fold((*first).clone(), |acc, p| Program::par(acc, (*p).clone())),
            };
            (space.name(s).to_owned(), k)
        })
        .collect()
}

/// The table `s ↦ ret s`.
pub fn identity_table(space: &FinitePoset) -> BTreeMap<String, Program> {
    space.names().iter().map(|s| (s.clone(), Program::ret(s.clone()))).collect()
}

/// Directed subsets of `space` with at most `max_size` elements.
pub fn directed_subsets(space: &FinitePoset, max_size: usize) -> Vec<BTreeSet<Elem>> {
    let n = space.len();
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<BTreeSet<Elem>>())
        .filter(|s| s.len() <= max_size && space.is_directed_subset(s).unwrap_or(false))
        .collect()
}
