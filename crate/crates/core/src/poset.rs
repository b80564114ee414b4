//! Finite posets viewed as directed spaces.
//!
//! A finite T0 space is determined by its specialization order: its open
//! sets are exactly the upper sets. So a [`FinitePoset`] carries no separate
//! topology, and "open" means "upward closed" throughout this crate.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Index of an element in its poset. Indices follow the lexicographic order
/// of element names, so iteration over indices is deterministic.
pub type Elem = usize;

/// A set of elements of one poset.
pub type Subset = BTreeSet<Elem>;

/// Default cap on the carrier size for operations that enumerate up-sets.
pub const DEFAULT_ENUM_CAP: usize = 20;

#[derive(Debug, Clone)]
pub struct FinitePoset {
    names: Vec<String>,
    index: BTreeMap<String, Elem>,
    // le[a][b] iff a <= b
    le: Vec<Vec<bool>>,
    generators: Vec<(String, String)>,
}

impl PartialEq for FinitePoset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.le == other.le
    }
}

impl Eq for FinitePoset {}

impl FinitePoset {
    /// Builds the poset whose order is the reflexive-transitive closure of
    /// `pairs`, where `(a, b)` means `a <= b`.
    pub fn build<S, I, P>(elements: I, pairs: P) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = S>,
        P: IntoIterator<Item = (S, S)>,
    {
        let mut index = BTreeMap::new();
        for name in elements {
            let name = name.into();
            if index.insert(name.clone(), 0).is_some() {
                return Err(Error::DuplicateElement(name));
            }
        }
        let names: Vec<String> = index.keys().cloned().collect();
        for (i, name) in names.iter().enumerate() {
            index.insert(name.clone(), i);
        }

        let n = names.len();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        let mut generators = Vec::new();
        for (a, b) in pairs {
            let (a, b) = (a.into(), b.into());
            let ia = *index.get(&a).ok_or_else(|| Error::UnknownElement(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| Error::UnknownElement(b.clone()))?;
            le[ia][ib] = true;
            generators.push((a, b));
        }
        for k in 0..n {
            for i in 0..n {
                if !le[i][k] {
                    continue;
                }
                let above = le[k].clone();
                for (cell, on) in le[i].iter_mut().zip(above) {
                    *cell |= on;
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if le[i][j] && le[j][i] {
                    return Err(Error::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(FinitePoset {
            names,
            index,
            le,
            generators,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e]
    }

    /// The user-supplied generating pairs, in input order.
    pub fn generators(&self) -> &[(String, String)] {
        &self.generators
    }

    pub fn index_of(&self, name: &str) -> Result<Elem> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_owned()))
    }

    pub fn subset_of<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<Subset> {
        names.into_iter().map(|n| self.index_of(n)).collect()
    }

    pub fn subset_names(&self, s: &Subset) -> Vec<String> {
        s.iter().map(|&e| self.names[e].clone()).collect()
    }

    pub fn le(&self, a: Elem, b: Elem) -> bool {
        self.le[a][b]
    }

    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        a != b && self.le[a][b]
    }

    pub fn carrier(&self) -> Subset {
        self.elements().collect()
    }

    pub(crate) fn check(&self, e: Elem) -> Result<Elem> {
        if e < self.len() {
            Ok(e)
        } else {
            Err(Error::UnknownElement(format!("#{e}")))
        }
    }

    fn check_subset(&self, s: &Subset) -> Result<()> {
        s.iter().try_for_each(|&e| self.check(e).map(|_| ()))
    }

    /// `↑x`, the principal upper set of `x`.
    pub fn up_of(&self, x: Elem) -> Subset {
        self.elements().filter(|&y| self.le[x][y]).collect()
    }

    pub fn down_of(&self, x: Elem) -> Subset {
        self.elements().filter(|&y| self.le[y][x]).collect()
    }

    /// `↑S = {x : a <= x for some a in S}`.
    pub fn up_set(&self, s: &Subset) -> Result<Subset> {
        self.check_subset(s)?;
        Ok(self
            .elements()
            .filter(|&x| s.iter().any(|&a| self.le[a][x]))
            .collect())
    }

    /// True iff `S = ↑S`, i.e. `S` is open.
    pub fn is_upper(&self, s: &Subset) -> Result<bool> {
        Ok(self.missing_above(s)?.is_none())
    }

    /// Some element of `↑S \ S`, if any.
    pub(crate) fn missing_above(&self, s: &Subset) -> Result<Option<Elem>> {
        self.check_subset(s)?;
        Ok(s.iter()
            .flat_map(|&a| self.elements().filter(move |&x| self.le[a][x]))
            .find(|x| !s.contains(x)))
    }

    /// Enumerates every upper set exactly once, `∅` first and the carrier last.
    pub fn upper_sets(&self) -> Result<UpperSets<'_>> {
        self.upper_sets_with_cap(DEFAULT_ENUM_CAP)
    }

    pub fn upper_sets_with_cap(&self, cap: usize) -> Result<UpperSets<'_>> {
        if self.len() > cap {
            return Err(Error::SizeLimitExceeded {
                size: self.len(),
                cap,
            });
        }
        Ok(UpperSets::new(self))
    }

    /// Nonempty, and every pair of members has an upper bound among the members.
    pub fn is_directed_subset(&self, s: &Subset) -> Result<bool> {
        self.check_subset(s)?;
        if s.is_empty() {
            return Ok(false);
        }
        Ok(s.iter().all(|&x| {
            s.iter()
                .all(|&y| s.iter().any(|&z| self.le[x][z] && self.le[y][z]))
        }))
    }

    /// The greatest member of `s`, if one exists.
    pub fn maximum(&self, s: &Subset) -> Option<Elem> {
        s.iter()
            .copied()
            .find(|&m| s.iter().all(|&x| self.le[x][m]))
    }

    /// Whether the net indexed by the directed set `d` converges to `x`.
    ///
    /// A finite directed set is eventually constant at its maximum `m`, and
    /// `x` is a limit of the constant net at `m` iff every open set holding
    /// `x` holds `m`, i.e. iff `x <= m`.
    pub fn converges(&self, d: &Subset, x: Elem) -> Result<bool> {
        let d = DirectedSubset::new(self, d.clone())?;
        self.check(x)?;
        Ok(self.le[x][d.maximum()])
    }

    /// Covering pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(Elem, Elem)> {
        let mut edges = Vec::new();
        for a in self.elements() {
            for b in self.elements() {
                if self.lt(a, b) && !self.elements().any(|c| self.lt(a, c) && self.lt(c, b)) {
                    edges.push((a, b));
                }
            }
        }
        edges
    }

    /// Elements ordered so that whenever `a < b`, `b` comes first.
    pub(crate) fn top_down_order(&self) -> Vec<Elem> {
        let mut order: Vec<Elem> = self.elements().collect();
        let below = |x: Elem| self.elements().filter(|&y| self.le[y][x]).count();
        order.sort_by(|&a, &b| below(b).cmp(&below(a)).then(a.cmp(&b)));
        order
    }
}

/// A nonempty directed subset of a finite poset together with its maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedSubset {
    members: Subset,
    maximum: Elem,
}

impl DirectedSubset {
    pub fn new(poset: &FinitePoset, members: Subset) -> Result<Self> {
        if !poset.is_directed_subset(&members)? {
            return Err(Error::NotDirected(format!(
                "{:?} has a pair without an upper bound inside it",
                poset.subset_names(&members)
            )));
        }
        // A finite directed set always has a greatest element.
        let maximum = poset
            .maximum(&members)
            .ok_or_else(|| Error::Internal("directed subset without maximum".into()))?;
        Ok(DirectedSubset { members, maximum })
    }

    pub fn members(&self) -> &Subset {
        &self.members
    }

    pub fn maximum(&self) -> Elem {
        self.maximum
    }
}

/// Iterator over the upper sets of a poset; see [`FinitePoset::upper_sets`].
///
/// Walks the elements top-down, deciding membership one at a time. An element
/// may join only once everything strictly above it has joined, so every leaf of
/// the decision tree is an upper set and no branch is ever abandoned.
pub struct UpperSets<'a> {
    poset: &'a FinitePoset,
    order: Vec<Elem>,
    chosen: Vec<bool>,
    finished: bool,
}

impl<'a> UpperSets<'a> {
    fn new(poset: &'a FinitePoset) -> Self {
        let order = poset.top_down_order();
        let chosen = vec![false; order.len()];
        UpperSets {
            poset,
            order,
            chosen,
            finished: false,
        }
    }

    fn may_include(&self, pos: usize) -> bool {
        let x = self.order[pos];
        (0..pos).all(|i| self.chosen[i] || !self.poset.lt(x, self.order[i]))
    }

    fn current(&self) -> Subset {
        self.order
            .iter()
            .zip(&self.chosen)
            .filter(|(_, &c)| c)
            .map(|(&e, _)| e)
            .collect()
    }
}

impl Iterator for UpperSets<'_> {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        if self.finished {
            return None;
        }
        let out = self.current();
        // Advance to the next leaf: flip the deepest excluded position that may be included.
        let next = (0..self.order.len())
            .rev()
            .find(|&pos| !self.chosen[pos] && self.may_include(pos));
        match next {
            Some(pos) => {
                self.chosen[pos] = true;
                for c in &mut self.chosen[pos + 1..] {
                    *c = false;
                }
            }
            None => self.finished = true,
        }
        Some(out)
    }
}
