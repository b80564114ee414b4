//! Simple valuations: finite formal sums `Σ r_b·η_b` with positive rational
//! coefficients, evaluated on an open set `U` as `Σ_{b ∈ U} r_b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poset::{Elem, FinitePoset, Subset};
use crate::rational::Rational;

/// Shared handle to the space a valuation lives on.
pub type Space = Arc<FinitePoset>;

/// Default cap on the support size for [`SimpleValuation::range`].
pub const DEFAULT_RANGE_CAP: usize = 16;

pub(crate) fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn ensure_same_space(a: &Space, b: &Space) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// A simple valuation in canonical form: support points are distinct, kept
/// in element order, and every coefficient is strictly positive. The empty
/// sum is the zero valuation.
#[derive(Clone)]
pub struct SimpleValuation {
    space: Space,
    mass: BTreeMap<Elem, Rational>,
}

impl SimpleValuation {
    /// Builds `Σ r·η_x` from `(x, r)` entries, merging repeated points.
    pub fn new(space: &Space, entries: impl IntoIterator<Item = (Elem, Rational)>) -> Result<Self> {
        let mut mass: BTreeMap<Elem, Rational> = BTreeMap::new();
        for (x, r) in entries {
            space.check(x)?;
            if !r.is_positive() {
                return Err(Error::NonPositiveCoefficient(space.name(x).to_owned(), r));
            }
            *mass.entry(x).or_default() += r;
        }
        Ok(SimpleValuation {
            space: space.clone(),
            mass,
        })
    }

    /// Like [`SimpleValuation::new`] but with element names.
    pub fn from_named<'a>(
        space: &Space,
        entries: impl IntoIterator<Item = (&'a str, Rational)>,
    ) -> Result<Self> {
        let resolved = entries
            .into_iter()
            .map(|(n, r)| Ok((space.index_of(n)?, r)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, resolved)
    }

    pub fn zero(space: &Space) -> Self {
        SimpleValuation {
            space: space.clone(),
            mass: BTreeMap::new(),
        }
    }

    /// The point valuation `η_x`: 1 on opens containing `x`, 0 elsewhere.
    pub fn point(space: &Space, x: Elem) -> Result<Self> {
        space.check(x)?;
        Ok(SimpleValuation {
            space: space.clone(),
            mass: BTreeMap::from([(x, Rational::one())]),
        })
    }

    // Internal constructor for maps already known to be canonical.
    pub(crate) fn from_canonical(space: &Space, mass: BTreeMap<Elem, Rational>) -> Self {
        debug_assert!(mass.values().all(Rational::is_positive));
        SimpleValuation {
            space: space.clone(),
            mass,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn is_zero(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = Elem> + '_ {
        self.mass.keys().copied()
    }

    pub fn support_set(&self) -> Subset {
        self.mass.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Elem, &Rational)> + '_ {
        self.mass.iter().map(|(&e, r)| (e, r))
    }

    pub fn mass(&self) -> &BTreeMap<Elem, Rational> {
        &self.mass
    }

    /// Coefficient at `x` (zero off the support).
    pub fn coefficient(&self, x: Elem) -> Rational {
        self.mass.get(&x).cloned().unwrap_or_default()
    }

    pub fn total_mass(&self) -> Rational {
        self.mass.values().sum()
    }

    /// `ξ(U)`; `U` must be an upper set.
    pub fn eval(&self, u: &Subset) -> Result<Rational> {
        if let Some(missing) = self.space.missing_above(u)? {
            return Err(Error::NotOpen(self.space.name(missing).to_owned()));
        }
        Ok(self.mass_in(u))
    }

    /// Sum of coefficients of support points inside `s`, for any subset.
    pub(crate) fn mass_in(&self, s: &Subset) -> Rational {
        self.mass
            .iter()
            .filter(|(e, _)| s.contains(e))
            .map(|(_, r)| r)
            .sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same_space(&self.space, &other.space)?;
        let mut mass = self.mass.clone();
        for (&x, r) in &other.mass {
            *mass.entry(x).or_default() += r;
        }
        Ok(Self::from_canonical(&self.space, mass))
    }

    /// `a·ξ`; `0·ξ` is the zero valuation.
    pub fn scale(&self, a: &Rational) -> Result<Self> {
        if a.is_negative() {
            return Err(Error::NegativeScalar(a.clone()));
        }
        if a.is_zero() {
            return Ok(Self::zero(&self.space));
        }
        let mass = self.mass.iter().map(|(&x, r)| (x, r * a)).collect();
        Ok(Self::from_canonical(&self.space, mass))
    }

    /// Equality of valuations. Distinct canonical forms are distinct as
    /// valuations, so comparing forms decides pointwise equality on opens.
    pub fn equal(&self, other: &Self) -> Result<bool> {
        ensure_same_space(&self.space, &other.space)?;
        Ok(self.mass == other.mass)
    }

    /// The finite set `{ξ(U) : U open}`.
    pub fn range(&self) -> Result<BTreeSet<Rational>> {
        self.range_with_cap(DEFAULT_RANGE_CAP)
    }

    /// `ξ(U)` depends only on `U ∩ support`, and those traces are exactly the
    /// subsets `T` of the support with `↑T ∩ support = T`; enumerating them
    /// needs `2^|support|` steps regardless of the carrier size.
    pub fn range_with_cap(&self, cap: usize) -> Result<BTreeSet<Rational>> {
        let support: Vec<(Elem, &Rational)> = self.entries().collect();
        let k = support.len();
        if k > cap {
            return Err(Error::SizeLimitExceeded { size: k, cap });
        }
        let mut values = BTreeSet::new();
        for bits in 0u64..(1u64 << k) {
            let inside = |i: usize| bits >> i & 1 == 1;
            let closed = (0..k).all(|i| {
                !inside(i)
                    || (0..k).all(|j| inside(j) || !self.space.le(support[i].0, support[j].0))
            });
            if closed {
                values.insert((0..k).filter(|&i| inside(i)).map(|i| support[i].1).sum());
            }
        }
        Ok(values)
    }
}

impl PartialEq for SimpleValuation {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.mass == other.mass
    }
}

impl Eq for SimpleValuation {}

impl fmt::Debug for SimpleValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SimpleValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mass.is_empty() {
            return write!(f, "0");
        }
        for (i, (&x, r)) in self.mass.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{r}·η_{}", self.space.name(x))?;
        }
        Ok(())
    }
}
