//! JSON documents. Rationals are always `"p/q"` strings, never floats.
//!
//! Poset: `{"id": "diamond", "elements": ["⊥","a","b","⊤"], "le": [["⊥","a"], ...]}`
//! where each pair `[x, y]` means `x <= y`; the order is the reflexive
//! transitive closure of the listed pairs.
//!
//! Valuation: `{"space": <poset or path>, "mass": {"a": "1/2", "b": "1/2"}}`.
//! Family: `{"space": <poset or path>, "members": [{"⊤": "1"}, ...]}`.
//! Map: `{"source": <poset or path>, "target": "rational-cone" | <poset or path>,
//! "graph": {"a": "1", ...}}`; graph values are rationals for the rational cone
//! and element names for a poset target.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poset::{FinitePoset, Subset};
use crate::rational::Rational;
use crate::relations::{Convergence, OrderDecision, Refutation};
use crate::valuation::{SimpleValuation, Space};

/// Name of the rational cone as a map target.
pub const RATIONAL_CONE: &str = "rational-cone";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub elements: Vec<String>,
    #[serde(default)]
    pub le: Vec<(String, String)>,
}

impl PosetDoc {
    pub fn to_poset(&self) -> Result<FinitePoset> {
        FinitePoset::build(self.elements.iter().cloned(), self.le.iter().cloned())
    }

    /// Lists the covering pairs rather than the whole order.
    pub fn from_poset(poset: &FinitePoset, id: Option<String>) -> Self {
        PosetDoc {
            id,
            elements: poset.names().to_vec(),
            le: poset
                .hasse_edges()
                .into_iter()
                .map(|(a, b)| (poset.name(a).to_owned(), poset.name(b).to_owned()))
                .collect(),
        }
    }
}

/// A space given inline or as a path to a poset document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(PosetDoc),
}

pub type MassDoc = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationDoc {
    pub space: SpaceRef,
    pub mass: MassDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub space: SpaceRef,
    pub members: Vec<MassDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub source: SpaceRef,
    pub target: SpaceRef,
    pub graph: BTreeMap<String, String>,
}

impl MapDoc {
    pub fn targets_rational_cone(&self) -> bool {
        matches!(&self.target, SpaceRef::Path(p) if p == RATIONAL_CONE)
    }
}

pub fn mass_to_valuation(space: &Space, mass: &MassDoc) -> Result<SimpleValuation> {
    SimpleValuation::from_named(space, mass.iter().map(|(n, r)| (n.as_str(), r.clone())))
}

pub fn valuation_to_mass(xi: &SimpleValuation) -> MassDoc {
    xi.entries()
        .map(|(b, r)| (xi.space().name(b).to_owned(), r.clone()))
        .collect()
}

/// `{"mass": {...}}`, the output form of a valuation.
pub fn valuation_json(xi: &SimpleValuation) -> Value {
    json!({ "mass": valuation_to_mass(xi) })
}

pub fn parse_valuation_json(value: &Value, space: &Space) -> Result<SimpleValuation> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Out {
        mass: MassDoc,
    }
    let out: Out = serde_json::from_value(value.clone()).map_err(|e| Error::Document(e.to_string()))?;
    mass_to_valuation(space, &out.mass)
}

/// Looks up `graph[x]` for every element of `source`, in element order.
pub fn graph_entries<'a>(source: &FinitePoset, graph: &'a BTreeMap<String, String>) -> Result<Vec<&'a str>> {
    if let Some(extra) = graph.keys().find(|k| source.index_of(k).is_err()) {
        return Err(Error::UnknownElement(extra.clone()));
    }
    source
        .names()
        .iter()
        .map(|n| {
            graph
                .get(n)
                .map(String::as_str)
                .ok_or_else(|| Error::Document(format!("map has no image for {n:?}")))
        })
        .collect()
}

/// Serialized form of an [`OrderDecision`]. Witness keys are `"b⇒c"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDoc {
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separating_upper_set: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hall_subset: Option<Vec<String>>,
}

fn names(space: &FinitePoset, s: &Subset) -> Vec<String> {
    space.subset_names(s)
}

impl DecisionDoc {
    pub fn from_decision(d: &OrderDecision, space: &FinitePoset) -> Self {
        let witness = d.witness.as_ref().map(|plan| {
            plan.entries()
                .iter()
                .map(|(&(b, c), r)| (format!("{}⇒{}", space.name(b), space.name(c)), r.clone()))
                .collect()
        });
        let (separating_upper_set, hall_subset) = match &d.refutation {
            Some(Refutation::SeparatingUpperSet { upper_set, .. }) => (Some(names(space, upper_set)), None),
            Some(Refutation::HallSubset { subset, .. }) => (None, Some(names(space, subset))),
            None => (None, None),
        };
        DecisionDoc {
            verdict: d.verdict,
            witness,
            separating_upper_set,
            hall_subset,
        }
    }
}

pub fn decision_json(d: &OrderDecision, space: &FinitePoset) -> Value {
    serde_json::to_value(DecisionDoc::from_decision(d, space)).expect("decision serializes")
}

/// Serialized form of a [`Convergence`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceDoc {
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionDoc>,
}

/// An upper set on which the lifted mass exceeds what the family's maximum offers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionDoc {
    pub upper_set: Vec<String>,
    pub required: Rational,
    pub available: Rational,
}

impl ConvergenceDoc {
    pub fn from_convergence(c: &Convergence, space: &FinitePoset) -> Self {
        let assignment = c.assignment.as_ref().map(|a| {
            a.iter()
                .map(|(&b, &m)| (space.name(b).to_owned(), space.name(m).to_owned()))
                .collect()
        });
        let obstruction = c.obstruction.as_ref().map(|r| match r {
            Refutation::SeparatingUpperSet { upper_set, lhs, rhs } => ObstructionDoc {
                upper_set: names(space, upper_set),
                required: lhs.clone(),
                available: rhs.clone(),
            },
            Refutation::HallSubset {
                subset,
                supply,
                reach_capacity,
            } => ObstructionDoc {
                upper_set: names(space, subset),
                required: supply.clone(),
                available: reach_capacity.clone(),
            },
        });
        ConvergenceDoc {
            verdict: c.verdict,
            assignment,
            obstruction,
        }
    }
}

pub fn convergence_json(c: &Convergence, space: &FinitePoset) -> Value {
    serde_json::to_value(ConvergenceDoc::from_convergence(c, space)).expect("convergence serializes")
}

pub fn error_json(e: &Error) -> Value {
    json!({ "error": e.kind(), "message": e.to_string() })
}

pub fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
}

pub fn space_from_doc(doc: &PosetDoc) -> Result<Space> {
    Ok(Arc::new(doc.to_poset()?))
}
