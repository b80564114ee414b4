//! Simple valuations on finite posets and the directed probabilistic
//! powerspace they generate.
//!
//! A finite poset is a directed space whose open sets are its upper sets.
//! Simple valuations `Σ r_b·η_b` over it carry an exact pointwise order,
//! decided here by a transportation (max-flow) problem with certificates,
//! together with the strict relations, the convergence `⇒_P`, the free-cone
//! extension and a small probabilistic language.

pub mod cone;
pub mod error;
pub mod json;
pub mod laws;
pub mod oracle;
pub mod poset;
pub mod rational;
pub mod relations;
pub mod sample;
pub mod semantics;
pub mod transport;
pub mod valuation;

pub use cone::{
    bar_extension, check_cone_axioms, check_homomorphism, cx_cone, extend, map_pp, rational_cone,
    AxiomReport, Cone, CxCone, HomomorphismReport, LawCheck, MonotoneMap, PosetMap, RationalCone,
};
pub use error::{Error, Result};
pub use poset::{DirectedSubset, Elem, FinitePoset, Subset};
pub use rational::Rational;
pub use relations::{
    converge_p, family_max, interpolate, leq, llcurly, separate, strict_slack, waybelow_prec,
    Convergence, DirectedFamily, OrderDecision, Refutation, Relation,
};
pub use semantics::{denote, parse, Program};
pub use transport::{
    feasible_transport, max_flow, min_strict_slack, Feasibility, HallViolation, MaxFlow,
    TransportInstance, TransportPlan,
};
pub use valuation::{SimpleValuation, Space};
