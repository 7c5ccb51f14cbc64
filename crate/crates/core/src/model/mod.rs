//! Featured models: FDTMC, FMDP and FTS, their concrete projections, and
//! the synchronized and observer products.

mod compose;
mod dtmc;
mod fdtmc;
mod fmdp;
mod fts;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::diagram::FeatureError;
use crate::profile::ProfileError;

pub use compose::{observer_product, sync_product};
pub use dtmc::Dtmc;
pub use fdtmc::{DenseFdtmc, Fdtmc, FdtmcBuilder, RangeViolation, RewardViolation, RowViolation, ValidationReport};
pub use fmdp::{Fmdp, FmdpBuilder, FmdpReport, FmdpTransition, FmdpViolation};
pub use fts::{Fts, FtsBuilder, FtsTransition};

/// Set of atomic propositions holding in a state.
pub type Labels = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("state `{0}` is declared twice")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("model has no states")]
    NoStates,
    #[error("initial distribution is invalid: {0}")]
    InitialDistribution(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("guard of a transition from `{state}` reads the component's own proposition `{proposition}`")]
    OwnPropositionInGuard { state: String, proposition: String },
    #[error("components share atomic propositions: {0}")]
    PropositionOverlap(String),
    #[error("observer must have a single action, found {0}")]
    ObserverActions(usize),
    #[error("observer is not complete: {0}")]
    ObserverIncomplete(String),
    #[error("model is not complete: {0}")]
    Incomplete(String),
    #[error("expected a single action, found {0}")]
    MultipleActions(String),
    #[error("guards still read unresolved propositions: {0}")]
    UnresolvedGuard(String),
    #[error("nondeterminism in state `{state}` on action `{action}`{observation} for product {product}")]
    Nondeterminism {
        state: String,
        action: String,
        observation: String,
        product: String,
    },
    #[error("transition probabilities from `{state}` exceed 1 for products {products}")]
    NegativeSelfLoop { state: String, products: String },
    #[error("path step {from} -> {to} is not a transition")]
    NotATransition { from: String, to: String },
    #[error("model violates the probability axiom:\n{0}")]
    Invalid(String),
}
