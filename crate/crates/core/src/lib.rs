//! Family-based probabilistic model checking of software product lines.
//!
//! A product line's stochastic behaviour is one featured Markov chain whose
//! transitions carry profiles (functions from valid products to
//! probabilities). Every valid product is checked at once by one of the
//! engines in [`enumerative`], [`parametric`] or [`bounded`].

pub mod bounded;
pub mod diagram;
pub mod enumerative;
pub mod expr;
pub mod family;
pub mod fixed;
pub mod linsolve;
pub mod model;
pub mod parametric;
pub mod pctl;
pub mod profile;
pub mod random;
pub mod rational;
pub mod scalar;
pub mod syntax;

pub use diagram::{FeatureDiagram, FeatureError, Product};
pub use expr::{parse_feature_expression, Expr};
pub use profile::{DenseProfile, Profile, ProfileError};
pub use rational::Rational;
pub use scalar::Scalar;
pub use syntax::ParseError;
