//! Per-product results shared by all engines.

use std::fmt;
use std::time::Duration;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::diagram::{FeatureError, Product};
use crate::model::ModelError;
use crate::pctl::PctlError;
use crate::profile::ProfileError;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Engine {
    Enumerative,
    Parametric,
    Bounded,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Enumerative, Engine::Parametric, Engine::Bounded];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Enumerative => "enum",
            Engine::Parametric => "param",
            Engine::Bounded => "bounded",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Finite(Rational),
    /// Expected reward of a product that misses the target with positive
    /// probability.
    Infinite,
}

impl Value {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinite => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => f.write_str(&format_rational(v)),
            Value::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Satisfied,
    Violated,
    Unknown,
    /// Quantitative queries have no verdict.
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Unknown => "unknown",
            Verdict::NotApplicable => "-",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductResult {
    pub product: Product,
    /// Value of the outermost probability or reward operator, weighted by
    /// the initial distribution. Absent for Boolean combinations.
    pub value: Option<Value>,
    /// Half-width of the uncertainty around `value` (bounded engine).
    pub error: Option<Rational>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub engine: Engine,
    pub property: String,
    pub results: Vec<ProductResult>,
    pub elapsed: Duration,
    pub warnings: Vec<String>,
}

impl FamilyResult {
    pub fn unknown_count(&self) -> usize {
        self.results.iter().filter(|r| r.verdict == Verdict::Unknown).count()
    }

    pub fn value_of(&self, product: &Product) -> Option<&Value> {
        self.results
            .iter()
            .find(|r| &r.product == product)
            .and_then(|r| r.value.as_ref())
    }

    /// Whether two results agree product by product: verdicts must match
    /// wherever both are decided, and values must lie within `tolerance`
    /// plus the reported error bars.
    pub fn agrees_with(&self, other: &FamilyResult, tolerance: &Rational) -> bool {
        self.results.len() == other.results.len()
            && self
                .results
                .iter()
                .zip(&other.results)
                .all(|(a, b)| product_agreement(a, b, tolerance))
    }
}

pub fn product_agreement(a: &ProductResult, b: &ProductResult, tolerance: &Rational) -> bool {
    if a.product != b.product {
        return false;
    }
    let decided = |v: Verdict| matches!(v, Verdict::Satisfied | Verdict::Violated);
    if decided(a.verdict) && decided(b.verdict) && a.verdict != b.verdict {
        return false;
    }
    match (&a.value, &b.value) {
        (Some(Value::Finite(x)), Some(Value::Finite(y))) => {
            let slack = tolerance
                + a.error.clone().unwrap_or_else(Rational::zero)
                + b.error.clone().unwrap_or_else(Rational::zero);
            let diff = if x > y { x - y } else { y - x };
            diff <= slack
        }
        (Some(x), Some(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Pctl(#[from] PctlError),
    #[error("the model has no rewards")]
    MissingRewards,
    #[error("singular linear system while solving for state `{0}`")]
    Singular(String),
    #[error("target is reached with probability below 1 for products {0}")]
    TargetNotAlmostSure(String),
    #[error("no convergence within {depth} steps: undecided mass {worst} remains")]
    NoConvergence { depth: u64, worst: String },
    #[error("nested `=?` queries are not supported")]
    NestedQuery,
}

/// Engine settings. Defaults: exact arithmetic, `ε = 10⁻³`, depth ceiling
/// `10⁵`, all cores.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub workers: Option<usize>,
    pub epsilon: Rational,
    pub max_depth: u64,
    /// Fixed exploration depth for the bounded engine instead of the
    /// residual stopping rule.
    pub bound: Option<u64>,
    /// Use `f64` instead of exact rationals where the engine supports it.
    pub float: bool,
    /// Retry unknown verdicts once with `ε / 10`.
    pub deepen: bool,
    /// Bounded engine: recompute only states with a changed successor.
    pub frontier: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            workers: None,
            epsilon: Rational::new(1.into(), 1000.into()),
            max_depth: 100_000,
            bound: None,
            float: false,
            deepen: true,
            frontier: true,
        }
    }
}

/// Maps `f` over `0..n` on a pool of `workers` threads (all cores when
/// `None`), keeping the index order.
pub fn parallel_map<R, F>(n: usize, workers: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match workers {
        Some(1) => (0..n).map(f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}
