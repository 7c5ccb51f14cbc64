//! Profiles: total functions from valid products to rationals.
//!
//! [`Profile`] is the guard-list form used for authoring and composition;
//! [`DenseProfile`] stores one value per valid product in canonical order and
//! is what the engines compute with.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::diagram::{FeatureDiagram, FeatureError, Product};
use crate::expr::{CompiledExpr, Expr};
use crate::rational::{format_rational, Rational};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("guard refers to feature `{0}` which the diagram does not declare")]
    UnboundFeature(String),
    #[error("profiles belong to different diagrams ({left} vs {right} products)")]
    DiagramMismatch { left: usize, right: usize },
}

/// First-match guarded cases with a default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    cases: Vec<(Expr, Rational)>,
    default: Rational,
}

impl Profile {
    pub fn constant(value: Rational) -> Self {
        Profile {
            cases: Vec::new(),
            default: value,
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// Cases are tried in order; the first guard that holds gives the value.
    pub fn guarded(cases: Vec<(Expr, Rational)>, default: Rational) -> Self {
        Profile { cases, default }.normalized()
    }

    /// Builds a profile from an authored case list with no explicit default.
    /// A trailing `true` guard becomes the default; otherwise the default is 0.
    pub fn from_cases(cases: Vec<(Expr, Rational)>) -> Self {
        Self::guarded(cases, Rational::zero())
    }

    /// `1` where `e` holds, `0` elsewhere.
    pub fn indicator(e: &Expr) -> Self {
        Self::guarded(vec![(e.clone(), Rational::one())], Rational::zero())
    }

    pub fn cases(&self) -> &[(Expr, Rational)] {
        &self.cases
    }

    pub fn default_value(&self) -> &Rational {
        &self.default
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        self.cases.is_empty().then_some(&self.default)
    }

    pub fn is_constant(&self, value: &Rational) -> bool {
        self.as_constant() == Some(value)
    }

    /// Every value the profile can take syntactically.
    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.cases.iter().map(|(_, v)| v).chain(std::iter::once(&self.default))
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<Rational, ProfileError>
    where
        F: Fn(&str) -> Option<bool>,
    {
        for (guard, value) in &self.cases {
            if guard.eval(lookup).map_err(|e| ProfileError::UnboundFeature(e.0))? {
                return Ok(value.clone());
            }
        }
        Ok(self.default.clone())
    }

    /// Value at `p`, which must be a valid product of `d`.
    pub fn eval_product(&self, d: &FeatureDiagram, p: &Product) -> Result<Rational, ProfileError> {
        let mask = d.mask_of(p)?;
        Ok(self.compile(d)?.eval_mask(mask).clone())
    }

    pub fn compile(&self, d: &FeatureDiagram) -> Result<CompiledProfile<'_>, ProfileError> {
        let cases = self
            .cases
            .iter()
            .map(|(g, v)| {
                g.compile(d.signature())
                    .map(|c| (c, v))
                    .map_err(|e| ProfileError::UnboundFeature(e.0))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CompiledProfile {
            cases,
            default: &self.default,
        })
    }

    pub fn to_dense<T: Scalar>(&self, d: &FeatureDiagram) -> Result<DenseProfile<T>, ProfileError> {
        let compiled = self.compile(d)?;
        let values = d
            .product_masks()?
            .iter()
            .map(|&m| T::from_rational(compiled.eval_mask(m)))
            .collect();
        Ok(DenseProfile { values })
    }

    /// Guard-per-product form of a dense vector, grouped by value. Products
    /// carrying the most frequent value fall to the default.
    pub fn from_dense<T: Scalar>(dense: &DenseProfile<T>, d: &FeatureDiagram) -> Result<Self, ProfileError> {
        let masks = d.product_masks()?;
        if masks.len() != dense.len() {
            return Err(ProfileError::DiagramMismatch {
                left: masks.len(),
                right: dense.len(),
            });
        }
        let mut groups: Vec<(Rational, Vec<u64>)> = Vec::new();
        for (value, &mask) in dense.values.iter().zip(masks) {
            let value = value.to_rational();
            match groups.iter_mut().find(|(v, _)| *v == value) {
                Some((_, ms)) => ms.push(mask),
                None => groups.push((value, vec![mask])),
            }
        }
        let Some(default_at) = (0..groups.len()).max_by_key(|&i| (groups[i].1.len(), usize::MAX - i)) else {
            return Ok(Profile::zero());
        };
        let default = groups[default_at].0.clone();
        let names = d.signature();
        let cases = groups
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != default_at)
            .map(|(_, (value, ms))| {
                let guard = Expr::any(ms.into_iter().map(|m| {
                    Expr::minterm(names.iter().enumerate().map(|(i, f)| (f.as_str(), m >> i & 1 == 1)))
                }));
                (guard, value)
            })
            .collect();
        Ok(Profile { cases, default })
    }

    fn map_values(&self, f: impl Fn(&Rational) -> Rational) -> Profile {
        Profile {
            cases: self.cases.iter().map(|(g, v)| (g.clone(), f(v))).collect(),
            default: f(&self.default),
        }
        .normalized()
    }

    /// Pointwise combination. For first-match lists, the lexicographically
    /// first pair of matching cases is the pair of first matches, so the
    /// ordered cross product of cases is exact.
    pub fn combine(&self, other: &Profile, op: impl Fn(&Rational, &Rational) -> Rational) -> Profile {
        if let Some(c) = other.as_constant() {
            return self.map_values(|v| op(v, c));
        }
        if let Some(c) = self.as_constant() {
            return other.map_values(|v| op(c, v));
        }
        let left = self
            .cases
            .iter()
            .map(|(g, v)| (g, v))
            .chain(std::iter::once((&Expr::Const(true), &self.default)));
        let mut cases = Vec::new();
        for (g1, v1) in left {
            let right = other
                .cases
                .iter()
                .map(|(g, v)| (g, v))
                .chain(std::iter::once((&Expr::Const(true), &other.default)));
            for (g2, v2) in right {
                let guard = match (g1, g2) {
                    (Expr::Const(true), g) | (g, Expr::Const(true)) => g.clone(),
                    (a, b) => Expr::and(a.clone(), b.clone()),
                };
                cases.push((guard, op(v1, v2)));
            }
        }
        // The final pair has guard `true` and becomes the default.
        let (_, default) = cases.pop().expect("at least the default pair");
        Profile { cases, default }.normalized()
    }

    /// `⊗`
    pub fn mul(&self, other: &Profile) -> Profile {
        self.combine(other, |a, b| a * b)
    }

    /// `⊕`
    pub fn add(&self, other: &Profile) -> Profile {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Profile) -> Profile {
        self.combine(other, |a, b| a - b)
    }

    pub fn complement(&self) -> Profile {
        self.map_values(|v| Rational::one() - v)
    }

    pub fn scale(&self, factor: &Rational) -> Profile {
        self.map_values(|v| v * factor)
    }

    pub fn pointwise_max(&self, other: &Profile) -> Profile {
        self.combine(other, |a, b| if a >= b { a.clone() } else { b.clone() })
    }

    /// True iff some valid product has `self(p) > other(p) + tau`.
    pub fn exceeds(&self, other: &Profile, tau: &Rational, d: &FeatureDiagram) -> Result<bool, ProfileError> {
        let a = self.to_dense::<Rational>(d)?;
        let b = other.to_dense::<Rational>(d)?;
        a.exceeds(&b, tau)
    }

    /// Pointwise equality over the valid products of `d`.
    pub fn equivalent(&self, other: &Profile, d: &FeatureDiagram) -> Result<bool, ProfileError> {
        Ok(self.to_dense::<Rational>(d)? == other.to_dense::<Rational>(d)?)
    }

    /// Syntactic clean-up that preserves the function on every assignment:
    /// guards are simplified, unsatisfiable or shadowed cases dropped, a
    /// `true` guard truncates the list, and trailing cases equal to the
    /// default are folded into it.
    pub fn normalized(mut self) -> Profile {
        let mut cases: Vec<(Expr, Rational)> = Vec::with_capacity(self.cases.len());
        for (guard, value) in self.cases.drain(..) {
            let guard = guard.simplify();
            match guard {
                Expr::Const(false) => {}
                Expr::Const(true) => {
                    self.default = value;
                    break;
                }
                g => {
                    if !cases.iter().any(|(h, _)| *h == g) {
                        cases.push((g, value));
                    }
                }
            }
        }
        while cases.last().is_some_and(|(_, v)| *v == self.default) {
            cases.pop();
        }
        if cases.iter().all(|(_, v)| *v == self.default) {
            cases.clear();
        }
        Profile {
            cases,
            default: self.default,
        }
    }

    /// Drops cases that no valid product of `d` reaches first, then merges
    /// adjacent cases with equal values.
    pub fn compact(&self, d: &FeatureDiagram) -> Result<Profile, ProfileError> {
        let masks = d.product_masks()?;
        let compiled = self.compile(d)?;
        let mut used = vec![false; self.cases.len() + 1];
        for &m in masks {
            let hit = compiled
                .cases
                .iter()
                .position(|(g, _)| g.eval(m))
                .unwrap_or(self.cases.len());
            used[hit] = true;
        }
        let mut cases: Vec<(Expr, Rational)> = Vec::new();
        for (i, (g, v)) in self.cases.iter().enumerate() {
            if !used[i] {
                continue;
            }
            match cases.last_mut() {
                Some((h, w)) if w == v => *h = Expr::or(h.clone(), g.clone()),
                _ => cases.push((g.clone(), v.clone())),
            }
        }
        let mut default = self.default.clone();
        if !used[self.cases.len()] {
            if let Some((_, v)) = cases.pop() {
                default = v;
            }
        }
        Ok(Profile { cases, default }.normalized())
    }

    /// Values outside `[0, 1]` appearing in the case list.
    pub fn out_of_unit_range(&self) -> Vec<Rational> {
        let one = Rational::one();
        self.values()
            .filter(|v| **v < Rational::zero() || **v > one)
            .cloned()
            .collect()
    }
}

impl From<Rational> for Profile {
    fn from(value: Rational) -> Self {
        Profile::constant(value)
    }
}

impl fmt::Display for Profile {
    /// `[g1] v1, [g2] v2, v` with the default last; constants print bare.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (guard, value) in &self.cases {
            write!(f, "[{guard}] {}, ", format_rational(value))?;
        }
        if self.cases.is_empty() || !self.default.is_zero() {
            write!(f, "{}", format_rational(&self.default))
        } else {
            write!(f, "[true] 0")
        }
    }
}

/// A profile whose guards are compiled against a diagram's signature.
pub struct CompiledProfile<'a> {
    cases: Vec<(CompiledExpr, &'a Rational)>,
    default: &'a Rational,
}

impl<'a> CompiledProfile<'a> {
    pub fn eval_mask(&self, mask: u64) -> &'a Rational {
        self.cases
            .iter()
            .find(|(g, _)| g.eval(mask))
            .map(|(_, v)| *v)
            .unwrap_or(self.default)
    }
}

/// One value per valid product, indexed in canonical product order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProfile<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> DenseProfile<T> {
    pub fn new(values: Vec<T>) -> Self {
        DenseProfile { values }
    }

    pub fn constant(len: usize, value: T) -> Self {
        DenseProfile { values: vec![value; len] }
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, T::zero_value())
    }

    pub fn ones(len: usize) -> Self {
        Self::constant(len, T::one_value())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> &T {
        &self.values[index]
    }

    fn zip(&self, other: &Self, op: impl Fn(&T, &T) -> T) -> Result<Self, ProfileError> {
        if self.len() != other.len() {
            return Err(ProfileError::DiagramMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(DenseProfile {
            values: self.values.iter().zip(&other.values).map(|(a, b)| op(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ProfileError> {
        self.zip(other, T::mul)
    }

    pub fn add(&self, other: &Self) -> Result<Self, ProfileError> {
        self.zip(other, T::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ProfileError> {
        self.zip(other, T::sub)
    }

    pub fn pointwise_max(&self, other: &Self) -> Result<Self, ProfileError> {
        self.zip(other, T::max_of)
    }

    pub fn complement(&self) -> Self {
        DenseProfile {
            values: self.values.iter().map(|v| T::one_value().sub(v)).collect(),
        }
    }

    pub fn exceeds(&self, other: &Self, tau: &T) -> Result<bool, ProfileError> {
        if self.len() != other.len() {
            return Err(ProfileError::DiagramMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self.values.iter().zip(&other.values).any(|(a, b)| *a > b.add(tau)))
    }

    pub fn max_value(&self) -> Option<T> {
        self.values.iter().cloned().reduce(|a, b| a.max_of(&b))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero_value)
    }
}
