//! Feature diagrams as a signature plus a Boolean constraint, and products.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::expr::{CompiledExpr, Expr};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("feature `{0}` is declared twice")]
    DuplicateFeature(String),
    #[error("constraint refers to undeclared feature `{0}`")]
    UndeclaredFeature(String),
    #[error("{features} features exceed the enumeration limit of {limit}; raise the limit to enumerate this product line")]
    LimitExceeded { features: usize, limit: usize },
    #[error("feature `{0}` is not part of the product")]
    NotInProduct(String),
    #[error("product {0} is not valid for this feature diagram")]
    InvalidProduct(String),
}

/// A product: a total assignment over an ordered feature signature.
///
/// Bit `i` of the mask holds the value of `features[i]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Product {
    features: Arc<[String]>,
    mask: u64,
}

impl Product {
    pub fn new(features: Arc<[String]>, mask: u64) -> Self {
        Product { features, mask }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        let mut names = Vec::new();
        let mut mask = 0u64;
        for (i, (name, value)) in pairs.into_iter().enumerate() {
            names.push(name.to_string());
            if value {
                mask |= 1 << i;
            }
        }
        Product {
            features: names.into(),
            mask,
        }
    }

    pub fn empty() -> Self {
        Product {
            features: Vec::new().into(),
            mask: 0,
        }
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn signature(&self) -> &Arc<[String]> {
        &self.features
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.features
            .iter()
            .position(|f| f == name)
            .map(|i| self.mask >> i & 1 == 1)
    }

    pub fn enabled(&self) -> impl Iterator<Item = &str> {
        self.features
            .iter()
            .enumerate()
            .filter(|(i, _)| self.mask >> i & 1 == 1)
            .map(|(_, f)| f.as_str())
    }

    pub fn assignment(&self) -> BTreeMap<String, bool> {
        self.features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), self.mask >> i & 1 == 1))
            .collect()
    }

    /// Keeps only the bindings of `sub`, in the order of `sub`.
    pub fn restrict(&self, sub: &[String]) -> Result<Product, FeatureError> {
        let mut mask = 0u64;
        for (i, name) in sub.iter().enumerate() {
            match self.get(name) {
                Some(true) => mask |= 1 << i,
                Some(false) => {}
                None => return Err(FeatureError::NotInProduct(name.clone())),
            }
        }
        Ok(Product {
            features: sub.to_vec().into(),
            mask,
        })
    }

    pub fn lookup(&self) -> impl Fn(&str) -> Option<bool> + '_ {
        move |name| self.get(name)
    }
}

impl fmt::Display for Product {
    /// The set of enabled features, e.g. `{spd2, very}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, name) in self.enabled().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Product{self}")
    }
}

/// Maps the canonical enumeration index to a feature mask: the first feature
/// of the signature is the most significant position, `false < true`.
fn mask_of_rank(rank: u64, n: usize) -> u64 {
    let mut mask = 0;
    for i in 0..n {
        if rank >> (n - 1 - i) & 1 == 1 {
            mask |= 1 << i;
        }
    }
    mask
}

fn rank_of_mask(mask: u64, n: usize) -> u64 {
    mask_of_rank(mask, n)
}

/// Signature and constraint; the product line is the set of satisfying
/// assignments. Immutable once built; valid products are enumerated lazily
/// and cached.
#[derive(Debug)]
pub struct FeatureDiagram {
    signature: Arc<[String]>,
    constraint: Expr,
    compiled: CompiledExpr,
    limit: usize,
    products: OnceLock<Result<Arc<[u64]>, FeatureError>>,
}

impl Clone for FeatureDiagram {
    fn clone(&self) -> Self {
        FeatureDiagram {
            signature: self.signature.clone(),
            constraint: self.constraint.clone(),
            compiled: self.compiled.clone(),
            limit: self.limit,
            products: self.products.clone(),
        }
    }
}

impl PartialEq for FeatureDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.constraint == other.constraint
    }
}

impl Eq for FeatureDiagram {}

impl FeatureDiagram {
    pub fn new(signature: Vec<String>, constraint: Expr) -> Result<Self, FeatureError> {
        for (i, name) in signature.iter().enumerate() {
            if signature[..i].contains(name) {
                return Err(FeatureError::DuplicateFeature(name.clone()));
            }
        }
        if signature.len() > 63 {
            return Err(FeatureError::LimitExceeded {
                features: signature.len(),
                limit: 63,
            });
        }
        let compiled = constraint
            .compile(&signature)
            .map_err(|e| FeatureError::UndeclaredFeature(e.0))?;
        Ok(FeatureDiagram {
            signature: signature.into(),
            constraint,
            compiled,
            limit: DEFAULT_ENUMERATION_LIMIT,
            products: OnceLock::new(),
        })
    }

    pub fn unconstrained<S: Into<String>>(signature: impl IntoIterator<Item = S>) -> Result<Self, FeatureError> {
        Self::new(signature.into_iter().map(Into::into).collect(), Expr::Const(true))
    }

    /// The diagram with no features and a single (empty) product.
    pub fn trivial() -> Self {
        Self::new(Vec::new(), Expr::Const(true)).expect("empty signature is valid")
    }

    pub fn with_enumeration_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self.products = OnceLock::new();
        self
    }

    pub fn signature(&self) -> &[String] {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<[String]> {
        &self.signature
    }

    pub fn constraint(&self) -> &Expr {
        &self.constraint
    }

    pub fn enumeration_limit(&self) -> usize {
        self.limit
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.signature.iter().position(|f| f == name)
    }

    /// True when the constraint admits every assignment.
    pub fn is_full_cube(&self) -> Result<bool, FeatureError> {
        Ok(self.product_masks()?.len() as u64 == 1u64 << self.signature.len())
    }

    /// Masks of the valid products in canonical order.
    pub fn product_masks(&self) -> Result<&[u64], FeatureError> {
        let cached = self.products.get_or_init(|| {
            let n = self.signature.len();
            if n > self.limit {
                return Err(FeatureError::LimitExceeded {
                    features: n,
                    limit: self.limit,
                });
            }
            let masks: Vec<u64> = (0..1u64 << n)
                .map(|rank| mask_of_rank(rank, n))
                .filter(|&m| self.compiled.eval(m))
                .collect();
            Ok(masks.into())
        });
        match cached {
            Ok(m) => Ok(m),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn product_count(&self) -> Result<usize, FeatureError> {
        Ok(self.product_masks()?.len())
    }

    pub fn valid_products(&self) -> Result<Vec<Product>, FeatureError> {
        Ok(self
            .product_masks()?
            .iter()
            .map(|&m| Product::new(self.signature.clone(), m))
            .collect())
    }

    pub fn product(&self, mask: u64) -> Product {
        Product::new(self.signature.clone(), mask)
    }

    pub fn satisfies_mask(&self, mask: u64) -> bool {
        self.compiled.eval(mask)
    }

    /// Re-expresses `p` over this signature (by name) if it is valid here.
    pub fn mask_of(&self, p: &Product) -> Result<u64, FeatureError> {
        let mut mask = 0u64;
        for (i, name) in self.signature.iter().enumerate() {
            match p.get(name) {
                Some(true) => mask |= 1 << i,
                Some(false) => {}
                None => return Err(FeatureError::NotInProduct(name.clone())),
            }
        }
        if !self.compiled.eval(mask) {
            return Err(FeatureError::InvalidProduct(p.to_string()));
        }
        Ok(mask)
    }

    pub fn is_valid(&self, p: &Product) -> bool {
        self.mask_of(p).is_ok()
    }

    /// Position of `p` in the canonical product order.
    pub fn product_index(&self, p: &Product) -> Result<usize, FeatureError> {
        let mask = self.mask_of(p)?;
        let n = self.signature.len();
        let key = rank_of_mask(mask, n);
        self.product_masks()?
            .binary_search_by_key(&key, |&m| rank_of_mask(m, n))
            .map_err(|_| FeatureError::InvalidProduct(p.to_string()))
    }

    /// `d1 ∧ d2`: union of the signatures (this one's order first, then the
    /// new names of `other`) with the conjoined constraint.
    pub fn conjoin(&self, other: &FeatureDiagram) -> FeatureDiagram {
        if self == other {
            return self.clone();
        }
        let mut signature: Vec<String> = self.signature.to_vec();
        for name in other.signature.iter() {
            if !signature.contains(name) {
                signature.push(name.clone());
            }
        }
        let constraint = match (&self.constraint, &other.constraint) {
            (Expr::Const(true), c) | (c, Expr::Const(true)) => c.clone(),
            (a, b) => Expr::and(a.clone(), b.clone()),
        };
        FeatureDiagram::new(signature, constraint)
            .expect("conjoined constraint only mentions declared features")
            .with_enumeration_limit(self.limit.max(other.limit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_feature_expression as parse;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unconstrained_three_features_give_eight_products() {
        let minepump = FeatureDiagram::unconstrained(["W", "A", "V"]).unwrap();
        assert_eq!(minepump.valid_products().unwrap().len(), 8);
        let wiper = FeatureDiagram::unconstrained(["spd2", "very", "eco"]).unwrap();
        assert_eq!(wiper.valid_products().unwrap().len(), 8);
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let d = FeatureDiagram::unconstrained(["a", "b"]).unwrap();
        let rendered: Vec<String> = d.valid_products().unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["{}", "{b}", "{a}", "{a, b}"]);
        for (i, p) in d.valid_products().unwrap().iter().enumerate() {
            assert_eq!(d.product_index(p).unwrap(), i);
        }
    }

    #[test]
    fn forced_assignment() {
        let d = FeatureDiagram::new(names(&["f"]), parse("!f").unwrap()).unwrap();
        let ps = d.valid_products().unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].get("f"), Some(false));
    }

    #[test]
    fn rejects_duplicates_and_undeclared() {
        assert_eq!(
            FeatureDiagram::unconstrained(["a", "a"]).unwrap_err(),
            FeatureError::DuplicateFeature("a".into())
        );
        assert_eq!(
            FeatureDiagram::new(names(&["a"]), parse("b").unwrap()).unwrap_err(),
            FeatureError::UndeclaredFeature("b".into())
        );
    }

    #[test]
    fn limit_is_enforced_and_configurable() {
        let sig: Vec<String> = (0..5).map(|i| format!("f{i}")).collect();
        let d = FeatureDiagram::new(sig, Expr::Const(true)).unwrap().with_enumeration_limit(4);
        assert!(matches!(d.valid_products(), Err(FeatureError::LimitExceeded { features: 5, limit: 4 })));
        let d = d.with_enumeration_limit(5);
        assert_eq!(d.valid_products().unwrap().len(), 32);
    }

    #[test]
    fn restrict_projects_assignment() {
        let p = Product::from_pairs([("W", true), ("A", false), ("V", true)]);
        let r = p.restrict(&names(&["W", "A"])).unwrap();
        assert_eq!(r, Product::from_pairs([("W", true), ("A", false)]));
        assert_eq!(p.restrict(&names(&["W", "A", "V"])).unwrap(), p);
        assert_eq!(p.restrict(&[]).unwrap(), Product::empty());
        assert_eq!(
            p.restrict(&names(&["Q"])).unwrap_err(),
            FeatureError::NotInProduct("Q".into())
        );
    }

    #[test]
    fn conjoin_examples() {
        let d1 = FeatureDiagram::unconstrained(["W", "A"]).unwrap();
        let d2 = FeatureDiagram::unconstrained(["V"]).unwrap();
        let d = d1.conjoin(&d2);
        assert_eq!(d.signature(), &names(&["W", "A", "V"])[..]);
        assert_eq!(d.valid_products().unwrap().len(), 8);

        let pos = FeatureDiagram::new(names(&["f"]), parse("f").unwrap()).unwrap();
        let neg = FeatureDiagram::new(names(&["f"]), parse("!f").unwrap()).unwrap();
        assert_eq!(pos.conjoin(&neg).valid_products().unwrap().len(), 0);
        assert_eq!(pos.conjoin(&pos).valid_products().unwrap(), pos.valid_products().unwrap());
    }
}
