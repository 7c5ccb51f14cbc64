use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::diagram::FeatureDiagram;
use crate::expr::Expr;
use crate::profile::{Profile, ProfileError};
use crate::rational::Rational;

/// Multilinear polynomial over the features of a signature. A monomial is
/// the bit set of its variables, so `f·f = f` holds by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<u64, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        Poly { terms }
    }

    /// The variable at position `index` of the signature.
    pub fn var(index: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(1u64 << index, Rational::one());
        Poly { terms }
    }

    pub fn terms(&self) -> &BTreeMap<u64, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    fn accumulate(terms: &mut BTreeMap<u64, Rational>, monomial: u64, c: Rational) {
        use std::collections::btree_map::Entry;
        match terms.entry(monomial) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::accumulate(&mut terms, *m, c.clone());
        }
        Poly { terms }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::accumulate(&mut terms, *m, -c);
        }
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    /// `1 - self`
    pub fn complement(&self) -> Poly {
        Poly::one().sub(self)
    }

    pub fn scale(&self, factor: &Rational) -> Poly {
        if factor.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, c * factor)).collect(),
        }
    }

    /// Product with the idempotent reduction `f² → f`.
    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                Self::accumulate(&mut terms, m1 | m2, c1 * c2);
            }
        }
        Poly { terms }
    }

    /// Value at the Boolean point whose true variables are the bits of `mask`.
    pub fn eval(&self, mask: u64) -> Rational {
        self.terms
            .iter()
            .filter(|(m, _)| *m & !mask == 0)
            .map(|(_, c)| c)
            .sum()
    }

    /// `Π_{f ∈ p} f · Π_{f ∉ p} (1 - f)` over the first `n` variables: 1 at
    /// the point `mask` and 0 at every other Boolean point.
    pub fn epsilon(mask: u64, n: usize) -> Poly {
        (0..n).fold(Poly::one(), |acc, i| {
            let v = Poly::var(i);
            acc.mul(&if mask >> i & 1 == 1 { v } else { v.complement() })
        })
    }

    /// The unique multilinear polynomial of the Boolean function `e`.
    pub fn from_expr(e: &Expr, signature: &[String]) -> Result<Poly, ProfileError> {
        Ok(match e {
            Expr::Const(true) => Poly::one(),
            Expr::Const(false) => Poly::zero(),
            Expr::Var(name) => {
                let i = signature
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| ProfileError::UnboundFeature(name.clone()))?;
                Poly::var(i)
            }
            Expr::Not(a) => Self::from_expr(a, signature)?.complement(),
            Expr::And(a, b) => Self::from_expr(a, signature)?.mul(&Self::from_expr(b, signature)?),
            Expr::Or(a, b) => {
                let (a, b) = (Self::from_expr(a, signature)?, Self::from_expr(b, signature)?);
                a.add(&b).sub(&a.mul(&b))
            }
            Expr::Implies(a, b) => {
                let (a, b) = (Self::from_expr(a, signature)?, Self::from_expr(b, signature)?);
                Poly::one().sub(&a).add(&a.mul(&b))
            }
            Expr::Xor(a, b) => {
                let (a, b) = (Self::from_expr(a, signature)?, Self::from_expr(b, signature)?);
                let ab = a.mul(&b);
                a.add(&b).sub(&ab).sub(&ab)
            }
        })
    }

    /// First-match encoding `Σ vᵢ · gᵢ · Π_{j<i} (1 - gⱼ)` plus the default
    /// on the remaining points. A profile with guards `f` / `¬f` becomes
    /// `v₁·f + v₀·(1 - f)`.
    pub fn from_profile(profile: &Profile, d: &FeatureDiagram) -> Result<Poly, ProfileError> {
        let sig = d.signature();
        let mut unmatched = Poly::one();
        let mut acc = Poly::zero();
        for (guard, value) in profile.cases() {
            let g = Self::from_expr(guard, sig)?;
            let hit = unmatched.mul(&g);
            acc = acc.add(&hit.scale(value));
            unmatched = unmatched.sub(&hit);
        }
        Ok(acc.add(&unmatched.scale(profile.default_value())))
    }

    /// Literal `Σ_{p ∈ ⟦d⟧} ε(p) · π(p)` encoding.
    pub fn from_profile_by_products(profile: &Profile, d: &FeatureDiagram) -> Result<Poly, ProfileError> {
        let n = d.signature().len();
        let compiled = profile.compile(d)?;
        let mut acc = Poly::zero();
        for &m in d.product_masks()? {
            acc = acc.add(&Poly::epsilon(m, n).scale(compiled.eval_mask(m)));
        }
        Ok(acc)
    }

    /// Möbius interpolation: the multilinear polynomial taking `value(m)` at
    /// every Boolean point `m` of the first `n` variables.
    pub fn interpolate(n: usize, value: impl Fn(u64) -> Rational) -> Poly {
        let size = 1usize << n;
        let mut coeffs: Vec<Rational> = (0..size as u64).map(value).collect();
        for i in 0..n {
            let bit = 1usize << i;
            for m in 0..size {
                if m & bit != 0 {
                    let lower = coeffs[m ^ bit].clone();
                    coeffs[m] -= lower;
                }
            }
        }
        Poly {
            terms: coeffs
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m as u64, c))
                .collect(),
        }
    }

    /// Least common denominator of the coefficients.
    pub fn common_denominator(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Monomials ordered by degree (highest first), then by variable
    /// positions.
    fn ordered_terms(&self) -> Vec<(u64, &Rational)> {
        let mut terms: Vec<(u64, &Rational)> = self.terms.iter().map(|(m, c)| (*m, c)).collect();
        terms.sort_by_key(|(m, _)| {
            let positions: Vec<u32> = (0..64).filter(|i| m >> i & 1 == 1).collect();
            (std::cmp::Reverse(m.count_ones()), positions)
        });
        terms
    }

    /// `coef*f1*f2` monomials joined by ` + ` / ` - `, every coefficient
    /// multiplied by `scale`.
    pub fn render(&self, names: &[String], scale: &Rational) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.ordered_terms().into_iter().enumerate() {
            let c = c * scale;
            let negative = c.is_negative();
            let magnitude = c.abs();
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let vars: Vec<&str> = (0..names.len())
                .filter(|j| m >> j & 1 == 1)
                .map(|j| names[j].as_str())
                .collect();
            let coef = crate::rational::format_rational(&magnitude);
            if vars.is_empty() {
                out.push_str(&coef);
            } else {
                if !magnitude.is_one() {
                    let _ = write!(out, "{coef}*");
                }
                out.push_str(&vars.join("*"));
            }
        }
        out
    }

    /// Integer-scaled form: numerator text and the integer denominator.
    pub fn render_scaled(&self, names: &[String]) -> (String, BigInt) {
        let den = self.common_denominator();
        let text = self.render(names, &Rational::from_integer(den.clone()));
        (text, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_feature_expression as parse;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn idempotent_products() {
        let f = Poly::var(0);
        assert_eq!(f.mul(&f), f);
        assert!(f.complement().mul(&f).is_zero());
    }

    #[test]
    fn evaluates_wiper_numerator_terms() {
        // 45·spd2·very + 45·spd2 + 120 with spd2 = 0, very = 1
        let p = Poly::var(0)
            .mul(&Poly::var(1))
            .scale(&int(45))
            .add(&Poly::var(0).scale(&int(45)))
            .add(&Poly::constant(int(120)));
        assert_eq!(p.eval(0b11), int(210));
        assert_eq!(p.eval(0b10), int(120));
    }

    #[test]
    fn epsilon_expansion() {
        assert_eq!(Poly::epsilon(1, 1), Poly::var(0));
        assert_eq!(Poly::epsilon(0, 1), Poly::var(0).complement());
        // W(1-A)V = W·V - W·A·V with W, A, V at positions 0, 1, 2
        let e = Poly::epsilon(0b101, 3);
        let expected = Poly::var(0).mul(&Poly::var(2)).sub(&Poly::var(0).mul(&Poly::var(1)).mul(&Poly::var(2)));
        assert_eq!(e, expected);
    }

    #[test]
    fn profile_encodings() {
        let d = FeatureDiagram::unconstrained(["spd2", "very", "eco"]).unwrap();
        let f = Profile::guarded(vec![(parse("spd2").unwrap(), rat(1, 2))], rat(4, 5));
        let expected = Poly::var(0).scale(&rat(1, 2)).add(&Poly::var(0).complement().scale(&rat(4, 5)));
        assert_eq!(Poly::from_profile(&f, &d).unwrap(), expected);
        assert_eq!(Poly::from_profile(&Profile::constant(rat(3, 7)), &d).unwrap(), Poly::constant(rat(3, 7)));
        let alpha = Profile::guarded(
            vec![
                (parse("!spd2").unwrap(), rat(4, 5)),
                (parse("spd2 & !very").unwrap(), rat(1, 2)),
                (parse("spd2 & very").unwrap(), rat(1, 5)),
            ],
            Rational::zero(),
        );
        let poly = Poly::from_profile(&alpha, &d).unwrap();
        let expected = Poly::constant(rat(4, 5))
            .sub(&Poly::var(0).scale(&rat(3, 10)))
            .sub(&Poly::var(0).mul(&Poly::var(1)).scale(&rat(3, 10)));
        assert_eq!(poly, expected);
        assert_eq!(poly, Poly::from_profile_by_products(&alpha, &d).unwrap());
    }

    #[test]
    fn epsilon_partition_is_one() {
        let d = FeatureDiagram::unconstrained(["a", "b", "c"]).unwrap();
        let sum = d
            .product_masks()
            .unwrap()
            .iter()
            .fold(Poly::zero(), |acc, &m| acc.add(&Poly::epsilon(m, 3)));
        assert_eq!(sum, Poly::one());
        let c = FeatureDiagram::new(names(&["a", "b"]), parse("a | b").unwrap()).unwrap();
        let sum = c
            .product_masks()
            .unwrap()
            .iter()
            .fold(Poly::zero(), |acc, &m| acc.add(&Poly::epsilon(m, 2)));
        for &m in c.product_masks().unwrap() {
            assert_eq!(sum.eval(m), int(1));
        }
    }

    #[test]
    fn interpolation_and_rendering() {
        let sig = names(&["s", "v", "e"]);
        let target = |m: u64| {
            let (s, v, e) = (m & 1, m >> 1 & 1, m >> 2 & 1);
            let n = -15 * (s * e * v) as i64 - 15 * (s * e) as i64 + 45 * (s * v) as i64 + 45 * s as i64
                - 40 * e as i64
                + 120;
            rat(n, 8)
        };
        let p = Poly::interpolate(3, target);
        for m in 0..8 {
            assert_eq!(p.eval(m), target(m));
        }
        let (text, den) = p.render_scaled(&sig);
        assert_eq!(den, BigInt::from(8));
        assert_eq!(text, "-15*s*v*e + 45*s*v - 15*s*e + 45*s - 40*e + 120");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![Just(Expr::Const(true)), (0..4usize).prop_map(|i| Expr::var(["a", "b", "c", "d"][i]))];
        leaf.prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::xor(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::implies(a, b)),
            ]
        })
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (proptest::collection::vec((arb_expr(), -5i64..10), 0..4), 0i64..10)
            .prop_map(|(cases, d)| Profile::guarded(cases.into_iter().map(|(g, v)| (g, rat(v, 7))).collect(), rat(d, 3)))
    }

    proptest! {
        #[test]
        fn encoding_agrees_with_profile(p in arb_profile(), constraint in arb_expr()) {
            let d = FeatureDiagram::new(names(&["a", "b", "c", "d"]), constraint).unwrap();
            let poly = Poly::from_profile(&p, &d).unwrap();
            let by_products = Poly::from_profile_by_products(&p, &d).unwrap();
            let compiled = p.compile(&d).unwrap();
            for &m in d.product_masks().unwrap() {
                prop_assert_eq!(poly.eval(m), compiled.eval_mask(m).clone());
                prop_assert_eq!(by_products.eval(m), compiled.eval_mask(m).clone());
            }
        }

        #[test]
        fn operations_stay_multilinear(a in arb_profile(), b in arb_profile()) {
            let d = FeatureDiagram::unconstrained(["a", "b", "c", "d"]).unwrap();
            let (pa, pb) = (Poly::from_profile(&a, &d).unwrap(), Poly::from_profile(&b, &d).unwrap());
            let prod = pa.mul(&pb);
            prop_assert!(prod.terms().keys().all(|m| *m < 16));
            prop_assert!(prod.terms().values().all(|c| !c.is_zero()));
            for m in 0..16u64 {
                prop_assert_eq!(prod.eval(m), pa.eval(m) * pb.eval(m));
                prop_assert_eq!(pa.add(&pb).eval(m), pa.eval(m) + pb.eval(m));
            }
        }
    }
}
