use std::fmt;

use num_traits::{One, Zero};

use crate::rational::Rational;

use super::poly::Poly;

/// Quotient of two multilinear polynomials. No common factors are
/// cancelled; constant denominators are folded into the numerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Self {
        RationalFunction { num, den }.normalized()
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_poly(num: Poly) -> Self {
        RationalFunction { num, den: Poly::one() }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        (self.den == Poly::one()).then_some(&self.num)
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den = Poly::one();
        } else if let Some(c) = self.den.as_constant() {
            if !c.is_zero() && !c.is_one() {
                self.num = self.num.scale(&c.recip());
                self.den = Poly::one();
            }
        } else if self.num == self.den {
            self.num = Poly::one();
            self.den = Poly::one();
        }
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Self::new(self.num.add(&other.num), self.den.clone());
        }
        Self::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        Self::new(self.num.mul(p), self.den.clone())
    }

    /// `1 / (1 - self)` together with the polynomials that must not vanish
    /// for the result to be defined.
    pub fn loop_factor(&self) -> (Self, Poly) {
        let gap = self.den.sub(&self.num);
        (Self::new(self.den.clone(), gap.clone()), gap)
    }

    /// Value at a Boolean point, `None` where the denominator vanishes.
    pub fn eval(&self, mask: u64) -> Option<Rational> {
        let d = self.den.eval(mask);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(mask) / d)
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..64).map(|i| format!("x{i}")).collect();
        let one = Rational::one();
        if self.den == Poly::one() {
            f.write_str(&self.num.render(&names, &one))
        } else {
            write!(f, "({}) / ({})", self.num.render(&names, &one), self.den.render(&names, &one))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn geometric_loop() {
        // 1 / (1 - x/2) at x = 1 is 2
        let l = RationalFunction::from_poly(Poly::var(0).scale(&rat(1, 2)));
        let (inv, gap) = l.loop_factor();
        assert_eq!(inv.eval(1), Some(int(2)));
        assert_eq!(inv.eval(0), Some(int(1)));
        assert_eq!(gap.eval(1), rat(1, 2));
    }

    #[test]
    fn vanishing_denominator() {
        let l = RationalFunction::from_poly(Poly::var(0));
        let (inv, gap) = l.loop_factor();
        assert_eq!(inv.eval(1), None);
        assert!(gap.eval(1).is_zero());
    }

    #[test]
    fn arithmetic_at_points() {
        let a = RationalFunction::new(Poly::var(0), Poly::constant(int(2)).add(&Poly::var(1)));
        let b = RationalFunction::new(Poly::one(), Poly::constant(int(3)));
        for m in 0..4 {
            let (x, y) = (a.eval(m).unwrap(), b.eval(m).unwrap());
            assert_eq!(a.add(&b).eval(m), Some(&x + &y));
            assert_eq!(a.mul(&b).eval(m), Some(&x * &y));
            assert_eq!(a.sub(&b).eval(m), Some(&x - &y));
        }
        assert_eq!(b.as_poly(), Some(&Poly::constant(rat(1, 3))));
    }
}
