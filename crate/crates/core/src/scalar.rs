//! Arithmetic abstraction shared by the exact and the float64 evaluation modes.

use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::rational::{self, Rational};

/// Field operations needed by the dense engines.
pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Send + Sync + 'static {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn from_rational(value: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    /// Slack used when comparing profiles for strict improvement.
    fn tolerance() -> Self;
    /// Lower is a better elimination pivot.
    fn pivot_cost(&self) -> f64;
    /// Whether arithmetic is exact.
    const EXACT: bool;
    fn max_of(&self, other: &Self) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn tolerance() -> Self {
        Zero::zero()
    }
    fn pivot_cost(&self) -> f64 {
        rational::bit_size(self) as f64
    }
    const EXACT: bool = true;
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(value: &Rational) -> Self {
        rational::to_f64(value)
    }
    fn to_rational(&self) -> Rational {
        rational::from_f64(*self)
    }
    fn tolerance() -> Self {
        1e-12
    }
    fn pivot_cost(&self) -> f64 {
        -self.abs()
    }
    const EXACT: bool = false;
}
