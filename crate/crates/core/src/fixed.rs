//! Non-negative binary fixed point with directed rounding, used for sound
//! lower and upper bounds without growing denominators.

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::rational::Rational;

/// Fractional bits.
pub const FRACTION_BITS: u32 = 56;

/// Arithmetic of the bounded engine: every product and quotient states
/// which way it rounds.
pub trait BoundNum: Clone + PartialOrd + Send + Sync + std::fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(value: &Rational, up: bool) -> Self;
    fn to_rational(&self) -> Rational;
    fn add(&self, other: &Self) -> Self;
    /// `max(self - other, 0)`
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self, up: bool) -> Self;
    fn div(&self, other: &Self, up: bool) -> Self;
    fn is_zero(&self) -> bool;
}

/// `value / 2^FRACTION_BITS`; saturates at the top of the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(pub u128);

const MASK64: u128 = (1u128 << 64) - 1;

/// Full 256-bit product as (high, low).
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & MASK64);
    let (b1, b0) = (b >> 64, b & MASK64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK64) + (p10 & MASK64);
    let lo = (p00 & MASK64) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

impl BoundNum for Fixed {
    fn zero() -> Self {
        Fixed(0)
    }

    fn one() -> Self {
        Fixed(1u128 << FRACTION_BITS)
    }

    fn from_rational(value: &Rational, up: bool) -> Self {
        if value.is_zero() || value.numer().sign() != value.denom().sign() {
            return Fixed(0);
        }
        let scaled = value * Rational::from_integer(BigInt::from(1u8) << FRACTION_BITS);
        let rounded = if up { scaled.ceil() } else { scaled.floor() };
        let int = rounded.to_integer();
        match int.sign() {
            Sign::Minus | Sign::NoSign => Fixed(0),
            Sign::Plus => Fixed(int.to_u128().unwrap_or(u128::MAX)),
        }
    }

    fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.0), BigInt::from(1u8) << FRACTION_BITS)
    }

    fn add(&self, other: &Self) -> Self {
        Fixed(self.0.saturating_add(other.0))
    }

    fn sub(&self, other: &Self) -> Self {
        Fixed(self.0.saturating_sub(other.0))
    }

    fn mul(&self, other: &Self, up: bool) -> Self {
        let (hi, lo) = mul_wide(self.0, other.0);
        if hi >> FRACTION_BITS != 0 {
            return Fixed(u128::MAX);
        }
        let q = (hi << (128 - FRACTION_BITS)) | (lo >> FRACTION_BITS);
        let inexact = lo & ((1u128 << FRACTION_BITS) - 1) != 0;
        Fixed(if up && inexact { q.saturating_add(1) } else { q })
    }

    fn div(&self, other: &Self, up: bool) -> Self {
        if other.0 == 0 {
            return Fixed(u128::MAX);
        }
        if self.0.leading_zeros() < FRACTION_BITS {
            let exact = self.to_rational() / other.to_rational();
            return Fixed::from_rational(&exact, up);
        }
        let n = self.0 << FRACTION_BITS;
        let q = n / other.0;
        Fixed(if up && !n.is_multiple_of(other.0) { q + 1 } else { q })
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl BoundNum for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_rational(value: &Rational, _up: bool) -> Self {
        crate::rational::to_f64(value)
    }

    fn to_rational(&self) -> Rational {
        crate::rational::from_f64(*self)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        (self - other).max(0.0)
    }

    fn mul(&self, other: &Self, _up: bool) -> Self {
        self * other
    }

    fn div(&self, other: &Self, _up: bool) -> Self {
        self / other
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}
