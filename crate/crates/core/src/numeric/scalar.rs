//! Scalar fields used as matrix entries.
//!
//! Floating-point paths use [`Cplx`]; exact checks use [`Rational`]. Both
//! implement [`Field`], which is all the matrix and truncated-polynomial
//! code needs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex double, the ambient scalar of every numeric path.
pub type Cplx = num_complex::Complex64;

/// Arbitrary-precision rational, used for exact identities.
pub type Rational = num_rational::BigRational;

pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    /// Absolute value as a float, used for pivoting and tolerance tests.
    fn magnitude(&self) -> f64;

    /// Relative pivot threshold below which an elimination step counts as singular.
    fn singular_tolerance() -> f64;
}

impl Field for Cplx {
    fn from_ratio(num: i64, den: i64) -> Self {
        Cplx::new(num as f64 / den as f64, 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_cplx(q)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn singular_tolerance() -> f64 {
        1e-12
    }
}

impl Field for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn singular_tolerance() -> f64 {
        0.0
    }
}

/// Lossy conversion of an exact rational into the float field.
pub fn rational_to_cplx(q: &Rational) -> Cplx {
    Cplx::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
}

pub fn is_finite(z: Cplx) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Principal-branch complex power `base^exponent`.
///
/// `0^e` is `0` for `Re e > 0` and `1` for `e == 0`; other zero bases give NaN.
pub fn cpow(base: Cplx, exponent: Cplx) -> Cplx {
    if base == Cplx::new(0.0, 0.0) {
        if exponent == Cplx::new(0.0, 0.0) {
            return Cplx::new(1.0, 0.0);
        }
        if exponent.re > 0.0 {
            return Cplx::new(0.0, 0.0);
        }
        return Cplx::new(f64::NAN, f64::NAN);
    }
    (exponent * base.ln()).exp()
}

/// True when `z` sits on the principal branch cut (negative real axis).
pub fn on_negative_real_axis(z: Cplx) -> bool {
    z.re < 0.0 && z.im.abs() <= 1e-14 * z.re.abs()
}
