//! Scalar abstraction shared by the matrix and linear-algebra layers.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Field element usable as a matrix entry.
///
/// Exact types answer [`Scalar::negligible`] with an exact zero test; floating
/// types use a fixed absolute threshold so that elimination on noisy input
/// does not pick round-off as a pivot.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug {
    /// True when arithmetic on this type never rounds.
    const EXACT: bool;

    /// Pivot-zero test used by elimination.
    fn negligible(&self) -> bool;

    fn to_f64(&self) -> f64;

    fn from_i64(v: i64) -> Self;
}

/// Marker for scalars with exact arithmetic (rationals).
pub trait ExactScalar: Scalar {}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl ExactScalar for BigRational {}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
}

impl ExactScalar for Ratio<i64> {}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn negligible(&self) -> bool {
        self.abs() <= 1e-12
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn negligible(&self) -> bool {
        self.abs() <= 1e-5
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

/// Nearest binary64 value of a big rational, robust to huge numerators and
/// denominators where a plain `to_f64` on each part would overflow.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer().clone() / (r.denom().clone() << shift as usize)
    } else {
        (r.numer().clone() << (-shift) as usize) / r.denom().clone()
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

/// Exact rational value of a finite binary64.
pub fn f64_to_ratio(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
