//! Scalar abstraction shared by the valuation, mechanism and audit code.
//!
//! Everything that only needs ordered-field arithmetic is written against
//! [`Scalar`]. The exact instantiation is [`crate::Rational`]; `f64` and `f32`
//! are supported for quick experiments where float drift is acceptable.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub trait Scalar:
    num_traits::Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Exact rational value, `None` for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;

    /// Nearest representable value.
    fn from_rational(r: &BigRational) -> Self;

    fn approx_f64(&self) -> f64;

    /// True for representations where `==` is trustworthy.
    fn is_exact() -> bool;

    fn from_u64(n: u64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }
}

impl Scalar for BigRational {
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn approx_f64(&self) -> f64 {
        // ToPrimitive on BigRational handles huge numerators/denominators.
        self.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f64(*self)
    }

    fn from_rational(r: &BigRational) -> Self {
        r.approx_f64()
    }

    fn approx_f64(&self) -> f64 {
        *self
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_f32(*self)
    }

    fn from_rational(r: &BigRational) -> Self {
        r.approx_f64() as f32
    }

    fn approx_f64(&self) -> f64 {
        *self as f64
    }

    fn is_exact() -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_conversion_is_exact_dyadic() {
        let r = 0.1f64.to_rational().unwrap();
        assert_eq!(r.approx_f64(), 0.1);
        // 0.1 is not 1/10 in binary
        assert_ne!(r, BigRational::new(1.into(), 10.into()));
        assert!(f64::NAN.to_rational().is_none());
    }
}
