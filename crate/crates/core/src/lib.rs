//! Exact fair-division workbench: allocation mechanisms for indivisible and
//! divisible goods, plus auditors for fairness, efficiency and incentive
//! properties.
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix the
//! exact rational instantiation used by every mechanism and audit.

pub mod audits;
pub mod cake;
pub mod interim;
pub mod io;
pub mod lp;
pub mod mechanisms;
pub mod model;
pub mod priors;
pub mod random;
pub mod rational;
pub mod scalar;
pub mod welfare;

pub use model::{
    preference_order, utility, Allocation, Bundle, ModelError, OrdinalReport, Profile,
};
pub use scalar::Scalar;

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = num_rational::BigRational;
/// Exact valuation profile.
pub type ValuationProfile = Profile<Rational>;
/// Floating-point valuation profile, for quick experiments only.
pub type ValuationProfileF64 = Profile<f64>;
