//! Scalar abstraction for the numeric core.
//!
//! All geometry, solvers, and bounds are generic over [`Real`], which bridges
//! `num-traits` conversions with `nalgebra`'s `RealField` so the same code
//! instantiates at `f32` or `f64`. The crate root exports `f64` aliases for
//! the common case.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    nalgebra::RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::iter::Sum<Self>
{
    /// Converts from `f64` with the platform `as` cast semantics.
    fn of_f64(v: f64) -> Self;
    /// Widens (or passes through) to `f64`.
    fn as_f64(self) -> f64;
    /// `true` for anything that is neither NaN nor infinite.
    fn is_finite_real(self) -> bool;
    /// IEEE total order; used wherever sorting must be deterministic.
    fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering;
}

impl Real for f32 {
    fn of_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
    fn is_finite_real(self) -> bool {
        self.is_finite()
    }
    fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering {
        self.total_cmp(other)
    }
}

impl Real for f64 {
    fn of_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn is_finite_real(self) -> bool {
        self.is_finite()
    }
    fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering {
        self.total_cmp(other)
    }
}

/// Shorthand for `R::of_f64` at call sites full of literals.
#[inline]
pub fn rf<R: Real>(v: f64) -> R {
    R::of_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::of_f64(1.25), 1.25);
        assert_eq!(f32::of_f64(1.25), 1.25_f32);
        assert_eq!(1.25_f32.as_f64(), 1.25);
        assert!(rf::<f64>(f64::INFINITY).is_infinite());
        assert!(!f64::NAN.is_finite_real());
    }

    #[test]
    fn total_order_handles_nan() {
        let mut v = [f64::NAN, 1.0, -1.0];
        v.sort_by(|a, b| a.total_cmp_real(b));
        assert_eq!(v[0], -1.0);
        assert_eq!(v[1], 1.0);
        assert!(v[2].is_nan());
    }
}
