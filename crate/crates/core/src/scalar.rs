//! Scalar abstraction for the numeric core.
//!
//! Every numeric routine in this crate is generic over [`Real`], a shorthand
//! for the floating-point capabilities the estimators need: ordering,
//! transcendentals, compound assignment, conversions, and summation. Both
//! `f32` and `f64` satisfy the bound; the crate-root aliases fix `f64` for
//! ordinary use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable by the model, solver, and inference code.
pub trait Real:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant must be representable in the scalar type")
}

/// Converts a `usize` count into the working scalar type.
pub fn count<F: Real>(x: usize) -> F {
    F::from_usize(x).expect("count must be representable in the scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_roundtrip_for_both_widths() {
        let a: f32 = real(0.25);
        let b: f64 = real(0.25);
        assert_eq!(a, 0.25f32);
        assert_eq!(b, 0.25f64);
        let c: f64 = count(199);
        assert_eq!(c, 199.0);
    }

    fn generic_sum<F: Real>(xs: &[F]) -> F {
        xs.iter().copied().sum()
    }

    #[test]
    fn trait_object_free_generic_use() {
        assert_eq!(generic_sum(&[1.0f64, 2.0, 3.0]), 6.0);
        assert_eq!(generic_sum(&[1.0f32, 2.0, 3.0]), 6.0);
    }
}
