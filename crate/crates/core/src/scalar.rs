//! Scalar abstraction for the numeric kernel.
//!
//! All core math is generic over [`Scalar`] so models can run at `f32` or
//! `f64`. The crate-root aliases pin `f64`, which is what the file formats
//! and the shipped pipeline use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable throughout the numeric kernel.
pub trait Scalar:
    Float
    + NumAssign
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals and RNG draws.
    fn from_f64(v: f64) -> Self;

    /// Widening conversion used when emitting reports.
    fn to_f64(self) -> f64;
}

macro_rules! impl_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    )*};
}

impl_scalar!(f32, f64);
