//! Scalar abstraction shared by the model, the closed forms and the quadrature.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// `log2(1 + x)` through `ln_1p`, accurate for small `x`.
    #[inline]
    fn log2_1p(self) -> Self {
        self.ln_1p() / Self::LN_2()
    }
}

impl Real for f32 {}
impl Real for f64 {}
