use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used throughout the numerical core.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance when checking that PMF weights sum to one.
    fn normalization_tolerance() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f64 {
    fn normalization_tolerance() -> Self {
        1e-9
    }
}

// f32 cannot resolve 1e-9 around 1.0; a few ulps of accumulated error is the best it can do.
impl Real for f32 {
    fn normalization_tolerance() -> Self {
        1e-5
    }
}
