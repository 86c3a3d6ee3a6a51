//! Scalar abstraction for the structural parts of the model.

use nalgebra as na;
use num_traits as nt;
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar usable by the grid and generator assembly.
///
/// The heavy dense decompositions (SVD, nonsymmetric eigensolver) are only
/// provided for `f64`; everything that is plain arithmetic or a Cholesky
/// factorization works for any `Real`.
pub trait Real:
    Copy
    + na::RealField
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
