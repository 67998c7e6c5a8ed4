use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the numerics are written against: `f32` or `f64`.
///
/// Everything numeric in the crate is generic over this trait. Tolerances are
/// written for `f64` and widened for coarser types with [`Real::tol`].
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Scales an absolute tolerance chosen for `f64` to this type's precision.
    #[inline]
    fn tol(tol_f64: f64) -> Self {
        let ratio = Self::default_epsilon().to_f64_lossy() / f64::EPSILON;
        Self::lit(tol_f64 * ratio.max(1.0))
    }

    #[inline]
    fn is_finite_value(self) -> bool {
        self.to_f64_lossy().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}
