use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar accepted by the generic numeric kernels (`f32` or `f64`).
///
/// Arithmetic and elementary functions come from [`RealField`]; the
/// num-traits conversions bridge to the `f64` special functions.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("representable literal")
    }

    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }

    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
