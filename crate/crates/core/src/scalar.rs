//! Scalar abstraction shared by every numerical routine in the crate.

use std::collections::HashMap;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::{Fft, FftNum, FftPlanner};

/// Forward and inverse plans for one transform length.
pub type FftPair<T> = (Arc<dyn Fft<T>>, Arc<dyn Fft<T>>);

/// Floating point type usable by the spectral machinery: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Plans are cached per type and length; planning is the expensive part of an FFT.
    fn fft_pair(n: usize) -> FftPair<Self>;

    /// Unit roundoff of the type.
    fn epsilon_f64() -> f64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn fft_pair(n: usize) -> FftPair<Self> {
                static CACHE: OnceLock<Mutex<(FftPlanner<$t>, HashMap<usize, FftPair<$t>>)>> =
                    OnceLock::new();
                let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
                let mut guard = cache.lock().expect("fft plan cache poisoned");
                let (planner, plans) = &mut *guard;
                if let Some(pair) = plans.get(&n) {
                    return pair.clone();
                }
                let pair = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
                plans.insert(n, pair.clone());
                pair
            }

            fn epsilon_f64() -> f64 {
                <$t>::EPSILON as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn cst<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts a scalar to `f64` for special functions and reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
