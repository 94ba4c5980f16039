//! Scalar abstraction for the whole crate.
//!
//! Every numeric routine is generic over [`Real`], which bundles the
//! floating-point capabilities the simulator needs: transcendentals and
//! constants from `num-traits`, FFT compatibility, serialization for config
//! round-trips, and two RNG sampling hooks. `f32` and `f64` implement it;
//! the crate root exports `f64` aliases for the main domain types.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable throughout the simulation.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + rustfft::FftNum
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Draws a standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws a uniform variate in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` constant (cast semantics when narrowing).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    /// Widens to `f64` for reporting and error messages.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

/// Planck constant, J·s.
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Photon energy at a vacuum wavelength given in nm, in J.
pub fn photon_energy_j<T: Real>(wavelength_nm: T) -> T {
    T::of(PLANCK_J_S * SPEED_OF_LIGHT_M_S * 1e9) / wavelength_nm
}
