//! Scalar float math that works with and without `std`. Core only ships
//! abs/floor/ceil/round/copysign; the transcendentals come from `libm` on
//! `no_std` builds.

#![allow(dead_code)]

macro_rules! shim {
    ($($name:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline]
            pub(crate) fn $name(x: f64) -> f64 {
                f64::$name(x)
            }
            #[cfg(not(feature = "std"))]
            #[inline]
            pub(crate) fn $name(x: f64) -> f64 {
                libm::$name(x)
            }
        )*
    };
}

shim!(sqrt, exp, log10, log2, sin, cos, tan, asin, acos, atan, cbrt);

#[cfg(feature = "std")]
#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    f64::ln(x)
}
#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    f64::atan2(y, x)
}
#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    f64::hypot(x, y)
}
#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    f64::powf(x, y)
}
#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    powf(x, n as f64)
}
