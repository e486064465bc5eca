//! Physical constants and unit conversions. Everything inside the crate is SI
//! with angular frequencies in rad/s; files exchanged with users carry Hz.

use std::f64::consts::PI;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub const TWO_PI: f64 = 2.0 * PI;

#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    f * TWO_PI
}

#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TWO_PI
}

#[inline]
pub fn rad_to_mhz(w: f64) -> f64 {
    w / TWO_PI / 1e6
}
