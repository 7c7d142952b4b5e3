//! Unit conversions. Public APIs take rpm, degrees and millimetres; the
//! arithmetic underneath runs in rad/s and radians.

use std::f64::consts::PI;

pub const RPM_TO_RAD_S: f64 = 2.0 * PI / 60.0;

#[inline]
pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * RPM_TO_RAD_S
}

#[inline]
pub fn rad_s_to_rpm(rad_s: f64) -> f64 {
    rad_s / RPM_TO_RAD_S
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

/// Linear speed (mm/s) at the rim of a sprocket of `diameter_mm` turning at `rpm`.
#[inline]
pub fn rim_speed_mm_s(rpm: f64, diameter_mm: f64) -> f64 {
    rpm_to_rad_s(rpm) * diameter_mm / 2.0
}
