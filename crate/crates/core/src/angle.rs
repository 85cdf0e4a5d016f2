//! Degree-valued angle helpers.

/// Wraps an angle to (−180°, 180°].
#[inline]
pub fn wrap180(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Wraps an angle to [0°, 360°).
#[inline]
pub fn wrap360(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Direction of a vector in degrees, `atan2` convention.
#[inline]
pub fn direction(u: f64, v: f64) -> f64 {
    v.atan2(u).to_degrees()
}
