//! Entire-function forms of `cos(√x)` and `sin(√x)/√x`.
//!
//! Both series converge for every real `x`, so `f(N)` factors stay finite
//! when the argument `d(N)` goes negative at small photon numbers.

/// `Σ_k (-x)^k / (2k)!`: `cos(√x)` for `x ≥ 0`, `cosh(√-x)` for `x < 0`.
pub fn cosz(x: f64) -> f64 {
    if x >= 0.0 {
        x.sqrt().cos()
    } else {
        (-x).sqrt().cosh()
    }
}

/// `Σ_k (-x)^k / (2k+1)!`: `sin(√x)/√x`, `1` at the origin, `sinh(√-x)/√-x` below it.
pub fn sincz(x: f64) -> f64 {
    // Below this the three-term series is exact to double precision.
    const SERIES_CUTOFF: f64 = 1e-4;
    if x.abs() < SERIES_CUTOFF {
        return 1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0));
    }
    if x > 0.0 {
        let r = x.sqrt();
        r.sin() / r
    } else {
        let r = (-x).sqrt();
        r.sinh() / r
    }
}

/// `tan(√x)/√x`, i.e. `sincz(x) / cosz(x)`.
pub fn tanz(x: f64) -> f64 {
    sincz(x) / cosz(x)
}
