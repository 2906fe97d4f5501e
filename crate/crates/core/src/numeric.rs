//! Overflow- and cancellation-safe hyperbolic helpers.
//!
//! Every expression whose argument can exceed [`LOG_SPACE_THRESHOLD`] is
//! routed through a logarithmic form so that ratios of huge `sinh` values
//! stay finite.

/// Arguments above this are evaluated in log space.
pub const LOG_SPACE_THRESHOLD: f64 = 30.0;

/// ln sinh(x) for x > 0.
pub fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > LOG_SPACE_THRESHOLD {
        // sinh x = e^x (1 - e^{-2x}) / 2
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        x.sinh().ln()
    }
}

/// sinh²(x), finite up to the point where the result itself overflows.
pub fn sinh_sq(x: f64) -> f64 {
    let x = x.abs();
    if x > LOG_SPACE_THRESHOLD {
        (2.0 * ln_sinh(x)).exp()
    } else {
        let s = x.sinh();
        s * s
    }
}

/// ln coth(x) for x > 0, accurate for both tiny and huge arguments.
///
/// Uses ln coth x = ln(1 + e^{-2x}) − ln(1 − e^{-2x}), choosing the form of
/// the second logarithm that avoids cancellation.
pub fn ln_coth(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let y = (-2.0 * x).exp();
    let ln_one_minus_y = if y < 0.5 {
        (-y).ln_1p()
    } else {
        (-(-2.0 * x).exp_m1()).ln()
    };
    y.ln_1p() - ln_one_minus_y
}

/// ln tanh(x) for x > 0.
#[inline]
pub fn ln_tanh(x: f64) -> f64 {
    -ln_coth(x)
}

/// sech²(x) = 1 − tanh²(x), without forming the difference.
pub fn sech_sq(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    let d = 1.0 + e;
    4.0 * e / (d * d)
}

/// artanh(e^{-s}) for s > 0, i.e. ½ ln coth(s/2).
pub fn artanh_exp_neg(s: f64) -> f64 {
    0.5 * ln_coth(0.5 * s)
}
