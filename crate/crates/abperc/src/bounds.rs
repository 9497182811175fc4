//! Closed-form threshold scalings, volume-fraction conversions, and the
//! two bound curves that bracket the critical b-intensity as a function of
//! the supercriticality margin delta.
//!
//! Everything here is deterministic arithmetic; the Monte Carlo side of
//! the crate never feeds back into these curves.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{fmt_f64, unit_ball_volume};

/// Scale a critical intensity from connection distance 2 to connection
/// distance 2r: multiplying lengths by r divides intensities by r^d.
pub fn lambda_c_scaled(lambda_c_2: f64, r: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("scale radius must be positive, got {r}")));
    }
    if !lambda_c_2.is_finite() {
        return Err(Error::invalid(format!("intensity must be finite, got {lambda_c_2}")));
    }
    Ok(lambda_c_2 * r.powi(-(d as i32)))
}

/// Intensity whose Boolean model of balls with the given radius covers
/// volume fraction phi: lambda = -ln(1 - phi) / (pi_d radius^d).
pub fn volume_fraction_to_intensity(phi: f64, d: usize, radius: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::invalid(format!("volume fraction must lie in (0, 1), got {phi}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(-(1.0 - phi).ln() / (unit_ball_volume(d)? * radius.powi(d as i32)))
}

/// Volume fraction covered by a Boolean model of the given intensity and
/// ball radius: phi = 1 - exp(-lambda pi_d radius^d). Inverse of
/// [`volume_fraction_to_intensity`].
pub fn intensity_to_volume_fraction(lambda: f64, d: usize, radius: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!("intensity must be finite and >= 0, got {lambda}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(1.0 - (-lambda * unit_ball_volume(d)? * radius.powi(d as i32)).exp())
}

/// The constant K(d, r, lambda) = (4 lambda^2 / r)^d d^{3d} (d+1) pi_d in
/// front of the asymptotic upper envelope K delta^{-2d} |log delta|.
pub fn upper_bound_constant(lambda_c_2r: f64, r: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(lambda_c_2r > 0.0) || !lambda_c_2r.is_finite() {
        return Err(Error::invalid(format!("intensity must be positive, got {lambda_c_2r}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    let di = d as f64;
    Ok((4.0 * lambda_c_2r * lambda_c_2r / r).powi(d as i32)
        * di.powf(3.0 * di)
        * (di + 1.0)
        * unit_ball_volume(d)?)
}

/// The asymptotic upper envelope K delta^{-2d} |log delta| for
/// delta in (0, 1).
pub fn mu_upper_envelope(constant: f64, d: usize, delta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::invalid(format!("envelope constant must be positive, got {constant}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(constant * delta.powi(-2 * d as i32) * -delta.ln())
}

/// Constants of the two bound curves: `c` scales the lower bound
/// c log(c/delta), `c_prime` the exponential delta(mu) relation;
/// `lambda_c_ref`, `r`, `d` record the threshold, radius, and dimension
/// they refer to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCurveParams {
    pub c: f64,
    pub c_prime: f64,
    pub lambda_c_ref: f64,
    pub r: f64,
    pub d: usize,
}

impl BoundCurveParams {
    pub fn new(c: f64, c_prime: f64, lambda_c_ref: f64, r: f64, d: usize) -> Result<BoundCurveParams> {
        for (name, v) in [("c", c), ("c_prime", c_prime), ("lambda_c_ref", lambda_c_ref), ("r", r)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(BoundCurveParams { c, c_prime, lambda_c_ref, r, d })
    }
}

/// Lower bound c log(c/delta) on the critical b-intensity at
/// supercriticality margin delta; 0 once c/delta <= 1, where the bound
/// carries no information.
pub fn lower_bound_curve(params: &BoundCurveParams, delta: f64) -> Result<f64> {
    lower_bound_value(params.c, delta)
}

/// [`lower_bound_curve`] without the surrounding parameter set: the level
/// depends on `c` and `delta` alone.
pub fn lower_bound_value(c: f64, delta: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let ratio = c / delta;
    Ok(if ratio <= 1.0 { 0.0 } else { c * ratio.ln() })
}

/// The margin delta(mu) = c' exp(-mu / c') guaranteed to keep the thinned
/// process supercritical at b-intensity mu.
pub fn delta_of_mu(c_prime: f64, mu: f64) -> Result<f64> {
    if !(c_prime > 0.0) || !c_prime.is_finite() {
        return Err(Error::invalid(format!("c_prime must be positive, got {c_prime}")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be finite and >= 0, got {mu}")));
    }
    Ok(c_prime * (-mu / c_prime).exp())
}

/// Exact inverse of [`delta_of_mu`]: mu = c' log(c'/delta).
pub fn mu_of_delta(c_prime: f64, delta: f64) -> Result<f64> {
    if !(c_prime > 0.0) || !c_prime.is_finite() {
        return Err(Error::invalid(format!("c_prime must be positive, got {c_prime}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    Ok(c_prime * (c_prime / delta).ln())
}

/// Write `delta,mu_lower,mu_upper_envelope` rows for a grid of deltas.
/// The envelope constant comes from [`upper_bound_constant`] at the
/// parameters recorded in `params`.
pub fn write_bound_curve_csv<W: Write>(
    mut w: W,
    params: &BoundCurveParams,
    deltas: &[f64],
) -> Result<()> {
    let k = upper_bound_constant(params.lambda_c_ref, params.r, params.d)?;
    writeln!(
        w,
        "# c={} c_prime={} lambda_c_ref={} r={} d={} envelope_constant={}",
        fmt_f64(params.c),
        fmt_f64(params.c_prime),
        fmt_f64(params.lambda_c_ref),
        fmt_f64(params.r),
        params.d,
        fmt_f64(k)
    )?;
    writeln!(w, "delta,mu_lower,mu_upper_envelope")?;
    for &delta in deltas {
        let lower = lower_bound_curve(params, delta)?;
        let upper = mu_upper_envelope(k, params.d, delta)?;
        writeln!(w, "{},{},{}", fmt_f64(delta), fmt_f64(lower), fmt_f64(upper))?;
    }
    Ok(())
}
