//! Closed-form short-pulse estimates and the HBT histogram estimator.

mod hbt;

pub use hbt::{
    hbt_g2, synth_histogram, Background, HbtHistogram, HbtReport, SynthParams, DEFAULT_N_SIDE,
};

use std::f64::consts::PI;

use crate::quad::GaussLegendre;
use crate::{Error, Result};

/// Above this `gamma T` the first-order short-pulse results are unreliable.
pub const SHORT_PULSE_LIMIT: f64 = 0.1;

/// `(pi^2 - 8) / (8 pi^2)`, the dimensionless cascade double integral for a
/// pi pulse.
pub const CASCADE_CONSTANT: f64 = (PI * PI - 8.0) / (8.0 * PI * PI);

fn check_nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        Some(&v) => Err(Error::InvalidArgument(format!(
            "expected a non-negative value, got {v}"
        ))),
        None => Ok(()),
    }
}

fn warn_if_long(gamma_t: f64) {
    if gamma_t >= SHORT_PULSE_LIMIT {
        log::warn!("short-pulse estimate used at gamma*T = {gamma_t}, outside its range");
    }
}

/// Two-photon probability of a resonantly pi-pulsed two-level system to first
/// order in `gamma T`.
pub fn p2_short_2ls(gamma: f64, duration: f64) -> Result<f64> {
    check_nonnegative(&[gamma, duration])?;
    warn_if_long(gamma * duration);
    Ok(gamma * duration / 8.0)
}

pub fn g2_short_2ls(gamma: f64, duration: f64) -> Result<f64> {
    Ok(2.0 * p2_short_2ls(gamma, duration)?)
}

/// Two-photon probability of the cascade into the 2X channel for a square pi
/// pulse, to leading order in `T`.
pub fn p2_short_3ls(gamma_x: f64, gamma_2x: f64, duration: f64) -> Result<f64> {
    check_nonnegative(&[gamma_x, gamma_2x, duration])?;
    warn_if_long(gamma_2x.max(gamma_x) * duration);
    Ok(gamma_2x * gamma_x * duration * duration * CASCADE_CONSTANT)
}

pub fn g2_short_3ls(gamma_x: f64, gamma_2x: f64, duration: f64) -> Result<f64> {
    Ok(2.0 * p2_short_3ls(gamma_x, gamma_2x, duration)?)
}

/// Which form of the cascade two-photon density to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityVariant {
    /// Keeps the exciton survival factor `exp(-gamma_X (t1' - t1))`.
    Full,
    /// Drops it, valid when the pulse is much shorter than the exciton
    /// lifetime.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    pub gamma_x: f64,
    pub gamma_2x: f64,
    pub area: f64,
    pub duration: f64,
}

/// Density of the event sequence: 2X photon at `t1`, X photon at `t1p`,
/// second 2X photon at `t2`, for a square pulse on `[0, T)` with at most one
/// re-excitation. Zero unless `0 <= t1 <= t1p <= T` and `t1p <= t2`.
pub fn p2_density_3ls(
    t1: f64,
    t1p: f64,
    t2: f64,
    p: &CascadeParams,
    variant: DensityVariant,
) -> f64 {
    let t = p.duration;
    if !(0.0 <= t1 && t1 <= t1p && t1p <= t && t1p <= t2) {
        return 0.0;
    }
    let half = p.area / (2.0 * t);
    let first = p.gamma_2x * (half * t1).sin().powi(2);
    let exciton = match variant {
        DensityVariant::Full => p.gamma_x * (-p.gamma_x * (t1p - t1)).exp(),
        DensityVariant::Simplified => p.gamma_x,
    };
    let second = if t2 < t {
        p.gamma_2x * (half * (t2 - t1p)).sin().powi(2)
    } else {
        p.gamma_2x * (half * (t - t1p)).sin().powi(2) * (-p.gamma_2x * (t2 - t)).exp()
    };
    first * exciton * second
}

/// `int_0^T dt1 int_t1^T dt1' sin^2(A t1 / 2T) sin^2(A (T - t1') / 2T)`,
/// the leading-order part of the cascade two-photon probability divided by
/// `gamma_2X gamma_X`.
pub fn cascade_double_integral(area: f64, duration: f64) -> Result<f64> {
    check_nonnegative(&[area, duration])?;
    let q = GaussLegendre::new(24);
    let half = area / (2.0 * duration);
    // sin^2 oscillates A / (2 pi) times; keep a few nodes per period
    let panels = 1 + (area / PI).ceil() as usize * 2;
    Ok(q.integrate_panels(0.0, duration, panels, |t1| {
        let outer = (half * t1).sin().powi(2);
        outer
            * q.integrate_panels(t1, duration, panels, |t1p| {
                (half * (duration - t1p)).sin().powi(2)
            })
    }))
}

/// Leading-order cascade `P_2` for a square pulse of any area.
pub fn p2_short_3ls_area(gamma_x: f64, gamma_2x: f64, area: f64, duration: f64) -> Result<f64> {
    check_nonnegative(&[gamma_x, gamma_2x])?;
    Ok(gamma_2x * gamma_x * cascade_double_integral(area, duration)?)
}
