//! Channel-resolved photocount statistics.
//!
//! Three independent routes are provided:
//!
//! - [`photocount_distribution`] propagates the number-resolved hierarchy
//!   `rho^(0) ... rho^(n_max)`, where `rho^(n)` is the part of the state that
//!   has emitted exactly `n` photons into the monitored channel:
//!
//!   ```text
//!   d/dt rho^(n) = (L(t) - J) rho^(n) + J rho^(n-1)
//!   ```
//!
//!   Its traces at the horizon are the photocount probabilities `P_n`. This is
//!   the differential form of the iterated `K`/`J` integrals.
//! - [`correlator_moments`] integrates the emission flux and the two-time
//!   intensity correlator with the full propagator, giving `<n>` and
//!   `<n(n-1)>` without ever resolving the photon number.
//! - [`mc_trajectories`] samples quantum-jump trajectories.

mod correlator;
mod hierarchy;
mod jumps;

pub use correlator::{
    correlator_moments, g2_via_correlator, two_time_correlator, CorrelatorMoments,
};
pub use hierarchy::{
    hierarchy_states, photocount_distribution, photocount_distribution_with_tolerance,
    resolve_photocount_distribution, MAX_ADAPTIVE_N,
};
pub use jumps::{mc_trajectories, EmpiricalDistribution, JumpRecord, McConfig, McResult};

use crate::{Error, Result};

/// Largest probability mass allowed beyond `n_max`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_N_MAX: usize = 6;

/// Photocount probabilities `P_0 ... P_n_max` of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotocountDistribution {
    channel: String,
    probs: Vec<f64>,
    residual: f64,
}

impl PhotocountDistribution {
    /// The residual is `1 - sum(probs)`, the mass beyond `n_max`.
    pub fn new(channel: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument(
                "empty photocount distribution".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(-1e-10..=1.0 + 1e-10).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let residual = 1.0 - probs.iter().sum::<f64>();
        Ok(Self {
            channel: channel.into(),
            probs,
            residual,
        })
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P_n`, zero beyond `n_max`.
    pub fn p(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// `(<n>, <n(n-1)>)` of a photocount distribution.
pub fn mean_and_factorial_moment(d: &PhotocountDistribution) -> (f64, f64) {
    d.probs
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(m1, m2), (n, p)| {
            let n = n as f64;
            (m1 + n * p, m2 + n * (n - 1.0) * p)
        })
}

/// Pulse-wise `g2[0] = <n(n-1)> / <n>^2` from the factorial moments.
pub fn g2_from_counts(d: &PhotocountDistribution) -> Result<f64> {
    let (mean, fact) = mean_and_factorial_moment(d);
    if mean <= 0.0 {
        return Err(Error::ZeroMeanPhotonNumber);
    }
    Ok(fact / (mean * mean))
}

/// The two-photon estimate `2 P_2 / (P_1 + 2 P_2)^2`, valid when three or more
/// photons are negligible.
pub fn g2_two_photon_approx(d: &PhotocountDistribution) -> Result<f64> {
    let (p1, p2) = (d.p(1), d.p(2));
    let denom = p1 + 2.0 * p2;
    if denom <= 0.0 {
        return Err(Error::ZeroMeanPhotonNumber);
    }
    Ok(2.0 * p2 / (denom * denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> PhotocountDistribution {
        PhotocountDistribution::new("test", p.to_vec()).unwrap()
    }

    #[test]
    fn moments_of_simple_distributions() {
        assert_eq!(
            mean_and_factorial_moment(&dist(&[0.0, 1.0, 0.0])),
            (1.0, 0.0)
        );
        assert_eq!(
            mean_and_factorial_moment(&dist(&[0.0, 0.0, 1.0, 0.0])),
            (2.0, 2.0)
        );
        assert_eq!(
            mean_and_factorial_moment(&dist(&[0.5, 0.5, 0.0])),
            (0.5, 0.0)
        );
    }

    #[test]
    fn g2_of_simple_distributions() {
        assert_eq!(g2_from_counts(&dist(&[0.0, 1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(g2_from_counts(&dist(&[0.0, 0.0, 1.0])).unwrap(), 0.5);
        assert_eq!(
            g2_from_counts(&dist(&[1.0, 0.0, 0.0])),
            Err(Error::ZeroMeanPhotonNumber)
        );
    }

    #[test]
    fn poisson_is_coherent() {
        // factorial moments of a Poisson law: <n(n-1)> = mean^2
        let mean: f64 = 0.1;
        let mut p = Vec::new();
        let mut term = (-mean).exp();
        for n in 0..=12 {
            p.push(term);
            term *= mean / (n + 1) as f64;
        }
        let d = dist(&p);
        assert!(d.residual().abs() < 1e-15);
        assert!((g2_from_counts(&d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_photon_approx_agrees_when_p3_small() {
        let d = dist(&[0.2, 0.79, 0.01, 1e-7]);
        let exact = g2_from_counts(&d).unwrap();
        let approx = g2_two_photon_approx(&d).unwrap();
        assert!(d.p(3) < 1e-4 * d.p(2));
        assert!((approx / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn residual_is_tail_mass() {
        let d = dist(&[0.5, 0.25, 0.125]);
        assert_eq!(d.residual(), 0.125);
        assert_eq!(d.probs().iter().sum::<f64>() + d.residual(), 1.0);
        assert_eq!(d.p(10), 0.0);
        assert!(PhotocountDistribution::new("x", vec![1.5]).is_err());
        assert!(PhotocountDistribution::new("x", vec![]).is_err());
    }
}
