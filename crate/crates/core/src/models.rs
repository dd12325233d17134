//! Driven two-level system, two-photon driven three-level cascade, and pulse
//! envelopes calibrated to a prescribed pulse area.
//!
//! The engine never sees dipole moments or field amplitudes: a pulse is
//! described directly by its instantaneous Rabi rate `Omega(t)`, whose time
//! integral is the pulse area. For the cascade the same rate is read as the
//! effective two-photon rate.

use std::f64::consts::{LN_2, PI};

use crate::operator::{
    basis_op, c, commutator_map, jump_superop, liouvillian, CMatrix, DensityMatrix, SuperOperator,
};
use crate::{Error, Result};

/// Half-width of the truncated Gaussian, in standard deviations.
pub const GAUSSIAN_TRUNCATION_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseShape {
    Square,
    Gaussian,
}

impl std::str::FromStr for PulseShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Self::Square),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::InvalidArgument(format!(
                "unknown pulse shape `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for PulseShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Square => "square",
            Self::Gaussian => "gaussian",
        })
    }
}

/// Rabi-rate envelope of a single excitation pulse starting at `t = 0`.
///
/// For a square pulse `duration` is the length of the pulse. For a Gaussian
/// it is the FWHM of `Omega(t)`; the Gaussian is centred at `4 sigma` and cut
/// at `0` and `8 sigma`, and its peak is rescaled so the truncated envelope
/// still integrates to `area`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEnvelope {
    shape: PulseShape,
    area: f64,
    duration: f64,
    peak: f64,
}

impl PulseEnvelope {
    pub fn new(shape: PulseShape, area: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if !(area >= 0.0) || !area.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "area must be non-negative, got {area}"
            )));
        }
        let peak = match shape {
            PulseShape::Square => area / duration,
            PulseShape::Gaussian => {
                let sigma = fwhm_to_sigma(duration);
                let cut = GAUSSIAN_TRUNCATION_SIGMAS / std::f64::consts::SQRT_2;
                area / (sigma * (2.0 * PI).sqrt() * libm::erf(cut))
            }
        };
        Ok(Self {
            shape,
            area,
            duration,
            peak,
        })
    }

    pub fn square(area: f64, duration: f64) -> Result<Self> {
        Self::new(PulseShape::Square, area, duration)
    }

    pub fn gaussian(area: f64, fwhm: f64) -> Result<Self> {
        Self::new(PulseShape::Gaussian, area, fwhm)
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn peak_rate(&self) -> f64 {
        self.peak
    }

    /// End of the support of `Omega(t)`; the drive is off for `t >= end()`.
    pub fn end(&self) -> f64 {
        match self.shape {
            PulseShape::Square => self.duration,
            PulseShape::Gaussian => 2.0 * GAUSSIAN_TRUNCATION_SIGMAS * fwhm_to_sigma(self.duration),
        }
    }

    /// Instantaneous Rabi rate `Omega(t)`.
    pub fn rate(&self, t: f64) -> f64 {
        let end = self.end();
        if !(0.0..=end).contains(&t) {
            return 0.0;
        }
        if self.shape == PulseShape::Square && t == end {
            // half-open support [0, T)
            return 0.0;
        }
        self.envelope(t)
    }

    /// The envelope formula without the support cut-off. The integrator uses
    /// this inside the pulse window so that stage evaluations on the window
    /// edges see the one-sided limit.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Square => self.peak,
            PulseShape::Gaussian => {
                let sigma = fwhm_to_sigma(self.duration);
                let x = (t - 0.5 * self.end()) / sigma;
                self.peak * (-0.5 * x * x).exp()
            }
        }
    }

    /// Pulse area accumulated up to time `t`.
    pub fn area_until(&self, t: f64) -> f64 {
        let end = self.end();
        let t = t.clamp(0.0, end);
        match self.shape {
            PulseShape::Square => self.peak * t,
            PulseShape::Gaussian => {
                let sigma = fwhm_to_sigma(self.duration);
                let s2 = sigma * std::f64::consts::SQRT_2;
                let centre = 0.5 * end;
                0.5 * self.peak
                    * sigma
                    * (2.0 * PI).sqrt()
                    * (libm::erf((t - centre) / s2) - libm::erf(-centre / s2))
            }
        }
    }
}

fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * LN_2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    TwoLevel,
    ThreeLevelCascade,
}

impl std::str::FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2ls" => Ok(Self::TwoLevel),
            "3ls" => Ok(Self::ThreeLevelCascade),
            other => Err(Error::InvalidArgument(format!("unknown system `{other}`"))),
        }
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TwoLevel => "2ls",
            Self::ThreeLevelCascade => "3ls",
        })
    }
}

/// One spontaneous-emission reservoir, `L = sqrt(rate) * sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossChannel {
    pub name: &'static str,
    pub rate: f64,
    pub operator: CMatrix,
}

/// Level structure, drive coupling and loss channels of an emitter.
///
/// Level indices: the two-level system uses `0 = |g>`, `1 = |e>`. The cascade
/// uses `0 = |0>`, `1 = |X'>`, `2 = |2X>`, with channel `"2X"` (`|2X> -> |X'>`)
/// at index 0 and channel `"X"` (`|X'> -> |0>`) at index 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    kind: SystemKind,
    coupling: CMatrix,
    channels: Vec<LossChannel>,
}

pub const GROUND: usize = 0;
pub const CASCADE_EXCITON: usize = 1;
pub const CASCADE_BIEXCITON: usize = 2;
pub const CHANNEL_2X: usize = 0;
pub const CHANNEL_X: usize = 1;

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRate(rate))
    }
}

impl SystemModel {
    pub fn two_level(gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        Ok(Self {
            kind: SystemKind::TwoLevel,
            coupling: basis_op(2, 0, 1) + basis_op(2, 1, 0),
            channels: vec![LossChannel {
                name: "default",
                rate: gamma,
                operator: basis_op(2, 0, 1) * c(gamma.sqrt()),
            }],
        })
    }

    pub fn three_level_cascade(gamma_x: f64, gamma_2x: f64) -> Result<Self> {
        check_rate(gamma_x)?;
        check_rate(gamma_2x)?;
        Ok(Self {
            kind: SystemKind::ThreeLevelCascade,
            coupling: basis_op(3, GROUND, CASCADE_BIEXCITON)
                + basis_op(3, CASCADE_BIEXCITON, GROUND),
            channels: vec![
                LossChannel {
                    name: "2X",
                    rate: gamma_2x,
                    operator: basis_op(3, CASCADE_EXCITON, CASCADE_BIEXCITON) * c(gamma_2x.sqrt()),
                },
                LossChannel {
                    name: "X",
                    rate: gamma_x,
                    operator: basis_op(3, GROUND, CASCADE_EXCITON) * c(gamma_x.sqrt()),
                },
            ],
        })
    }

    /// Cascade with `gamma_X = gamma` and `gamma_2X = 2 gamma`.
    pub fn standard_three_level(gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        Self::three_level_cascade(gamma, 2.0 * gamma)
    }

    /// The two-level system or the standard cascade at unit reference rate.
    pub fn unit(kind: SystemKind) -> Self {
        match kind {
            SystemKind::TwoLevel => Self::two_level(1.0),
            SystemKind::ThreeLevelCascade => Self::standard_three_level(1.0),
        }
        .expect("unit rates are valid")
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn channels(&self) -> &[LossChannel] {
        &self.channels
    }

    pub fn loss_operators(&self) -> Vec<CMatrix> {
        self.channels.iter().map(|ch| ch.operator.clone()).collect()
    }

    /// Resolve a channel by name; `"default"` selects channel 0 in both models.
    pub fn channel_index(&self, name: &str) -> Result<usize> {
        if name.eq_ignore_ascii_case("default") {
            return Ok(0);
        }
        self.channels
            .iter()
            .position(|ch| ch.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidChannel(name.to_string()))
    }

    pub fn check_channel(&self, channel: usize) -> Result<&LossChannel> {
        self.channels
            .get(channel)
            .ok_or_else(|| Error::InvalidChannel(channel.to_string()))
    }

    pub fn gamma_min(&self) -> f64 {
        self.channels
            .iter()
            .map(|ch| ch.rate)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn gamma_max(&self) -> f64 {
        self.channels.iter().map(|ch| ch.rate).fold(0.0, f64::max)
    }

    /// Level reached by a resonant pi pulse from the ground state.
    pub fn driven_level(&self) -> usize {
        match self.kind {
            SystemKind::TwoLevel => 1,
            SystemKind::ThreeLevelCascade => CASCADE_BIEXCITON,
        }
    }

    pub fn ground_state(&self) -> DensityMatrix {
        DensityMatrix::basis_state(self.dim(), GROUND)
    }

    /// Dimensionless drive coupling `C`, with `H(t) = Omega(t)/2 * C`.
    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn hamiltonian_at(&self, pulse: &PulseEnvelope, t: f64) -> CMatrix {
        &self.coupling * c(0.5 * pulse.rate(t))
    }

    /// Drift part of the Liouvillian, i.e. the generator with the drive off.
    pub fn drift(&self) -> SuperOperator {
        let h = CMatrix::zeros(self.dim(), self.dim());
        liouvillian(&h, &self.loss_operators()).expect("model operators are consistent")
    }

    /// Drive part of the Liouvillian per unit Rabi rate:
    /// `L(t) = drift + Omega(t) * drive_generator`.
    pub fn drive_generator(&self) -> SuperOperator {
        commutator_map(&(&self.coupling * c(0.5))).expect("coupling is square")
    }

    pub fn jump(&self, channel: usize) -> Result<SuperOperator> {
        jump_superop(&self.check_channel(channel)?.operator)
    }

    /// Full Liouvillian at time `t`.
    pub fn liouvillian_at(&self, pulse: &PulseEnvelope, t: f64) -> SuperOperator {
        liouvillian(&self.hamiltonian_at(pulse, t), &self.loss_operators())
            .expect("model operators are consistent")
    }

    /// Total decay rate out of each level, i.e. the diagonal of
    /// `sum_k L_k^dagger L_k`. Both models have a diagonal decay operator.
    pub fn level_decay_rates(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut total = CMatrix::zeros(dim, dim);
        for ch in &self.channels {
            total += ch.operator.adjoint() * &ch.operator;
        }
        (0..dim).map(|i| total[(i, i)].re).collect()
    }
}
