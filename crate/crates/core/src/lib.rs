//! Photocount statistics of pulsed single-photon sources.
//!
//! The crate simulates a resonantly driven two-level system and a two-photon
//! driven three-level cascade (biexciton, exciton, ground) under the Lindblad
//! master equation, and extracts from the dynamics
//!
//! - the channel-resolved photocount distribution `P_n` of a single pulse,
//! - the pulse-wise second-order coherence `g2[0] = <n(n-1)>/<n>^2`, both from
//!   the factorial moments of `P_n` and from the integrated two-time correlator,
//! - a Monte-Carlo jump unraveling used as an independent check,
//! - closed-form short-pulse estimates and a Hanbury Brown-Twiss histogram
//!   estimator with background subtraction.
//!
//! Time is measured in units of the inverse reference decay rate, so a pulse
//! of duration `T` in a model with unit rate corresponds to `gamma*T = T`.

pub mod analytics;
pub mod counting;
mod error;
pub mod models;
pub mod operator;
pub mod propagate;
pub mod quad;

pub use error::{Error, Result};
pub use models::{PulseEnvelope, PulseShape, SystemKind, SystemModel};
pub use operator::{DensityMatrix, SuperOperator};
pub use propagate::IntegrationOptions;
