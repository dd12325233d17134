use crate::counting::{PhotocountDistribution, RESIDUAL_TOLERANCE};
use crate::models::{PulseEnvelope, SystemModel};
use crate::operator::{c, devectorize, vec_trace, vectorize, CMatrix, CVector};
use crate::propagate::{check_horizon, integrate, IntegrationOptions, LinearGenerator, TimeGrid};
use crate::{Error, Result};

/// Upper bound for [`resolve_photocount_distribution`].
pub const MAX_ADAPTIVE_N: usize = 256;

/// Number-resolved states `rho^(0..=n_max)` at `t1`, one column each.
fn propagate_hierarchy(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    n_max: usize,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<CMatrix> {
    opts.validate(model)?;
    model.check_channel(channel)?;
    let no_jump = LinearGenerator::new(model, Some(channel))?;
    let jump = model.jump(channel)?.matrix().clone();
    let grid = TimeGrid::new(pulse, 0.0, t1, opts)?;
    let n = model.dim() * model.dim();
    let mut x = CMatrix::zeros(n, n_max + 1);
    x.set_column(0, &vectorize(model.ground_state().elements()));
    integrate(
        &grid,
        pulse,
        &mut x,
        |w, x, out| {
            no_jump.apply(w, x, out);
            if n_max > 0 {
                out.columns_mut(1, n_max)
                    .gemm(c(1.0), &jump, &x.columns(0, n_max), c(1.0));
            }
        },
        |_, _| {},
    );
    Ok(x)
}

/// The conditional states `rho^(n)(t1)` for `n = 0..=n_max`, starting from
/// the ground state at `t = 0`. Their sum is the unconditional state as long
/// as no mass has moved beyond `n_max`.
pub fn hierarchy_states(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    n_max: usize,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Vec<CMatrix>> {
    let x = propagate_hierarchy(model, pulse, channel, n_max, t1, opts)?;
    x.column_iter()
        .map(|col| devectorize(&CVector::from_column_slice(col.as_slice()), model.dim()))
        .collect()
}

/// Photocount distribution of one pulse into `channel`, integrated to the
/// horizon `pulse.end() + horizon_factor / gamma_min`.
///
/// Fails with [`Error::TruncationResidual`] if more than
/// [`RESIDUAL_TOLERANCE`] of the probability lies beyond `n_max`.
pub fn photocount_distribution(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    n_max: usize,
    opts: &IntegrationOptions,
) -> Result<PhotocountDistribution> {
    photocount_distribution_with_tolerance(model, pulse, channel, n_max, RESIDUAL_TOLERANCE, opts)
}

pub fn photocount_distribution_with_tolerance(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    n_max: usize,
    tolerance: f64,
    opts: &IntegrationOptions,
) -> Result<PhotocountDistribution> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let dim = model.dim();
    let horizon = opts.horizon(model, pulse);
    let x = propagate_hierarchy(model, pulse, channel, n_max, horizon, opts)?;
    let total: CVector = x.column_sum();
    check_horizon(&devectorize(&total, dim)?)?;
    let probs: Vec<f64> = x
        .column_iter()
        .map(|col| vec_trace(&CVector::from_column_slice(col.as_slice()), dim).re)
        .collect();
    let d = PhotocountDistribution::new(model.check_channel(channel)?.name, probs)?;
    if d.residual().abs() > tolerance {
        return Err(Error::TruncationResidual {
            residual: d.residual(),
            tolerance,
            n_max,
        });
    }
    Ok(d)
}

/// Like [`photocount_distribution`] but doubles `n_max`, starting from
/// `n_start`, until the residual is within tolerance.
pub fn resolve_photocount_distribution(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    n_start: usize,
    opts: &IntegrationOptions,
) -> Result<PhotocountDistribution> {
    let mut n_max = n_start.max(2);
    loop {
        match photocount_distribution(model, pulse, channel, n_max, opts) {
            Err(Error::TruncationResidual { .. }) if n_max < MAX_ADAPTIVE_N => {
                n_max = (2 * n_max).min(MAX_ADAPTIVE_N);
            }
            other => return other,
        }
    }
}
