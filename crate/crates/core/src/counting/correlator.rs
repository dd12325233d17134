use nalgebra::RowDVector;
use num_complex::Complex64;

use crate::models::{PulseEnvelope, SystemModel};
use crate::operator::devectorize;
use crate::operator::{c, vec_trace, vectorize, CMatrix, CVector};
use crate::propagate::{
    check_horizon, integrate, propagator_matrix, IntegrationOptions, LinearGenerator, TimeGrid,
};
use crate::{Error, Result};

/// First two factorial moments of the photon number in one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorMoments {
    /// `<n>`, the time-integrated emission flux.
    pub mean: f64,
    /// `<n(n-1)>`, twice the ordered double integral of the correlator.
    pub factorial: f64,
}

impl CorrelatorMoments {
    pub fn g2(&self) -> Result<f64> {
        if self.mean <= 0.0 {
            return Err(Error::ZeroMeanPhotonNumber);
        }
        Ok(self.factorial / (self.mean * self.mean))
    }
}

/// Moments of the photon number from the intensity correlators
///
/// ```text
/// <n>      = int dt tr[J rho(t)]
/// <n(n-1)> = 2 int dt1 int_{t1} dt2 tr[J V(t2,t1) J V(t1,0) rho(0)]
/// ```
///
/// The inner integral is carried as an auxiliary state
/// `X(t) = int_0^t dt1 V(t, t1) J rho(t1)`, which obeys
/// `dX/dt = L(t) X + J rho(t)`; the double integral is then
/// `int dt2 tr[J X(t2)]`. Both accumulate alongside `rho` on the same grid.
pub fn correlator_moments(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    opts: &IntegrationOptions,
) -> Result<CorrelatorMoments> {
    opts.validate(model)?;
    model.check_channel(channel)?;
    let dim = model.dim();
    let n = dim * dim;
    let gen = LinearGenerator::new(model, None)?;
    let jump = model.jump(channel)?.matrix().clone();
    // Row vector w with w . v = tr[J v].
    let trace_row = RowDVector::from_fn(n, |_, j| {
        let (row, col) = (j % dim, j / dim);
        if row == col {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let flux_row = &trace_row * &jump;

    let horizon = opts.horizon(model, pulse);
    let grid = TimeGrid::new(pulse, 0.0, horizon, opts)?;
    // column 0: [rho; <n> accumulator], column 1: [X; ordered-pair accumulator]
    let mut x = CMatrix::zeros(n + 1, 2);
    x.view_mut((0, 0), (n, 1))
        .copy_from(&vectorize(model.ground_state().elements()));
    integrate(
        &grid,
        pulse,
        &mut x,
        |w, x, out| {
            out.view_mut((0, 0), (n, 2))
                .gemm(c(1.0), &gen.drift, &x.view((0, 0), (n, 2)), c(0.0));
            if w != 0.0 {
                out.view_mut((0, 0), (n, 2)).gemm(
                    c(w),
                    &gen.drive,
                    &x.view((0, 0), (n, 2)),
                    c(1.0),
                );
            }
            out.view_mut((0, 1), (n, 1))
                .gemm(c(1.0), &jump, &x.view((0, 0), (n, 1)), c(1.0));
            out[(n, 0)] = (&flux_row * x.view((0, 0), (n, 1)))[(0, 0)];
            out[(n, 1)] = (&flux_row * x.view((0, 1), (n, 1)))[(0, 0)];
        },
        |_, _| {},
    );
    let rho_end = CVector::from_column_slice(x.view((0, 0), (n, 1)).clone_owned().as_slice());
    check_horizon(&devectorize(&rho_end, dim)?)?;
    Ok(CorrelatorMoments {
        mean: x[(n, 0)].re,
        factorial: 2.0 * x[(n, 1)].re,
    })
}

/// Pulse-wise `g2[0]` from the integrated intensity correlators.
pub fn g2_via_correlator(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    opts: &IntegrationOptions,
) -> Result<f64> {
    correlator_moments(model, pulse, channel, opts)?.g2()
}

/// `G2(t1, t2) = tr[J V(t2, t1) J V(t1, 0) rho(0)]` for `t2 >= t1 >= 0`,
/// starting from the ground state.
pub fn two_time_correlator(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    t1: f64,
    t2: f64,
    opts: &IntegrationOptions,
) -> Result<f64> {
    if !(t1 >= 0.0 && t2 >= t1) {
        return Err(Error::InvalidInterval { t0: t1, t1: t2 });
    }
    let jump = model.jump(channel)?;
    let first = propagator_matrix(model, pulse, None, 0.0, t1, opts)?;
    let second = propagator_matrix(model, pulse, None, t1, t2, opts)?;
    let rho0 = vectorize(model.ground_state().elements());
    let v = jump.apply_vec(&second.apply_vec(&jump.apply_vec(&first.apply_vec(&rho0))));
    Ok(vec_trace(&v, model.dim()).re)
}
