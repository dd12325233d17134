//! Time integration of the master equation.
//!
//! Everything here integrates linear equations `dx/dt = G(t) x` whose
//! generator is `G(t) = drift + Omega(t) * drive` with a classical fourth-order
//! Runge-Kutta scheme on a fixed grid. The grid is split at the pulse edges so
//! that discontinuities of `Omega` always fall on grid points; inside the pulse
//! window the step is additionally bounded by `duration / min_pulse_steps`.

use num_complex::Complex64;

use crate::models::{PulseEnvelope, SystemModel, GROUND};
use crate::operator::{
    c, devectorize, vectorize, CMatrix, CVector, DensityMatrix, StateKind, SuperOperator,
};
use crate::{Error, Result};

/// Default step, in units of the inverse reference rate.
pub const DEFAULT_DT: f64 = 0.005;
/// Upper bound on `dt * gamma_max`.
pub const MAX_RATE_STEP: f64 = 0.01;
pub const DEFAULT_MIN_PULSE_STEPS: usize = 200;
pub const DEFAULT_HORIZON_FACTOR: f64 = 20.0;
/// Largest excited population tolerated at the integration horizon.
pub const HORIZON_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Maximum step outside the pulse window, and inside it unless the pulse
    /// resolution bound is tighter.
    pub dt: f64,
    /// Minimum number of steps across the pulse window.
    pub min_pulse_steps: usize,
    /// Integration continues to `pulse.end() + horizon_factor / gamma_min`.
    pub horizon_factor: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            min_pulse_steps: DEFAULT_MIN_PULSE_STEPS,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
        }
    }
}

impl IntegrationOptions {
    pub fn validate(&self, model: &SystemModel) -> Result<()> {
        let limit = MAX_RATE_STEP / model.gamma_max();
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidOptions(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt: self.dt, limit });
        }
        if self.min_pulse_steps < DEFAULT_MIN_PULSE_STEPS {
            return Err(Error::InvalidOptions(format!(
                "at least {DEFAULT_MIN_PULSE_STEPS} steps per pulse required, got {}",
                self.min_pulse_steps
            )));
        }
        if !(self.horizon_factor > 0.0) || !self.horizon_factor.is_finite() {
            return Err(Error::InvalidOptions(format!(
                "horizon factor must be positive, got {}",
                self.horizon_factor
            )));
        }
        Ok(())
    }

    /// Options with every step halved, for step-doubling self-checks.
    pub fn refined(&self) -> Self {
        Self {
            dt: 0.5 * self.dt,
            min_pulse_steps: 2 * self.min_pulse_steps,
            ..*self
        }
    }

    /// End of the integration window for a single pulse starting at 0.
    pub fn horizon(&self, model: &SystemModel, pulse: &PulseEnvelope) -> f64 {
        pulse.end() + self.horizon_factor / model.gamma_min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    steps: usize,
    driven: bool,
}

/// Integration grid over `[t0, t1]`, split at the pulse edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    segments: Vec<Segment>,
}

impl TimeGrid {
    pub fn new(pulse: &PulseEnvelope, t0: f64, t1: f64, opts: &IntegrationOptions) -> Result<Self> {
        if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        let pulse_end = pulse.end();
        let mut cuts = vec![t0];
        for edge in [0.0, pulse_end] {
            if edge > t0 && edge < t1 {
                cuts.push(edge);
            }
        }
        cuts.push(t1);
        let pulse_step = opts.dt.min(pulse.duration() / opts.min_pulse_steps as f64);
        let segments = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (start, end) = (w[0], w[1]);
                let driven = start >= 0.0 && end <= pulse_end && pulse.area() > 0.0;
                let step = if driven { pulse_step } else { opts.dt };
                let steps = (((end - start) / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                Segment {
                    start,
                    end,
                    steps,
                    driven,
                }
            })
            .collect();
        Ok(Self { segments })
    }

    pub fn steps(&self) -> usize {
        self.segments.iter().map(|s| s.steps).sum()
    }

    /// All grid points, including both ends.
    pub fn points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(self.steps() + 1);
        if let Some(first) = self.segments.first() {
            pts.push(first.start);
        }
        for seg in &self.segments {
            let h = (seg.end - seg.start) / seg.steps as f64;
            for i in 1..seg.steps {
                pts.push(seg.start + i as f64 * h);
            }
            pts.push(seg.end);
        }
        pts
    }

    /// Visit every step as `(t, h, driven)`.
    pub(crate) fn for_each_step(&self, mut f: impl FnMut(f64, f64, bool)) {
        for seg in &self.segments {
            let h = (seg.end - seg.start) / seg.steps as f64;
            for i in 0..seg.steps {
                let t = if i == 0 {
                    seg.start
                } else {
                    seg.start + i as f64 * h
                };
                f(t, h, seg.driven);
            }
        }
    }
}

/// Classical RK4 for `dX/dt = f(Omega(t), X)` on a matrix-valued state.
///
/// `deriv(omega, x, out)` must overwrite `out`. `observe(t, x)` is called at
/// the initial time and after every step.
pub(crate) fn integrate<F, O>(
    grid: &TimeGrid,
    pulse: &PulseEnvelope,
    state: &mut CMatrix,
    mut deriv: F,
    mut observe: O,
) where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
    O: FnMut(f64, &CMatrix),
{
    let (r, cols) = state.shape();
    let mut k1 = CMatrix::zeros(r, cols);
    let mut k2 = CMatrix::zeros(r, cols);
    let mut k3 = CMatrix::zeros(r, cols);
    let mut k4 = CMatrix::zeros(r, cols);
    let mut tmp = CMatrix::zeros(r, cols);
    if let Some(first) = grid.segments.first() {
        observe(first.start, state);
    }
    grid.for_each_step(|t, h, driven| {
        let rate = |s: f64| if driven { pulse.envelope(s) } else { 0.0 };
        let (w0, wm, w1) = (rate(t), rate(t + 0.5 * h), rate(t + h));
        deriv(w0, state, &mut k1);
        tmp.copy_from(state);
        axpy(&mut tmp, 0.5 * h, &k1);
        deriv(wm, &tmp, &mut k2);
        tmp.copy_from(state);
        axpy(&mut tmp, 0.5 * h, &k2);
        deriv(wm, &tmp, &mut k3);
        tmp.copy_from(state);
        axpy(&mut tmp, h, &k3);
        deriv(w1, &tmp, &mut k4);
        k2 += &k3;
        axpy(&mut k1, 2.0, &k2);
        k1 += &k4;
        axpy(state, h / 6.0, &k1);
        observe(t + h, state);
    });
}

/// `y += a x`
fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    y.zip_apply(x, |yi, xi| *yi += xi * a);
}

/// `drift + Omega * drive` acting on the columns of a matrix state.
#[derive(Debug, Clone)]
pub(crate) struct LinearGenerator {
    pub drift: CMatrix,
    pub drive: CMatrix,
}

impl LinearGenerator {
    /// The Liouvillian, or the no-jump generator `L - J[L_k]` when a channel
    /// is given.
    pub fn new(model: &SystemModel, channel: Option<usize>) -> Result<Self> {
        let mut drift = model.drift();
        if let Some(k) = channel {
            drift = &drift - &model.jump(k)?;
        }
        Ok(Self {
            drift: drift.matrix().clone(),
            drive: model.drive_generator().matrix().clone(),
        })
    }

    pub fn apply(&self, omega: f64, x: &CMatrix, out: &mut CMatrix) {
        out.gemm(c(1.0), &self.drift, x, c(0.0));
        if omega != 0.0 {
            out.gemm(c(omega), &self.drive, x, c(1.0));
        }
    }

    pub fn at(&self, omega: f64) -> CMatrix {
        &self.drift + &self.drive * c(omega)
    }
}

/// Generator at time `t`: the Liouvillian, or `L(t) - J[L_k]` for a channel.
pub fn generator_at(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: Option<usize>,
    t: f64,
) -> Result<SuperOperator> {
    let gen = LinearGenerator::new(model, channel)?;
    SuperOperator::from_matrix(model.dim(), gen.at(pulse.rate(t)))
}

fn check_state(model: &SystemModel, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

fn run_state(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: Option<usize>,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
    observe: impl FnMut(f64, &CMatrix),
) -> Result<CMatrix> {
    opts.validate(model)?;
    check_state(model, rho0)?;
    let gen = LinearGenerator::new(model, channel)?;
    let grid = TimeGrid::new(pulse, t0, t1, opts)?;
    let v = vectorize(rho0.elements());
    let mut x = CMatrix::from_column_slice(v.len(), 1, v.as_slice());
    integrate(
        &grid,
        pulse,
        &mut x,
        |w, v, out| gen.apply(w, v, out),
        observe,
    );
    devectorize(&CVector::from_column_slice(x.as_slice()), model.dim())
}

/// Full evolution `rho(t1) = V(t1, t0) rho(t0)`.
pub fn evolve(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<DensityMatrix> {
    if rho0.kind() != StateKind::Normalized {
        return Err(Error::InvalidState(
            "evolve needs a normalized initial state".into(),
        ));
    }
    let rho = run_state(model, pulse, None, rho0, t0, t1, opts, |_, _| {})?;
    DensityMatrix::new(rho)
}

/// Populations of the unconditional state on every grid point.
pub fn population_trace(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let dim = model.dim();
    let mut out = Vec::new();
    run_state(model, pulse, None, rho0, t0, t1, opts, |t, x| {
        out.push((t, (0..dim).map(|i| x[(i * dim + i, 0)].re).collect()));
    })?;
    Ok(out)
}

/// Conditional evolution `K(t1, t0) rho(t0)` with no emission into `channel`.
/// The trace of the result is the probability of no such emission.
pub fn evolve_nojump(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<DensityMatrix> {
    model.check_channel(channel)?;
    let rho = run_state(model, pulse, Some(channel), rho0, t0, t1, opts, |_, _| {})?;
    DensityMatrix::conditional(rho)
}

/// No-emission probability on every grid point of `[t0, t1]`.
pub fn nojump_trace_series(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, f64)>> {
    model.check_channel(channel)?;
    let dim = model.dim();
    let mut series = Vec::new();
    run_state(model, pulse, Some(channel), rho0, t0, t1, opts, |t, x| {
        let tr: Complex64 = (0..dim).map(|i| x[(i * dim + i, 0)]).sum();
        series.push((t, tr.re));
    })?;
    Ok(series)
}

/// The propagator `V(t1, t0)`, or `K(t1, t0)` when a channel is given, as a
/// superoperator matrix.
pub fn propagator_matrix(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: Option<usize>,
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<SuperOperator> {
    opts.validate(model)?;
    let gen = LinearGenerator::new(model, channel)?;
    let grid = TimeGrid::new(pulse, t0, t1, opts)?;
    let n = model.dim() * model.dim();
    let mut v = CMatrix::identity(n, n);
    integrate(
        &grid,
        pulse,
        &mut v,
        |w, x, out| gen.apply(w, x, out),
        |_, _| {},
    );
    SuperOperator::from_matrix(model.dim(), v)
}

/// Fail if more than [`HORIZON_RESIDUAL_TOL`] of the population has not yet
/// returned to the ground state.
pub fn check_horizon(rho: &CMatrix) -> Result<()> {
    let total: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    let excited = total - rho[(GROUND, GROUND)].re;
    if excited > HORIZON_RESIDUAL_TOL {
        return Err(Error::HorizonTooShort(excited));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CASCADE_BIEXCITON, CASCADE_EXCITON, CHANNEL_2X, CHANNEL_X};
    use crate::operator::basis_op;
    use std::f64::consts::PI;

    fn opts() -> IntegrationOptions {
        IntegrationOptions::default()
    }

    #[test]
    fn free_decay() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(0.0, 1.0).unwrap();
        let rho = evolve(&m, &p, &DensityMatrix::basis_state(2, 1), 0.0, 1.0, &opts()).unwrap();
        assert!((rho.population(1) - (-1.0f64).exp()).abs() < 1e-6);
        // offset interval, non-unit rate
        let m = SystemModel::two_level(0.4).unwrap();
        let opts = IntegrationOptions { dt: 0.02, ..opts() };
        let rho = evolve(&m, &p, &DensityMatrix::basis_state(2, 1), 3.0, 5.5, &opts).unwrap();
        assert!((rho.population(1) - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn pi_pulse_inverts() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1e-3).unwrap();
        let rho = evolve(&m, &p, &m.ground_state(), 0.0, 1e-3, &opts()).unwrap();
        assert!(rho.population(1) >= 0.99, "{}", rho.population(1));
        let p = PulseEnvelope::gaussian(PI, 1e-3).unwrap();
        let rho = evolve(&m, &p, &m.ground_state(), 0.0, p.end(), &opts()).unwrap();
        assert!(rho.population(1) >= 0.99, "{}", rho.population(1));
    }

    #[test]
    fn two_pi_pulse_returns_cascade_to_ground() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(2.0 * PI, 1e-3).unwrap();
        let rho = evolve(&m, &p, &m.ground_state(), 0.0, 1e-3, &opts()).unwrap();
        assert!(rho.population(CASCADE_BIEXCITON) <= 0.02);
    }

    #[test]
    fn evolution_preserves_state_properties() {
        for kind in [
            crate::SystemKind::TwoLevel,
            crate::SystemKind::ThreeLevelCascade,
        ] {
            let m = SystemModel::unit(kind);
            for &t in &[0.01, 0.3, 2.0] {
                let p = PulseEnvelope::gaussian(1.3 * PI, t).unwrap();
                for &t1 in &[0.5 * p.end(), p.end(), p.end() + 1.0] {
                    let rho = evolve(&m, &p, &m.ground_state(), 0.0, t1, &opts()).unwrap();
                    assert!((rho.trace() - 1.0).abs() < 1e-8);
                    assert!(crate::operator::hermitian_deviation(rho.elements()) < 1e-10);
                    assert!(rho.min_eigenvalue() > -1e-8);
                }
            }
        }
    }

    #[test]
    fn nojump_free_decay() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(0.0, 1.0).unwrap();
        for &t in &[0.5, 2.0, 30.0] {
            let rho = evolve_nojump(
                &m,
                &p,
                0,
                &DensityMatrix::basis_state(2, 1),
                0.0,
                t,
                &opts(),
            )
            .unwrap();
            assert!((rho.trace() - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn nojump_ground_is_certain() {
        let p = PulseEnvelope::square(0.0, 0.5).unwrap();
        for m in [
            SystemModel::two_level(1.0).unwrap(),
            SystemModel::standard_three_level(1.0).unwrap(),
        ] {
            for k in 0..m.channels().len() {
                let series =
                    nojump_trace_series(&m, &p, k, &m.ground_state(), 0.0, 5.0, &opts()).unwrap();
                assert!(series.iter().all(|&(_, tr)| (tr - 1.0).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn nojump_channel_separation() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(0.0, 1.0).unwrap();
        let exciton = DensityMatrix::basis_state(3, CASCADE_EXCITON);
        let series = nojump_trace_series(&m, &p, CHANNEL_2X, &exciton, 0.0, 10.0, &opts()).unwrap();
        assert!(series.iter().all(|&(_, tr)| (tr - 1.0).abs() < 1e-14));
        let end = evolve_nojump(&m, &p, CHANNEL_X, &exciton, 0.0, 2.0, &opts()).unwrap();
        assert!((end.trace() - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn nojump_trace_is_monotone() {
        for kind in [
            crate::SystemKind::TwoLevel,
            crate::SystemKind::ThreeLevelCascade,
        ] {
            let m = SystemModel::unit(kind);
            let p = PulseEnvelope::square(PI, 2.0).unwrap();
            for k in 0..m.channels().len() {
                let series =
                    nojump_trace_series(&m, &p, k, &m.ground_state(), 0.0, 10.0, &opts()).unwrap();
                assert!(series.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-14));
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1.0).unwrap();
        let too_coarse = IntegrationOptions {
            dt: 0.006,
            ..opts()
        };
        assert!(matches!(
            evolve(&m, &p, &m.ground_state(), 0.0, 1.0, &too_coarse),
            Err(Error::StepTooLarge { .. })
        ));
        let few_steps = IntegrationOptions {
            min_pulse_steps: 50,
            ..opts()
        };
        assert!(evolve(&m, &p, &m.ground_state(), 0.0, 1.0, &few_steps).is_err());
        assert!(matches!(
            evolve(&m, &p, &m.ground_state(), 1.0, 0.5, &opts()),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            evolve_nojump(&m, &p, 2, &m.ground_state(), 0.0, 1.0, &opts()),
            Err(Error::InvalidChannel(_))
        ));
        let two = SystemModel::two_level(1.0).unwrap();
        assert!(evolve(&m, &p, &two.ground_state(), 0.0, 1.0, &opts()).is_err());
        // a 2LS with gamma = 1 accepts the coarser step
        assert!(evolve(&two, &p, &two.ground_state(), 0.0, 1.0, &too_coarse).is_ok());
    }

    #[test]
    fn grid_hits_pulse_edges() {
        let p = PulseEnvelope::square(PI, 0.37).unwrap();
        let grid = TimeGrid::new(&p, -0.1, 2.0, &opts()).unwrap();
        let pts = grid.points();
        assert!(pts.contains(&0.0));
        assert!(pts.contains(&0.37));
        assert_eq!(*pts.last().unwrap(), 2.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        let inside = pts.iter().filter(|&&t| t > 0.0 && t < 0.37).count();
        assert!(inside + 1 >= DEFAULT_MIN_PULSE_STEPS);
    }

    #[test]
    fn propagator_identity_on_empty_interval() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1.0).unwrap();
        let v = propagator_matrix(&m, &p, None, 0.3, 0.3, &opts()).unwrap();
        assert_eq!(v.max_abs_diff(&SuperOperator::identity(2)), 0.0);
    }

    #[test]
    fn drive_free_propagator_matches_closed_form() {
        let gamma = 1.0;
        let m = SystemModel::two_level(gamma).unwrap();
        let p = PulseEnvelope::square(0.0, 1.0).unwrap();
        let t = 1.7;
        let v = propagator_matrix(&m, &p, None, 0.0, t, &opts()).unwrap();
        // Closed-form exponential of the static 4x4 generator in the
        // column-stacked basis (gg, eg, ge, ee).
        let d = (-gamma * t).exp();
        let mut exact = CMatrix::zeros(4, 4);
        exact[(0, 0)] = c(1.0);
        exact[(0, 3)] = c(1.0 - d);
        exact[(3, 3)] = c(d);
        exact[(1, 1)] = c((-0.5 * gamma * t).exp());
        exact[(2, 2)] = c((-0.5 * gamma * t).exp());
        let exact = SuperOperator::from_matrix(2, exact).unwrap();
        assert!(v.max_abs_diff(&exact) < 1e-8);
    }

    #[test]
    fn nojump_generator_definition() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1.0).unwrap();
        for k in [CHANNEL_2X, CHANNEL_X] {
            let lhs = generator_at(&m, &p, Some(k), 0.4).unwrap();
            let rhs = &m.liouvillian_at(&p, 0.4) - &m.jump(k).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        }
    }

    #[test]
    fn propagator_composition() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::gaussian(PI, 1.0).unwrap();
        let (t0, t1, t2) = (0.0, 1.234, 5.0);
        for channel in [None, Some(CHANNEL_2X)] {
            let whole = propagator_matrix(&m, &p, channel, t0, t2, &opts()).unwrap();
            let a = propagator_matrix(&m, &p, channel, t0, t1, &opts()).unwrap();
            let b = propagator_matrix(&m, &p, channel, t1, t2, &opts()).unwrap();
            assert!(whole.max_abs_diff(&b.compose(&a)) < 1e-8);
        }
    }

    #[test]
    fn propagator_agrees_with_state_evolution() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 0.5).unwrap();
        let v = propagator_matrix(&m, &p, None, 0.0, 2.0, &opts()).unwrap();
        let rho = evolve(&m, &p, &m.ground_state(), 0.0, 2.0, &opts()).unwrap();
        let via_v = v.apply(m.ground_state().elements()).unwrap();
        assert!((via_v - rho.elements()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn step_halving_changes_little() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 0.1).unwrap();
        let a = evolve(&m, &p, &m.ground_state(), 0.0, 1.0, &opts()).unwrap();
        let b = evolve(&m, &p, &m.ground_state(), 0.0, 1.0, &opts().refined()).unwrap();
        assert!((a.population(1) - b.population(1)).abs() < 1e-6);
    }

    #[test]
    fn horizon_check() {
        let mut rho = basis_op(2, 0, 0);
        assert!(check_horizon(&rho).is_ok());
        rho[(1, 1)] = c(1e-5);
        assert!(matches!(
            check_horizon(&rho),
            Err(Error::HorizonTooShort(_))
        ));
    }
}
