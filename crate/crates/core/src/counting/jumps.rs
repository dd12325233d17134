//! Monte-Carlo quantum-jump unraveling of the full master equation.
//!
//! Each trajectory carries an unnormalized pure state evolving under the
//! effective Hamiltonian `H - i/2 sum_k L_k^dagger L_k`. A jump happens when
//! the squared norm falls to a uniform random threshold; the channel is then
//! drawn with weights `|L_k psi|^2` and the state is reset to `L_k psi`.
//!
//! Inside the pulse window the no-jump propagator is precomputed for every
//! grid step with the same RK4 scheme used by the deterministic solver, and
//! crossings inside a step are located by root finding on a partial step.
//! After the pulse the drive is off and the decay operator is diagonal, so the
//! norm is a sum of exponentials and waiting times are solved exactly, out to
//! infinite time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::models::{PulseEnvelope, SystemModel, GROUND};
use crate::operator::{c, CMatrix, CVector};
use crate::propagate::{IntegrationOptions, TimeGrid};
use crate::{Error, Result};

const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trajectories: u64,
    pub seed: u64,
    /// How many [`JumpRecord`]s to keep, taken from the first trajectories.
    pub keep_records: usize,
}

impl McConfig {
    pub fn new(trajectories: u64, seed: u64) -> Self {
        Self {
            trajectories,
            seed,
            keep_records: 0,
        }
    }
}

/// Emission times of one trajectory, one increasing list per channel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpRecord {
    pub emissions: Vec<Vec<f64>>,
}

impl JumpRecord {
    pub fn count(&self, channel: usize) -> usize {
        self.emissions.get(channel).map_or(0, Vec::len)
    }

    /// Times are non-negative and strictly increasing within each channel.
    pub fn is_ordered(&self) -> bool {
        self.emissions
            .iter()
            .all(|ts| ts.iter().all(|&t| t >= 0.0) && ts.windows(2).all(|w| w[1] > w[0]))
    }
}

/// Histogram of photon numbers over a set of trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub trajectories: u64,
}

impl EmpiricalDistribution {
    fn empty(trajectories: u64) -> Self {
        Self {
            counts: Vec::new(),
            trajectories,
        }
    }

    fn add(&mut self, n: usize, times: u64) {
        if self.counts.len() <= n {
            self.counts.resize(n + 1, 0);
        }
        self.counts[n] += times;
    }

    pub fn count(&self, n: usize) -> u64 {
        self.counts.get(n).copied().unwrap_or(0)
    }

    pub fn prob(&self, n: usize) -> f64 {
        self.count(n) as f64 / self.trajectories as f64
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|n| self.prob(n)).collect()
    }

    /// Binomial standard error of `prob(n)`, evaluated at the add-one
    /// smoothed estimate `(k + 1) / (N + 2)` so that unobserved outcomes
    /// still carry a one-count resolution.
    pub fn standard_error(&self, n: usize) -> f64 {
        let total = self.trajectories as f64;
        let p = (self.count(n) as f64 + 1.0) / (total + 2.0);
        (p * (1.0 - p) / total).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    /// Monitored channel index.
    pub channel: usize,
    /// Photon-number histograms for every channel of the model.
    pub per_channel: Vec<EmpiricalDistribution>,
    pub records: Vec<JumpRecord>,
}

impl McResult {
    pub fn distribution(&self) -> &EmpiricalDistribution {
        &self.per_channel[self.channel]
    }
}

/// Sample `config.trajectories` jump trajectories starting from the ground
/// state. Trajectory `i` draws from stream `i` of a ChaCha generator seeded
/// with `config.seed`, so results do not depend on scheduling.
pub fn mc_trajectories(
    model: &SystemModel,
    pulse: &PulseEnvelope,
    channel: usize,
    config: &McConfig,
    opts: &IntegrationOptions,
) -> Result<McResult> {
    opts.validate(model)?;
    model.check_channel(channel)?;
    if config.trajectories == 0 {
        return Err(Error::InvalidArgument(
            "at least one trajectory required".into(),
        ));
    }
    let sampler = Sampler::new(model, pulse, opts)?;
    let n_channels = model.channels().len();
    let chunks = config.trajectories.div_ceil(CHUNK);
    let partial: Vec<(Vec<EmpiricalDistribution>, Vec<JumpRecord>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut hist = vec![EmpiricalDistribution::empty(config.trajectories); n_channels];
            let mut records = Vec::new();
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(config.trajectories);
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(i);
                let rec = sampler.run(&mut rng);
                for (k, h) in hist.iter_mut().enumerate() {
                    h.add(rec.count(k), 1);
                }
                if (i as usize) < config.keep_records {
                    records.push(rec);
                }
            }
            (hist, records)
        })
        .collect();
    let mut per_channel = vec![EmpiricalDistribution::empty(config.trajectories); n_channels];
    let mut records = Vec::new();
    for (hist, recs) in partial {
        for (total, h) in per_channel.iter_mut().zip(hist) {
            for (n, &k) in h.counts.iter().enumerate() {
                total.add(n, k);
            }
        }
        records.extend(recs);
    }
    Ok(McResult {
        channel,
        per_channel,
        records,
    })
}

/// Precomputed data shared by all trajectories.
struct Sampler {
    pulse: PulseEnvelope,
    /// `-i H(Omega = 1)`: drive part of the effective generator.
    drive: CMatrix,
    /// `-1/2 sum_k L_k^dagger L_k`.
    decay: CMatrix,
    losses: Vec<CMatrix>,
    level_rates: Vec<f64>,
    /// `(t, h, U)` for every step of the pulse window.
    steps: Vec<(f64, f64, CMatrix)>,
    dim: usize,
}

impl Sampler {
    fn new(model: &SystemModel, pulse: &PulseEnvelope, opts: &IntegrationOptions) -> Result<Self> {
        let dim = model.dim();
        let losses = model.loss_operators();
        let mut decay = CMatrix::zeros(dim, dim);
        for l in &losses {
            decay -= l.adjoint() * l * c(0.5);
        }
        let off_diagonal = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .any(|(i, j)| i != j && decay[(i, j)].norm() > 0.0);
        if off_diagonal {
            return Err(Error::InvalidArgument(
                "jump sampling needs a diagonal decay operator".into(),
            ));
        }
        let drive = model.coupling() * num_complex::Complex64::new(0.0, -0.5);
        let mut sampler = Self {
            pulse: *pulse,
            drive,
            decay,
            losses,
            level_rates: model.level_decay_rates(),
            steps: Vec::new(),
            dim,
        };
        if pulse.area() > 0.0 {
            let grid = TimeGrid::new(pulse, 0.0, pulse.end(), opts)?;
            let mut steps = Vec::with_capacity(grid.steps());
            grid.for_each_step(|t, h, _| steps.push((t, h, sampler.step_matrix(t, h))));
            sampler.steps = steps;
        }
        Ok(sampler)
    }

    fn generator(&self, t: f64) -> CMatrix {
        &self.decay + &self.drive * c(self.pulse.envelope(t))
    }

    /// One RK4 step of the no-jump Schrodinger equation as a matrix.
    fn step_matrix(&self, t: f64, h: f64) -> CMatrix {
        let id = CMatrix::identity(self.dim, self.dim);
        let g0 = self.generator(t);
        let gm = self.generator(t + 0.5 * h);
        let g1 = self.generator(t + h);
        let k1 = g0;
        let k2 = &gm * (&id + &k1 * c(0.5 * h));
        let k3 = &gm * (&id + &k2 * c(0.5 * h));
        let k4 = &g1 * (&id + &k3 * c(h));
        id + (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0)
    }

    fn threshold(rng: &mut ChaCha8Rng) -> f64 {
        // uniform on (0, 1]
        1.0 - rng.random::<f64>()
    }

    fn jump(&self, psi: &CVector, rng: &mut ChaCha8Rng) -> (usize, CVector) {
        let candidates: Vec<CVector> = self.losses.iter().map(|l| l * psi).collect();
        let weights: Vec<f64> = candidates.iter().map(|v| v.norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut k = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                k = i;
                break;
            }
            u -= w;
        }
        let next = &candidates[k] / c(weights[k].sqrt());
        (k, next)
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> JumpRecord {
        let mut record = JumpRecord {
            emissions: vec![Vec::new(); self.losses.len()],
        };
        let mut psi = CVector::zeros(self.dim);
        psi[GROUND] = c(1.0);
        let mut r = Self::threshold(rng);

        for (t, h, u) in &self.steps {
            let step_end = t + h;
            let mut now = *t;
            loop {
                let next = if now == *t {
                    u * &psi
                } else {
                    self.step_matrix(now, step_end - now) * &psi
                };
                if next.norm_squared() > r {
                    psi = next;
                    break;
                }
                let s = self.crossing(&psi, now, step_end - now, r);
                let at_jump = self.step_matrix(now, s) * &psi;
                let (k, after) = self.jump(&at_jump, rng);
                now += s;
                record.emissions[k].push(now);
                psi = after;
                r = Self::threshold(rng);
                if step_end - now <= 1e-15 * step_end.abs().max(1.0) {
                    break;
                }
            }
        }

        // Drive off: |c_i(s)|^2 = |c_i|^2 exp(-rate_i s).
        let mut now = if self.steps.is_empty() {
            0.0
        } else {
            self.pulse.end()
        };
        loop {
            let pops: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let stable: f64 = pops
                .iter()
                .zip(&self.level_rates)
                .filter(|(_, &g)| g == 0.0)
                .map(|(p, _)| p)
                .sum();
            if stable >= r {
                break;
            }
            let s = self.decay_crossing(&pops, r);
            let decayed = CVector::from_iterator(
                self.dim,
                psi.iter()
                    .zip(&self.level_rates)
                    .map(|(z, g)| z * (-0.5 * g * s).exp()),
            );
            let (k, after) = self.jump(&decayed, rng);
            now += s;
            record.emissions[k].push(now);
            psi = after;
            r = Self::threshold(rng);
        }
        record
    }

    /// Time `s` in `(0, h]` at which the no-jump norm from `(psi, t)` reaches
    /// `r`, by the Illinois variant of regula falsi.
    fn crossing(&self, psi: &CVector, t: f64, h: f64, r: f64) -> f64 {
        let f = |s: f64| (self.step_matrix(t, s) * psi).norm_squared() - r;
        let (mut a, mut b) = (0.0, h);
        let (mut fa, mut fb) = (psi.norm_squared() - r, f(h));
        let mut side = 0;
        for _ in 0..60 {
            if fa - fb == 0.0 {
                break;
            }
            let s = (a * fb - b * fa) / (fb - fa);
            let fs = f(s);
            if fs > 0.0 {
                a = s;
                fa = fs;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = s;
                fb = fs;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
            if (b - a) <= 1e-14 * h || fs.abs() < 1e-16 {
                break;
            }
        }
        b.clamp(f64::MIN_POSITIVE, h)
    }

    /// Solve `sum_i pops_i exp(-rate_i s) = r` for `s > 0` by bisection.
    fn decay_crossing(&self, pops: &[f64], r: f64) -> f64 {
        let norm = |s: f64| -> f64 {
            pops.iter()
                .zip(&self.level_rates)
                .map(|(p, g)| p * (-g * s).exp())
                .sum()
        };
        let slowest = self
            .level_rates
            .iter()
            .filter(|&&g| g > 0.0)
            .fold(f64::INFINITY, |a, &g| a.min(g));
        let (mut lo, mut hi) = (0.0, 1.0 / slowest);
        while norm(hi) > r {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CHANNEL_2X, CHANNEL_X};
    use std::f64::consts::PI;

    fn opts() -> IntegrationOptions {
        IntegrationOptions::default()
    }

    #[test]
    fn undriven_never_emits() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(0.0, 1.0).unwrap();
        let res = mc_trajectories(&m, &p, CHANNEL_2X, &McConfig::new(1000, 1), &opts()).unwrap();
        assert_eq!(res.distribution().prob(0), 1.0);
    }

    #[test]
    fn cascade_channels_balance() {
        let m = SystemModel::standard_three_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1.0).unwrap();
        let cfg = McConfig {
            trajectories: 5000,
            seed: 7,
            keep_records: 5000,
        };
        let res = mc_trajectories(&m, &p, CHANNEL_2X, &cfg, &opts()).unwrap();
        assert_eq!(res.records.len(), 5000);
        for rec in &res.records {
            assert_eq!(rec.count(CHANNEL_X), rec.count(CHANNEL_2X));
            assert!(rec.is_ordered());
        }
        // the cascade orders 2X before X within each cycle
        for rec in res.records.iter().filter(|r| r.count(CHANNEL_2X) > 0) {
            assert!(rec.emissions[CHANNEL_2X][0] < rec.emissions[CHANNEL_X][0]);
        }
        assert_eq!(res.per_channel[CHANNEL_X], res.per_channel[CHANNEL_2X]);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 0.5).unwrap();
        let cfg = McConfig {
            trajectories: 3000,
            seed: 11,
            keep_records: 10,
        };
        let a = mc_trajectories(&m, &p, 0, &cfg, &opts()).unwrap();
        let b = mc_trajectories(&m, &p, 0, &cfg, &opts()).unwrap();
        assert_eq!(a, b);
        let c = mc_trajectories(&m, &p, 0, &McConfig { seed: 12, ..cfg }, &opts()).unwrap();
        assert_ne!(a.distribution(), c.distribution());
    }

    #[test]
    fn free_decay_waiting_times() {
        // a pi pulse much shorter than the lifetime, then exponential decay
        let m = SystemModel::two_level(1.0).unwrap();
        let p = PulseEnvelope::square(PI, 1e-4).unwrap();
        let cfg = McConfig {
            trajectories: 20000,
            seed: 3,
            keep_records: 20000,
        };
        let res = mc_trajectories(&m, &p, 0, &cfg, &opts()).unwrap();
        let times: Vec<f64> = res
            .records
            .iter()
            .filter_map(|r| r.emissions[0].first().copied())
            .collect();
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        // exponential with unit mean; standard error 1/sqrt(N)
        assert!(
            (mean - 1.0).abs() < 4.0 / (times.len() as f64).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn standard_error_floor() {
        let d = EmpiricalDistribution {
            counts: vec![100],
            trajectories: 100,
        };
        assert!(d.standard_error(1) > 0.0);
        assert!(d.standard_error(0) > 0.0);
        assert_eq!(d.prob(0), 1.0);
        assert_eq!(d.prob(3), 0.0);
    }
}
