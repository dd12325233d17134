//! Pulse-length sweeps: one table row per grid point.

use std::f64::consts::PI;
use std::io::Write;

use multiphoton_core::analytics::{
    g2_short_2ls, p2_short_2ls, p2_short_3ls_area, SHORT_PULSE_LIMIT,
};
use multiphoton_core::counting::{
    correlator_moments, g2_from_counts, mc_trajectories, mean_and_factorial_moment,
    resolve_photocount_distribution, McConfig, RESIDUAL_TOLERANCE,
};
use multiphoton_core::{PulseEnvelope, PulseShape, SystemKind};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, SweepConfig};

pub const FORMAT_TAG: &str = "multiphoton-sweep";
pub const FORMAT_VERSION: u32 = 1;
/// Largest relative disagreement allowed between the two `g2` routes.
pub const DUAL_PATH_TOLERANCE: f64 = 1e-3;
/// Monte-Carlo columns cover `P_0 .. P_2`.
pub const MC_COLUMNS: usize = 3;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("gamma*T = {gamma_t} (point {index}): {source}")]
    Point {
        index: usize,
        gamma_t: f64,
        source: multiphoton_core::Error,
    },
    #[error("gamma*T = {gamma_t} (point {index}): g2 from counts {moments:e} disagrees with correlator {correlator:e}")]
    DualPath {
        index: usize,
        gamma_t: f64,
        moments: f64,
        correlator: f64,
    },
    #[error("gamma*T = {gamma_t} (point {index}): probabilities miss unity by {residual:e}")]
    Normalization {
        index: usize,
        gamma_t: f64,
        residual: f64,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McColumns {
    pub p: [f64; MC_COLUMNS],
    pub se: [f64; MC_COLUMNS],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma_t: f64,
    pub mean_n: f64,
    pub g2_moments: f64,
    pub g2_correlator: f64,
    /// `P_0 .. P_nmax`.
    pub probs: Vec<f64>,
    /// Probability of more than `nmax` photons.
    pub p_beyond: f64,
    /// `1 - sum_n P_n` over every resolved photon number.
    pub residual: f64,
    /// NaN where no short-pulse estimate applies.
    pub analytic_p2: f64,
    pub analytic_g2: f64,
    pub mc: Option<McColumns>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

/// Seed of the Monte-Carlo run at grid point `index`.
pub fn point_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn analytic(cfg: &SweepConfig, kind: SystemKind, shape: PulseShape, gamma_t: f64) -> (f64, f64) {
    if shape != PulseShape::Square || gamma_t >= SHORT_PULSE_LIMIT {
        return (f64::NAN, f64::NAN);
    }
    match kind {
        SystemKind::TwoLevel if (cfg.area - PI).abs() < 1e-12 => (
            p2_short_2ls(1.0, gamma_t).unwrap_or(f64::NAN),
            g2_short_2ls(1.0, gamma_t).unwrap_or(f64::NAN),
        ),
        SystemKind::TwoLevel => (f64::NAN, f64::NAN),
        SystemKind::ThreeLevelCascade => {
            // unit model: gamma_X = 1, gamma_2X = 2
            let p2 = p2_short_3ls_area(1.0, 2.0, cfg.area, gamma_t).unwrap_or(f64::NAN);
            (p2, 2.0 * p2)
        }
    }
}

fn run_point(cfg: &SweepConfig, index: usize, gamma_t: f64) -> Result<SweepRow, SweepError> {
    let model = cfg.model()?;
    let shape = cfg.pulse_shape()?;
    let channel = model
        .channel_index(&cfg.channel)
        .map_err(|source| SweepError::Point {
            index,
            gamma_t,
            source,
        })?;
    let opts = cfg.options();
    let at = |source| SweepError::Point {
        index,
        gamma_t,
        source,
    };
    let pulse = PulseEnvelope::new(shape, cfg.area, gamma_t).map_err(at)?;

    let dist =
        resolve_photocount_distribution(&model, &pulse, channel, cfg.nmax, &opts).map_err(at)?;
    let residual = dist.residual();
    if residual.abs() >= RESIDUAL_TOLERANCE {
        return Err(SweepError::Normalization {
            index,
            gamma_t,
            residual,
        });
    }
    let (mean_n, _) = mean_and_factorial_moment(&dist);
    let g2_moments = g2_from_counts(&dist).map_err(at)?;
    let g2_correlator = correlator_moments(&model, &pulse, channel, &opts)
        .and_then(|m| m.g2())
        .map_err(at)?;
    if (g2_moments - g2_correlator).abs() > DUAL_PATH_TOLERANCE * g2_correlator.abs() {
        return Err(SweepError::DualPath {
            index,
            gamma_t,
            moments: g2_moments,
            correlator: g2_correlator,
        });
    }
    let probs: Vec<f64> = (0..=cfg.nmax).map(|n| dist.p(n)).collect();
    let p_beyond = dist.probs().iter().skip(cfg.nmax + 1).sum();
    let (analytic_p2, analytic_g2) = analytic(cfg, model.kind(), shape, gamma_t);

    let mc = if cfg.mc {
        let mc_cfg = McConfig::new(cfg.ntraj, point_seed(cfg.seed, index));
        let res = mc_trajectories(&model, &pulse, channel, &mc_cfg, &opts).map_err(at)?;
        let d = res.distribution();
        Some(McColumns {
            p: std::array::from_fn(|n| d.prob(n)),
            se: std::array::from_fn(|n| d.standard_error(n)),
        })
    } else {
        None
    };

    Ok(SweepRow {
        gamma_t,
        mean_n,
        g2_moments,
        g2_correlator,
        probs,
        p_beyond,
        residual,
        analytic_p2,
        analytic_g2,
        mc,
    })
}

/// Compute every grid point, in parallel, and return the rows in grid order.
/// The first failing point aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable, SweepError> {
    cfg.validate()?;
    let grid = cfg.grid.values();
    let work = || -> Result<Vec<SweepRow>, SweepError> {
        grid.par_iter()
            .enumerate()
            .map(|(i, &gt)| run_point(cfg, i, gt))
            .collect()
    };
    let rows = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(SweepTable {
        config: cfg.clone(),
        rows,
    })
}

impl SweepTable {
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = ["gamma_T", "mean_n", "g2_moments", "g2_correlator"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        c.extend((0..=self.config.nmax).map(|n| format!("P{n}")));
        c.extend(
            ["P_gt_nmax", "residual", "analytic_P2", "analytic_g2"]
                .iter()
                .map(|s| s.to_string()),
        );
        if self.config.mc {
            for n in 0..MC_COLUMNS {
                c.push(format!("mc_P{n}"));
                c.push(format!("mc_P{n}_se"));
            }
        }
        c
    }

    fn values(&self, row: &SweepRow) -> Vec<f64> {
        let mut v = vec![row.gamma_t, row.mean_n, row.g2_moments, row.g2_correlator];
        v.extend(&row.probs);
        v.extend([row.p_beyond, row.residual, row.analytic_p2, row.analytic_g2]);
        if let Some(mc) = &row.mc {
            for n in 0..MC_COLUMNS {
                v.extend([mc.p[n], mc.se[n]]);
            }
        }
        v
    }

    /// Values per row, in column order.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| self.values(r)).collect()
    }

    /// CSV with a commented header holding the format tag and the resolved
    /// configuration in the config-file syntax.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# {FORMAT_TAG} v{FORMAT_VERSION}")?;
        for (k, v) in self.config.to_key_values() {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns().join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = self
                .values(row)
                .iter()
                .map(|x| format!("{x:.12e}"))
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: &mut impl Write) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            format: &'static str,
            version: u32,
            config: &'a SweepConfig,
            columns: Vec<String>,
            rows: Vec<Vec<f64>>,
        }
        let doc = Doc {
            format: FORMAT_TAG,
            version: FORMAT_VERSION,
            config: &self.config,
            columns: self.columns(),
            rows: self.matrix(),
        };
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)
    }

    pub fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        match self.config.format {
            crate::config::OutputFormat::Csv => self.write_csv(w),
            crate::config::OutputFormat::Json => self.write_json(w),
        }
    }
}
