//! Pulse-wise `g2[0]` from a start-stop coincidence histogram.
//!
//! The centre peak area `N0` is compared with the mean area `N1` of the
//! side peaks, each integrated over a fixed window, with an optional constant
//! background subtracted from both.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Exp, Poisson};

use crate::counting::PhotocountDistribution;
use crate::{Error, Result};

pub const DEFAULT_N_SIDE: usize = 16;
/// Side peaks must stand this many standard errors above the background.
pub const SIDE_PEAK_SIGNIFICANCE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HbtHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Pulse repetition period, same unit as `bin_width`.
    pub period: f64,
    /// Bin holding zero delay.
    pub center: usize,
    pub n_side: usize,
    /// Integration window per peak, in bins.
    pub window_bins: usize,
}

impl HbtHistogram {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHistogram(msg));
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return bad(format!("bin width {} must be positive", self.bin_width));
        }
        if !(self.period >= self.bin_width && self.period.is_finite()) {
            return bad(format!("period {} shorter than one bin", self.period));
        }
        if self.n_side == 0 {
            return bad("at least one side peak is required".into());
        }
        if self.window_bins == 0 {
            return bad("integration window must cover at least one bin".into());
        }
        if self.window_bins as f64 * self.bin_width > self.period {
            return bad("integration window longer than the pulse period".into());
        }
        for m in std::iter::once(0).chain(self.side_offsets()) {
            let (lo, hi) = self.window(m);
            if lo < 0 || hi > self.counts.len() as i64 {
                return bad(format!("window of peak {m} extends beyond the histogram"));
            }
        }
        Ok(())
    }

    /// Side-peak offsets in units of the period: +1, -1, +2, -2, ...
    pub fn side_offsets(&self) -> Vec<i64> {
        (0..self.n_side)
            .map(|k| {
                let m = (k / 2 + 1) as i64;
                if k % 2 == 0 {
                    m
                } else {
                    -m
                }
            })
            .collect()
    }

    pub fn peak_center(&self, m: i64) -> i64 {
        self.center as i64 + (m as f64 * self.period / self.bin_width).round() as i64
    }

    /// Half-open bin range `[lo, hi)` integrated for peak `m`.
    pub fn window(&self, m: i64) -> (i64, i64) {
        let lo = self.peak_center(m) - (self.window_bins / 2) as i64;
        (lo, lo + self.window_bins as i64)
    }

    fn area(&self, m: i64) -> f64 {
        let (lo, hi) = self.window(m);
        self.counts[lo as usize..hi as usize].iter().sum::<u64>() as f64
    }

    /// Mean count of bins farther than one window from every peak centre.
    pub fn estimate_background(&self) -> Result<f64> {
        let centers: Vec<i64> = std::iter::once(0)
            .chain(self.side_offsets())
            .map(|m| self.peak_center(m))
            .collect();
        let reach = self.window_bins as i64;
        let (sum, n) = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| centers.iter().all(|c| (*i as i64 - c).abs() > reach))
            .fold((0u64, 0usize), |(s, n), (_, &k)| (s + k, n + 1));
        if n == 0 {
            return Err(Error::InvalidHistogram(
                "no bins available between peaks".into(),
            ));
        }
        Ok(sum as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    /// Counts per bin, known in advance.
    PerBin(f64),
    /// Averaged from the bins between the peaks.
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtReport {
    pub n0: f64,
    /// Mean side-peak area.
    pub n1: f64,
    pub sigma_n0: f64,
    pub sigma_n1: f64,
    pub background_per_bin: f64,
    /// Background per integration window.
    pub n_bg: f64,
    pub g2_raw: f64,
    pub g2_raw_err: f64,
    pub g2: f64,
    pub g2_err: f64,
}

/// Ratio `a / b` and its error from uncorrelated errors on both.
fn ratio_with_error(a: f64, b: f64, sa: f64, sb: f64) -> (f64, f64) {
    (
        a / b,
        ((sa / b).powi(2) + (a * sb / (b * b)).powi(2)).sqrt(),
    )
}

/// `g2[0] = N0 / N1`, raw and background corrected.
///
/// The errors are `sqrt(N0)` and `sqrt(N1 n_side) / n_side` on the
/// uncorrected areas, propagated in quadrature. The corrected value is
/// undefined, and reported as [`Error::UndefinedG2`], unless the corrected
/// side-peak area exceeds [`SIDE_PEAK_SIGNIFICANCE`] times its error.
pub fn hbt_g2(h: &HbtHistogram, bg: Background) -> Result<HbtReport> {
    h.validate()?;
    let background_per_bin = match bg {
        Background::PerBin(b) if b >= 0.0 && b.is_finite() => b,
        Background::PerBin(b) => {
            return Err(Error::InvalidArgument(format!(
                "background {b} must be non-negative"
            )))
        }
        Background::Estimate => h.estimate_background()?,
    };
    let n0 = h.area(0);
    let sides = h.side_offsets();
    let n1 = sides.iter().map(|&m| h.area(m)).sum::<f64>() / sides.len() as f64;
    let k = h.n_side as f64;
    let sigma_n0 = n0.sqrt();
    let sigma_n1 = (n1 * k).sqrt() / k;
    let n_bg = background_per_bin * h.window_bins as f64;
    let n1c = n1 - n_bg;
    if n1c <= 0.0 || n1c <= SIDE_PEAK_SIGNIFICANCE * sigma_n1 {
        return Err(Error::UndefinedG2(n1c));
    }
    let (g2_raw, g2_raw_err) = ratio_with_error(n0, n1, sigma_n0, sigma_n1);
    let (g2, g2_err) = ratio_with_error(n0 - n_bg, n1c, sigma_n0, sigma_n1);
    Ok(HbtReport {
        n0,
        n1,
        sigma_n0,
        sigma_n1,
        background_per_bin,
        n_bg,
        g2_raw,
        g2_raw_err,
        g2,
        g2_err,
    })
}

/// Settings of the synthetic HBT experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub pulses: u64,
    /// Mean dark coincidences per bin.
    pub dark_per_bin: f64,
    pub bin_width: f64,
    pub period: f64,
    /// Emission lifetime setting the arrival-time jitter.
    pub lifetime: f64,
    pub n_side: usize,
    pub window_bins: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        // times in ns: 60 ps bins, 80 MHz repetition, 2.6 ns windows
        Self {
            pulses: 1_000_000,
            dark_per_bin: 0.0,
            bin_width: 0.06,
            period: 12.5,
            lifetime: 0.26,
            n_side: DEFAULT_N_SIDE,
            window_bins: 43,
        }
    }
}

/// Simulate a start-stop histogram behind a 50:50 beamsplitter.
///
/// Each pulse carries `n` photons drawn from `d` (renormalized over its
/// support), split binomially between detectors A and B. Every pair of an A
/// click in pulse `i` and a B click in pulse `i + m` adds one coincidence at
/// delay `m * period` plus the difference of two exponential emission delays.
/// Pulses wrap around so that every peak sees the same number of pulse pairs.
/// Poisson dark coincidences are added to every bin.
pub fn synth_histogram(
    d: &PhotocountDistribution,
    params: &SynthParams,
    seed: u64,
) -> Result<HbtHistogram> {
    if params.pulses == 0 {
        return Err(Error::InvalidArgument("at least one pulse required".into()));
    }
    if !(params.dark_per_bin >= 0.0 && params.lifetime > 0.0) {
        return Err(Error::InvalidArgument(
            "dark rate and lifetime must be positive".into(),
        ));
    }
    let weights: Vec<f64> = d.probs().iter().map(|p| p.max(0.0)).collect();
    let photons = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("photocount distribution: {e}")))?;
    let max_offset = params.n_side.div_ceil(2) as f64;
    let half = ((max_offset + 0.5) * params.period / params.bin_width).ceil() as usize;
    let mut hist = HbtHistogram {
        bin_width: params.bin_width,
        counts: vec![0; 2 * half + 1],
        period: params.period,
        center: half,
        n_side: params.n_side,
        window_bins: params.window_bins,
    };
    hist.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pulses = params.pulses as usize;
    let mut a = vec![0u32; pulses];
    let mut b = vec![0u32; pulses];
    for i in 0..pulses {
        let n = photons.sample(&mut rng) as u64;
        let to_a = if n == 0 {
            0
        } else {
            Binomial::new(n, 0.5)
                .expect("valid binomial")
                .sample(&mut rng)
        };
        a[i] = to_a as u32;
        b[i] = (n - to_a) as u32;
    }

    let jitter = Exp::new(1.0 / params.lifetime).expect("positive lifetime");
    let len = hist.counts.len() as i64;
    for m in std::iter::once(0).chain(hist.side_offsets()) {
        let shift = m.rem_euclid(pulses as i64) as usize;
        for i in 0..pulses {
            let pairs = a[i] * b[(i + shift) % pulses];
            for _ in 0..pairs {
                let delay =
                    m as f64 * params.period + jitter.sample(&mut rng) - jitter.sample(&mut rng);
                let bin = hist.center as i64 + (delay / params.bin_width).round() as i64;
                if (0..len).contains(&bin) {
                    hist.counts[bin as usize] += 1;
                }
            }
        }
    }

    if params.dark_per_bin > 0.0 {
        let dark = Poisson::new(params.dark_per_bin).expect("positive rate");
        for c in hist.counts.iter_mut() {
            *c += dark.sample(&mut rng) as u64;
        }
    }
    Ok(hist)
}
