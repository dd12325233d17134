//! Histogram files and the `hbt` report.
//!
//! File format: one header line
//!
//! ```text
//! # hbt-histogram v1 bin_width=0.06 period=12.5 center=1771
//! ```
//!
//! followed by one non-negative integer count per line. Blank lines and further
//! `#` lines are ignored.

use std::fmt;
use std::io::Write;
use std::path::Path;

use multiphoton_core::analytics::{hbt_g2, Background, HbtHistogram, HbtReport, DEFAULT_N_SIDE};
use thiserror::Error;

pub const HEADER_TAG: &str = "hbt-histogram";
pub const DEFAULT_WINDOW: f64 = 2.6;

#[derive(Debug, Error)]
pub enum HbtFileError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Analysis(#[from] multiphoton_core::Error),
}

/// Bin geometry from the header; `n_side` and the window come from options.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramFile {
    pub bin_width: f64,
    pub period: f64,
    pub center: usize,
    pub counts: Vec<u64>,
}

impl HistogramFile {
    pub fn parse(text: &str, path: &str) -> Result<Self, HbtFileError> {
        let err = |line: usize, message: String| HbtFileError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let mut fields = header.trim_start_matches('#').split_whitespace();
        if fields.next() != Some(HEADER_TAG) || fields.next() != Some("v1") {
            return Err(err(1, format!("expected `# {HEADER_TAG} v1 ...` header")));
        }
        let (mut bin_width, mut period, mut center) = (None, None, None);
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| err(1, format!("expected key=value, found `{f}`")))?;
            let bad = || err(1, format!("cannot parse {k}=`{v}`"));
            match k {
                "bin_width" => bin_width = Some(v.parse::<f64>().map_err(|_| bad())?),
                "period" => period = Some(v.parse::<f64>().map_err(|_| bad())?),
                "center" => center = Some(v.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(err(1, format!("unknown header field `{k}`"))),
            }
        }
        let missing = |k: &str| err(1, format!("header lacks `{k}`"));
        let bin_width = bin_width.ok_or_else(|| missing("bin_width"))?;
        let period = period.ok_or_else(|| missing("period"))?;
        let center = center.ok_or_else(|| missing("center"))?;
        let mut counts = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            counts.push(
                line.parse::<u64>()
                    .map_err(|_| err(i + 1, format!("`{line}` is not a count")))?,
            );
        }
        if center >= counts.len() {
            return Err(err(
                1,
                format!("center bin {center} outside {} bins", counts.len()),
            ));
        }
        Ok(Self {
            bin_width,
            period,
            center,
            counts,
        })
    }

    pub fn read(path: &Path) -> Result<Self, HbtFileError> {
        let text = std::fs::read_to_string(path).map_err(|e| HbtFileError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn histogram(&self, window_bins: usize, n_side: usize) -> HbtHistogram {
        HbtHistogram {
            bin_width: self.bin_width,
            counts: self.counts.clone(),
            period: self.period,
            center: self.center,
            n_side,
            window_bins,
        }
    }
}

pub fn write_histogram(h: &HbtHistogram, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "# {HEADER_TAG} v1 bin_width={} period={} center={}",
        h.bin_width, h.period, h.center
    )?;
    for c in &h.counts {
        writeln!(w, "{c}")?;
    }
    Ok(())
}

/// Integration window either as a duration or directly in bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Time(f64),
    Bins(usize),
}

impl Window {
    pub fn bins(&self, bin_width: f64) -> usize {
        match *self {
            Window::Time(t) => (t / bin_width).round().max(0.0) as usize,
            Window::Bins(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtOptions {
    pub window: Window,
    pub n_side: usize,
    pub background: Background,
}

impl Default for HbtOptions {
    fn default() -> Self {
        Self {
            window: Window::Time(DEFAULT_WINDOW),
            n_side: DEFAULT_N_SIDE,
            background: Background::Estimate,
        }
    }
}

pub fn analyze(file: &HistogramFile, opts: &HbtOptions) -> Result<HbtReport, HbtFileError> {
    let h = file.histogram(opts.window.bins(file.bin_width), opts.n_side);
    Ok(hbt_g2(&h, opts.background)?)
}

pub fn run_hbt(path: &Path, opts: &HbtOptions) -> Result<HbtReport, HbtFileError> {
    analyze(&HistogramFile::read(path)?, opts)
}

/// Plain-text rendering of a report.
pub struct ReportDisplay<'a> {
    pub report: &'a HbtReport,
    pub n_side: usize,
    pub window_bins: usize,
}

impl fmt::Display for ReportDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.report;
        writeln!(f, "window_bins  {}", self.window_bins)?;
        writeln!(f, "n_side       {}", self.n_side)?;
        writeln!(f, "N0           {:.6e} +- {:.6e}", r.n0, r.sigma_n0)?;
        writeln!(f, "N1           {:.6e} +- {:.6e}", r.n1, r.sigma_n1)?;
        writeln!(f, "bg_per_bin   {:.6e}", r.background_per_bin)?;
        writeln!(f, "N_BG         {:.6e}", r.n_bg)?;
        writeln!(f, "g2_raw       {:.6e} +- {:.6e}", r.g2_raw, r.g2_raw_err)?;
        writeln!(f, "g2_corr      {:.6e} +- {:.6e}", r.g2, r.g2_err)
    }
}
