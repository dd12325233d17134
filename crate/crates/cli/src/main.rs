use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use multiphoton_cli::{
    run_sweep, HbtOptions, HistogramFile, ReportDisplay, SweepConfig, SweepOverrides, Window,
};
use multiphoton_core::analytics::Background;

#[derive(Parser)]
#[command(
    name = "multiphoton",
    version,
    about = "Multi-photon emission statistics of pulsed quantum emitters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the pulse length and tabulate photon statistics.
    Sweep(SweepArgs),
    /// Estimate g2[0] from a coincidence histogram file.
    Hbt(HbtArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 2ls or 3ls.
    #[arg(long)]
    system: Option<String>,
    /// default, X or 2X.
    #[arg(long)]
    channel: Option<String>,
    /// square or gaussian.
    #[arg(long)]
    shape: Option<String>,
    /// Pulse area in radians.
    #[arg(long)]
    area: Option<f64>,
    /// gamma*T values: `min:max:points` (log-spaced) or a comma list.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Also sample quantum-jump trajectories.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    ntraj: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Integration step in units of 1/gamma.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    min_pulse_steps: Option<usize>,
    /// Integrate to pulse end + horizon/gamma_min.
    #[arg(long)]
    horizon: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl SweepArgs {
    fn overrides(&self) -> SweepOverrides {
        SweepOverrides {
            system: self.system.clone(),
            channel: self.channel.clone(),
            shape: self.shape.clone(),
            area: self.area,
            grid: self.grid.clone(),
            nmax: self.nmax,
            mc: self.mc.then_some(true),
            ntraj: self.ntraj,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format.clone(),
            dt: self.dt,
            min_pulse_steps: self.min_pulse_steps,
            horizon_factor: self.horizon,
            jobs: self.jobs,
        }
    }
}

#[derive(Args)]
struct HbtArgs {
    file: PathBuf,
    /// Integration window per peak, in the time unit of the file.
    #[arg(long, conflicts_with = "window_bins")]
    window: Option<f64>,
    #[arg(long)]
    window_bins: Option<usize>,
    #[arg(long, default_value_t = 16)]
    n_side: usize,
    /// `estimate` or a fixed count per bin.
    #[arg(long, default_value = "estimate")]
    bg: String,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => SweepOverrides::from_file(p)?,
        None => SweepOverrides::default(),
    };
    let cfg = SweepConfig::resolve(file.merged(args.overrides()))?;
    let table = run_sweep(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            table.write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            table.write(&mut w)?;
        }
    }
    Ok(())
}

fn hbt(args: HbtArgs) -> Result<()> {
    let background = match args.bg.as_str() {
        "estimate" => Background::Estimate,
        v => Background::PerBin(
            v.parse()
                .with_context(|| format!("--bg `{v}` is neither `estimate` nor a number"))?,
        ),
    };
    let window = match (args.window, args.window_bins) {
        (_, Some(b)) => Window::Bins(b),
        (Some(t), None) => Window::Time(t),
        (None, None) => HbtOptions::default().window,
    };
    let opts = HbtOptions {
        window,
        n_side: args.n_side,
        background,
    };
    let file = HistogramFile::read(&args.file)?;
    let report = multiphoton_cli::analyze(&file, &opts)?;
    print!(
        "{}",
        ReportDisplay {
            report: &report,
            n_side: opts.n_side,
            window_bins: window.bins(file.bin_width),
        }
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Sweep(a) => sweep(a),
        Command::Hbt(a) => hbt(a),
    }
}
