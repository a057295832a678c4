use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ssk::goe::{eigenvalues, sample_goe};
use ssk::sweep::{cmd_sweep, Format, McMethod, SweepConfig};
use ssk::variational::SystemSize;
use ssk::verify::{self, Tolerances};

#[derive(Parser)]
#[command(
    name = "ssk",
    version,
    about = "Free energy of the spherical 2-spin SK model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limiting free energy, variational optimum and Monte Carlo estimate over a β grid.
    Sweep(SweepArgs),
    /// Run the acceptance criteria and print a pass/fail table.
    Verify(VerifyArgs),
    /// Sample a GOE matrix and write its eigenvalues in descending order.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Importance,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    beta_grid: Vec<f64>,
    /// Number of equal-mass bins.
    #[arg(long = "K", default_value_t = 50)]
    k: usize,
    /// Finite system size; rounded up to a multiple of K.
    #[arg(
        long,
        conflicts_with = "n_infinite",
        required_unless_present = "n_infinite"
    )]
    n: Option<usize>,
    /// Use the n = infinity variational problem and skip Monte Carlo.
    #[arg(long)]
    n_infinite: bool,
    /// Monte Carlo samples per cell (0 skips Monte Carlo).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', env = "SSK_SEED", default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value = "importance")]
    method: MethodArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Closed-form and deterministic checks only.
    #[arg(long)]
    quick: bool,
    /// JSON tolerance table; every key required, values may only tighten.
    #[arg(long)]
    tolerances: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, env = "SSK_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    if a.n == Some(0) {
        bail!("n must be at least 1");
    }
    let cfg = SweepConfig {
        beta_grid: a.beta_grid,
        k: a.k,
        n: a.n.map_or(SystemSize::Infinite, SystemSize::Finite),
        samples: a.samples,
        seeds: a.seeds,
        method: match a.method {
            MethodArg::Naive => McMethod::Naive,
            MethodArg::Importance => McMethod::Importance,
        },
        format: match a.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        output_path: a.out,
    };
    cmd_sweep(&cfg)?;
    Ok(())
}

fn verify(a: VerifyArgs) -> anyhow::Result<bool> {
    let t = match &a.tolerances {
        Some(path) => Tolerances::from_file(path)?,
        None => Tolerances::default(),
    };
    let mut all = true;
    for r in verify::run(&t, a.quick) {
        println!("{}", r.line());
        all &= r.passed;
    }
    println!(
        "{}",
        if all {
            "all criteria passed"
        } else {
            "some criteria failed"
        }
    );
    Ok(all)
}

fn spectrum(a: SpectrumArgs) -> anyhow::Result<()> {
    let s = eigenvalues(&sample_goe(a.n, a.seed)?)?;
    match a.out {
        Some(path) => {
            let file = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            let mut w = std::io::BufWriter::new(file);
            s.write_csv(&mut w)?;
            w.flush()?;
        }
        None => s.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Spectrum(a) => spectrum(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
