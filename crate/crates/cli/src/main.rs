use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use reparam_cli::{execute, Command, Format, Overrides};
use reparam_core::brane::DngNormalization;

#[derive(Parser)]
#[command(
    name = "reparam",
    version,
    about = "Reparametrization-invariant mechanics from scene files"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Seed for sampled states, embedding points and random diffeomorphisms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path, overriding `[output] path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    dng_normalization: Option<NormArg>,
    /// Gauss-Legendre order per panel.
    #[arg(long, global = true)]
    quadrature_order: Option<usize>,
    /// Panel doublings before the convergence test.
    #[arg(long, global = true)]
    refine: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a trajectory and write one record per sample.
    Simulate { scene: PathBuf },
    /// Check the homogeneity identities at seeded random states.
    Diagnose { scene: PathBuf },
    /// Worldsheet action, Cauchy-Binet and diffeomorphism checks.
    Brane { scene: PathBuf },
    /// Evaluate an observable across a parameter range.
    Sweep { scene: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Paper,
    CauchyBinet,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ov = Overrides {
        seed: cli.seed,
        out: cli.out,
        format: cli.format.map(|f| match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        }),
        normalization: cli.dng_normalization.map(|n| match n {
            NormArg::Paper => DngNormalization::Paper,
            NormArg::CauchyBinet => DngNormalization::CauchyBinet,
        }),
        quadrature_order: cli.quadrature_order,
        refine: cli.refine,
    };
    let (cmd, scene) = match cli.command {
        Cmd::Simulate { scene } => (Command::Simulate, scene),
        Cmd::Diagnose { scene } => (Command::Diagnose, scene),
        Cmd::Brane { scene } => (Command::Brane, scene),
        Cmd::Sweep { scene } => (Command::Sweep, scene),
    };
    let start = Instant::now();
    let code = execute(cmd, &scene, &ov);
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
