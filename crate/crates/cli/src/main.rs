//! `orbimirror`: command-line front end for fans, mirror maps, superpotentials, open invariants
//! and open CRC checks.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{emit, CliError, Format};

#[derive(Debug, Parser)]
#[command(name = "orbimirror", version, about = "Mirror-symmetry computations for compact toric orbifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Fan JSON file: {"dim", "stacky_vectors", "max_cones", "labels"?}.
    pub fan: PathBuf,
    /// Weighted truncation degree of every series.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    /// Gauge cone as comma-separated ray indices; defaults to the lexicographically first maximal cone.
    #[arg(long)]
    pub gauge: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChartArg {
    Original,
    Adapted,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Fan JSON of the crepant resolution.
    #[arg(long)]
    pub resolution: PathBuf,
    /// Use the P(1,…,1,n) continuation for this n.
    #[arg(long)]
    pub wpn: Option<u32>,
    #[arg(long, default_value_t = 24)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the fan is complete and simplicial.
    Validate(Common),
    /// List the nonzero Box elements with their cones and ages.
    Box(Common),
    /// Gorenstein test and wall curve classes with their c1 values.
    Check(Common),
    /// Effective extended classes through the order.
    Keff(Common),
    /// Hori–Vafa superpotential.
    HoriVafa {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ChartArg::Adapted)]
        chart: ChartArg,
    },
    /// Mirror map and its inverse.
    MirrorMap(Common),
    /// Lagrangian Floer superpotential W^LF(q, τ).
    Superpotential(Common),
    /// Open Gromov–Witten invariants read off W^LF.
    OpenGw(Common),
    /// Compactification X̄ for a basic disc class, with the open/closed cross-check when available.
    Xbar {
        #[command(flatten)]
        common: Common,
        /// Basic class: "ray:J" or "box:K" (0-based); defaults to the first Box element, else ray 0.
        #[arg(long)]
        beta: Option<String>,
    },
    /// Crepant-resolution check, chart gluing and the open CRC comparison.
    Crc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Specialization τ_tw = 0 and vanishing of the exceptional terms.
    Specialize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("ORBIMIRROR_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Input(format!("ORBIMIRROR_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Input("ORBIMIRROR_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (common, out) = match &cli.command {
        Command::Validate(c) => (c, commands::validate(c)?),
        Command::Box(c) => (c, commands::box_elements(c)?),
        Command::Check(c) => (c, commands::check(c)?),
        Command::Keff(c) => (c, commands::keff(c)?),
        Command::HoriVafa { common, chart } => (common, commands::hori_vafa(common, *chart)?),
        Command::MirrorMap(c) => (c, commands::mirror_map(c)?),
        Command::Superpotential(c) => (c, commands::superpotential(c)?),
        Command::OpenGw(c) => (c, commands::open_gw(c)?),
        Command::Xbar { common, beta } => (common, commands::xbar(common, beta.as_deref())?),
        Command::Crc { common, pair } => (common, commands::crc(common, pair)?),
        Command::Specialize { common, pair } => (common, commands::specialize(common, pair)?),
    };
    emit(&out, common.format, common.out.as_deref())?;
    Ok(out.verified)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
