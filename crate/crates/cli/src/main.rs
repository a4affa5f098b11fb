use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "disentangle",
    version,
    about = "Local disentangling machines for two-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form output, conditions and PPT verdict for one input and machine pair.
    Check(CheckArgs),
    /// η_max against λ² for identical machines on both qubits.
    Figure1(Figure1Args),
    /// η_y,max against η_x for each (λx, λy) pair.
    Figure2(Figure2Args),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(clap::Args, Debug)]
pub struct CheckArgs {
    /// Larger Schmidt coefficient source; β = sqrt(1 − α²).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_y: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_y: f64,
    /// PPT tolerance on the smallest partial-transpose eigenvalue.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(clap::Args, Debug)]
pub struct ScanArgs {
    /// Points of the αβ grid used for the worst-case test.
    #[arg(long, default_value_t = disentangle_core::frontier::DEFAULT_GRID_POINTS)]
    pub s_points: usize,
    /// Bisection tolerance on η.
    #[arg(long, default_value_t = disentangle_core::frontier::DEFAULT_BISECTION_TOL)]
    pub tol: f64,
    /// Output file; defaults to a fixed name inside --out-dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "DISENTANGLE_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct Figure1Args {
    /// Number of evenly spaced λ² values on [0, 1].
    #[arg(long, default_value_t = 21)]
    pub grid_size: usize,
    #[command(flatten)]
    pub scan: ScanArgs,
}

#[derive(clap::Args, Debug)]
pub struct Figure2Args {
    /// Semicolon-separated `λx,λy` pairs.
    #[arg(
        long,
        default_value = "0,0;0.2,-0.2;0.5,-0.5;0.9,0.1",
        allow_hyphen_values = true
    )]
    pub pairs: String,
    /// Comma-separated η_x values.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
    pub eta_x_grid: String,
    #[command(flatten)]
    pub scan: ScanArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SuiteArg {
    Quick,
    Full,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => commands::check(&a),
        Command::Figure1(a) => commands::figure1(&a),
        Command::Figure2(a) => commands::figure2(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    use disentangle_core::Error as Core;
    match e {
        CliError::Inconsistent(_) => 1,
        CliError::Usage(_) => 2,
        CliError::Core(
            Core::Domain(_) | Core::InfeasibleMachine { .. } | Core::Normalization { .. },
        ) => 2,
        CliError::Core(_) => 1,
        CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 3,
    }
}
