//! `twistflow` command-line tool.
//!
//! Exit codes: 0 success, 1 internal failure (including a failed `check`),
//! 2 usage error, 3 domain error or inadmissible orbit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "twistflow",
    version,
    about = "Oriented-line geometry and geodesics on twisting spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a quadratic section to the form eta = c i xi and print the certificate.
    Normalize(NormalizeArgs),
    /// Integrate a geodesic on the twisting sphere eta = c i xi.
    Geodesic(GeodesicArgs),
    /// Blow-up time, effective potential and series diagnostics.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Run the invariant suite and print a JSON report.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    beta1: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    beta2: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
    beta3: Vec<f64>,
    /// Write the certificate here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("initial").required(true).args(["xi", "polar", "from_integrals"]))]
struct GeodesicArgs {
    /// Twist of the sphere, > 0.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Initial point.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, requires = "xidot")]
    xi: Option<Vec<f64>>,
    /// Initial velocity.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, requires = "xi")]
    xidot: Option<Vec<f64>>,
    /// Initial state in polar form.
    #[arg(long, num_args = 4, value_names = ["R", "THETA", "RDOT", "THETADOT"], allow_negative_numbers = true)]
    polar: Option<Vec<f64>>,
    /// Start at radius R0 and angle THETA0 with the given first integrals.
    #[arg(long, num_args = 4, value_names = ["R0", "THETA0", "I1", "I2"], allow_negative_numbers = true)]
    from_integrals: Option<Vec<f64>>,
    /// With --from-integrals: start moving towards the pole.
    #[arg(long, requires = "from_integrals")]
    inward: bool,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Trajectory output (stdout if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// JSON summary output (stderr if absent; ignored with --format json).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Affine time for a radial geodesic to reach the equator.
    Blowup {
        #[arg(long = "I1")]
        i1: f64,
        #[arg(long, default_value_t = 0.0)]
        r_start: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// CSV of the effective potential U_eff(R).
    Potential {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        r_min: f64,
        #[arg(long, default_value_t = 0.95)]
        r_max: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Radii between which a geodesic with first integrals (I1, I2) oscillates.
    TurningPoints {
        #[arg(long = "I1", allow_negative_numbers = true)]
        i1: f64,
        #[arg(long = "I2", allow_negative_numbers = true)]
        i2: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// CSV comparing the hypergeometric series with quadrature.
    SeriesCheck {
        /// Radii to compare (default: 20 points up to 0.95).
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    trajectories: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2006)]
    seed: u64,
    /// Adds a constant to every I2 the suite evaluates.
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb_i2: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GEODESIC_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Normalize(args) => commands::normalize(&args),
        Command::Geodesic(args) => commands::geodesic(&args),
        Command::Analyze { what } => commands::analyze(&what),
        Command::Check(args) => commands::check(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twistflow: {e}");
            ExitCode::from(e.code())
        }
    }
}
