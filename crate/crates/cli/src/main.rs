//! `s1s2`: sweeps, solves and checks on S¹×S² from the command line.

mod params;
mod run;
mod verbs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(s1s2_core::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        use s1s2_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 5,
            CliError::Core(e) => match e {
                E::Resolution(_) | E::UnderResolvedTime { .. } => 3,
                E::NonContraction { .. } => 4,
                E::Io(_) => 5,
                _ => 2,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.code() {
            2 => "usage",
            3 => "resolution",
            4 => "non_contraction",
            _ => "io",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<s1s2_core::Error> for CliError {
    fn from(e: s1s2_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "s1s2", version, about = "Spectral sweeps and quintic NLS solves on S¹×S²")]
pub struct Cli {
    /// Parent directory of run directories.
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,
    /// Sweep seed (default 7).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true, env = "S1S2_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// List the modes of a dyadic block.
    Spectrum {
        #[arg(long = "N")]
        n: Option<u64>,
    },
    /// Lattice counts in random annulus sectors.
    Count {
        /// Comma-separated cube sides.
        #[arg(long = "N")]
        n: Option<String>,
        /// Comma-separated widths; default {1, ⌊√N⌋, N}.
        #[arg(long = "M")]
        m: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Count on all of ℤ² instead of n ≥ 0.
        #[arg(long)]
        raw: bool,
    },
    /// Exponential sums over random cubes.
    Expsum {
        #[arg(long = "N")]
        n: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        /// L^p_t L⁴_θ instead of L^p_{t,θ}.
        #[arg(long)]
        mixed: bool,
    },
    /// Exponential sums over annulus sectors.
    Sector {
        #[arg(long = "N")]
        n: Option<String>,
        #[arg(long = "M")]
        m: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Trilinear spectral cluster ratios on S².
    Cluster {
        #[arg(long)]
        n1: Option<String>,
        #[arg(long)]
        n2: Option<usize>,
        #[arg(long)]
        n3: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Trilinear sweep over dyadic triples with a δ̂ fit.
    Trilinear {
        /// Largest N₁.
        #[arg(long)]
        n1: Option<u64>,
        /// Largest N₂.
        #[arg(long)]
        n2: Option<u64>,
        /// Largest N₃.
        #[arg(long)]
        n3: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        starts: Option<usize>,
        /// `localized` or `full`.
        #[arg(long)]
        family: Option<String>,
    },
    /// L⁶ block bound.
    L6 {
        #[arg(long = "N")]
        n: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        family: Option<String>,
    },
    /// Off-diagonal trilinear constant at fixed N₂, N₃.
    Offdiag {
        #[arg(long)]
        n1: Option<String>,
        #[arg(long)]
        n2: Option<u64>,
        #[arg(long)]
        n3: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// 2-variation of the interaction profile of a Picard solution.
    V2 {
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Picard solve of the quintic equation.
    Solve {
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Strang split-step solve.
    Splitstep {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Fifth differential of the flow map against its Duhamel formula.
    D5check {
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated ε values; the last two are extrapolated.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Polarization identity and the δ = 0 constant.
    Polarize {
        #[arg(long)]
        n1: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    /// Coordinate-ascent iterations (0 disables).
    #[arg(long)]
    pub ascent: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// ‖u₀‖_{H¹} of the Gaussian initial datum.
    #[arg(long)]
    pub amp: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// +1 defocusing, -1 focusing.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    /// Truncation |m| ≤ m_max.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Truncation n ≤ n_max.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::execute(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.code())
        }
    }
}
