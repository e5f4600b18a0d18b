use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wetting::cli::{self, CliError, CliResult, FamilySpec, ModelChoice, Table};
use wetting::mcwalk::Boundary;

/// Transfer-matrix solver for SOS wetting with inverse-square tails.
///
/// Families are written `name:p1,p2[,p3]`: `hyper:a,s`, `invsq:w`,
/// `bessel:x0,d`, `homographic:x0,d`, `head:b1,b2[,w]`.
#[derive(Debug, Parser)]
#[command(name = "wetting", version)]
struct Args {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true, env = cli::THREADS_ENV)]
    threads: Option<usize>,

    /// Write CSV here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Bridge,
    Free,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Phase point at one contact weight.
    Solve {
        #[arg(long)]
        family: String,
        #[arg(long)]
        b0: f64,
    },
    /// Critical line u_c(w) of the hypergeometric family at fixed a.
    CriticalLine {
        #[arg(long, default_value_t = 0.97)]
        a: f64,
        /// Values of w as a list or lo:hi:n.
        #[arg(long, default_value = "-1.5:0.125:23")]
        w_grid: String,
    },
    /// Iso-w lines m(u) and the transition boundary.
    PhaseDiagram {
        #[arg(long, default_value_t = 0.97)]
        a: f64,
        /// Comma-separated w values, each <= 1/8.
        #[arg(long, default_value = "-1.5,-1,-0.375,-0.1,0,0.1", allow_hyphen_values = true)]
        w: String,
        /// Values of u = -ln b0 as a list or lo:hi:n.
        #[arg(long, default_value = "0:3:31")]
        u_grid: String,
    },
    /// Divergence exponent θ and the law of m near b0c.
    Exponent {
        #[arg(long)]
        family: String,
        /// auto, transfer or closed.
        #[arg(long, default_value = "auto")]
        model: ModelChoice,
        /// Geometric eps grid hi:lo:n.
        #[arg(long, default_value = "1e-6:1e-8:7")]
        eps_grid: String,
        /// Geometric grid of b0c - b0 as hi:lo:n.
        #[arg(long, default_value = "1e-4:1e-6:7")]
        gap_grid: String,
    },
    /// Three-zone comparison of w(1 + eps).
    Profile {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "1e-4,1e-5,1e-6")]
        eps: String,
    },
    /// Monte Carlo run of the localized walk.
    Simulate {
        #[arg(long, default_value = "hyper:1,1")]
        family: String,
        #[arg(long, default_value_t = 0.2)]
        b0: f64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
    },
    /// Exact enumeration of short paths.
    Enumerate {
        #[arg(long)]
        family: String,
        #[arg(long)]
        b0: f64,
        /// Comma-separated path lengths.
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value = "bridge")]
        boundary: BoundaryArg,
    },
}

fn lengths(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Usage(format!("--n: {p:?} is not a length"))))
        .collect()
}

fn run(command: Command) -> CliResult<Table> {
    match command {
        Command::Solve { family, b0 } => cli::cmd_solve(&FamilySpec::parse(&family)?, b0),
        Command::CriticalLine { a, w_grid } => cli::cmd_critical_line(a, &cli::parse_grid("--w-grid", &w_grid)?),
        Command::PhaseDiagram { a, w, u_grid } => {
            cli::cmd_phase_diagram(a, &cli::parse_list("--w", &w)?, &cli::parse_grid("--u-grid", &u_grid)?)
        }
        Command::Exponent { family, model, eps_grid, gap_grid } => cli::cmd_exponent(
            &FamilySpec::parse(&family)?,
            model,
            &cli::parse_log_grid("--eps-grid", &eps_grid)?,
            &cli::parse_log_grid("--gap-grid", &gap_grid)?,
        ),
        Command::Profile { family, eps } => cli::cmd_profile(&FamilySpec::parse(&family)?, &cli::parse_list("--eps", &eps)?),
        Command::Simulate { family, b0, steps, seed, replicas } => {
            cli::cmd_simulate(&FamilySpec::parse(&family)?, b0, steps, seed, replicas)
        }
        Command::Enumerate { family, b0, n, boundary } => {
            let boundary = match boundary {
                BoundaryArg::Bridge => Boundary::Bridge,
                BoundaryArg::Free => Boundary::Free,
            };
            cli::cmd_enumerate(&FamilySpec::parse(&family)?, b0, &lengths(&n)?, boundary)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = cli::with_threads(args.threads, || run(args.command)).and_then(|r| r).and_then(|t| t.to_csv());
    let written = result.and_then(|csv| match &args.output {
        Some(path) => std::fs::write(path, csv).map_err(CliError::from),
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(CliError::from),
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wetting: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
