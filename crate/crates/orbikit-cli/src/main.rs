//! `orbikit` — exact optimization over packing/partitioning orbitopes,
//! formulation emission in LP/MPS/JSON form, lifting and separation with
//! rational certificates, and a self-verification harness.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input,
//! 3 invalid parameters, 4 size cap exceeded, 5 I/O error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbikit::formulations::{compact_system, extended_system};
use orbikit::linsys::LinearSystem;
use orbikit::sci::sci_system;
use orbikit::{optimize_packing, optimize_partitioning, Error, Kind, Params};
use orbikit_cli::{json, verify};

/// Ceiling on enumerated rows (or cut inequalities) unless overridden by
/// `--cap` or the `ORBIKIT_CAP` environment variable.
const DEFAULT_CAP: usize = 1_000_000;

#[derive(Parser)]
#[command(name = "orbikit", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Matrix shape, shared by every subcommand and validated before dispatch.
#[derive(Args)]
struct Shape {
    /// Number of rows p (requires p >= q).
    #[arg(long)]
    p: u32,
    /// Number of columns q (requires q >= 1).
    #[arg(long)]
    q: u32,
}

impl Shape {
    fn params(&self) -> Result<Params, Error> {
        Params::new(self.p, self.q)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// At most one 1 per row.
    Packing,
    /// Exactly one 1 per row.
    Partitioning,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Packing => Kind::Packing,
            KindArg::Partitioning => Kind::Partitioning,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Lp,
    Mps,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    /// Flow formulation in (x, y) space.
    Extended,
    /// Accumulated formulation in (z, w) space.
    Compact,
    /// Shifted-column cut description in x space.
    Sci,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximize a linear objective over the orbitope, exactly.
    Optimize {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = KindArg::Packing)]
        kind: KindArg,
        /// Objective as JSON {"entries":[{"i":..,"j":..,"v":"num"}]}; missing
        /// cells are zero, a missing file is the zero objective.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Output file (default: standard output).
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Write a formulation as a solver file; row/column stats go to stderr.
    Emit {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = KindArg::Packing)]
        kind: KindArg,
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Lp)]
        format: FormatArg,
        /// Maximum row count to enumerate (default 1000000; also settable
        /// via ORBIKIT_CAP).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Lift a point with row sums at most one to its canonical flow.
    Lift {
        #[command(flatten)]
        shape: Shape,
        /// Point in the matrix JSON format {"p":..,"q":..,"entries":[..]}.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Find a most-violated shifted-column inequality, if any.
    Separate {
        #[command(flatten)]
        shape: Shape,
        /// Point in the matrix JSON format {"p":..,"q":..,"entries":[..]}.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Run the self-verification suites and emit a JSON report.
    Verify {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = verify::SuiteArg::All)]
        suite: verify::SuiteArg,
        /// Seed for the ChaCha8 generator behind every randomized check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Print the size statistics of a formulation as JSON.
    Stats {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = KindArg::Packing)]
        kind: KindArg,
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
}

fn effective_cap(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var("ORBIKIT_CAP") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("ORBIKIT_CAP must be an integer, got {s:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_CAP),
        Err(e) => Err(Error::Parse(e.to_string())),
    }
}

fn build_system(
    params: Params,
    kind: Kind,
    system: SystemArg,
    cap: usize,
) -> Result<LinearSystem, Error> {
    match system {
        SystemArg::Sci => sci_system(params, kind, Some(cap)),
        SystemArg::Extended | SystemArg::Compact => {
            // Both polynomial systems have a handful of rows per cell, so a
            // cell-count pre-check avoids building absurd instances only to
            // reject them.
            if params.cell_count() > cap {
                return Err(Error::SizeCap(format!(
                    "{} cells exceed the cap of {cap}",
                    params.cell_count()
                )));
            }
            let sys = if system == SystemArg::Extended {
                extended_system(params, kind)
            } else {
                compact_system(params, kind)
            };
            let rows = sys.stats().rows;
            if rows > cap {
                return Err(Error::SizeCap(format!(
                    "{rows} rows exceed the cap of {cap}"
                )));
            }
            Ok(sys)
        }
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Optimize {
            shape,
            kind,
            input,
            output,
        } => {
            let params = shape.params()?;
            let d = json::read_objective(params, input.as_deref())?;
            let res = match kind.into() {
                Kind::Packing => optimize_packing(&d),
                Kind::Partitioning => optimize_partitioning(&d),
            };
            write_out(output.as_ref(), &(res.to_json() + "\n"))?;
            Ok(0)
        }
        Cmd::Emit {
            shape,
            kind,
            system,
            format,
            cap,
            output,
        } => {
            let params = shape.params()?;
            let sys = build_system(params, kind.into(), system, effective_cap(cap)?)?;
            let stats = sys.stats();
            let text = match format {
                FormatArg::Lp => sys.to_lp_string(),
                FormatArg::Mps => sys.to_mps_string(),
                FormatArg::Json => json::system_to_json(&sys),
            };
            write_out(output.as_ref(), &text)?;
            eprintln!(
                "vars={} cons={} nnz={}",
                stats.vars, stats.rows, stats.nonzeros
            );
            Ok(0)
        }
        Cmd::Lift {
            shape,
            input,
            output,
        } => {
            let params = shape.params()?;
            let x = json::read_matrix(params, &input)?;
            let y = orbikit::lifting::lift(&x)?;
            write_out(output.as_ref(), &json::lift_to_json(&x, &y))?;
            Ok(0)
        }
        Cmd::Separate {
            shape,
            input,
            output,
        } => {
            let params = shape.params()?;
            let x = json::read_matrix(params, &input)?;
            let cut = orbikit::sci::separate(&x)?;
            match &cut {
                Some(sci) => eprintln!("violated cut with bar at {}", sci.bar),
                None => eprintln!("no violated shifted-column inequality"),
            }
            write_out(output.as_ref(), &json::separation_to_json(cut.as_ref()))?;
            Ok(0)
        }
        Cmd::Verify {
            shape,
            suite,
            seed,
            output,
        } => {
            let params = shape.params()?;
            let report = verify::run(params, suite, seed)?;
            let ok = report.ok;
            let text = serde_json::to_string_pretty(&report)
                .expect("report serialization cannot fail")
                + "\n";
            write_out(output.as_ref(), &text)?;
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Stats {
            shape,
            kind,
            system,
            cap,
            output,
        } => {
            let params = shape.params()?;
            let sys = build_system(params, kind.into(), system, effective_cap(cap)?)?;
            let text = serde_json::to_string_pretty(&sys.stats())
                .expect("stats serialization cannot fail")
                + "\n";
            write_out(output.as_ref(), &text)?;
            Ok(0)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParams(_) => 3,
        Error::InvalidInput(_) | Error::Parse(_) | Error::Infeasible | Error::Unbounded => 2,
        Error::SizeCap(_) => 4,
        Error::Io(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
