use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

mod commands;

use commands::Outcome;

/// Fuchsian systems: validation, Galois generators, monodromy, theorem
/// verification, inverse monodromy and exact equivalence conversions.
#[derive(Debug, Parser)]
#[command(name = "fuchsia", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the JSON report to this path (`-` for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System JSON file.
    pub file: PathBuf,

    /// Tolerance on the residue-sum defect when loading the system.
    #[arg(long, default_value_t = 1e-9)]
    pub sum_tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a system; report eigenvalues, resonances and Levelt exponents.
    Check {
        /// System JSON file.
        file: PathBuf,
        /// Tolerance on the residue-sum defect.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = fuchsia::system::DEFAULT_RESONANCE_TOL)]
        resonance_tol: f64,
    },
    /// Galois group generators exp(2 pi i B_j).
    Galois {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Monodromy matrices along the standard loops.
    Monodromy {
        #[command(flatten)]
        system: SystemArgs,
        /// Integration tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Base point, e.g. "3+0.5i".
        #[arg(long, value_parser = parse_base, allow_hyphen_values = true)]
        base: Option<Complex64>,
    },
    /// Check that each monodromy matrix is conjugate to its Galois generator.
    Verify {
        #[command(flatten)]
        system: SystemArgs,
        /// Verification tolerance (spectra, Jordan structure, conjugator residual).
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Integration tolerance.
        #[arg(long, default_value_t = 1e-9)]
        integration_tol: f64,
        #[arg(long, default_value_t = fuchsia::system::DEFAULT_RESONANCE_TOL)]
        resonance_tol: f64,
        #[arg(long, value_parser = parse_base, allow_hyphen_values = true)]
        base: Option<Complex64>,
    },
    /// Recover residues from target monodromy (instance file or monodromy report).
    Invert {
        file: PathBuf,
        /// Target residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Bound on ||M_j - I|| for the targets.
        #[arg(long, default_value_t = fuchsia::inverse::DEFAULT_PROXIMITY)]
        proximity: f64,
        /// Skip the proximity check (targets far from I are unsupported).
        #[arg(long)]
        no_proximity: bool,
        /// Tolerance on the ordered product of the targets.
        #[arg(long, default_value_t = fuchsia::inverse::DEFAULT_PRODUCT_TOL)]
        product_tol: f64,
    },
    /// Convert between scalar equations, matrix systems and differential modules.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        from: Form,
        #[arg(long, value_enum)]
        to: Form,
        /// Basis change (matrix file) applied when producing a matrix.
        #[arg(long, value_name = "FILE")]
        basis: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Scalar,
    Matrix,
    Module,
}

fn parse_base(s: &str) -> Result<Complex64, String> {
    fuchsia::io::parse_complex_literal(s).ok_or_else(|| format!("not a complex number: {s:?}"))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Check {
            file,
            tol,
            resonance_tol,
        } => commands::check(file, *tol, *resonance_tol),
        Command::Galois { system } => commands::galois(system),
        Command::Monodromy { system, tol, base } => commands::monodromy(system, *tol, *base),
        Command::Verify {
            system,
            tol,
            integration_tol,
            resonance_tol,
            base,
        } => commands::verify(system, *tol, *integration_tol, *resonance_tol, *base),
        Command::Invert {
            file,
            tol,
            max_iter,
            proximity,
            no_proximity,
            product_tol,
        } => {
            let proximity = (!no_proximity).then_some(*proximity);
            commands::invert(file, *tol, *max_iter, proximity, *product_tol)
        }
        Command::Convert {
            file,
            from,
            to,
            basis,
        } => commands::convert(file, *from, *to, basis.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    if !cli.quiet && !outcome.text.is_empty() {
        print!("{}", outcome.text);
    }
    if let Some(payload) = &outcome.json {
        let written = match cli.json.as_deref() {
            Some(p) if p.as_os_str() == "-" => {
                print!("{payload}");
                Ok(())
            }
            Some(p) => {
                std::fs::write(p, payload).map_err(|e| format!("cannot write {}: {e}", p.display()))
            }
            // conversions have no human summary; the payload is the output
            None if outcome.payload_is_output => {
                print!("{payload}");
                Ok(())
            }
            None => Ok(()),
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(commands::EXIT_INPUT);
        }
    }
    ExitCode::from(outcome.code)
}
