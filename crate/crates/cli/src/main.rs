use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use impasm_cli::commands::{self, DensityStrategy};
use impasm_cli::{CliError, LoadOptions, Report, Workspace};

/// Checks finite implicative algebras, assemblies and their completions.
///
/// Exit status: 0 pass, 1 fail or undecided, 2 usage or input error.
#[derive(Parser, Debug)]
#[command(name = "impasm", version)]
struct Cli {
    /// Workspace file; repeat to load several into one namespace.
    #[arg(short, long = "workspace", required = true)]
    workspace: Vec<PathBuf>,
    /// Load objects without checking their axioms.
    #[arg(long, global = true)]
    no_validate: bool,
    /// Algebra for commands that need one, when the workspace has several.
    #[arg(long, global = true)]
    algebra: Option<String>,
    /// Also write the report as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate every object.
    Check,
    /// Print the workspace in canonical form.
    Fmt,
    /// Interpret a term (a term section name or literal text).
    Interp {
        #[arg(short, long)]
        term: String,
        /// Free variable bindings, `NAME=ELEMENT`.
        #[arg(long = "let", value_name = "NAME=ELEMENT")]
        bindings: Vec<String>,
    },
    /// Best tracking witness of a morphism.
    Tracked {
        #[arg(short = 'f', long = "morphism")]
        morphism: String,
    },
    /// Image factorization of a morphism.
    Image {
        #[arg(short = 'f', long = "morphism")]
        morphism: String,
    },
    /// Terminal object, products, pullbacks and equalizers.
    Limits,
    /// Density of a subset.
    Density {
        #[arg(short = 'M', long = "subset")]
        subset: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        /// A valuation to test, `s: m ...; s: m ...`.
        #[arg(long = "with", value_name = "VALUATION")]
        with: Option<String>,
    },
    /// Compactness of a subset up to a carrier bound.
    Compactness {
        #[arg(short = 'M', long = "subset")]
        subset: String,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Algebraic, dense and compact.
    Generator {
        #[arg(short = 'M', long = "subset")]
        subset: String,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Bounded check that the regular completion of Asm_M is Asm.
    Reglex {
        #[arg(short = 'M', long = "subset")]
        subset: String,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Homotopy and composition on the workspace groupoids.
    Exlex,
    /// The functor into implicative sets on the workspace groupoids,
    /// relations and implicative sets.
    Kcheck {
        /// Subset used for the comparison relations; the separator by default.
        #[arg(short = 'M', long = "subset")]
        subset: Option<String>,
    },
    /// Run every applicable check.
    Report {
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    Auto,
    Canonical,
    Exhaustive,
}

fn run(cli: &Cli) -> Result<Option<Report>, CliError> {
    let ws = Workspace::load(&cli.workspace, LoadOptions { validate: !cli.no_validate })?;
    let alg = cli.algebra.as_deref();
    let report = match &cli.command {
        Command::Check => commands::check(&ws),
        Command::Fmt => {
            print!("{}", ws.emit());
            return Ok(None);
        }
        Command::Interp { term, bindings } => commands::interp_term(&ws, alg, term, bindings)?,
        Command::Tracked { morphism } => commands::tracked(&ws, morphism)?,
        Command::Image { morphism } => commands::image(&ws, morphism)?,
        Command::Limits => commands::limits(&ws, alg)?,
        Command::Density { subset, strategy, with } => {
            let s = match strategy {
                StrategyArg::Auto => DensityStrategy::Auto,
                StrategyArg::Canonical => DensityStrategy::Canonical,
                StrategyArg::Exhaustive => DensityStrategy::Exhaustive,
            };
            commands::density(&ws, subset, s, with.as_deref())?
        }
        Command::Compactness { subset, bound } => commands::compactness(&ws, subset, *bound)?,
        Command::Generator { subset, bound } => commands::generator(&ws, subset, *bound)?,
        Command::Reglex { subset, bound } => commands::reglex(&ws, subset, *bound)?,
        Command::Exlex => commands::exlex(&ws)?,
        Command::Kcheck { subset } => commands::kcheck(&ws, subset.as_deref())?,
        Command::Report { bound } => commands::report_all(&ws, *bound)?,
    };
    if let Some(path) = &cli.json {
        std::fs::write(path, report.to_json()? + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{report}");
            ExitCode::from(report.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
