use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hochc::engine::Budget;
use hochc::frontend::{run, Command, Format, EXIT_ERROR};
use hochc::model::DEFAULT_CELL_BUDGET;

#[derive(Parser)]
#[command(name = "hochc", version, about = "Higher-order constrained Horn clauses modulo LIA")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Saturate with the resolution engine; prints the refutation on unsat.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 5_000)]
        max_clauses: usize,
        /// Also print the clauses the engine started from.
        #[arg(long)]
        trace: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the decision procedure for the problem's fragment.
    Decide {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
        cell_budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the first-order translation.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Fmt::Native)]
        format: Fmt,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replace λ-abstractions by fresh relation symbols.
    Lift {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Type-check and print the foreground signature.
    Typecheck { file: PathBuf },
    /// Print the canonical structure over each structure of a finite theory.
    Model {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
        cell_budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Native,
    Smtlib,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (file, output, command) = match cli.command {
        Cmd::Check {
            file,
            max_steps,
            max_clauses,
            trace,
            output,
        } => {
            let budget = Budget {
                max_steps,
                max_clauses,
                ..Budget::default()
            };
            (file, output, Command::Check { budget, trace })
        }
        Cmd::Decide {
            file,
            cell_budget,
            output,
        } => (file, output, Command::Decide { cell_budget }),
        Cmd::Translate {
            file,
            format,
            output,
        } => {
            let format = match format {
                Fmt::Native => Format::Native,
                Fmt::Smtlib => Format::Smtlib,
            };
            (file, output, Command::Translate { format })
        }
        Cmd::Lift { file, output } => (file, output, Command::Lift),
        Cmd::Typecheck { file } => (file, None, Command::Typecheck),
        Cmd::Model {
            file,
            cell_budget,
            output,
        } => (file, output, Command::Model { cell_budget }),
    };

    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let out = run(command, &text);
    eprint!("{}", out.stderr);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &out.stdout) {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
        None => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
        }
    }
    ExitCode::from(out.exit as u8)
}
