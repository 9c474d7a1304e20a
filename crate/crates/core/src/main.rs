use std::path::PathBuf;
use std::process::exit;

use bigm::cli::{self, Flags, Output, EXIT_ERROR};
use clap::{Parser, Subcommand};

/// Integer models with reified congruence constraints.
#[derive(Parser)]
#[command(name = "bigm", version)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Search progress on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Largest search space the exhaustive commands will walk.
    #[arg(long, global = true, default_value_t = bigm::DEFAULT_GUARD)]
    guard: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize with branch and bound.
    Solve { model: PathBuf },
    /// Check an assignment file against a model.
    Check { model: PathBuf, assignment: PathBuf },
    /// List every feasible assignment.
    Enumerate {
        model: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Exhaustive box scan, independent of the solver.
    Oracle { model: PathBuf },
    /// Write the model in LP format.
    Encode {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            exit(code);
        }
    };
    let mut flags = Flags {
        json: args.json,
        verbose: args.verbose,
        guard: args.guard,
        limit: None,
    };
    let out: Output = match &args.command {
        Command::Solve { model } => cli::cmd_solve(model, &flags),
        Command::Check { model, assignment } => cli::cmd_check(model, assignment, &flags),
        Command::Enumerate { model, limit } => {
            flags.limit = *limit;
            cli::cmd_enumerate(model, &flags)
        }
        Command::Oracle { model } => cli::cmd_oracle(model, &flags),
        Command::Encode { model, output } => cli::cmd_encode(model, output.as_deref()),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    exit(out.code);
}
