//! `viewcheck`: check, run, erase and trace `.vats` programs.
//!
//! Exit codes: 0 success, 1 type error, 2 I/O or parse error, 3 stuck,
//! 4 fuel exhausted.

mod driver;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "viewcheck",
    version,
    about = "Checker and interpreter for stateful views"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check one or more files.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Check up to N files at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        flags: CheckFlags,
    },
    /// Check a file, then evaluate its main expression.
    Run {
        path: PathBuf,
        #[command(flatten)]
        flags: CheckFlags,
        #[command(flatten)]
        eval: EvalFlags,
        /// Print the final store as sorted `l_n = value` lines.
        #[arg(long)]
        dump_store: bool,
    },
    /// Check a file and print its erasure.
    Erase {
        path: PathBuf,
        #[command(flatten)]
        flags: CheckFlags,
    },
    /// Evaluate main, logging every reduction step.
    Trace {
        path: PathBuf,
        #[command(flatten)]
        flags: CheckFlags,
        #[command(flatten)]
        eval: EvalFlags,
        /// Run the state oracles every N steps (implies --instrumented).
        #[arg(long, value_name = "N")]
        check_every: Option<u64>,
    },
}

#[derive(Args, Clone, Copy, Debug, Default)]
pub struct CheckFlags {
    /// Emit diagnostics as JSON, one document per file.
    #[arg(long)]
    pub json: bool,
    /// Print every solver query the checker made.
    #[arg(long)]
    pub explain_constraints: bool,
    /// Print the view assigned to each proof term.
    #[arg(long)]
    pub trace_proofs: bool,
}

#[derive(Args, Clone, Copy, Debug)]
pub struct EvalFlags {
    /// Maximum number of reduction steps.
    #[arg(long, default_value_t = 1_000_000)]
    pub fuel: u64,
    /// Keep proofs at runtime instead of running the erased program.
    #[arg(long)]
    pub instrumented: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Check { paths, jobs, flags } => driver::check(&paths, jobs, flags),
        Cmd::Run {
            path,
            flags,
            eval,
            dump_store,
        } => driver::run(&path, flags, eval, dump_store),
        Cmd::Erase { path, flags } => driver::erase(&path, flags),
        Cmd::Trace {
            path,
            flags,
            eval,
            check_every,
        } => driver::trace(&path, flags, eval, check_every),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
