//! Library backing the `qsearch` binary: argument types, exit-code policy,
//! rendering, and one module per subcommand.

pub mod args;
pub mod commands;
pub mod exitcode;
pub mod output;

pub use args::{Cli, Command};
pub use exitcode::CliError;

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Grover(args) => commands::grover::run(&args),
        Command::Vsearch(args) => commands::vsearch::run(&args),
        Command::Sweep(args) => commands::sweep::run(&args),
        Command::Bounds(args) => commands::bounds::run(&args),
        Command::Adjudicate(args) => commands::adjudicate::run(&args),
    }
}
