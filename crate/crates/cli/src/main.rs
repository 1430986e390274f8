use clap::error::ErrorKind;
use clap::Parser;

use qsearch_cli::{exitcode, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => exitcode::USAGE,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match qsearch_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.code());
        }
    }
}
