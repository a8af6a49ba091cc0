use std::process::ExitCode;

use clap::Parser;
use shellspec_cli::commands::{run, Cli};
use shellspec_cli::{configure_threads, exit_code_for, read_config};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(std::env::var("SHELLSPEC_THREADS").ok().as_deref())
        .and_then(|_| cli.config.as_deref().map(read_config).transpose())
        .and_then(|config| run(cli.command, config.as_ref()));
    let code = match result {
        Ok(outcome) => match outcome.write_artifacts() {
            Ok(()) => {
                print!("{}", outcome.summary);
                outcome.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                shellspec_cli::EXIT_ERROR
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
