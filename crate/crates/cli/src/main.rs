mod args;
mod output;
mod run;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::run::{CliError, EXIT_VALIDATION};

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run::run(cli) {
            Ok(()) => 0,
            Err(e) => {
                e.emit();
                e.exit_code
            }
        },
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            0
        }
        Err(e) => {
            let mut record = CliError::validation(e.render().to_string().trim_end());
            record.error = "usage".into();
            record.emit();
            EXIT_VALIDATION
        }
    };
    std::process::exit(code);
}
