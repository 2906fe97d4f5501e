use std::process::ExitCode;

use twophoton::CliError;

fn main() -> ExitCode {
    match twophoton::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("twophoton: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
