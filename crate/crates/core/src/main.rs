use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use cyclosched::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = cli::run(&args, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
