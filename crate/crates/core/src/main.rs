use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = hallq::cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match hallq::cli::run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
