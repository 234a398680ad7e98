use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use sortnet_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, &mut out) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            1
        }
    };
    ExitCode::from(code as u8)
}
