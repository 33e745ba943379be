use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use dymforge_cli::{config::Cli, run};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) => {
            let _ = std::io::stdout().write_all(o.output.as_bytes());
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("dymforge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
