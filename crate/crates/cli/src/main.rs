use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cics_cli::Cli::parse();
    match cics_cli::run(&cli.command) {
        Ok(text) => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
