use std::process::ExitCode;

use clap::Parser;
use noncolliding::commands::{run, Command};

#[derive(Debug, Parser)]
#[command(name = "noncolliding", version, about = "Correlation kernels of noncolliding diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
