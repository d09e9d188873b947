use std::process::ExitCode;

use billiards_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    execute(Cli::parse())
}
