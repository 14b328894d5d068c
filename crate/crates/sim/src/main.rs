use std::process::ExitCode;

use clap::Parser;
use pneutouch_sim::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
