use clap::Parser;
use thermobeam::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
