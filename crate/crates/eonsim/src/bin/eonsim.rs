use clap::Parser;
use eonsim::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
