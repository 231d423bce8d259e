use clap::Parser;
use graphbank::cli::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(graphbank::commands::run(&cli.command));
}
