use clap::Parser;

fn main() {
    std::process::exit(cpz_sim::run(cpz_sim::Cli::parse()));
}
