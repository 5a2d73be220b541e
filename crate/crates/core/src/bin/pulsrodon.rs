use clap::Parser;

fn main() {
    let cli = pulsrodon::cli::Cli::parse();
    std::process::exit(pulsrodon::cli::run(&cli));
}
