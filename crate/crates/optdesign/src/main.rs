use clap::Parser;

fn main() {
    let cli = optdesign::cli::Cli::parse();
    std::process::exit(optdesign::cli::main(cli));
}
