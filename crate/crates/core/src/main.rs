use clap::Parser;

fn main() {
    let cli = qnnent::cli::Cli::parse();
    std::process::exit(qnnent::cli::run(cli));
}
