use clap::Parser;

use melnikov_cert::cli;

fn main() {
    let args = cli::Cli::parse();
    if let Err(e) = cli::run(&args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
