use clap::Parser;

use tractability::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("tractability: {e}");
        std::process::exit(e.exit_code());
    }
}
