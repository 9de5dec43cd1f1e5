use clap::Parser;

fn main() {
    let cli = bass_cli::Cli::parse();
    if let Err(e) = bass_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
