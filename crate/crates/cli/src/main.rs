use clap::Parser;

fn main() {
    let cli = cnls_cli::Cli::parse();
    if let Err(e) = cnls_cli::execute(cli) {
        eprintln!("cnls: {e}");
        std::process::exit(e.exit_code());
    }
}
