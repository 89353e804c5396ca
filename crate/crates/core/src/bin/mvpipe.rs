use clap::Parser;

fn main() {
    let cli = mvpipe::cli::Cli::parse();
    if let Err(e) = mvpipe::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
