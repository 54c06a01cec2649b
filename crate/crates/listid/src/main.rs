use clap::Parser;

fn main() {
    let cli = listid::cli::Cli::parse();
    let result = listid::cli::run(cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    std::process::exit(listid::cli::exit_code(&result));
}
