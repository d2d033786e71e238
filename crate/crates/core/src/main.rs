use clap::Parser;

fn main() {
    let cli = floatwake::cli::Cli::parse();
    match floatwake::cli::run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
