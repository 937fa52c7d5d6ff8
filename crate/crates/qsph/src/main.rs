use clap::Parser;

fn main() {
    let cli = qsph::Cli::parse();
    match qsph::run(&cli) {
        Ok(summary) => println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes")),
        Err(e) => {
            eprintln!("qsph {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
