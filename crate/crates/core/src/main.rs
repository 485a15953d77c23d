use clap::error::ErrorKind;
use clap::Parser;
use warpcmc::cli::{run, Cli, EXIT_BAD_INPUT};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WARPCMC_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_BAD_INPUT,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}
