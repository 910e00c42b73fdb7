use clap::Parser;
use selftrain_kit::cli::{main_with, Cli};

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    main_with(Cli::parse())
}
