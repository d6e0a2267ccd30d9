use std::io;
use std::process::ExitCode;

use projlap::cli::{run, SAMPLE_DOMAIN_ENV};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = run(std::env::args_os(), std::env::var(SAMPLE_DOMAIN_ENV).ok(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
