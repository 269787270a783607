use clap::Parser;

use otm_cli::{execute, ExitStatus, RunConfig};

fn main() {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { ExitStatus::InputError.code() } else { 0 };
            std::process::exit(code);
        }
    };
    std::process::exit(execute(&config).code());
}
