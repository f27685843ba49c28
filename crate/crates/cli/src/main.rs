use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PRIVKIT_LOG", "error"))
        .target(env_logger::Target::Stderr)
        .init();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = privkit_cli::run(std::env::args_os(), &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(code as u8)
}
