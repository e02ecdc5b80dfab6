use std::process::ExitCode;

fn main() -> ExitCode {
    fdmlab::cli::init_threads();
    let stdout = std::io::stdout();
    let code = fdmlab::cli::run_cli(std::env::args_os().skip(1), &mut stdout.lock());
    ExitCode::from(code as u8)
}
