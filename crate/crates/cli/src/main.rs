use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut err = io::stderr();
    if let Err(e) = noisemask_cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let code = noisemask_cli::run(std::env::args_os(), &mut io::stdout(), &mut err);
    ExitCode::from(code as u8)
}
