use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(selfnorm_cli::dispatch(std::env::args_os()))
}
