use std::process::ExitCode;

fn main() -> ExitCode {
    circlab::cli::main_with_args(std::env::args_os())
}
