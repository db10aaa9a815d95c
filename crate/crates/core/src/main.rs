use std::process::ExitCode;

fn main() -> ExitCode {
    leakywire::cli::main_with_args(std::env::args_os())
}
