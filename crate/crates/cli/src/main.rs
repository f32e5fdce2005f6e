use std::process::ExitCode;

fn main() -> ExitCode {
    svsim_cli::main_impl()
}
