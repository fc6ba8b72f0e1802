use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(dockrl::cli::run())
}
