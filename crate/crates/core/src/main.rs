use std::process::ExitCode;

fn main() -> ExitCode {
    match dualscore::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", dualscore::cli::error_line(&err));
            ExitCode::from(if err.kind() == "UsageError" { 2 } else { 1 })
        }
    }
}
