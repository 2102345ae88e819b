use std::process::ExitCode;

fn main() -> ExitCode {
    tempo_probe::cli::main()
}
