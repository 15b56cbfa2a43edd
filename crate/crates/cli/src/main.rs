use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(specgraph_cli::main_with(std::env::args_os(), &mut std::io::stdout().lock()))
}
