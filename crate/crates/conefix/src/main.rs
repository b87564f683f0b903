use std::io::ErrorKind;
use std::process::ExitCode;

use clap::Parser;
use conefix::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors exit with 1 so that 2 keeps meaning "no fixed point"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &command_line, &mut stdout) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            let closed_pipe = e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == ErrorKind::BrokenPipe);
            if !closed_pipe {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
