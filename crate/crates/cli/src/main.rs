use std::io::Write;
use std::process::ExitCode;

use stoc::Execution;
use stoc_cli::{execute, parse_config, CliError};

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(text)) if text.contains("Usage:") => {
            // --help / --version
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run() -> Result<(), CliError> {
    let cfg = parse_config(std::env::args().skip(1))?;
    let out = execute(&cfg, Execution::default())?;
    let io = |source| CliError::Io {
        path: "<stdout>".into(),
        source,
    };
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(&out.stdout).map_err(io)?;
    for line in &out.summary {
        if out.stdout.is_empty() {
            writeln!(stdout, "{line}").map_err(io)?;
        } else {
            eprintln!("{line}");
        }
    }
    stdout.flush().map_err(io)
}
