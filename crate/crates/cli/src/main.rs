use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use percmap_cli::args::Cli;
use percmap_cli::commands::run;
use percmap_cli::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let out = run(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &out.text)?,
        None => std::io::stdout().write_all(out.text.as_bytes())?,
    }
    Ok(if out.acceptance_failed { 3 } else { 0 })
}
