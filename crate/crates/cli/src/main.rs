use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use carnot_kit::commands::{run, Command, Format};
use carnot_kit::output::{error_report, exit_code, render, EXIT_FAILURE, EXIT_USAGE};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "carnot-kit",
    version,
    about = "Exact computations on Carnot groups and their hypersurfaces"
)]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            let res = stdout.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    stdout.write_all(b"\n")
                }
            });
            match res {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli.command) {
        Ok(outcome) => {
            if let Err(e) = emit(&render(&outcome.report, cli.format), cli.out.as_ref()) {
                eprintln!("{}", error_report(&e.into()));
                return ExitCode::from(EXIT_USAGE as u8);
            }
            ExitCode::from(if outcome.ok { 0 } else { EXIT_FAILURE as u8 })
        }
        Err(e) => {
            let _ = emit(&render(&error_report(&e), Format::Json), None);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
