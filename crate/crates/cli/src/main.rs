use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hybrid_cli::{run, threads_from_env, Cli, CliError};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match threads_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                return fail(&CliError::Compute(format!("thread pool: {e}")));
            }
        }
        Ok(None) => {}
        Err(e) => return fail(&e),
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result =
        run(&cli, &mut out).and_then(|_| out.flush().map_err(|error| CliError::Io { path: "<stdout>".into(), error }));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
