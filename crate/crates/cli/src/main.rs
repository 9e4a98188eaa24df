mod args;
mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::commands::Context;
use crate::output::{emit_error, Failure, EXIT_OK};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let failure = Failure::usage(err.render().to_string().trim_end());
            emit_error(&failure.0);
            return ExitCode::from(failure.0.exit_code as u8);
        }
    };

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut ctx = Context {
        out: &mut out,
        quiet: cli.quiet,
        limits: longrun::Limits::from_env(),
    };
    let outcome =
        commands::run(&cli.command, &mut ctx).and_then(|()| out.flush().map_err(Failure::from));
    match outcome {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(failure) => {
            // nothing has been written on failure paths: every command
            // computes its payload before emitting it
            drop(out);
            emit_error(&failure.0);
            ExitCode::from(failure.0.exit_code as u8)
        }
    }
}
