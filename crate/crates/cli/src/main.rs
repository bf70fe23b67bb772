mod args;
mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Pipeline;
use error::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Wer { input } => commands::wer(&input),
        Command::RescoreNgram(a) => commands::rescore_ngram(&a),
        Command::Correct(a) => commands::llm_run(&a, Pipeline::P1),
        Command::Icl(a) => commands::llm_run(&a, Pipeline::P2),
        Command::Synth(a) => commands::synth(&a),
        Command::Report { runs } => {
            let table = report::report(&runs)?;
            std::io::stdout()
                .lock()
                .write_all(table.as_bytes())
                .map_err(|e| Failure::input(format!("cannot write output: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(error::USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nbest: {f}");
            ExitCode::from(f.code)
        }
    }
}
