use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use clickstats::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            // keep diagnostics to one line
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("clickstats: error: {}", first.trim_start_matches("error: ").trim());
            return ExitCode::from(2);
        }
    };
    match run(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clickstats: error: {e}");
            ExitCode::from(2)
        }
    }
}
