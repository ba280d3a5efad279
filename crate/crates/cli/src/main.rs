use std::process::ExitCode;

use clap::Parser;
use ncjoin::{dispatch, render, strip_format, Cli, Context, Format, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let args = strip_format(&args);
    let outcome = match Context::from_env() {
        Ok(ctx) => dispatch(&cli.command, &args, &ctx),
        Err(e) => Outcome::from_error("usage", &args, e),
    };
    print!("{}", render(&outcome.report, cli.format));
    if outcome.exit == 2 && cli.format == Format::Text {
        if let Some(err) = outcome.report.artifacts.get("error") {
            eprintln!("error: {}", err.as_str().unwrap_or_default());
        }
    }
    ExitCode::from(outcome.exit as u8)
}
