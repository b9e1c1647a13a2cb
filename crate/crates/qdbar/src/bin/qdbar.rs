use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdbar::cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "qdbar",
    version,
    about = "Index and parametrix checks for the weighted quantum d-bar operator"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the weight conditions
    Validate(Common),
    /// Index at every grid point
    Index(Common),
    /// Composition residuals of the parametrix
    Residuals(Common),
    /// Parametrix block norms against their bounds
    Compactness(Common),
    /// Print the boundary-variant layout
    Decompose(Common),
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Cross-check dimensions against dense SVD
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (cmd, c) = match args.cmd {
        Cmd::Validate(c) => (Command::Validate, c),
        Cmd::Index(c) => (Command::Index, c),
        Cmd::Residuals(c) => (Command::Residuals, c),
        Cmd::Compactness(c) => (Command::Compactness, c),
        Cmd::Decompose(c) => (Command::Decompose, c),
    };
    let o = Overrides {
        oracle: c.oracle,
        out: c.out,
    };
    ExitCode::from(run(cmd, &c.config, &o) as u8)
}
