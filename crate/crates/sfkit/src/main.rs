use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = sfkit::cli::Cli::parse();
    let (manifest, code) = sfkit::cli::run(&cli);
    if let Some(e) = &manifest.error {
        eprintln!("sfkit {}: {e}", manifest.command);
    }
    for c in manifest.checks.iter().filter(|c| !c.passed) {
        let kind = if c.required { "FAIL" } else { "note" };
        eprintln!("{kind} {}: {}", c.name, c.detail);
    }
    ExitCode::from(code)
}
