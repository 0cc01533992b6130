use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use quotfol::frontend::runner::{run_many, Report};
use quotfol::frontend::{parse_scenario, suites};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "quotfol", about = "Batch verifier for foliation scenarios")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Include wall-clock timings in reports (non-deterministic output).
    #[arg(long, global = true)]
    timing: bool,

    /// List the bundled suites and exit.
    #[arg(long)]
    list_suites: bool,

    /// Run the named bundled suite (repeatable); default is all of them.
    #[arg(long = "suite")]
    suites: Vec<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify scenario files given on the command line.
    Verify {
        /// Scenario files (UTF-8, `#` comments).
        files: Vec<String>,
    },
    /// Run the seeded randomized self-checks.
    Properties {
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per property.
        #[arg(long, default_value_t = 200)]
        cases: u32,
    },
}

fn emit(reports: &[Report], format: Format) {
    match format {
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                r.render_text(&mut out);
            }
            let total_failed: usize = reports.iter().map(|r| r.failed).sum();
            let total_errors: usize = reports.iter().map(|r| r.errors).sum();
            let total_passed: usize = reports.iter().map(|r| r.passed).sum();
            out.push_str(&format!(
                "total: {total_passed} passed, {total_failed} failed, {total_errors} errors\n"
            ));
            print!("{out}");
        }
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(reports).expect("serializable"));
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run_reports(reports: Vec<Report>, format: Format) -> ExitCode {
    let all_ok = reports.iter().all(|r| r.ok());
    emit(&reports, format);
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.list_suites {
        for s in suites::SUITES {
            println!("{}", s.name);
        }
        return ExitCode::SUCCESS;
    }

    match cli.command {
        Some(Command::Verify { files }) => {
            if files.is_empty() {
                return usage_error("verify needs at least one scenario file");
            }
            let mut scenarios = Vec::new();
            for path in &files {
                let text = match std::fs::read_to_string(path) {
                    Ok(t) => t,
                    Err(e) => return usage_error(&format!("cannot read {path}: {e}")),
                };
                let name = std::path::Path::new(path)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.clone());
                match parse_scenario(&name, &text) {
                    Ok(s) => scenarios.push(s),
                    Err(e) => return usage_error(&format!("{path}:{e}")),
                }
            }
            run_reports(run_many(&scenarios, cli.timing), cli.format)
        }
        Some(Command::Properties { seed, cases }) => {
            let reports = quotfol::props::run_all(seed, cases);
            let mut failed = false;
            for r in &reports {
                let status = if r.ok() { "pass" } else { "FAIL" };
                println!("[{status}] {}: {} cases, {} failures", r.name, r.cases, r.failures);
                failed |= !r.ok();
            }
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        None => {
            // Bundled suites: all by default, or the selection given by --suite.
            let selected: Vec<&suites::Suite> = if cli.suites.is_empty() {
                suites::SUITES.iter().collect()
            } else {
                let mut sel = Vec::new();
                for name in &cli.suites {
                    match suites::find(name) {
                        Some(s) => sel.push(s),
                        None => return usage_error(&format!("no bundled suite named `{name}`")),
                    }
                }
                sel
            };
            let mut scenarios = Vec::new();
            for s in selected {
                match parse_scenario(s.name, s.text) {
                    Ok(sc) => scenarios.push(sc),
                    Err(e) => return usage_error(&format!("bundled suite {}: {e}", s.name)),
                }
            }
            run_reports(run_many(&scenarios, cli.timing), cli.format)
        }
    }
}
