use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oscat_cli::selftest::{run_selftest, selftest_exit_code};
use oscat_cli::{emit_report, parse_session, run_session, Format, Report, RunConfig};

/// Operator-space and quantum-channel verification sessions.
#[derive(Parser)]
#[command(name = "oscat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a session file.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the JSON report to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        demo: DemoKind,
    },
    /// Compact acceptance checks.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum DemoKind {
    /// The quantum switch on M_n ⊗ M_n.
    Qswitch {
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

const EXIT_PARSE: u8 = 3;

fn config(seed: Option<u64>, tol: Option<f64>) -> Result<RunConfig, String> {
    RunConfig::resolve(seed, tol, |k| std::env::var(k).ok())
}

fn finish(report: &Report, json: Option<&PathBuf>) -> ExitCode {
    print!("{}", String::from_utf8_lossy(&emit_report(report, Format::Text)));
    if let Some(path) = json {
        if let Err(e) = std::fs::write(path, emit_report(report, Format::Json)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn run_text(text: &str, cfg: Result<RunConfig, String>, json: Option<&PathBuf>) -> ExitCode {
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    match parse_session(text) {
        Ok(session) => finish(&run_session(&session, &cfg), json),
        Err(e) => {
            eprintln!("parse error: {e}");
            ExitCode::from(EXIT_PARSE)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { file, seed, tol, json } => match std::fs::read_to_string(&file) {
            Ok(text) => run_text(&text, config(seed, tol), json.as_ref()),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", file.display());
                ExitCode::from(EXIT_PARSE)
            }
        },
        Command::Demo {
            demo: DemoKind::Qswitch { n, seed, json },
        } => run_text(&format!("demo qswitch {n};\n"), config(seed, None), json.as_ref()),
        Command::Selftest { seed } => {
            let seed = match config(seed, None) {
                Ok(c) => c.seed,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_PARSE);
                }
            };
            let lines = run_selftest(seed);
            for l in &lines {
                let tag = if l.passed { "PASS" } else { "FAIL" };
                println!("{tag:<6}[{:>2}] {}: {}", l.id, l.name, l.detail);
            }
            ExitCode::from(selftest_exit_code(&lines) as u8)
        }
    }
}
