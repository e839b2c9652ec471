//! Command-line driver: run scenarios, verify transcripts, compute trade
//! indices, and regenerate run reports.
//!
//! Exit codes: 0 clean, 1 scenario or input error, 2 verification
//! violations. Every output file is deterministic, so reruns diff clean.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use supernet_core::analytics::{index_report, IndexReport, TradeFlowTable};
use supernet_core::report::RunReport;
use supernet_core::runner::{load_indices, run, RunOutcome};
use supernet_core::scenario::Scenario;
use supernet_core::transcript::{verify_text, Transcript, Verdict};

#[derive(Parser)]
#[command(
    name = "supernet",
    version,
    about = "Deterministic banking-supernet simulator for documentary trade"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario; write transcript.jsonl and the run report
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the seed in the scenario file
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the output files
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Replay a transcript, recheck every hash, proof, and balance
    Verify {
        transcript: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute the trade indices a scenario requests, without running it
    Indices {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Regenerate the run report from a transcript
    Report {
        transcript: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, String> {
    match cmd {
        Cmd::Run { scenario, seed, out, format } => cmd_run(&scenario, seed, &out, format),
        Cmd::Verify { transcript, format } => cmd_verify(&transcript, format),
        Cmd::Indices { scenario, format } => cmd_indices(&scenario, format),
        Cmd::Report { transcript, format } => cmd_report(&transcript, format),
    }
}

fn cmd_run(
    scenario_path: &Path,
    seed: Option<u64>,
    out: &Path,
    format: Format,
) -> Result<ExitCode, String> {
    let mut scenario = Scenario::load(scenario_path).map_err(|e| e.to_string())?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let dir = scenario_path.parent().unwrap_or_else(|| Path::new("."));
    let indices = load_indices(&scenario, dir).map_err(|e| e.to_string())?;
    let RunOutcome { transcript, state } =
        run(&scenario, indices).map_err(|e| e.to_string())?;

    std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let transcript_path = out.join("transcript.jsonl");
    transcript
        .write(&transcript_path)
        .map_err(|e| format!("{}: {e}", transcript_path.display()))?;

    let report = RunReport::from_transcript(&transcript).map_err(|e| e.to_string())?;
    let (report_path, rendered) = match format {
        Format::Text => (out.join("report.txt"), report.render_text()),
        Format::Json => (out.join("report.json"), report.to_json()),
    };
    std::fs::write(&report_path, &rendered)
        .map_err(|e| format!("{}: {e}", report_path.display()))?;

    println!("wrote {}", transcript_path.display());
    println!("wrote {}", report_path.display());
    println!(
        "run complete: {} blocks, final tick {}, head {}",
        state.chain.len(),
        state.chain.last().map(|r| r.block.sim_time).unwrap_or(0),
        transcript.head_hash()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(transcript_path: &Path, format: Format) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(transcript_path)
        .map_err(|e| format!("{}: {e}", transcript_path.display()))?;
    let verdict = verify_text(&text).map_err(|e| e.to_string())?;
    print_verdict(&verdict, format);
    if verdict.is_clean() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn print_verdict(verdict: &Verdict, format: Format) {
    match format {
        Format::Text => {
            if verdict.is_clean() {
                println!("clean");
            } else {
                for violation in &verdict.violations {
                    println!("violation: {violation}");
                }
                println!("{} violation(s)", verdict.violations.len());
            }
        }
        Format::Json => {
            let json = serde_json::json!({
                "clean": verdict.is_clean(),
                "violations": verdict.violations,
            });
            println!("{}", serde_json::to_string_pretty(&json).expect("verdict serializes"));
        }
    }
}

fn cmd_indices(scenario_path: &Path, format: Format) -> Result<ExitCode, String> {
    let scenario = Scenario::load(scenario_path).map_err(|e| e.to_string())?;
    let spec = scenario
        .indices
        .as_ref()
        .ok_or_else(|| "scenario requests no indices".to_string())?;
    let dir = scenario_path.parent().unwrap_or_else(|| Path::new("."));
    let table = TradeFlowTable::load(&dir.join(&spec.table))?;
    let report = index_report(&table, &spec.requests).map_err(|e| e.to_string())?;
    print_indices(&report, format);
    Ok(ExitCode::SUCCESS)
}

fn print_indices(report: &IndexReport, format: Format) {
    match format {
        Format::Text => {
            for row in &report.rows {
                println!("{:<32}  {:>8.3}  {}", row.label, row.value, row.interpretation);
            }
        }
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
        }
    }
}

fn cmd_report(transcript_path: &Path, format: Format) -> Result<ExitCode, String> {
    let transcript = Transcript::read(transcript_path).map_err(|e| e.to_string())?;
    let report = RunReport::from_transcript(&transcript).map_err(|e| e.to_string())?;
    match format {
        Format::Text => print!("{}", report.render_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(ExitCode::SUCCESS)
}
