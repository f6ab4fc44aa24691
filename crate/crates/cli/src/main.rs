use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retrofit_core::pipeline::{self, RunConfig};
use retrofit_core::traceability;

#[derive(Parser)]
#[command(name = "retrofit", version, about = "Backport C++11 sources to C++03")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProjectArgs {
    /// Compilation database (compile_commands.json)
    #[arg(short = 'p', long = "compdb")]
    compdb: PathBuf,
    /// Project root whose hierarchy is mirrored
    #[arg(short = 'r', long = "root")]
    root: PathBuf,
    /// Work directory receiving the transformed tree and state
    #[arg(short = 'w', long = "workdir")]
    workdir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Transform all stale compilation units
    Run {
        #[command(flatten)]
        project: ProjectArgs,
        /// Worker count
        #[arg(short = 'j', long = "jobs", default_value_t = 1)]
        jobs: usize,
        /// Re-transform every unit regardless of stored state
        #[arg(long = "full")]
        full: bool,
        /// Stop scheduling new units after the first failure
        #[arg(long = "fail-fast")]
        fail_fast: bool,
        /// Write a machine-readable per-phase summary to this file
        #[arg(long = "report")]
        report: Option<PathBuf>,
    },
    /// Map a transformed line back to its original source line
    Trace {
        /// Transformed file (its `.trace` sidecar must exist)
        file: PathBuf,
        line: u32,
    },
    /// Print the stale unit set without transforming
    Status {
        #[command(flatten)]
        project: ProjectArgs,
    },
}

fn config(project: &ProjectArgs, jobs: usize, full: bool, fail_fast: bool) -> RunConfig {
    RunConfig {
        project_root: project.root.clone(),
        compdb_path: project.compdb.clone(),
        workdir: project.workdir.clone(),
        jobs,
        force_full: full,
        fail_fast,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match Cli::parse().command {
        Command::Run { project, jobs, full, fail_fast, report } => {
            let cfg = config(&project, jobs, full, fail_fast);
            match pipeline::run(&cfg) {
                Ok(summary) => {
                    if let Some(path) = report {
                        if let Err(e) = pipeline::write_report(&summary, &path) {
                            log::error!("{}", e);
                            return ExitCode::from(2);
                        }
                    }
                    print_summary(&summary);
                    if summary.failed > 0 {
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    log::error!("{}", e);
                    ExitCode::from(2)
                }
            }
        }
        Command::Trace { file, line } => {
            let side = traceability::sidecar_path(&file);
            let map = match traceability::read_sidecar(&side) {
                Ok(m) => m,
                Err(e) => {
                    log::error!("{}", e);
                    return ExitCode::from(2);
                }
            };
            match traceability::lookup(&map, line) {
                Ok((path, orig, exact)) => {
                    println!("{}{}:{}", if exact { "" } else { "~" }, path, orig);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    log::error!("{}", e);
                    ExitCode::from(2)
                }
            }
        }
        Command::Status { project } => {
            let cfg = config(&project, 1, false, false);
            match pipeline::status(&cfg) {
                Ok(stale) => {
                    for (file, reasons) in &stale {
                        println!("{}: {}", file, reasons.join("; "));
                    }
                    if stale.is_empty() {
                        println!("up to date");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    log::error!("{}", e);
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn print_summary(s: &pipeline::RunSummary) {
    eprintln!(
        "transformed {} / skipped {} / failed {} in {} ms",
        s.transformed, s.skipped, s.failed, s.total_millis
    );
    for (phase, millis) in &s.phase_millis {
        let edits = s
            .phase_edits
            .iter()
            .find(|(p, _)| p == phase)
            .map(|(_, n)| *n)
            .unwrap_or(0);
        eprintln!("  {:<22} {:>6} ms  {:>5} edits", phase, millis, edits);
    }
    for (feature, n) in &s.feature_edits {
        eprintln!("  {:<22} {:>12} edits", feature.name(), n);
    }
}
