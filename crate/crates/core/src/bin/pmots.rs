use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use pmots::commands::{self, CommandError, RunArtifacts, ValidationReport};
use pmots::export::{self, FrontRow};
use pmots::oracle::{OracleError, DEFAULT_ENUMERATION_CAP};
use pmots::scenario::{ProblemKind, ScenarioFile};
use pmots::wlp::CoverageTensor;

/// Multiobjective Tabu search over scenario files: run searches, enumerate
/// exact fronts, pick representative solutions, validate the sensor-network
/// model.
#[derive(Parser)]
#[command(name = "pmots", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the search described by a scenario file.
    Run {
        scenario: PathBuf,
        /// Where exports go; defaults to the scenario's output_dir, the
        /// PMOTS_OUTPUT_DIR environment variable, then ./pmots-out.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Enumerate the whole solution space and export the exact front.
    Oracle {
        scenario: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Refuse enumeration beyond this many solutions.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Select spread-out representative rows from an exported front.
    Select {
        front: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compare the sensor-network dynamic program against its Monte-Carlo
    /// oracle.
    ValidateWsn {
        scenario: PathBuf,
        #[arg(long)]
        trials: u64,
        /// Seeded random forwarding patterns checked besides the all-zero one.
        #[arg(long, default_value_t = 5)]
        random_solutions: usize,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_OVER_CAP: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            output_dir,
            seed,
        } => cmd_run(&scenario, output_dir, seed),
        Command::Oracle {
            scenario,
            output_dir,
            seed,
            cap,
        } => cmd_oracle(&scenario, output_dir, seed, cap),
        Command::Select {
            front,
            count,
            output_dir,
        } => cmd_select(&front, count, output_dir),
        Command::ValidateWsn {
            scenario,
            trials,
            random_solutions,
            output_dir,
            seed,
        } => cmd_validate_wsn(&scenario, trials, random_solutions, output_dir, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("pmots: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

fn exit_code_for(error: &CommandError) -> u8 {
    match error {
        CommandError::Scenario(_) | CommandError::Invalid(_) | CommandError::Pareto(_) => {
            EXIT_INVALID
        }
        CommandError::Oracle(OracleError::CapExceeded { .. }) => EXIT_OVER_CAP,
        CommandError::Oracle(OracleError::EmptySpace) => EXIT_INVALID,
        CommandError::Oracle(OracleError::Pareto(_)) => EXIT_RUNTIME,
        CommandError::Engine(_) => EXIT_RUNTIME,
    }
}

#[derive(Serialize)]
struct RunManifest {
    scenario_sha256: String,
    tool_version: String,
    command: String,
    seed: u64,
    threads: usize,
    timings_ms: BTreeMap<String, u128>,
    outputs: Vec<String>,
}

fn resolve_output_dir(flag: Option<PathBuf>, scenario: Option<&str>) -> PathBuf {
    flag.or_else(|| scenario.map(PathBuf::from))
        .or_else(|| std::env::var_os("PMOTS_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pmots-out"))
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<(ScenarioFile, String), CommandError> {
    let (mut file, text) = ScenarioFile::load(path)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    Ok((file, text))
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_front(
    dir: &Path,
    stem: &str,
    criteria: &[String],
    rows: &[FrontRow],
) -> Result<Vec<String>, CommandError> {
    let csv_name = format!("{stem}.csv");
    let json_name = format!("{stem}.json");
    write_text(&dir.join(&csv_name), &export::to_csv(criteria, rows))?;
    write_text(&dir.join(&json_name), &export::to_json(criteria, rows))?;
    Ok(vec![csv_name, json_name])
}

fn write_text(path: &Path, text: &str) -> Result<(), CommandError> {
    std::fs::write(path, text)
        .map_err(|e| CommandError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> Result<(), CommandError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CommandError::Invalid(format!("cannot create {}: {e}", dir.display())))
}

/// Builds the scenario problem, serving WLP coverage tensors from the cache
/// directory keyed by the content hash of geometry and radio parameters.
fn build_with_tensor_cache(
    file: &ScenarioFile,
    cache_dir: &Path,
    timings: &mut BTreeMap<String, u128>,
) -> Result<pmots::scenario::BuiltProblem, CommandError> {
    if file.kind != ProblemKind::Wlp {
        return Ok(file.build()?);
    }
    let instance = file.build_wlp_instance()?;
    let hash = CoverageTensor::content_hash(&instance);
    let cache_file = cache_dir.join(format!("tensor-{hash}.json"));
    if cache_file.is_file() {
        if let Ok(tensor) = CoverageTensor::load(&cache_file) {
            if tensor.matches(&instance) {
                return Ok(pmots::scenario::BuiltProblem::Wlp(
                    file.build_wlp_with_tensor(tensor)?,
                ));
            }
        }
    }
    let started = Instant::now();
    let tensor = CoverageTensor::generate(&instance);
    timings.insert("tensor".into(), started.elapsed().as_millis());
    prepare_dir(cache_dir)?;
    tensor
        .save(&cache_file)
        .map_err(|e| CommandError::Invalid(e.to_string()))?;
    Ok(pmots::scenario::BuiltProblem::Wlp(
        file.build_wlp_with_tensor(tensor)?,
    ))
}

fn report_stalls(artifacts: &RunArtifacts) {
    let stalled = artifacts.stalled_paths();
    if stalled > 0 {
        eprintln!("pmots: warning: {stalled} path(s) stalled on an empty neighborhood");
    }
}

fn cmd_run(
    path: &Path,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExitCode, CommandError> {
    let started = Instant::now();
    let (file, text) = load_scenario(path, seed)?;
    let dir = resolve_output_dir(output_dir, file.output_dir.as_deref());
    prepare_dir(&dir)?;
    let mut timings = BTreeMap::new();

    let built = build_with_tensor_cache(&file, &dir.join("cache"), &mut timings)?;
    let search_started = Instant::now();
    let artifacts = commands::run_built(&built, &file.pmots_config(), file.threads)?;
    timings.insert("search".into(), search_started.elapsed().as_millis());

    let mut outputs = write_front(&dir, "front", &artifacts.criteria, &artifacts.rows)?;
    let trace: String = artifacts
        .trace
        .iter()
        .map(|stats| serde_json::to_string(stats).expect("stats serialize"))
        .map(|line| line + "\n")
        .collect();
    write_text(&dir.join("trace.jsonl"), &trace)?;
    outputs.push("trace.jsonl".into());

    timings.insert("total".into(), started.elapsed().as_millis());
    let manifest = RunManifest {
        scenario_sha256: sha256_hex(&text),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "run".into(),
        seed: file.seed,
        threads: file.threads,
        timings_ms: timings,
        outputs: outputs.clone(),
    };
    write_text(
        &dir.join("manifest.json"),
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;

    report_stalls(&artifacts);
    println!(
        "front: {} solutions, {} evaluations, outputs in {}",
        artifacts.rows.len(),
        artifacts.total_evaluations + artifacts.initial_evaluations,
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(
    path: &Path,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    cap: u64,
) -> Result<ExitCode, CommandError> {
    let started = Instant::now();
    let (file, text) = load_scenario(path, seed)?;
    let dir = resolve_output_dir(output_dir, file.output_dir.as_deref());
    prepare_dir(&dir)?;

    let artifacts = commands::oracle_scenario(&file, cap)?;
    let outputs = write_front(&dir, "front", &artifacts.criteria, &artifacts.rows)?;

    let mut timings = BTreeMap::new();
    timings.insert("total".to_string(), started.elapsed().as_millis());
    let manifest = RunManifest {
        scenario_sha256: sha256_hex(&text),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "oracle".into(),
        seed: file.seed,
        threads: 1,
        timings_ms: timings,
        outputs: outputs.clone(),
    };
    write_text(
        &dir.join("manifest.json"),
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;

    println!(
        "exact front: {} solutions, outputs in {}",
        artifacts.rows.len(),
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(
    front: &Path,
    count: usize,
    output_dir: Option<PathBuf>,
) -> Result<ExitCode, CommandError> {
    let text = std::fs::read_to_string(front)
        .map_err(|e| CommandError::Invalid(format!("cannot read {}: {e}", front.display())))?;
    let is_json = front.extension().is_some_and(|ext| ext == "json");
    let (criteria, rows) = if is_json {
        export::parse_json(&text)
    } else {
        export::parse_csv(&text)
    }
    .map_err(|e| CommandError::Invalid(e.to_string()))?;

    let picked = commands::select_rows(&rows, count)?;
    let dir = resolve_output_dir(output_dir, None);
    prepare_dir(&dir)?;
    write_front(&dir, "selected", &criteria, &picked)?;
    println!(
        "selected {} of {} rows into {}",
        picked.len(),
        rows.len(),
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate_wsn(
    path: &Path,
    trials: u64,
    random_solutions: usize,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExitCode, CommandError> {
    let (file, _) = load_scenario(path, seed)?;
    let report = commands::validate_wsn_scenario(&file, trials, random_solutions)?;

    let dir = resolve_output_dir(output_dir, file.output_dir.as_deref());
    prepare_dir(&dir)?;
    write_text(&dir.join("validation.csv"), &validation_csv(&report))?;

    for row in &report.rows {
        println!(
            "{} {}: dp={} mc={} se={} z={:.3}",
            row.solution,
            row.criterion,
            export::fmt_f64(row.dp),
            export::fmt_f64(row.estimate),
            export::fmt_f64(row.std_error),
            row.z
        );
    }
    let max_z = report.max_abs_z();
    println!(
        "validated {} rows at {} trials, max |z| = {max_z:.3}",
        report.rows.len(),
        report.trials
    );
    if max_z > 3.0 {
        eprintln!("pmots: dynamic program disagrees with the Monte-Carlo oracle");
        return Ok(ExitCode::from(EXIT_VALIDATION));
    }
    Ok(ExitCode::SUCCESS)
}

fn validation_csv(report: &ValidationReport) -> String {
    let mut out = String::from("solution,criterion,dp,estimate,std_error,z\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.solution,
            row.criterion,
            export::fmt_f64(row.dp),
            export::fmt_f64(row.estimate),
            export::fmt_f64(row.std_error),
            export::fmt_f64(row.z)
        ));
    }
    out
}
