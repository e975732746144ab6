//! The operations behind the CLI subcommands, shared with the C bindings:
//! run a search, run the exhaustive oracle, select representative solutions,
//! validate the sensor-network dynamic program against its Monte-Carlo
//! oracle.

use rand::Rng;
use thiserror::Error;

use crate::engine::{
    run, EngineError, IterationStats, PathStats, PmotsConfig, ProblemAdapter, RunReport,
};
use crate::export::FrontRow;
use crate::oracle::{exhaustive_pareto, EnumerableProblem, OracleError};
use crate::pareto::{objective_ranges, select_representatives, EvaluatedSolution, ParetoError};
use crate::scenario::{BuiltProblem, ScenarioError, ScenarioFile};
use crate::wsn::{monte_carlo_oracle, z_scores, ForwardingSolution, WsnProblem};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
    #[error("{0}")]
    Invalid(String),
}

/// Everything a finished search or enumeration produces, in exportable form.
pub struct RunArtifacts {
    pub criteria: Vec<String>,
    pub rows: Vec<FrontRow>,
    pub trace: Vec<IterationStats>,
    pub path_stats: Vec<PathStats>,
    pub total_evaluations: u64,
    pub initial_evaluations: u64,
}

impl RunArtifacts {
    /// Paths that hit an empty neighborhood at least once.
    pub fn stalled_paths(&self) -> usize {
        self.path_stats
            .iter()
            .filter(|s| s.stalled_iterations > 0)
            .count()
    }
}

fn artifacts_from_report<P: ProblemAdapter>(
    problem: &P,
    report: RunReport<P::Solution>,
) -> RunArtifacts {
    let rows = report
        .archive
        .members()
        .iter()
        .map(|member| FrontRow {
            id: member.id,
            objectives: member.objectives.values().to_vec(),
            encoding: problem.encode(&member.encoding),
        })
        .collect();
    RunArtifacts {
        criteria: problem.criteria_names(),
        rows,
        trace: report.iterations,
        path_stats: report.path_stats,
        total_evaluations: report.total_evaluations,
        initial_evaluations: report.initial_evaluations,
    }
}

fn run_problem<P: ProblemAdapter>(
    problem: &P,
    config: &PmotsConfig,
    threads: usize,
) -> Result<RunArtifacts, CommandError> {
    let report = run(problem, config, threads)?;
    Ok(artifacts_from_report(problem, report))
}

/// Runs the search described by an already-built problem.
pub fn run_built(
    built: &BuiltProblem,
    config: &PmotsConfig,
    threads: usize,
) -> Result<RunArtifacts, CommandError> {
    match built {
        BuiltProblem::Toy(p) => run_problem(p, config, threads),
        BuiltProblem::Wlp(p) => run_problem(p, config, threads),
        BuiltProblem::Wsn(p) => run_problem(p, config, threads),
    }
}

/// Builds the scenario's problem and runs the search.
pub fn run_scenario(file: &ScenarioFile) -> Result<RunArtifacts, CommandError> {
    let built = file.build()?;
    run_built(&built, &file.pmots_config(), file.threads)
}

fn oracle_problem<P: EnumerableProblem>(
    problem: &P,
    cap: u64,
) -> Result<RunArtifacts, CommandError> {
    let archive = exhaustive_pareto(problem, cap)?;
    let rows = archive
        .members()
        .iter()
        .map(|member| FrontRow {
            id: member.id,
            objectives: member.objectives.values().to_vec(),
            encoding: problem.encode(&member.encoding),
        })
        .collect();
    Ok(RunArtifacts {
        criteria: problem.criteria_names(),
        rows,
        trace: Vec::new(),
        path_stats: Vec::new(),
        total_evaluations: 0,
        initial_evaluations: 0,
    })
}

/// Exhaustively enumerates the scenario's solution space and returns the
/// exact front. Refuses when the space exceeds `cap`.
pub fn oracle_scenario(file: &ScenarioFile, cap: u64) -> Result<RunArtifacts, CommandError> {
    let built = file.build()?;
    match &built {
        BuiltProblem::Toy(p) => oracle_problem(p, cap),
        BuiltProblem::Wlp(p) => oracle_problem(p, cap),
        BuiltProblem::Wsn(p) => oracle_problem(p, cap),
    }
}

/// Picks `count` spread-out rows from an exported front. Rows pass through
/// verbatim, in selection order; nothing is re-evaluated.
pub fn select_rows(rows: &[FrontRow], count: usize) -> Result<Vec<FrontRow>, CommandError> {
    if rows.is_empty() {
        return Err(CommandError::Invalid("the front file has no rows".into()));
    }
    let arity = rows[0].objectives.len();
    if rows.iter().any(|r| r.objectives.len() != arity) {
        return Err(CommandError::Invalid(
            "front rows disagree on the number of criteria".into(),
        ));
    }
    let solutions: Vec<EvaluatedSolution<usize>> = rows
        .iter()
        .enumerate()
        .map(|(index, row)| {
            Ok(EvaluatedSolution {
                id: row.id,
                encoding: index,
                objectives: crate::pareto::ObjectiveVector::new(row.objectives.clone())?,
            })
        })
        .collect::<Result<_, ParetoError>>()?;
    let ranges = objective_ranges(&solutions);
    let picked = select_representatives(&solutions, count, &ranges)?;
    Ok(picked.into_iter().map(|i| rows[i].clone()).collect())
}

/// One DP-versus-oracle comparison row.
pub struct ValidationRow {
    pub solution: String,
    pub criterion: String,
    pub dp: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
}

pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub trials: u64,
}

impl ValidationReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// Compares the dynamic program against the Monte-Carlo oracle on the
/// all-zero pattern plus `random_solutions` seeded random patterns.
pub fn validate_wsn(
    problem: &WsnProblem,
    trials: u64,
    random_solutions: usize,
    seed: u64,
) -> Result<ValidationReport, CommandError> {
    if trials == 0 {
        return Err(CommandError::Invalid("trials must be at least 1".into()));
    }
    let nodes = problem.topology.node_count();
    let mut solutions = vec![("all-zero".to_string(), ForwardingSolution::all_zero(nodes))];
    let mut rng = crate::engine::seeded_rng(seed, 0);
    for index in 0..random_solutions {
        let mut solution = ForwardingSolution::all_zero(nodes);
        for &node in problem.eligible() {
            if rng.random::<f64>() < 0.5 {
                solution.levels[node] = rng.random_range(1..problem.levels.len());
            }
        }
        solutions.push((format!("random-{index}"), solution));
    }

    let names = ["f_r", "f_d", "f_e"];
    let mut rows = Vec::new();
    for (label, solution) in &solutions {
        let dp = crate::wsn::criteria(problem, solution);
        let estimate = monte_carlo_oracle(problem, solution, trials, seed ^ 0x5eed);
        let z = z_scores(&dp, &estimate);
        let dp_values = [dp.f_r, dp.f_d, dp.f_e];
        for i in 0..3 {
            rows.push(ValidationRow {
                solution: label.clone(),
                criterion: names[i].into(),
                dp: dp_values[i],
                estimate: estimate.mean[i],
                std_error: estimate.std_error[i],
                z: z[i],
            });
        }
    }
    Ok(ValidationReport { rows, trials })
}

/// Scenario-level wrapper for [`validate_wsn`].
pub fn validate_wsn_scenario(
    file: &ScenarioFile,
    trials: u64,
    random_solutions: usize,
) -> Result<ValidationReport, CommandError> {
    match file.build()? {
        BuiltProblem::Wsn(problem) => validate_wsn(&problem, trials, random_solutions, file.seed),
        _ => Err(CommandError::Invalid(
            "validate-wsn requires a wsn scenario".into(),
        )),
    }
}
