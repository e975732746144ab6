//! The parallel multiobjective Tabu search loop.
//!
//! K search paths walk the solution space of any [`ProblemAdapter`]. Each
//! iteration a path evaluates its whole neighborhood, removes taboo moves,
//! ranks the remaining candidates locally (the archive is never consulted for
//! ranking), keeps those with rank at most `rank_max`, picks its next solution
//! uniformly among them, and the kept candidates are merged into one shared
//! non-dominated archive. Merging happens at the iteration boundary in path
//! order, so a run is bit-for-bit reproducible for a fixed seed regardless of
//! how many worker threads evaluate the paths.

mod checkpoint;
mod tabu;

pub use checkpoint::Checkpoint;
pub use tabu::{sample_tenure, TabuList};

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pareto::{EvaluatedSolution, ObjectiveVector, ParetoArchive, ParetoError};

/// The deterministic stream RNG used throughout the engine. Path `k` draws
/// from stream `k + 1` of the run seed; stream 0 builds the initial front.
pub type SearchRng = rand_chacha::ChaCha8Rng;

pub(crate) mod rng_serde {
    use super::SearchRng;
    use rand::SeedableRng;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct RngState {
        seed: [u8; 32],
        stream: u64,
        word_pos_hi: u64,
        word_pos_lo: u64,
    }

    pub fn serialize<S: Serializer>(rng: &SearchRng, serializer: S) -> Result<S::Ok, S::Error> {
        let word_pos = rng.get_word_pos();
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos_hi: (word_pos >> 64) as u64,
            word_pos_lo: word_pos as u64,
        }
        .serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<SearchRng, D::Error> {
        let state = RngState::deserialize(deserializer)?;
        let mut rng = SearchRng::from_seed(state.seed);
        rng.set_stream(state.stream);
        rng.set_word_pos((u128::from(state.word_pos_hi) << 64) | u128::from(state.word_pos_lo));
        Ok(rng)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("initial front: {0}")]
    InitialFront(String),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
    #[error("checkpoint does not match problem: {0}")]
    CheckpointMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Contract a problem model implements to be searched by the engine.
///
/// `evaluate` must be deterministic and `neighborhood` must only produce valid
/// solutions. Move attributes come in two flavors: `move_attribute` is the
/// token recorded in the Tabu list after a move is applied (it names what the
/// move removed or, for additions/deletions, the move class), while
/// `probe_attribute` is the token a candidate move is checked against (it
/// names what the move would establish). A candidate is taboo when its probe
/// token matches a live list entry, which forbids undoing recent moves.
pub trait ProblemAdapter: Sync {
    type Solution: Clone + PartialEq + Send + Serialize + DeserializeOwned;
    type Move: Clone;
    type Attribute: Clone + PartialEq + Send + Serialize + DeserializeOwned;

    fn objective_arity(&self) -> usize;
    fn criteria_names(&self) -> Vec<String>;
    /// Exactly `paths` valid starting solutions.
    fn initial_front(
        &self,
        paths: usize,
        rng: &mut SearchRng,
    ) -> Result<Vec<Self::Solution>, EngineError>;
    fn evaluate(&self, solution: &Self::Solution) -> ObjectiveVector;
    fn neighborhood(&self, solution: &Self::Solution) -> Vec<(Self::Move, Self::Solution)>;
    fn move_attribute(&self, mv: &Self::Move, origin: &Self::Solution) -> Self::Attribute;
    fn probe_attribute(&self, mv: &Self::Move, origin: &Self::Solution) -> Self::Attribute;
    /// Reporting label for the search-space subset a solution belongs to
    /// (e.g. the number of active elements).
    fn subset_label(&self, solution: &Self::Solution) -> u64;
    /// Textual encoding used by the front exports. Must not contain commas,
    /// quotes or newlines.
    fn encode(&self, solution: &Self::Solution) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmotsConfig {
    /// Number of parallel search paths (K).
    pub paths: usize,
    /// Number of search iterations to run.
    pub iterations: u64,
    /// Maximum admissible local Pareto rank for next-step candidates.
    pub rank_max: u32,
    pub tenure_min: u32,
    pub tenure_max: u32,
    pub seed: u64,
    /// When set, a taboo neighbor that is non-dominated within its evaluated
    /// neighborhood is admitted anyway. Off by default.
    #[serde(default)]
    pub aspiration_non_dominated: bool,
}

impl PmotsConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.paths < 1 {
            return Err(EngineError::InvalidConfig {
                field: "paths".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.rank_max < 1 {
            return Err(EngineError::InvalidConfig {
                field: "rank_max".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.tenure_min < 1 {
            return Err(EngineError::InvalidConfig {
                field: "tenure_min".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.tenure_min > self.tenure_max {
            return Err(EngineError::InvalidConfig {
                field: "tenure_min".into(),
                reason: format!(
                    "must not exceed tenure_max ({} > {})",
                    self.tenure_min, self.tenure_max
                ),
            });
        }
        Ok(())
    }
}

/// One search path: its current solution, Tabu list and private RNG stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchPath<S, A> {
    pub index: usize,
    pub current: S,
    pub current_objectives: ObjectiveVector,
    pub tabu: TabuList<A>,
    #[serde(with = "rng_serde")]
    pub rng: SearchRng,
}

/// Result of stepping one path for one iteration.
pub struct PathStep<P: ProblemAdapter> {
    /// The admissible candidates with local rank <= rank_max, in neighborhood
    /// order. These are merged into the shared archive.
    pub candidates: Vec<(P::Solution, ObjectiveVector)>,
    /// Neighborhood size evaluated this step.
    pub evaluated: u64,
    /// True when the neighborhood was empty and the path kept its solution.
    pub stalled: bool,
    /// True when every neighbor was taboo and the oldest-entry fallback ran.
    pub aspiration_used: bool,
    /// Objectives of the path's current solution after the step.
    pub objectives: ObjectiveVector,
    pub subset: u64,
}

/// Runs one iteration of a single path: evaluate the neighborhood, drop taboo
/// candidates, rank the remainder locally, pick the next solution uniformly
/// among those with rank <= `rank_max`, and record the applied move's
/// attribute with a freshly sampled tenure.
///
/// When every neighbor is taboo, the neighbors whose blocking entries expire
/// soonest are admitted (oldest-entry aspiration). When the neighborhood is
/// empty the path stalls in place for this iteration.
pub fn step_path<P: ProblemAdapter>(
    problem: &P,
    path: &mut SearchPath<P::Solution, P::Attribute>,
    iteration: u64,
    config: &PmotsConfig,
) -> Result<PathStep<P>, EngineError> {
    path.tabu.purge_expired(iteration);

    let neighborhood = problem.neighborhood(&path.current);
    if neighborhood.is_empty() {
        return Ok(PathStep {
            candidates: Vec::new(),
            evaluated: 0,
            stalled: true,
            aspiration_used: false,
            objectives: path.current_objectives.clone(),
            subset: problem.subset_label(&path.current),
        });
    }

    struct Candidate<M, S> {
        mv: M,
        solution: S,
        objectives: ObjectiveVector,
        taboo: bool,
    }

    let evaluated: Vec<Candidate<P::Move, P::Solution>> = neighborhood
        .into_iter()
        .map(|(mv, solution)| {
            let objectives = problem.evaluate(&solution);
            let probe = problem.probe_attribute(&mv, &path.current);
            let taboo = path.tabu.is_taboo(&probe, iteration);
            Candidate {
                mv,
                solution,
                objectives,
                taboo,
            }
        })
        .collect();
    let evaluated_count = evaluated.len() as u64;

    let mut admissible: Vec<usize> = (0..evaluated.len())
        .filter(|&i| !evaluated[i].taboo)
        .collect();

    if config.aspiration_non_dominated {
        // Objective-based aspiration: taboo neighbors that are non-dominated
        // within the full evaluated neighborhood are admitted as well.
        let all: Vec<ObjectiveVector> = evaluated.iter().map(|c| c.objectives.clone()).collect();
        let ranks = crate::pareto::pareto_rank_objectives(&all)?;
        for (i, candidate) in evaluated.iter().enumerate() {
            if candidate.taboo && ranks[i] == 1 {
                admissible.push(i);
            }
        }
        admissible.sort_unstable();
    }

    let mut aspiration_used = false;
    if admissible.is_empty() {
        // Every neighbor is taboo: admit those whose blocking entry expires
        // soonest, so the path keeps moving.
        let expiries: Vec<u64> = evaluated
            .iter()
            .map(|c| {
                let probe = problem.probe_attribute(&c.mv, &path.current);
                path.tabu
                    .blocking_expiry(&probe, iteration)
                    .expect("taboo candidate must have a blocking entry")
            })
            .collect();
        let soonest = *expiries.iter().min().unwrap();
        admissible = (0..evaluated.len())
            .filter(|&i| expiries[i] == soonest)
            .collect();
        aspiration_used = true;
    }

    // Local Pareto ranking over the admissible candidates only; the shared
    // archive takes no part in it.
    let admissible_objectives: Vec<ObjectiveVector> = admissible
        .iter()
        .map(|&i| evaluated[i].objectives.clone())
        .collect();
    let ranks = crate::pareto::pareto_rank_objectives(&admissible_objectives)?;
    let candidate_pool: Vec<usize> = admissible
        .iter()
        .enumerate()
        .filter(|&(pos, _)| ranks[pos] <= config.rank_max)
        .map(|(_, &i)| i)
        .collect();

    let pick = candidate_pool[path.rng.random_range(0..candidate_pool.len())];
    let tenure = sample_tenure(&mut path.rng, config.tenure_min, config.tenure_max);
    let attribute = problem.move_attribute(&evaluated[pick].mv, &path.current);
    path.tabu.insert(attribute, iteration, tenure);

    let candidates: Vec<(P::Solution, ObjectiveVector)> = candidate_pool
        .iter()
        .map(|&i| {
            (
                evaluated[i].solution.clone(),
                evaluated[i].objectives.clone(),
            )
        })
        .collect();

    path.current = evaluated[pick].solution.clone();
    path.current_objectives = evaluated[pick].objectives.clone();

    Ok(PathStep {
        candidates,
        evaluated: evaluated_count,
        stalled: false,
        aspiration_used,
        objectives: path.current_objectives.clone(),
        subset: problem.subset_label(&path.current),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub objectives: Vec<f64>,
    pub subset: u64,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: u64,
    pub archive_size: usize,
    pub evaluations: u64,
    pub cumulative_evaluations: u64,
    pub paths: Vec<PathTrace>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    /// Iterations in which the neighborhood was empty.
    pub stalled_iterations: u64,
    /// Iterations that added nothing new to the archive.
    pub no_contribution_iterations: u64,
    /// Iterations resolved through the all-taboo fallback.
    pub aspiration_iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport<S> {
    pub archive: ParetoArchive<S>,
    pub iterations: Vec<IterationStats>,
    pub path_stats: Vec<PathStats>,
    pub total_evaluations: u64,
    pub initial_evaluations: u64,
}

/// The search engine. Create with [`Engine::new`], drive with [`Engine::step`]
/// or [`Engine::run_to_end`], snapshot with [`Engine::checkpoint`].
pub struct Engine<'p, P: ProblemAdapter> {
    problem: &'p P,
    config: PmotsConfig,
    threads: usize,
    iteration: u64,
    next_id: u64,
    initial_evaluations: u64,
    total_evaluations: u64,
    paths: Vec<SearchPath<P::Solution, P::Attribute>>,
    archive: ParetoArchive<P::Solution>,
    iteration_log: Vec<IterationStats>,
    path_stats: Vec<PathStats>,
}

impl<'p, P: ProblemAdapter> Engine<'p, P> {
    pub fn new(problem: &'p P, config: PmotsConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut init_rng = seeded_rng(config.seed, 0);
        let front = problem.initial_front(config.paths, &mut init_rng)?;
        if front.len() != config.paths {
            return Err(EngineError::InitialFront(format!(
                "expected {} starting solutions, got {}",
                config.paths,
                front.len()
            )));
        }

        let mut archive = ParetoArchive::new();
        let mut paths = Vec::with_capacity(config.paths);
        let mut next_id = 0u64;
        for (k, solution) in front.into_iter().enumerate() {
            let objectives = problem.evaluate(&solution);
            archive.insert(EvaluatedSolution {
                id: next_id,
                encoding: solution.clone(),
                objectives: objectives.clone(),
            })?;
            next_id += 1;
            paths.push(SearchPath {
                index: k,
                current: solution,
                current_objectives: objectives,
                tabu: TabuList::new(),
                rng: seeded_rng(config.seed, (k as u64) + 1),
            });
        }
        let path_count = config.paths;
        Ok(Self {
            problem,
            config,
            threads: 1,
            iteration: 0,
            next_id,
            initial_evaluations: path_count as u64,
            total_evaluations: 0,
            paths,
            archive,
            iteration_log: Vec::new(),
            path_stats: vec![PathStats::default(); path_count],
        })
    }

    /// Sets how many worker threads evaluate paths within an iteration. The
    /// produced run is identical for any value.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn config(&self) -> &PmotsConfig {
        &self.config
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn archive(&self) -> &ParetoArchive<P::Solution> {
        &self.archive
    }

    pub fn paths(&self) -> &[SearchPath<P::Solution, P::Attribute>] {
        &self.paths
    }

    pub fn iteration_log(&self) -> &[IterationStats] {
        &self.iteration_log
    }

    /// Runs one full iteration: step every path, then merge candidates into
    /// the archive in path order.
    pub fn step(&mut self) -> Result<(), EngineError> {
        let steps = self.step_all_paths()?;
        let mut iteration_evaluations = 0u64;
        let mut traces = Vec::with_capacity(steps.len());
        for (k, step) in steps.into_iter().enumerate() {
            iteration_evaluations += step.evaluated;
            let mut contributed = false;
            for (solution, objectives) in step.candidates {
                let id = self.next_id;
                self.next_id += 1;
                let outcome = self.archive.insert(EvaluatedSolution {
                    id,
                    encoding: solution,
                    objectives,
                })?;
                contributed |= outcome.accepted();
            }
            if !contributed {
                self.path_stats[k].no_contribution_iterations += 1;
            }
            if step.stalled {
                self.path_stats[k].stalled_iterations += 1;
            }
            if step.aspiration_used {
                self.path_stats[k].aspiration_iterations += 1;
            }
            traces.push(PathTrace {
                objectives: step.objectives.values().to_vec(),
                subset: step.subset,
                stalled: step.stalled,
            });
        }
        self.total_evaluations += iteration_evaluations;
        self.iteration_log.push(IterationStats {
            iteration: self.iteration,
            archive_size: self.archive.len(),
            evaluations: iteration_evaluations,
            cumulative_evaluations: self.total_evaluations,
            paths: traces,
        });
        self.iteration += 1;
        Ok(())
    }

    fn step_all_paths(&mut self) -> Result<Vec<PathStep<P>>, EngineError> {
        let iteration = self.iteration;
        let config = &self.config;
        let problem = self.problem;
        if self.threads <= 1 || self.paths.len() <= 1 {
            return self
                .paths
                .iter_mut()
                .map(|path| step_path(problem, path, iteration, config))
                .collect();
        }
        let chunk = self.paths.len().div_ceil(self.threads);
        let mut results: Vec<Option<Result<PathStep<P>, EngineError>>> = Vec::new();
        results.resize_with(self.paths.len(), || None);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for paths_chunk in self.paths.chunks_mut(chunk) {
                handles.push(scope.spawn(move || {
                    paths_chunk
                        .iter_mut()
                        .map(|path| step_path(problem, path, iteration, config))
                        .collect::<Vec<_>>()
                }));
            }
            let mut offset = 0;
            for handle in handles {
                let steps = handle.join().expect("path worker thread panicked");
                for step in steps {
                    results[offset] = Some(step);
                    offset += 1;
                }
            }
        });
        results
            .into_iter()
            .map(|slot| slot.expect("every path produces a step"))
            .collect()
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while self.iteration < self.config.iterations {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_report(self) -> RunReport<P::Solution> {
        RunReport {
            archive: self.archive,
            iterations: self.iteration_log,
            path_stats: self.path_stats,
            total_evaluations: self.total_evaluations,
            initial_evaluations: self.initial_evaluations,
        }
    }
}

/// Deterministic RNG on stream `stream` of `seed`; the engine gives stream 0
/// to initial-front construction and stream `k + 1` to path `k`.
pub fn seeded_rng(seed: u64, stream: u64) -> SearchRng {
    use rand::SeedableRng;
    let mut rng = SearchRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs a full search and returns the report.
pub fn run<P: ProblemAdapter>(
    problem: &P,
    config: &PmotsConfig,
    threads: usize,
) -> Result<RunReport<P::Solution>, EngineError> {
    let mut engine = Engine::new(problem, config.clone())?.with_threads(threads);
    engine.run_to_end()?;
    Ok(engine.into_report())
}
