//! Full engine snapshots: paths, Tabu lists, RNG positions and archive.
//! Resuming from a checkpoint continues the run bit-identically.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    Engine, EngineError, IterationStats, PathStats, PmotsConfig, ProblemAdapter, SearchPath,
};
use crate::pareto::ParetoArchive;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint<S, A> {
    pub config: PmotsConfig,
    pub iteration: u64,
    pub next_id: u64,
    pub initial_evaluations: u64,
    pub total_evaluations: u64,
    pub paths: Vec<SearchPath<S, A>>,
    pub archive: ParetoArchive<S>,
    pub iteration_log: Vec<IterationStats>,
    pub path_stats: Vec<PathStats>,
}

impl<S, A> Checkpoint<S, A>
where
    S: Serialize + DeserializeOwned,
    A: Serialize + DeserializeOwned,
{
    pub fn save(&self, path: &Path) -> Result<(), EngineError> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl<'p, P: ProblemAdapter> Engine<'p, P> {
    pub fn checkpoint(&self) -> Checkpoint<P::Solution, P::Attribute> {
        Checkpoint {
            config: self.config.clone(),
            iteration: self.iteration,
            next_id: self.next_id,
            initial_evaluations: self.initial_evaluations,
            total_evaluations: self.total_evaluations,
            paths: self.paths.clone(),
            archive: self.archive.clone(),
            iteration_log: self.iteration_log.clone(),
            path_stats: self.path_stats.clone(),
        }
    }

    /// Rebuilds an engine from a snapshot taken against the same problem.
    pub fn resume(
        problem: &'p P,
        checkpoint: Checkpoint<P::Solution, P::Attribute>,
    ) -> Result<Self, EngineError> {
        checkpoint.config.validate()?;
        if checkpoint.paths.len() != checkpoint.config.paths {
            return Err(EngineError::CheckpointMismatch(format!(
                "checkpoint holds {} paths, config expects {}",
                checkpoint.paths.len(),
                checkpoint.config.paths
            )));
        }
        for path in &checkpoint.paths {
            if path.current_objectives.arity() != problem.objective_arity() {
                return Err(EngineError::CheckpointMismatch(format!(
                    "path {} carries arity {}, problem has {}",
                    path.index,
                    path.current_objectives.arity(),
                    problem.objective_arity()
                )));
            }
        }
        Ok(Engine {
            problem,
            config: checkpoint.config,
            threads: 1,
            iteration: checkpoint.iteration,
            next_id: checkpoint.next_id,
            initial_evaluations: checkpoint.initial_evaluations,
            total_evaluations: checkpoint.total_evaluations,
            paths: checkpoint.paths,
            archive: checkpoint.archive,
            iteration_log: checkpoint.iteration_log,
            path_stats: checkpoint.path_stats,
        })
    }
}
