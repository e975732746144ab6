//! A tiny bi-objective chain problem, mainly for tests and smoke runs.
//!
//! Solutions are the integers `0..size` with objectives `(x, size-1-x)`, so
//! every point is Pareto-optimal and a correct search recovers all of them.
//! Moves step to an adjacent integer; the Tabu attribute is the value a move
//! leaves (recorded) or enters (probed), which blocks immediate backtracking.

use rand::seq::index::sample;
use rand::Rng;

use crate::engine::{EngineError, ProblemAdapter, SearchRng};
use crate::pareto::ObjectiveVector;

#[derive(Debug, Clone)]
pub struct ToyProblem {
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyMove {
    pub from: usize,
    pub to: usize,
}

impl ProblemAdapter for ToyProblem {
    type Solution = usize;
    type Move = ToyMove;
    type Attribute = usize;

    fn objective_arity(&self) -> usize {
        2
    }

    fn criteria_names(&self) -> Vec<String> {
        vec!["f1".into(), "f2".into()]
    }

    fn initial_front(
        &self,
        paths: usize,
        rng: &mut SearchRng,
    ) -> Result<Vec<Self::Solution>, EngineError> {
        if self.size == 0 {
            return Err(EngineError::InitialFront(
                "toy size must be positive".into(),
            ));
        }
        if paths <= self.size {
            Ok(sample(rng, self.size, paths).into_iter().collect())
        } else {
            Ok((0..paths).map(|_| rng.random_range(0..self.size)).collect())
        }
    }

    fn evaluate(&self, solution: &usize) -> ObjectiveVector {
        ObjectiveVector::new(vec![*solution as f64, (self.size - 1 - *solution) as f64])
            .expect("toy objectives are finite")
    }

    fn neighborhood(&self, solution: &usize) -> Vec<(ToyMove, usize)> {
        let mut out = Vec::with_capacity(2);
        if *solution > 0 {
            out.push((
                ToyMove {
                    from: *solution,
                    to: *solution - 1,
                },
                *solution - 1,
            ));
        }
        if *solution + 1 < self.size {
            out.push((
                ToyMove {
                    from: *solution,
                    to: *solution + 1,
                },
                *solution + 1,
            ));
        }
        out
    }

    fn move_attribute(&self, mv: &ToyMove, _origin: &usize) -> usize {
        mv.from
    }

    fn probe_attribute(&self, mv: &ToyMove, _origin: &usize) -> usize {
        mv.to
    }

    fn subset_label(&self, solution: &usize) -> u64 {
        *solution as u64
    }

    fn encode(&self, solution: &usize) -> String {
        solution.to_string()
    }
}
