//! Dominance relations, Pareto ranking and the non-dominated archive.
//!
//! All criteria are minimized. A vector `a` dominates `b` when it is no worse
//! on every component and strictly better on at least one. The archive keeps
//! a mutually non-dominated set at every insert, so its final contents (as a
//! set in objective space) do not depend on insertion order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("objective vector must not be empty")]
    Empty,
    #[error("objective value at index {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("objective arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("operation requires a non-empty solution set")]
    EmptySet,
}

/// A fixed-arity tuple of finite criterion values, all minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    /// Builds a vector, rejecting NaN and infinities so that dominance stays
    /// a strict partial order.
    pub fn new(values: Vec<f64>) -> Result<Self, ParetoError> {
        if values.is_empty() {
            return Err(ParetoError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(ParetoError::NonFinite { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Strict Pareto dominance: `self` is no worse everywhere and strictly
    /// better somewhere. Exact comparison, no epsilon.
    pub fn dominates(&self, other: &Self) -> Result<bool, ParetoError> {
        if self.arity() != other.arity() {
            return Err(ParetoError::ArityMismatch {
                expected: self.arity(),
                got: other.arity(),
            });
        }
        Ok(dominates_raw(&self.0, &other.0))
    }
}

/// Dominance over raw slices. Callers guarantee equal length.
fn dominates_raw(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

fn check_uniform_arity(set: &[ObjectiveVector]) -> Result<usize, ParetoError> {
    let expected = set.first().ok_or(ParetoError::EmptySet)?.arity();
    for vector in set {
        if vector.arity() != expected {
            return Err(ParetoError::ArityMismatch {
                expected,
                got: vector.arity(),
            });
        }
    }
    Ok(expected)
}

/// A solution together with its (deterministic) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSolution<E> {
    pub id: u64,
    pub encoding: E,
    pub objectives: ObjectiveVector,
}

/// Rank assignment: rank(x) = 1 + number of solutions dominating x within the
/// ranked set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankAssignment {
    ranks: BTreeMap<u64, u32>,
}

impl RankAssignment {
    pub fn rank(&self, id: u64) -> Option<u32> {
        self.ranks.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.ranks.iter().map(|(&id, &rank)| (id, rank))
    }
}

/// Ranks each vector by position: `ranks[i] = 1 + |{j : set[j] dominates set[i]}|`.
pub fn pareto_rank_objectives(set: &[ObjectiveVector]) -> Result<Vec<u32>, ParetoError> {
    check_uniform_arity(set)?;
    let mut ranks = vec![1u32; set.len()];
    for i in 0..set.len() {
        for j in 0..set.len() {
            if i != j && dominates_raw(set[j].values(), set[i].values()) {
                ranks[i] += 1;
            }
        }
    }
    Ok(ranks)
}

/// Ranks a set of evaluated solutions, keyed by solution id.
pub fn pareto_rank<E>(set: &[EvaluatedSolution<E>]) -> Result<RankAssignment, ParetoError> {
    let objectives: Vec<ObjectiveVector> = set.iter().map(|s| s.objectives.clone()).collect();
    let ranks = pareto_rank_objectives(&objectives)?;
    Ok(RankAssignment {
        ranks: set
            .iter()
            .zip(ranks)
            .map(|(solution, rank)| (solution.id, rank))
            .collect(),
    })
}

/// Returns the indices of the rank-1 (non-dominated) subset, preserving input
/// order. Empty input yields an empty result.
pub fn non_dominated_indices(set: &[ObjectiveVector]) -> Result<Vec<usize>, ParetoError> {
    if set.is_empty() {
        return Ok(Vec::new());
    }
    let ranks = pareto_rank_objectives(set)?;
    Ok((0..set.len()).filter(|&i| ranks[i] == 1).collect())
}

/// Returns exactly the rank-1 subset of `set`, preserving input order.
pub fn non_dominated_filter<E: Clone>(
    set: &[EvaluatedSolution<E>],
) -> Result<Vec<EvaluatedSolution<E>>, ParetoError> {
    let objectives: Vec<ObjectiveVector> = set.iter().map(|s| s.objectives.clone()).collect();
    let keep = non_dominated_indices(&objectives)?;
    Ok(keep.into_iter().map(|i| set[i].clone()).collect())
}

/// Outcome of an archive insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InsertOutcome {
    /// Accepted; `removed` lists the ids of members the new solution displaced.
    Accepted { removed: Vec<u64> },
    /// Some member dominates the candidate.
    RejectedDominated { by: u64 },
    /// A member with an identical objective vector is already present
    /// (first-in wins; the archive is a set in objective space).
    RejectedDuplicate { of: u64 },
}

impl InsertOutcome {
    pub fn accepted(&self) -> bool {
        matches!(self, InsertOutcome::Accepted { .. })
    }
}

/// Mutually non-dominated set of evaluated solutions (the estimated front).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive<E> {
    arity: Option<usize>,
    members: Vec<EvaluatedSolution<E>>,
}

impl<E> Default for ParetoArchive<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> ParetoArchive<E> {
    pub fn new() -> Self {
        Self {
            arity: None,
            members: Vec::new(),
        }
    }

    pub fn members(&self) -> &[EvaluatedSolution<E>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Inserts `solution`, maintaining mutual non-dominance. Dominated members
    /// are pruned eagerly; duplicates in objective space are rejected.
    pub fn insert(&mut self, solution: EvaluatedSolution<E>) -> Result<InsertOutcome, ParetoError> {
        match self.arity {
            None => self.arity = Some(solution.objectives.arity()),
            Some(expected) => {
                if solution.objectives.arity() != expected {
                    return Err(ParetoError::ArityMismatch {
                        expected,
                        got: solution.objectives.arity(),
                    });
                }
            }
        }
        for member in &self.members {
            if member.objectives == solution.objectives {
                return Ok(InsertOutcome::RejectedDuplicate { of: member.id });
            }
            if dominates_raw(member.objectives.values(), solution.objectives.values()) {
                return Ok(InsertOutcome::RejectedDominated { by: member.id });
            }
        }
        let mut removed = Vec::new();
        self.members.retain(|member| {
            if dominates_raw(solution.objectives.values(), member.objectives.values()) {
                removed.push(member.id);
                false
            } else {
                true
            }
        });
        self.members.push(solution);
        Ok(InsertOutcome::Accepted { removed })
    }
}

/// Per-criterion (min, max) over a front, for normalization.
pub fn objective_ranges<E>(front: &[EvaluatedSolution<E>]) -> Vec<(f64, f64)> {
    let Some(first) = front.first() else {
        return Vec::new();
    };
    let mut ranges: Vec<(f64, f64)> = first.objectives.values().iter().map(|&v| (v, v)).collect();
    for solution in front {
        for (range, &v) in ranges.iter_mut().zip(solution.objectives.values()) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    ranges
}

fn normalized(values: &[f64], ranges: &[(f64, f64)]) -> Vec<f64> {
    values
        .iter()
        .zip(ranges)
        .map(|(&v, &(lo, hi))| {
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                // Degenerate criterion: contributes nothing to distances.
                0.0
            }
        })
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Picks `min(count, front.len())` members spreading over the trade-off range:
/// min-max normalize each criterion, start from the member with the smallest
/// normalized criterion sum, then greedily add the member farthest (max-min
/// distance) from the current selection. Ties break toward the lowest id.
/// Returns indices into `front` in selection order.
pub fn select_representatives<E>(
    front: &[EvaluatedSolution<E>],
    count: usize,
    ranges: &[(f64, f64)],
) -> Result<Vec<usize>, ParetoError> {
    if front.is_empty() {
        return Err(ParetoError::EmptySet);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let arity = front[0].objectives.arity();
    for solution in front {
        if solution.objectives.arity() != arity {
            return Err(ParetoError::ArityMismatch {
                expected: arity,
                got: solution.objectives.arity(),
            });
        }
    }
    if ranges.len() != arity {
        return Err(ParetoError::ArityMismatch {
            expected: arity,
            got: ranges.len(),
        });
    }

    let points: Vec<Vec<f64>> = front
        .iter()
        .map(|s| normalized(s.objectives.values(), ranges))
        .collect();

    let start = (0..front.len())
        .min_by(|&a, &b| {
            let sum_a: f64 = points[a].iter().sum();
            let sum_b: f64 = points[b].iter().sum();
            sum_a
                .partial_cmp(&sum_b)
                .unwrap()
                .then(front[a].id.cmp(&front[b].id))
        })
        .unwrap();

    let target = count.min(front.len());
    let mut selected = vec![start];
    let mut picked = vec![false; front.len()];
    picked[start] = true;
    // Min distance from each candidate to the selected set so far.
    let mut min_dist: Vec<f64> = points.iter().map(|p| distance(p, &points[start])).collect();

    while selected.len() < target {
        let next = (0..front.len())
            .filter(|&i| !picked[i])
            .max_by(|&a, &b| {
                min_dist[a]
                    .partial_cmp(&min_dist[b])
                    .unwrap()
                    .then(front[b].id.cmp(&front[a].id))
            })
            .unwrap();
        picked[next] = true;
        selected.push(next);
        for i in 0..front.len() {
            if !picked[i] {
                let d = distance(&points[i], &points[next]);
                if d < min_dist[i] {
                    min_dist[i] = d;
                }
            }
        }
    }
    Ok(selected)
}
