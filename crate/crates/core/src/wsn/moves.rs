//! Forwarding-pattern moves over the eligible nodes: swap, add, delete and
//! probability change.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{criteria, ForwardingSolution, WsnError, WsnProblem};
use crate::engine::SearchRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WsnMove {
    /// Stop forwarding at `from`, start at `to` with `from`'s probability.
    Swap { from: usize, to: usize },
    /// Start forwarding at `node` with the default level.
    Add { node: usize },
    /// Stop forwarding at `node`.
    Delete { node: usize },
    /// Change `node`'s forwarding probability to level index `to`.
    Level { node: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WsnAttribute {
    Node { node: usize, level: usize },
    AnyAdd,
    AnyDelete,
}

pub fn apply_move(
    problem: &WsnProblem,
    solution: &ForwardingSolution,
    mv: &WsnMove,
) -> ForwardingSolution {
    let mut next = solution.clone();
    match *mv {
        WsnMove::Swap { from, to } => {
            next.levels[to] = next.levels[from];
            next.levels[from] = 0;
        }
        WsnMove::Add { node } => next.levels[node] = problem.default_level,
        WsnMove::Delete { node } => next.levels[node] = 0,
        WsnMove::Level { node, to } => next.levels[node] = to,
    }
    next
}

/// All neighbors in a fixed order: swaps, adds, deletes, level changes. In
/// two-objective mode, neighbors that cannot deliver with certainty are
/// dropped.
pub fn neighborhood(
    problem: &WsnProblem,
    solution: &ForwardingSolution,
) -> Vec<(WsnMove, ForwardingSolution)> {
    let forwarders: Vec<usize> = problem
        .eligible()
        .iter()
        .copied()
        .filter(|&i| solution.levels[i] > 0)
        .collect();
    let idle: Vec<usize> = problem
        .eligible()
        .iter()
        .copied()
        .filter(|&i| solution.levels[i] == 0)
        .collect();

    let mut out = Vec::new();
    for &from in &forwarders {
        for &to in &idle {
            let mv = WsnMove::Swap { from, to };
            out.push((mv, apply_move(problem, solution, &mv)));
        }
    }
    for &node in &idle {
        let mv = WsnMove::Add { node };
        out.push((mv, apply_move(problem, solution, &mv)));
    }
    for &node in &forwarders {
        let mv = WsnMove::Delete { node };
        out.push((mv, apply_move(problem, solution, &mv)));
    }
    for &node in &forwarders {
        for to in 1..problem.levels.len() {
            if to != solution.levels[node] {
                let mv = WsnMove::Level { node, to };
                out.push((mv, apply_move(problem, solution, &mv)));
            }
        }
    }
    if problem.two_objective {
        out.retain(|(_, neighbor)| criteria(problem, neighbor).f_r == 0.0);
    }
    out
}

/// Cardinality for the three-objective mode:
/// `F(N-F) + (N-F) + F + F(P-2)` over `N` eligible nodes, `F` forwarders and
/// `P` probability levels.
pub fn neighborhood_size(eligible: usize, forwarders: usize, levels: usize) -> usize {
    let n = eligible;
    let f = forwarders;
    f * (n - f) + (n - f) + f + f * (levels - 2)
}

/// Token recorded after applying `mv`.
pub fn move_attribute(mv: &WsnMove, origin: &ForwardingSolution) -> WsnAttribute {
    match *mv {
        WsnMove::Swap { from, .. } => WsnAttribute::Node {
            node: from,
            level: origin.levels[from],
        },
        WsnMove::Add { .. } => WsnAttribute::AnyAdd,
        WsnMove::Delete { .. } => WsnAttribute::AnyDelete,
        WsnMove::Level { node, .. } => WsnAttribute::Node {
            node,
            level: origin.levels[node],
        },
    }
}

/// Token a candidate move is checked against.
pub fn probe_attribute(mv: &WsnMove, origin: &ForwardingSolution) -> WsnAttribute {
    match *mv {
        WsnMove::Swap { from, to } => WsnAttribute::Node {
            node: to,
            level: origin.levels[from],
        },
        WsnMove::Add { .. } => WsnAttribute::AnyAdd,
        WsnMove::Delete { .. } => WsnAttribute::AnyDelete,
        WsnMove::Level { node, to } => WsnAttribute::Node { node, level: to },
    }
}

/// Starting solutions: path `k` activates `initial_forwarders + k` eligible
/// nodes at the default level. In two-objective mode each start is resampled
/// until it delivers with certainty.
pub fn initial_front(
    problem: &WsnProblem,
    paths: usize,
    rng: &mut SearchRng,
) -> Result<Vec<ForwardingSolution>, WsnError> {
    let eligible = problem.eligible();
    let largest = problem.initial_forwarders + paths.saturating_sub(1);
    if largest > eligible.len() {
        return Err(WsnError::InitialFront(format!(
            "largest starting solution needs {largest} forwarders but only {} nodes are eligible",
            eligible.len()
        )));
    }
    let nodes = problem.topology.node_count();
    let mut front = Vec::with_capacity(paths);
    for k in 0..paths {
        let count = problem.initial_forwarders + k;
        let mut attempts = 0;
        loop {
            let mut solution = ForwardingSolution::all_zero(nodes);
            for picked in sample(rng, eligible.len(), count) {
                solution.levels[eligible[picked]] = problem.default_level;
            }
            if !problem.two_objective || criteria(problem, &solution).f_r == 0.0 {
                front.push(solution);
                break;
            }
            attempts += 1;
            if attempts >= 1000 {
                return Err(WsnError::InitialFront(format!(
                    "no certain-delivery start with {count} forwarders found in {attempts} draws"
                )));
            }
        }
    }
    Ok(front)
}
