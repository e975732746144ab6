//! The five-move neighborhood: swap, addition, deletion, power change and
//! direction change, plus the Tabu attributes that guard them.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{SiteAssignment, WlpError, WlpInstance, WlpSolution};
use crate::engine::SearchRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WlpMove {
    /// Deselect `from`, select `to` carrying over `from`'s power/direction.
    Swap { from: usize, to: usize },
    /// Select `site` with the instance default power/direction.
    Add { site: usize },
    /// Deselect `site`.
    Delete { site: usize },
    /// Change `site`'s power index to `to`.
    Power { site: usize, to: usize },
    /// Change `site`'s direction index to `to`.
    Direction { site: usize, to: usize },
}

/// Tabu token. Site tokens name a candidate site together with a power and
/// direction; the two sentinels make whole move classes taboo after an
/// addition or deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WlpAttribute {
    Site {
        site: usize,
        power: usize,
        direction: usize,
    },
    AnyAdd,
    AnyDelete,
}

fn on_values(solution: &WlpSolution, site: usize) -> (usize, usize) {
    match solution.assignments[site] {
        SiteAssignment::On { power, direction } => (power, direction),
        SiteAssignment::Off => panic!("site {site} is not selected"),
    }
}

pub fn apply_move(instance: &WlpInstance, solution: &WlpSolution, mv: &WlpMove) -> WlpSolution {
    let mut next = solution.clone();
    match *mv {
        WlpMove::Swap { from, to } => {
            next.assignments[to] = next.assignments[from];
            next.assignments[from] = SiteAssignment::Off;
        }
        WlpMove::Add { site } => {
            next.assignments[site] = SiteAssignment::On {
                power: instance.default_power,
                direction: instance.default_direction,
            };
        }
        WlpMove::Delete { site } => {
            next.assignments[site] = SiteAssignment::Off;
        }
        WlpMove::Power { site, to } => {
            let (_, direction) = on_values(solution, site);
            next.assignments[site] = SiteAssignment::On {
                power: to,
                direction,
            };
        }
        WlpMove::Direction { site, to } => {
            let (power, _) = on_values(solution, site);
            next.assignments[site] = SiteAssignment::On {
                power,
                direction: to,
            };
        }
    }
    next
}

/// All neighbors of `solution`, in a fixed order: swaps, additions,
/// deletions, power changes, direction changes. Additions are suppressed when
/// the instance caps the number of selected sites and the cap is reached.
pub fn neighborhood(instance: &WlpInstance, solution: &WlpSolution) -> Vec<(WlpMove, WlpSolution)> {
    let on: Vec<usize> = solution.on_sites().map(|(site, _, _)| site).collect();
    let off: Vec<usize> = (0..instance.site_count())
        .filter(|&i| solution.assignments[i] == SiteAssignment::Off)
        .collect();
    let at_cap = instance
        .max_active
        .is_some_and(|cap| solution.active_count() >= cap);

    let mut out = Vec::with_capacity(neighborhood_size(
        instance.site_count(),
        on.len(),
        instance.powers_dbm.len(),
        instance.directions_deg.len(),
    ));
    for &from in &on {
        for &to in &off {
            let mv = WlpMove::Swap { from, to };
            out.push((mv, apply_move(instance, solution, &mv)));
        }
    }
    if !at_cap {
        for &site in &off {
            let mv = WlpMove::Add { site };
            out.push((mv, apply_move(instance, solution, &mv)));
        }
    }
    for &site in &on {
        let mv = WlpMove::Delete { site };
        out.push((mv, apply_move(instance, solution, &mv)));
    }
    for &site in &on {
        let (power, _) = on_values(solution, site);
        for to in 0..instance.powers_dbm.len() {
            if to != power {
                let mv = WlpMove::Power { site, to };
                out.push((mv, apply_move(instance, solution, &mv)));
            }
        }
    }
    for &site in &on {
        let (_, direction) = on_values(solution, site);
        for to in 0..instance.directions_deg.len() {
            if to != direction {
                let mv = WlpMove::Direction { site, to };
                out.push((mv, apply_move(instance, solution, &mv)));
            }
        }
    }
    out
}

/// Neighborhood cardinality for an uncapped instance:
/// `N(M-N) + (M-N) + N + N(NP-1) + N(ND-1)`.
pub fn neighborhood_size(sites: usize, selected: usize, powers: usize, directions: usize) -> usize {
    let m = sites;
    let n = selected;
    n * (m - n) + (m - n) + n + n * (powers - 1) + n * (directions - 1)
}

/// Token recorded after applying `mv`: what the move removed, or the move
/// class for additions/deletions.
pub fn move_attribute(mv: &WlpMove, origin: &WlpSolution) -> WlpAttribute {
    match *mv {
        WlpMove::Swap { from, .. } => {
            let (power, direction) = on_values(origin, from);
            WlpAttribute::Site {
                site: from,
                power,
                direction,
            }
        }
        WlpMove::Add { .. } => WlpAttribute::AnyAdd,
        WlpMove::Delete { .. } => WlpAttribute::AnyDelete,
        WlpMove::Power { site, .. } | WlpMove::Direction { site, .. } => {
            let (power, direction) = on_values(origin, site);
            WlpAttribute::Site {
                site,
                power,
                direction,
            }
        }
    }
}

/// Token a candidate move is checked against: what the move would establish.
/// A swap re-selecting a recently removed site at its old settings, or a
/// power/direction change restoring a recent value, is taboo.
pub fn probe_attribute(mv: &WlpMove, origin: &WlpSolution) -> WlpAttribute {
    match *mv {
        WlpMove::Swap { from, to } => {
            let (power, direction) = on_values(origin, from);
            WlpAttribute::Site {
                site: to,
                power,
                direction,
            }
        }
        WlpMove::Add { .. } => WlpAttribute::AnyAdd,
        WlpMove::Delete { .. } => WlpAttribute::AnyDelete,
        WlpMove::Power { site, to } => {
            let (_, direction) = on_values(origin, site);
            WlpAttribute::Site {
                site,
                power: to,
                direction,
            }
        }
        WlpMove::Direction { site, to } => {
            let (power, _) = on_values(origin, site);
            WlpAttribute::Site {
                site,
                power,
                direction: to,
            }
        }
    }
}

/// Starting solutions: path `k` (zero-based) selects `first_count + k`
/// distinct sites uniformly at random, all at the default power/direction.
pub fn initial_front(
    instance: &WlpInstance,
    paths: usize,
    first_count: usize,
    rng: &mut SearchRng,
) -> Result<Vec<WlpSolution>, WlpError> {
    let m = instance.site_count();
    let largest = first_count + paths.saturating_sub(1);
    if largest > m {
        return Err(WlpError::InitialFront(format!(
            "largest starting solution needs {largest} sites but only {m} exist"
        )));
    }
    if let Some(cap) = instance.max_active {
        if largest > cap {
            return Err(WlpError::InitialFront(format!(
                "largest starting solution needs {largest} sites, above the cap of {cap}"
            )));
        }
    }
    let mut front = Vec::with_capacity(paths);
    for k in 0..paths {
        let count = first_count + k;
        let mut solution = WlpSolution::empty(m);
        for site in sample(rng, m, count) {
            solution.assignments[site] = SiteAssignment::On {
                power: instance.default_power,
                direction: instance.default_direction,
            };
        }
        front.push(solution);
    }
    Ok(front)
}
