//! Wireless-sensor-network forwarding evaluation.
//!
//! Each node rebroadcasts received packets with a probability drawn from a
//! discrete level set whose endpoints are 0 and 1. Robustness, delay and
//! energy of a source-to-destination flow are computed by a hop-bounded
//! dynamic program over per-link success probabilities; a Monte-Carlo oracle
//! simulating the same generative assumptions validates the recursion.

mod criteria;
mod moves;
mod oracle;

pub use criteria::{
    criteria, delay_from_table, energy, evaluate, expected_interference, link_success, reach_table,
    robustness_from_table, ReachTable, WsnCriteria,
};
pub use moves::{
    apply_move, initial_front, move_attribute, neighborhood, neighborhood_size, probe_attribute,
    WsnAttribute, WsnMove,
};
pub use oracle::{monte_carlo_oracle, z_scores, McEstimate};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, ProblemAdapter, SearchRng};
use crate::export::fmt_f64;
use crate::pareto::ObjectiveVector;

#[derive(Debug, Error)]
pub enum WsnError {
    #[error("invalid wsn instance: {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("initial front: {0}")]
    InitialFront(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> WsnError {
    WsnError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

fn positive(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

fn non_negative(value: f64) -> bool {
    value.is_finite() && value >= 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WsnTopology {
    /// Node positions, meters.
    pub positions: Vec<[f64; 2]>,
    /// Per-node transmit power, watts.
    pub tx_power_w: Vec<f64>,
    /// Per-node energy spent on one forwarding transmission, joules.
    pub tx_energy_j: Vec<f64>,
    /// Nodes inside the communication disk; only these transmit, receive or
    /// relay.
    pub communicating: Vec<bool>,
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
}

impl WsnTopology {
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let dx = self.positions[a][0] - self.positions[b][0];
        let dy = self.positions[a][1] - self.positions[b][1];
        (dx * dx + dy * dy).sqrt()
    }

    /// Forwarding-eligible nodes: communicating, neither source nor sink.
    pub fn eligible(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| {
                self.communicating[i]
                    && !self.sources.contains(&i)
                    && !self.destinations.contains(&i)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), WsnError> {
        let n = self.node_count();
        if n < 2 {
            return Err(invalid("nodes", "at least two nodes required"));
        }
        if self.tx_power_w.len() != n
            || self.tx_energy_j.len() != n
            || self.communicating.len() != n
        {
            return Err(invalid("nodes", "per-node vectors must match node count"));
        }
        if !self.tx_power_w.iter().all(|&p| positive(p)) {
            return Err(invalid("tx_power_w", "powers must be positive"));
        }
        if !self.tx_energy_j.iter().all(|&e| non_negative(e)) {
            return Err(invalid("tx_energy_j", "energies must be non-negative"));
        }
        if self.destinations.is_empty() {
            return Err(invalid("destinations", "at least one destination required"));
        }
        if self.sources.is_empty() {
            return Err(invalid("sources", "at least one source required"));
        }
        for &s in &self.sources {
            if s >= n || !self.communicating[s] {
                return Err(invalid("sources", format!("node {s} is not communicating")));
            }
            if self.destinations.contains(&s) {
                return Err(invalid(
                    "sources",
                    "sources and destinations must be disjoint",
                ));
            }
        }
        for &d in &self.destinations {
            if d >= n || !self.communicating[d] {
                return Err(invalid(
                    "destinations",
                    format!("node {d} is not communicating"),
                ));
            }
        }
        Ok(())
    }
}

/// Draws `count` node positions uniformly over the disk of area
/// `count / density` centered at the origin; nodes within `comm_radius` of
/// the center are the communicating set.
pub fn generate_topology(
    density: f64,
    count: usize,
    comm_radius: f64,
    seed: u64,
    tx_power_w: f64,
    tx_energy_j: f64,
) -> WsnTopology {
    assert!(density > 0.0 && count >= 2);
    let disk_radius = (count as f64 / density / std::f64::consts::PI).sqrt();
    let mut rng = crate::engine::seeded_rng(seed, 0);
    let positions: Vec<[f64; 2]> = (0..count)
        .map(|_| {
            let radius = disk_radius * rng.random::<f64>().sqrt();
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    let communicating = positions
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() <= comm_radius)
        .collect();
    WsnTopology {
        positions,
        tx_power_w: vec![tx_power_w; count],
        tx_energy_j: vec![tx_energy_j; count],
        communicating,
        sources: Vec::new(),
        destinations: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Path loss exponent for the linear attenuation `a = d^-alpha`.
    pub path_loss_exponent: f64,
    /// Distances below this are clamped to it, capping attenuation at 1.
    pub reference_distance_m: f64,
    /// Probability that an interferer's packet collides at the receiver
    /// (about 1/F for a spreading factor F).
    pub gamma: f64,
    /// Receiver noise power, watts.
    pub noise_w: f64,
    /// Link-success steepness: p = exp(-beta * packet_length / SINR).
    pub beta: f64,
    pub packet_length: u32,
}

impl LinkModel {
    pub fn attenuation(&self, distance: f64) -> f64 {
        distance
            .max(self.reference_distance_m)
            .powf(-self.path_loss_exponent)
    }

    pub fn validate(&self) -> Result<(), WsnError> {
        if !positive(self.path_loss_exponent) {
            return Err(invalid("link.path_loss_exponent", "must be positive"));
        }
        if !positive(self.reference_distance_m) {
            return Err(invalid("link.reference_distance_m", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("link.gamma", "must lie in [0, 1]"));
        }
        if !non_negative(self.noise_w) {
            return Err(invalid("link.noise_w", "must be non-negative"));
        }
        if !non_negative(self.beta) {
            return Err(invalid("link.beta", "must be non-negative"));
        }
        if self.packet_length == 0 {
            return Err(invalid("link.packet_length", "must be at least 1"));
        }
        Ok(())
    }
}

/// Length-N vector of forwarding-probability level indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForwardingSolution {
    pub levels: Vec<usize>,
}

impl ForwardingSolution {
    pub fn all_zero(nodes: usize) -> Self {
        Self {
            levels: vec![0; nodes],
        }
    }
}

pub struct WsnProblem {
    pub topology: WsnTopology,
    pub link: LinkModel,
    /// Discrete forwarding probabilities, strictly increasing from 0 to 1.
    pub levels: Vec<f64>,
    /// Level index an add move assigns.
    pub default_level: usize,
    /// Forwarder count of the first path's start; path k starts with
    /// `initial_forwarders + k` forwarders.
    pub initial_forwarders: usize,
    /// Hop bound H_max of the criteria recursions.
    pub max_hops: usize,
    /// Drop solutions that do not deliver with certainty and optimize
    /// (delay, energy) only.
    pub two_objective: bool,
    eligible: Vec<usize>,
    eligible_mask: Vec<bool>,
}

impl WsnProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        topology: WsnTopology,
        link: LinkModel,
        levels: Vec<f64>,
        default_level: usize,
        initial_forwarders: usize,
        max_hops: usize,
        two_objective: bool,
    ) -> Result<Self, WsnError> {
        topology.validate()?;
        link.validate()?;
        if levels.len() < 2 {
            return Err(invalid("levels", "at least two levels required"));
        }
        if levels[0] != 0.0 {
            return Err(invalid("levels", "first level must be 0"));
        }
        if *levels.last().unwrap() != 1.0 {
            return Err(invalid("levels", "last level must be 1"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("levels", "levels must be strictly increasing"));
        }
        if default_level == 0 || default_level >= levels.len() {
            return Err(invalid("default_level", "must name a nonzero level"));
        }
        if max_hops < 1 {
            return Err(invalid("max_hops", "must be at least 1"));
        }
        let eligible = topology.eligible();
        let mut eligible_mask = vec![false; topology.node_count()];
        for &i in &eligible {
            eligible_mask[i] = true;
        }
        Ok(Self {
            topology,
            link,
            levels,
            default_level,
            initial_forwarders,
            max_hops,
            two_objective,
            eligible,
            eligible_mask,
        })
    }

    pub fn eligible(&self) -> &[usize] {
        &self.eligible
    }

    /// Effective forwarding probability of `node`: sources, destinations and
    /// non-communicating nodes never forward regardless of their entry.
    pub fn x(&self, solution: &ForwardingSolution, node: usize) -> f64 {
        if self.eligible_mask[node] {
            self.levels[solution.levels[node]]
        } else {
            0.0
        }
    }

    pub fn forwarder_count(&self, solution: &ForwardingSolution) -> usize {
        self.eligible
            .iter()
            .filter(|&&i| solution.levels[i] > 0)
            .count()
    }
}

impl ProblemAdapter for WsnProblem {
    type Solution = ForwardingSolution;
    type Move = WsnMove;
    type Attribute = WsnAttribute;

    fn objective_arity(&self) -> usize {
        if self.two_objective {
            2
        } else {
            3
        }
    }

    fn criteria_names(&self) -> Vec<String> {
        if self.two_objective {
            vec!["f_d".into(), "f_e".into()]
        } else {
            vec!["f_r".into(), "f_d".into(), "f_e".into()]
        }
    }

    fn initial_front(
        &self,
        paths: usize,
        rng: &mut SearchRng,
    ) -> Result<Vec<ForwardingSolution>, EngineError> {
        initial_front(self, paths, rng).map_err(|e| EngineError::InitialFront(e.to_string()))
    }

    fn evaluate(&self, solution: &ForwardingSolution) -> ObjectiveVector {
        evaluate(self, solution)
    }

    fn neighborhood(&self, solution: &ForwardingSolution) -> Vec<(WsnMove, ForwardingSolution)> {
        neighborhood(self, solution)
    }

    fn move_attribute(&self, mv: &WsnMove, origin: &ForwardingSolution) -> WsnAttribute {
        move_attribute(mv, origin)
    }

    fn probe_attribute(&self, mv: &WsnMove, origin: &ForwardingSolution) -> WsnAttribute {
        probe_attribute(mv, origin)
    }

    fn subset_label(&self, solution: &ForwardingSolution) -> u64 {
        self.forwarder_count(solution) as u64
    }

    fn encode(&self, solution: &ForwardingSolution) -> String {
        solution
            .levels
            .iter()
            .map(|&l| fmt_f64(self.levels[l]))
            .collect::<Vec<_>>()
            .join(";")
    }
}
