//! Wireless-LAN access-point planning.
//!
//! A solution assigns each of M candidate sites either `Off` or a (power,
//! direction) pair drawn from discrete sets. Received power per site and
//! evaluation block is precomputed into a [`CoverageTensor`]; the three
//! criteria (coverage, interference mitigation, throughput provision) are
//! quadratic weighted penalty sums over the blocks, all minimized.

mod criteria;
mod moves;
mod radio;

pub use criteria::{
    criterion, evaluate, penalty, utility_coverage, utility_interference, utility_qos_all,
};
pub use moves::{
    apply_move, initial_front, move_attribute, neighborhood, neighborhood_size, probe_attribute,
    WlpAttribute, WlpMove,
};
pub use radio::{segments_intersect, CoverageTensor};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, ProblemAdapter, SearchRng};
use crate::pareto::ObjectiveVector;

#[derive(Debug, Error)]
pub enum WlpError {
    #[error("invalid wlp instance: {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("initial front: {0}")]
    InitialFront(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> WlpError {
    WlpError::Invalid {
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteAssignment {
    Off,
    On { power: usize, direction: usize },
}

/// Length-M vector of site assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WlpSolution {
    pub assignments: Vec<SiteAssignment>,
}

impl WlpSolution {
    pub fn empty(sites: usize) -> Self {
        Self {
            assignments: vec![SiteAssignment::Off; sites],
        }
    }

    /// N(S): number of selected sites.
    pub fn active_count(&self) -> usize {
        self.assignments
            .iter()
            .filter(|a| matches!(a, SiteAssignment::On { .. }))
            .count()
    }

    pub fn on_sites(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a {
                SiteAssignment::On { power, direction } => Some((i, *power, *direction)),
                SiteAssignment::Off => None,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Orientation {
    /// Higher utility is better: zero penalty at and above `s_max`.
    UtilityMaximized,
    /// Lower utility is better: zero penalty at and below `s_min`.
    UtilityMinimized,
}

/// Piecewise-linear penalty profile: flat zero beyond the satisfied
/// threshold, flat `delta` beyond the violated one, linear in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyProfile {
    pub s_min: f64,
    pub s_max: f64,
    pub delta: f64,
    pub orientation: Orientation,
}

impl PenaltyProfile {
    fn validate(&self, field: &str) -> Result<(), WlpError> {
        if !(self.s_min.is_finite() && self.s_max.is_finite() && self.delta.is_finite()) {
            return Err(invalid(field, "thresholds must be finite"));
        }
        if self.s_min >= self.s_max {
            return Err(invalid(field, "s_min must be strictly below s_max"));
        }
        if self.delta <= 0.0 {
            return Err(invalid(field, "delta must be positive"));
        }
        Ok(())
    }
}

/// One rectangular evaluation block: pixel origin/size plus derived center
/// (meters) and weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub origin_px: [u32; 2],
    pub size_px: [u32; 2],
    pub center_m: [f64; 2],
    pub weight: f64,
}

/// Tiles a `width_px` x `height_px` floor into blocks of at most
/// `block_px` x `block_px` pixels (edge blocks may be smaller). Weights are
/// pixel areas normalized so they sum to the number of blocks.
pub fn block_grid(width_px: u32, height_px: u32, block_px: u32, pixel_scale_m: f64) -> Vec<Block> {
    assert!(width_px > 0 && height_px > 0 && block_px > 0 && pixel_scale_m > 0.0);
    let mut blocks = Vec::new();
    let mut y = 0;
    while y < height_px {
        let sy = block_px.min(height_px - y);
        let mut x = 0;
        while x < width_px {
            let sx = block_px.min(width_px - x);
            blocks.push(Block {
                origin_px: [x, y],
                size_px: [sx, sy],
                center_m: [
                    (f64::from(x) + f64::from(sx) / 2.0) * pixel_scale_m,
                    (f64::from(y) + f64::from(sy) / 2.0) * pixel_scale_m,
                ],
                weight: f64::from(sx) * f64::from(sy),
            });
            x += sx;
        }
        y += sy;
    }
    let total: f64 = blocks.iter().map(|b| b.weight).sum();
    let count = blocks.len() as f64;
    for block in &mut blocks {
        block.weight = block.weight * count / total;
    }
    blocks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Path loss at the reference distance, dB.
    pub reference_loss_db: f64,
    /// Log-distance path loss exponent.
    pub exponent: f64,
    /// Reference distance d0, meters. Distances below d0 are clamped to it.
    pub reference_distance_m: f64,
    /// Antenna peak gain, dBi, along the selected azimuth.
    pub peak_gain_dbi: f64,
    /// Front-to-back ratio of the cosine-lobe pattern, dB. Zero gives an
    /// omni-directional antenna.
    pub front_to_back_db: f64,
    /// Degenerate utility when too few sites are active, dBm.
    pub noise_floor_dbm: f64,
}

/// SNR threshold (dB) above which `rate_bps` is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTier {
    pub min_snr_db: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlpInstance {
    /// Candidate site positions, meters.
    pub sites: Vec<[f64; 2]>,
    /// Discrete transmit power set, dBm.
    pub powers_dbm: Vec<f64>,
    /// Discrete emission azimuth set, degrees.
    pub directions_deg: Vec<f64>,
    pub blocks: Vec<Block>,
    pub walls: Vec<Wall>,
    pub radio: RadioParams,
    pub coverage_profile: PenaltyProfile,
    pub interference_profile: PenaltyProfile,
    pub qos_profile: PenaltyProfile,
    /// SNR-to-nominal-rate table, ascending in `min_snr_db`.
    pub rate_tiers: Vec<RateTier>,
    /// Number of users uniformly distributed over the floor (N_r).
    pub user_load: f64,
    /// Power index new sites enter with on an addition move.
    pub default_power: usize,
    /// Direction index new sites enter with.
    pub default_direction: usize,
    /// Optional hard cap on the number of selected sites; addition moves are
    /// suppressed at the cap. `None` leaves N free up to M.
    pub max_active: Option<usize>,
}

impl WlpInstance {
    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn validate(&self) -> Result<(), WlpError> {
        if self.sites.is_empty() {
            return Err(invalid("sites", "at least one candidate site required"));
        }
        if self.powers_dbm.is_empty() {
            return Err(invalid(
                "powers_dbm",
                "at least one transmit power required",
            ));
        }
        if self.directions_deg.is_empty() {
            return Err(invalid("directions_deg", "at least one direction required"));
        }
        if self.blocks.is_empty() {
            return Err(invalid("blocks", "at least one block required"));
        }
        for (l, block) in self.blocks.iter().enumerate() {
            if !positive(block.weight) {
                return Err(invalid(
                    "blocks",
                    format!("block {l} weight must be positive"),
                ));
            }
        }
        self.coverage_profile.validate("coverage_profile")?;
        self.interference_profile.validate("interference_profile")?;
        self.qos_profile.validate("qos_profile")?;
        if !positive(self.radio.reference_distance_m) {
            return Err(invalid("radio.reference_distance_m", "must be positive"));
        }
        if !(self.user_load.is_finite() && self.user_load >= 1.0) {
            return Err(invalid("user_load", "must be at least 1"));
        }
        if self.default_power >= self.powers_dbm.len() {
            return Err(invalid("default_power", "index out of range"));
        }
        if self.default_direction >= self.directions_deg.len() {
            return Err(invalid("default_direction", "index out of range"));
        }
        for pair in self.rate_tiers.windows(2) {
            if pair[1].min_snr_db <= pair[0].min_snr_db {
                return Err(invalid(
                    "rate_tiers",
                    "min_snr_db must be strictly increasing",
                ));
            }
        }
        for (i, tier) in self.rate_tiers.iter().enumerate() {
            if !non_negative(tier.rate_bps) {
                return Err(invalid(
                    "rate_tiers",
                    format!("tier {i} rate must be non-negative"),
                ));
            }
        }
        if let Some(cap) = self.max_active {
            if cap > self.sites.len() {
                return Err(invalid("max_active", "exceeds the number of sites"));
            }
        }
        for wall in &self.walls {
            if !non_negative(wall.loss_db) {
                return Err(invalid("walls", "wall loss must be non-negative"));
            }
        }
        Ok(())
    }
}

/// The planning problem bound to its precomputed coverage tensor.
pub struct WlpProblem {
    pub instance: WlpInstance,
    pub tensor: CoverageTensor,
    /// Selected-site count of the first path's starting solution; path k
    /// starts with `initial_sites + k` selected sites.
    pub initial_sites: usize,
}

impl WlpProblem {
    pub fn new(instance: WlpInstance, initial_sites: usize) -> Result<Self, WlpError> {
        instance.validate()?;
        let tensor = CoverageTensor::generate(&instance);
        Ok(Self {
            instance,
            tensor,
            initial_sites,
        })
    }

    pub fn with_tensor(
        instance: WlpInstance,
        tensor: CoverageTensor,
        initial_sites: usize,
    ) -> Result<Self, WlpError> {
        instance.validate()?;
        Ok(Self {
            instance,
            tensor,
            initial_sites,
        })
    }
}

impl ProblemAdapter for WlpProblem {
    type Solution = WlpSolution;
    type Move = WlpMove;
    type Attribute = WlpAttribute;

    fn objective_arity(&self) -> usize {
        3
    }

    fn criteria_names(&self) -> Vec<String> {
        vec!["f_cov".into(), "f_i".into(), "f_qos".into()]
    }

    fn initial_front(
        &self,
        paths: usize,
        rng: &mut SearchRng,
    ) -> Result<Vec<WlpSolution>, EngineError> {
        initial_front(&self.instance, paths, self.initial_sites, rng)
            .map_err(|e| EngineError::InitialFront(e.to_string()))
    }

    fn evaluate(&self, solution: &WlpSolution) -> ObjectiveVector {
        evaluate(&self.instance, &self.tensor, solution)
    }

    fn neighborhood(&self, solution: &WlpSolution) -> Vec<(WlpMove, WlpSolution)> {
        neighborhood(&self.instance, solution)
    }

    fn move_attribute(&self, mv: &WlpMove, origin: &WlpSolution) -> WlpAttribute {
        move_attribute(mv, origin)
    }

    fn probe_attribute(&self, mv: &WlpMove, origin: &WlpSolution) -> WlpAttribute {
        probe_attribute(mv, origin)
    }

    fn subset_label(&self, solution: &WlpSolution) -> u64 {
        solution.active_count() as u64
    }

    fn encode(&self, solution: &WlpSolution) -> String {
        solution
            .assignments
            .iter()
            .map(|a| match a {
                SiteAssignment::Off => "-".to_string(),
                SiteAssignment::On { power, direction } => format!("{power}/{direction}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}
