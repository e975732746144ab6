//! Scenario files: one TOML document fully describes a run — problem kind,
//! problem parameters and search settings. Unknown keys are rejected and all
//! cross-field rules are checked before any computation starts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::PmotsConfig;
use crate::toy::ToyProblem;
use crate::wlp::{
    block_grid, CoverageTensor, Orientation, PenaltyProfile, RadioParams, RateTier, Wall,
    WlpInstance, WlpProblem,
};
use crate::wsn::{generate_topology, LinkModel, WsnProblem, WsnTopology};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {path}: {reason}")]
    Field { path: String, reason: String },
}

fn field(path: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        path: path.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Toy,
    Wlp,
    Wsn,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmotsSection {
    pub paths: usize,
    pub iterations: u64,
    pub rank_max: u32,
    pub tenure_min: u32,
    pub tenure_max: u32,
    #[serde(default)]
    pub aspiration_non_dominated: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySection {
    pub size: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorSection {
    pub width_px: u32,
    pub height_px: u32,
    pub block_px: u32,
    pub pixel_scale_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSection {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub loss_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub reference_loss_db: f64,
    pub exponent: f64,
    #[serde(default = "default_reference_distance")]
    pub reference_distance_m: f64,
    #[serde(default)]
    pub peak_gain_dbi: f64,
    #[serde(default)]
    pub front_to_back_db: f64,
    #[serde(default = "default_noise_floor")]
    pub noise_floor_dbm: f64,
}

fn default_reference_distance() -> f64 {
    1.0
}

fn default_noise_floor() -> f64 {
    -100.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub s_min: f64,
    pub s_max: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub coverage: ProfileSection,
    pub interference: ProfileSection,
    pub qos: ProfileSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSection {
    pub min_snr_db: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WlpSection {
    pub sites: Vec<[f64; 2]>,
    pub powers_dbm: Vec<f64>,
    #[serde(default = "default_directions")]
    pub directions_deg: Vec<f64>,
    pub floor: FloorSection,
    #[serde(default)]
    pub walls: Vec<WallSection>,
    pub radio: RadioSection,
    pub penalties: PenaltySection,
    pub rate_tiers: Vec<TierSection>,
    pub user_load: f64,
    pub initial_sites: usize,
    #[serde(default)]
    pub default_power: usize,
    #[serde(default)]
    pub default_direction: usize,
    #[serde(default)]
    pub max_active: Option<usize>,
}

fn default_directions() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub position: [f64; 2],
    pub tx_power_w: f64,
    pub tx_energy_j: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub density: f64,
    pub count: usize,
    pub seed: u64,
    pub tx_power_w: f64,
    pub tx_energy_j: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub path_loss_exponent: f64,
    #[serde(default = "default_reference_distance")]
    pub reference_distance_m: f64,
    /// Collision probability of an interfering packet; alternatively give
    /// `spreading_factor` for gamma = 1/F.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub spreading_factor: Option<f64>,
    pub noise_w: f64,
    pub beta: f64,
    #[serde(default = "default_packet_length")]
    pub packet_length: u32,
}

fn default_packet_length() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsnSection {
    #[serde(default)]
    pub nodes: Vec<NodeSection>,
    #[serde(default)]
    pub generate: Option<GenerateSection>,
    /// Communication-disk radius defining which nodes participate.
    pub radius: f64,
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
    pub probability_levels: Vec<f64>,
    #[serde(default)]
    pub default_level: Option<usize>,
    pub initial_forwarders: usize,
    pub max_hops: usize,
    #[serde(default)]
    pub two_objective: bool,
    pub link: LinkSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: ProblemKind,
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub pmots: PmotsSection,
    #[serde(default)]
    pub toy: Option<ToySection>,
    #[serde(default)]
    pub wlp: Option<WlpSection>,
    #[serde(default)]
    pub wsn: Option<WsnSection>,
}

fn default_threads() -> usize {
    1
}

/// A problem built from a scenario, ready for the engine or the oracle.
pub enum BuiltProblem {
    Toy(ToyProblem),
    Wlp(WlpProblem),
    Wsn(WsnProblem),
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    /// Reads and validates a scenario, returning it with the raw bytes (the
    /// manifest hashes them).
    pub fn load(path: &Path) -> Result<(Self, String), ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let file = Self::parse(&text)?;
        Ok((file, text))
    }

    pub fn pmots_config(&self) -> PmotsConfig {
        PmotsConfig {
            paths: self.pmots.paths,
            iterations: self.pmots.iterations,
            rank_max: self.pmots.rank_max,
            tenure_min: self.pmots.tenure_min,
            tenure_max: self.pmots.tenure_max,
            seed: self.seed,
            aspiration_non_dominated: self.pmots.aspiration_non_dominated,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.pmots.paths < 1 {
            return Err(field("pmots.paths", "must be at least 1"));
        }
        if self.pmots.rank_max < 1 {
            return Err(field("pmots.rank_max", "must be at least 1"));
        }
        if self.pmots.tenure_min < 1 {
            return Err(field("pmots.tenure_min", "must be at least 1"));
        }
        if self.pmots.tenure_min > self.pmots.tenure_max {
            return Err(field(
                "pmots.tenure_min",
                format!(
                    "must not exceed pmots.tenure_max ({} > {})",
                    self.pmots.tenure_min, self.pmots.tenure_max
                ),
            ));
        }
        if self.threads < 1 {
            return Err(field("threads", "must be at least 1"));
        }
        match self.kind {
            ProblemKind::Toy => {
                let section = self
                    .toy
                    .as_ref()
                    .ok_or_else(|| field("toy", "section required for kind = \"toy\""))?;
                if section.size < 1 {
                    return Err(field("toy.size", "must be at least 1"));
                }
            }
            ProblemKind::Wlp => {
                let section = self
                    .wlp
                    .as_ref()
                    .ok_or_else(|| field("wlp", "section required for kind = \"wlp\""))?;
                if section.floor.width_px == 0
                    || section.floor.height_px == 0
                    || section.floor.block_px == 0
                {
                    return Err(field("wlp.floor", "dimensions must be positive"));
                }
                if !(section.floor.pixel_scale_m.is_finite() && section.floor.pixel_scale_m > 0.0) {
                    return Err(field("wlp.floor.pixel_scale_m", "must be positive"));
                }
            }
            ProblemKind::Wsn => {
                let section = self
                    .wsn
                    .as_ref()
                    .ok_or_else(|| field("wsn", "section required for kind = \"wsn\""))?;
                if section.nodes.is_empty() && section.generate.is_none() {
                    return Err(field("wsn", "give either nodes or a generate section"));
                }
                if !section.nodes.is_empty() && section.generate.is_some() {
                    return Err(field("wsn", "nodes and generate are mutually exclusive"));
                }
                if !(section.radius.is_finite() && section.radius > 0.0) {
                    return Err(field("wsn.radius", "must be positive"));
                }
                match (section.link.gamma, section.link.spreading_factor) {
                    (Some(_), Some(_)) => {
                        return Err(field(
                            "wsn.link.gamma",
                            "give either gamma or spreading_factor, not both",
                        ));
                    }
                    (None, None) => {
                        return Err(field(
                            "wsn.link.gamma",
                            "either gamma or spreading_factor is required",
                        ));
                    }
                    (None, Some(f)) if !(f.is_finite() && f >= 1.0) => {
                        return Err(field("wsn.link.spreading_factor", "must be at least 1"));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Builds the problem model. WLP coverage tensors are generated afresh;
    /// use [`ScenarioFile::build_wlp_instance`] plus a cached tensor to skip
    /// the generation.
    pub fn build(&self) -> Result<BuiltProblem, ScenarioError> {
        match self.kind {
            ProblemKind::Toy => {
                let section = self.toy.as_ref().expect("validated");
                Ok(BuiltProblem::Toy(ToyProblem { size: section.size }))
            }
            ProblemKind::Wlp => {
                let section = self.wlp.as_ref().expect("validated");
                let instance = self.build_wlp_instance()?;
                let problem = WlpProblem::new(instance, section.initial_sites)
                    .map_err(|e| field("wlp", e.to_string()))?;
                Ok(BuiltProblem::Wlp(problem))
            }
            ProblemKind::Wsn => Ok(BuiltProblem::Wsn(self.build_wsn_problem()?)),
        }
    }

    pub fn build_wlp_instance(&self) -> Result<WlpInstance, ScenarioError> {
        let section = self
            .wlp
            .as_ref()
            .ok_or_else(|| field("wlp", "section required"))?;
        let instance = WlpInstance {
            sites: section.sites.clone(),
            powers_dbm: section.powers_dbm.clone(),
            directions_deg: section.directions_deg.clone(),
            blocks: block_grid(
                section.floor.width_px,
                section.floor.height_px,
                section.floor.block_px,
                section.floor.pixel_scale_m,
            ),
            walls: section
                .walls
                .iter()
                .map(|w| Wall {
                    from: w.from,
                    to: w.to,
                    loss_db: w.loss_db,
                })
                .collect(),
            radio: RadioParams {
                reference_loss_db: section.radio.reference_loss_db,
                exponent: section.radio.exponent,
                reference_distance_m: section.radio.reference_distance_m,
                peak_gain_dbi: section.radio.peak_gain_dbi,
                front_to_back_db: section.radio.front_to_back_db,
                noise_floor_dbm: section.radio.noise_floor_dbm,
            },
            coverage_profile: PenaltyProfile {
                s_min: section.penalties.coverage.s_min,
                s_max: section.penalties.coverage.s_max,
                delta: section.penalties.coverage.delta,
                orientation: Orientation::UtilityMaximized,
            },
            interference_profile: PenaltyProfile {
                s_min: section.penalties.interference.s_min,
                s_max: section.penalties.interference.s_max,
                delta: section.penalties.interference.delta,
                orientation: Orientation::UtilityMinimized,
            },
            qos_profile: PenaltyProfile {
                s_min: section.penalties.qos.s_min,
                s_max: section.penalties.qos.s_max,
                delta: section.penalties.qos.delta,
                orientation: Orientation::UtilityMaximized,
            },
            rate_tiers: section
                .rate_tiers
                .iter()
                .map(|t| RateTier {
                    min_snr_db: t.min_snr_db,
                    rate_bps: t.rate_bps,
                })
                .collect(),
            user_load: section.user_load,
            default_power: section.default_power,
            default_direction: section.default_direction,
            max_active: section.max_active,
        };
        instance
            .validate()
            .map_err(|e| field("wlp", e.to_string()))?;
        Ok(instance)
    }

    /// Builds the WLP problem reusing `tensor` instead of regenerating it.
    pub fn build_wlp_with_tensor(
        &self,
        tensor: CoverageTensor,
    ) -> Result<WlpProblem, ScenarioError> {
        let section = self.wlp.as_ref().expect("validated");
        let instance = self.build_wlp_instance()?;
        WlpProblem::with_tensor(instance, tensor, section.initial_sites)
            .map_err(|e| field("wlp", e.to_string()))
    }

    fn build_wsn_problem(&self) -> Result<WsnProblem, ScenarioError> {
        let section = self.wsn.as_ref().expect("validated");
        let mut topology = if let Some(generate) = &section.generate {
            generate_topology(
                generate.density,
                generate.count,
                section.radius,
                generate.seed,
                generate.tx_power_w,
                generate.tx_energy_j,
            )
        } else {
            let positions: Vec<[f64; 2]> = section.nodes.iter().map(|n| n.position).collect();
            let communicating = positions
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() <= section.radius)
                .collect();
            WsnTopology {
                positions,
                tx_power_w: section.nodes.iter().map(|n| n.tx_power_w).collect(),
                tx_energy_j: section.nodes.iter().map(|n| n.tx_energy_j).collect(),
                communicating,
                sources: Vec::new(),
                destinations: Vec::new(),
            }
        };
        topology.sources = section.sources.clone();
        topology.destinations = section.destinations.clone();

        let gamma = match (section.link.gamma, section.link.spreading_factor) {
            (Some(g), None) => g,
            (None, Some(f)) => 1.0 / f,
            _ => unreachable!("validated"),
        };
        let link = LinkModel {
            path_loss_exponent: section.link.path_loss_exponent,
            reference_distance_m: section.link.reference_distance_m,
            gamma,
            noise_w: section.link.noise_w,
            beta: section.link.beta,
            packet_length: section.link.packet_length,
        };
        let default_level = section
            .default_level
            .unwrap_or(section.probability_levels.len().saturating_sub(1));
        WsnProblem::new(
            topology,
            link,
            section.probability_levels.clone(),
            default_level,
            section.initial_forwarders,
            section.max_hops,
            section.two_objective,
        )
        .map_err(|e| field("wsn", e.to_string()))
    }
}
