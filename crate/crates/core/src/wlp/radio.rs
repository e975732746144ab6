//! Coverage tensor generation: log-distance path loss, straight-line wall
//! losses and a parametric cosine-lobe antenna pattern.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{WlpError, WlpInstance};

/// Mean received power (dBm) at block `l` from site `k` transmitting with
/// power index `p` and direction index `d`, precomputed for all combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTensor {
    sites: usize,
    powers: usize,
    directions: usize,
    blocks: usize,
    values: Vec<f64>,
}

impl CoverageTensor {
    pub fn generate(instance: &WlpInstance) -> Self {
        let sites = instance.sites.len();
        let powers = instance.powers_dbm.len();
        let directions = instance.directions_deg.len();
        let blocks = instance.blocks.len();
        let radio = &instance.radio;

        let mut values = Vec::with_capacity(sites * powers * directions * blocks);
        for (k, site) in instance.sites.iter().enumerate() {
            // Wall loss and geometry depend only on (site, block); hoist them.
            let per_block: Vec<(f64, f64)> = instance
                .blocks
                .iter()
                .map(|block| {
                    let dx = block.center_m[0] - site[0];
                    let dy = block.center_m[1] - site[1];
                    let distance = (dx * dx + dy * dy).sqrt().max(radio.reference_distance_m);
                    let path_loss = radio.reference_loss_db
                        + 10.0 * radio.exponent * (distance / radio.reference_distance_m).log10();
                    let wall_loss: f64 = instance
                        .walls
                        .iter()
                        .filter(|w| segments_intersect(*site, block.center_m, w.from, w.to))
                        .map(|w| w.loss_db)
                        .sum();
                    let bearing = dy.atan2(dx);
                    (path_loss + wall_loss, bearing)
                })
                .collect();
            debug_assert!(k < sites);
            for &tx_power in &instance.powers_dbm {
                for &azimuth_deg in &instance.directions_deg {
                    let azimuth = azimuth_deg.to_radians();
                    for &(loss, bearing) in &per_block {
                        let gain = antenna_gain_dbi(
                            radio.peak_gain_dbi,
                            radio.front_to_back_db,
                            bearing - azimuth,
                        );
                        values.push(tx_power + gain - loss);
                    }
                }
            }
        }
        Self {
            sites,
            powers,
            directions,
            blocks,
            values,
        }
    }

    pub fn get(&self, site: usize, power: usize, direction: usize, block: usize) -> f64 {
        debug_assert!(
            site < self.sites
                && power < self.powers
                && direction < self.directions
                && block < self.blocks
        );
        self.values
            [((site * self.powers + power) * self.directions + direction) * self.blocks + block]
    }

    pub fn matches(&self, instance: &WlpInstance) -> bool {
        self.sites == instance.sites.len()
            && self.powers == instance.powers_dbm.len()
            && self.directions == instance.directions_deg.len()
            && self.blocks == instance.blocks.len()
    }

    /// Cache key: hash of everything the tensor values depend on.
    pub fn content_hash(instance: &WlpInstance) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            sites: &'a [[f64; 2]],
            powers_dbm: &'a [f64],
            directions_deg: &'a [f64],
            block_centers: Vec<[f64; 2]>,
            walls: &'a [super::Wall],
            radio: &'a super::RadioParams,
        }
        let key = Key {
            sites: &instance.sites,
            powers_dbm: &instance.powers_dbm,
            directions_deg: &instance.directions_deg,
            block_centers: instance.blocks.iter().map(|b| b.center_m).collect(),
            walls: &instance.walls,
            radio: &instance.radio,
        };
        let text = serde_json::to_string(&key).expect("tensor key serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), WlpError> {
        let text = serde_json::to_string(self).map_err(|e| WlpError::Invalid {
            field: "tensor".into(),
            reason: e.to_string(),
        })?;
        std::fs::write(path, text).map_err(|e| WlpError::Invalid {
            field: "tensor".into(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, WlpError> {
        let text = std::fs::read_to_string(path).map_err(|e| WlpError::Invalid {
            field: "tensor".into(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| WlpError::Invalid {
            field: "tensor".into(),
            reason: e.to_string(),
        })
    }
}

/// Cosine-lobe directional gain, dBi: peak along the azimuth, peak minus the
/// front-to-back ratio opposite to it.
fn antenna_gain_dbi(peak_dbi: f64, front_to_back_db: f64, offset_rad: f64) -> f64 {
    peak_dbi - front_to_back_db * (1.0 - offset_rad.cos()) / 2.0
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// True when segments `p1-p2` and `q1-q2` intersect, endpoints included.
pub fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}
