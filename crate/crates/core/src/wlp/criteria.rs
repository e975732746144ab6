//! The three planning criteria: coverage, interference mitigation and
//! throughput provision. Each is a quadratic weighted sum of per-block
//! penalties, minimized.

use super::{CoverageTensor, Orientation, PenaltyProfile, WlpInstance, WlpSolution};
use crate::pareto::ObjectiveVector;

/// Best received power on a block over the selected sites; the noise floor
/// when nothing is selected.
pub fn utility_coverage(
    instance: &WlpInstance,
    tensor: &CoverageTensor,
    solution: &WlpSolution,
    block: usize,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (site, power, direction) in solution.on_sites() {
        best = best.max(tensor.get(site, power, direction, block));
    }
    if best == f64::NEG_INFINITY {
        instance.radio.noise_floor_dbm
    } else {
        best
    }
}

/// Power of the second-best selected site on a block (the strongest
/// interferer); the noise floor with fewer than two selected sites.
pub fn utility_interference(
    instance: &WlpInstance,
    tensor: &CoverageTensor,
    solution: &WlpSolution,
    block: usize,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for (site, power, direction) in solution.on_sites() {
        let received = tensor.get(site, power, direction, block);
        if received > best {
            second = best;
            best = received;
        } else if received > second {
            second = received;
        }
    }
    if second == f64::NEG_INFINITY {
        instance.radio.noise_floor_dbm
    } else {
        second
    }
}

/// Estimated throughput per block: each block associates with its
/// best-serving site (ties to the lowest site index), users spread over the
/// sites proportionally to the block weight they serve, and the block's
/// nominal rate (from the SNR tier table) is split among its site's users.
/// All zeros when nothing is selected.
pub fn utility_qos_all(
    instance: &WlpInstance,
    tensor: &CoverageTensor,
    solution: &WlpSolution,
) -> Vec<f64> {
    let blocks = instance.blocks.len();
    if solution.active_count() == 0 {
        return vec![0.0; blocks];
    }

    let mut serving = vec![usize::MAX; blocks];
    let mut best_power = vec![f64::NEG_INFINITY; blocks];
    for (site, power, direction) in solution.on_sites() {
        for (l, (slot, best)) in serving.iter_mut().zip(&mut best_power).enumerate() {
            let received = tensor.get(site, power, direction, l);
            if received > *best {
                *best = received;
                *slot = site;
            }
        }
    }

    let mut served_weight = vec![0.0f64; instance.sites.len()];
    for (l, block) in instance.blocks.iter().enumerate() {
        served_weight[serving[l]] += block.weight;
    }
    let total_weight: f64 = served_weight.iter().sum();

    (0..blocks)
        .map(|l| {
            let snr_db = best_power[l] - instance.radio.noise_floor_dbm;
            let rate = nominal_rate(instance, snr_db);
            let users = instance.user_load * served_weight[serving[l]] / total_weight;
            if users > 0.0 {
                rate / users
            } else {
                rate
            }
        })
        .collect()
}

fn nominal_rate(instance: &WlpInstance, snr_db: f64) -> f64 {
    let mut rate = 0.0;
    for tier in &instance.rate_tiers {
        if snr_db >= tier.min_snr_db {
            rate = tier.rate_bps;
        }
    }
    rate
}

/// Piecewise-linear penalty of a utility value, in `[0, delta]`.
pub fn penalty(utility: f64, profile: &PenaltyProfile) -> f64 {
    let span = profile.s_max - profile.s_min;
    match profile.orientation {
        Orientation::UtilityMaximized => {
            if utility >= profile.s_max {
                0.0
            } else if utility <= profile.s_min {
                profile.delta
            } else {
                profile.delta * (profile.s_max - utility) / span
            }
        }
        Orientation::UtilityMinimized => {
            if utility <= profile.s_min {
                0.0
            } else if utility >= profile.s_max {
                profile.delta
            } else {
                profile.delta * (utility - profile.s_min) / span
            }
        }
    }
}

/// Quadratic weighted penalty sum: `sqrt(sum_l w_l * p_l^2)`.
pub fn criterion(penalties: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(penalties.len(), weights.len());
    penalties
        .iter()
        .zip(weights)
        .map(|(p, w)| w * p * p)
        .sum::<f64>()
        .sqrt()
}

/// The full evaluation: `(f_cov, f_i, f_qos)`, all minimized.
pub fn evaluate(
    instance: &WlpInstance,
    tensor: &CoverageTensor,
    solution: &WlpSolution,
) -> ObjectiveVector {
    let blocks = instance.blocks.len();
    let weights: Vec<f64> = instance.blocks.iter().map(|b| b.weight).collect();

    let coverage: Vec<f64> = (0..blocks)
        .map(|l| {
            penalty(
                utility_coverage(instance, tensor, solution, l),
                &instance.coverage_profile,
            )
        })
        .collect();
    let interference: Vec<f64> = (0..blocks)
        .map(|l| {
            penalty(
                utility_interference(instance, tensor, solution, l),
                &instance.interference_profile,
            )
        })
        .collect();
    let qos: Vec<f64> = utility_qos_all(instance, tensor, solution)
        .into_iter()
        .map(|u| penalty(u, &instance.qos_profile))
        .collect();

    ObjectiveVector::new(vec![
        criterion(&coverage, &weights),
        criterion(&interference, &weights),
        criterion(&qos, &weights),
    ])
    .expect("wlp criteria are finite")
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::small_instance;
    use super::super::{Block, RateTier, SiteAssignment};
    use super::*;
    use rand::Rng;

    fn on(power: usize, direction: usize) -> SiteAssignment {
        SiteAssignment::On { power, direction }
    }

    /// Instance whose tensor we can dictate block by block: sites at the
    /// given positions, blocks at the given centers.
    fn instance_with(sites: Vec<[f64; 2]>, centers: Vec<[f64; 2]>) -> WlpInstance {
        let mut instance = small_instance(sites.len(), 2, 1);
        instance.sites = sites;
        instance.blocks = centers
            .into_iter()
            .map(|center_m| Block {
                origin_px: [0, 0],
                size_px: [1, 1],
                center_m,
                weight: 1.0,
            })
            .collect();
        instance
    }

    #[test]
    fn coverage_is_max_and_noise_floor_when_empty() {
        let instance = instance_with(vec![[0.0, 0.0], [10.0, 0.0]], vec![[1.0, 0.0]]);
        let tensor = CoverageTensor::generate(&instance);
        let mut solution = WlpSolution::empty(2);
        assert_eq!(utility_coverage(&instance, &tensor, &solution, 0), -100.0);
        solution.assignments[0] = on(0, 0);
        let single = utility_coverage(&instance, &tensor, &solution, 0);
        assert_eq!(single, tensor.get(0, 0, 0, 0));
        solution.assignments[1] = on(0, 0);
        // Site 0 is 1 m away, site 1 is 9 m away: max is still site 0.
        assert_eq!(utility_coverage(&instance, &tensor, &solution, 0), single);
    }

    #[test]
    fn interference_is_second_best_with_ties_allowed() {
        // Three sites at 1, 2 and 4 m from the block.
        let instance = instance_with(vec![[0.0, 0.0], [3.0, 0.0], [5.0, 0.0]], vec![[1.0, 0.0]]);
        let tensor = CoverageTensor::generate(&instance);
        let mut solution = WlpSolution::empty(3);
        solution.assignments[0] = on(0, 0);
        assert_eq!(
            utility_interference(&instance, &tensor, &solution, 0),
            -100.0
        );
        solution.assignments[1] = on(0, 0);
        solution.assignments[2] = on(0, 0);
        let expected_second = tensor.get(1, 0, 0, 0);
        assert_eq!(
            utility_interference(&instance, &tensor, &solution, 0),
            expected_second
        );

        // Symmetric pair: both sites 1 m away, equal received power.
        let tie = instance_with(vec![[0.0, 0.0], [2.0, 0.0]], vec![[1.0, 0.0]]);
        let tie_tensor = CoverageTensor::generate(&tie);
        let mut both = WlpSolution::empty(2);
        both.assignments[0] = on(0, 0);
        both.assignments[1] = on(0, 0);
        assert_eq!(
            utility_interference(&tie, &tie_tensor, &both, 0),
            tie_tensor.get(0, 0, 0, 0)
        );
    }

    #[test]
    fn qos_single_site_splits_rate_over_all_users() {
        // One site very close to the single block: best tier (11 Mbit/s),
        // 10 users -> 1.1 Mbit/s.
        let mut instance = instance_with(vec![[0.0, 0.0]], vec![[1.0, 0.0]]);
        instance.rate_tiers = vec![RateTier {
            min_snr_db: 4.0,
            rate_bps: 1.1e7,
        }];
        let tensor = CoverageTensor::generate(&instance);
        let mut solution = WlpSolution::empty(1);
        solution.assignments[0] = on(0, 0);
        let qos = utility_qos_all(&instance, &tensor, &solution);
        assert_eq!(qos, vec![1.1e6]);
    }

    #[test]
    fn qos_zero_sites_zero_throughput() {
        let instance = instance_with(vec![[0.0, 0.0]], vec![[1.0, 0.0]]);
        let tensor = CoverageTensor::generate(&instance);
        let solution = WlpSolution::empty(1);
        assert_eq!(utility_qos_all(&instance, &tensor, &solution), vec![0.0]);
    }

    #[test]
    fn qos_apportions_users_by_served_weight() {
        // Two sites, four unit-weight blocks split 3:1 between them; 8 users
        // yield serving populations 6 and 2.
        let mut instance = instance_with(
            vec![[0.0, 0.0], [100.0, 0.0]],
            vec![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [99.0, 0.0]],
        );
        instance.user_load = 8.0;
        instance.rate_tiers = vec![RateTier {
            min_snr_db: -1000.0,
            rate_bps: 8.0e6,
        }];
        let tensor = CoverageTensor::generate(&instance);
        let mut solution = WlpSolution::empty(2);
        solution.assignments[0] = on(0, 0);
        solution.assignments[1] = on(0, 0);
        let qos = utility_qos_all(&instance, &tensor, &solution);
        // Blocks 0..2 served by site 0 (6 users), block 3 by site 1 (2 users).
        assert_eq!(qos[0], 8.0e6 / 6.0);
        assert_eq!(qos[1], 8.0e6 / 6.0);
        assert_eq!(qos[2], 8.0e6 / 6.0);
        assert_eq!(qos[3], 8.0e6 / 2.0);
    }

    #[test]
    fn penalty_boundaries_and_midpoint() {
        let profile = PenaltyProfile {
            s_min: 2.0,
            s_max: 6.0,
            delta: 3.0,
            orientation: Orientation::UtilityMaximized,
        };
        assert_eq!(penalty(6.0, &profile), 0.0);
        assert_eq!(penalty(7.0, &profile), 0.0);
        assert_eq!(penalty(2.0, &profile), 3.0);
        assert_eq!(penalty(0.0, &profile), 3.0);
        assert_eq!(penalty(4.0, &profile), 1.5);

        let mirrored = PenaltyProfile {
            orientation: Orientation::UtilityMinimized,
            ..profile
        };
        assert_eq!(penalty(2.0, &mirrored), 0.0);
        assert_eq!(penalty(1.0, &mirrored), 0.0);
        assert_eq!(penalty(6.0, &mirrored), 3.0);
        assert_eq!(penalty(9.0, &mirrored), 3.0);
        assert_eq!(penalty(4.0, &mirrored), 1.5);
    }

    #[test]
    fn penalty_bounds_and_monotonicity() {
        let mut rng = crate::engine::seeded_rng(31, 0);
        let profile = PenaltyProfile {
            s_min: -90.0,
            s_max: -60.0,
            delta: 2.0,
            orientation: Orientation::UtilityMaximized,
        };
        let mirrored = PenaltyProfile {
            orientation: Orientation::UtilityMinimized,
            ..profile
        };
        let mut previous = f64::INFINITY;
        let mut utilities: Vec<f64> = (0..1000).map(|_| rng.random_range(-120.0..-30.0)).collect();
        utilities.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &u in &utilities {
            let p = penalty(u, &profile);
            assert!((0.0..=profile.delta).contains(&p));
            assert!(p <= previous, "penalty must not increase in utility");
            previous = p;
            let q = penalty(u, &mirrored);
            assert!((0.0..=mirrored.delta).contains(&q));
        }
        // Mirrored profile is non-decreasing.
        let mut previous = f64::NEG_INFINITY;
        for &u in &utilities {
            let q = penalty(u, &mirrored);
            assert!(q >= previous);
            previous = q;
        }
    }

    #[test]
    fn criterion_trivial_values() {
        assert_eq!(criterion(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(criterion(&[2.5], &[1.0]), 2.5);
        assert_eq!(criterion(&[3.0, 4.0], &[1.0, 1.0]), 5.0);
    }

    #[test]
    fn empty_solution_evaluates_to_the_degenerate_corner() {
        let instance = small_instance(4, 2, 1);
        let tensor = CoverageTensor::generate(&instance);
        let objectives = evaluate(&instance, &tensor, &WlpSolution::empty(4));
        let total_weight: f64 = instance.blocks.iter().map(|b| b.weight).sum();
        // Every block at full coverage penalty.
        assert_eq!(
            objectives.values()[0],
            (total_weight * instance.coverage_profile.delta.powi(2)).sqrt()
        );
        // No transmitters: zero interference.
        assert_eq!(objectives.values()[1], 0.0);
        // And no throughput: full QoS penalty.
        assert_eq!(
            objectives.values()[2],
            (total_weight * instance.qos_profile.delta.powi(2)).sqrt()
        );
    }

    #[test]
    fn full_coverage_zeroes_the_coverage_criterion() {
        // One powerful site in the middle of a tiny floor: every block above
        // s_max.
        let mut instance = instance_with(
            vec![[2.0, 2.0]],
            vec![[1.0, 1.0], [3.0, 1.0], [1.0, 3.0], [3.0, 3.0]],
        );
        instance.coverage_profile.s_max = -70.0;
        instance.coverage_profile.s_min = -90.0;
        let tensor = CoverageTensor::generate(&instance);
        let mut solution = WlpSolution::empty(1);
        solution.assignments[0] = on(0, 0);
        let objectives = evaluate(&instance, &tensor, &solution);
        assert_eq!(objectives.values()[0], 0.0);
    }

    #[test]
    fn coverage_monotone_interference_antitone_in_added_sites() {
        let instance = small_instance(5, 2, 1);
        let tensor = CoverageTensor::generate(&instance);
        let mut rng = crate::engine::seeded_rng(77, 0);
        for _ in 0..200 {
            let mut solution = WlpSolution::empty(5);
            for i in 0..5 {
                if rng.random::<f64>() < 0.5 {
                    solution.assignments[i] = on(rng.random_range(0..2), 0);
                }
            }
            let off_sites: Vec<usize> = (0..5)
                .filter(|&i| solution.assignments[i] == SiteAssignment::Off)
                .collect();
            if off_sites.is_empty() {
                continue;
            }
            let base = evaluate(&instance, &tensor, &solution);
            let extra = off_sites[rng.random_range(0..off_sites.len())];
            let mut grown = solution.clone();
            grown.assignments[extra] = on(rng.random_range(0..2), 0);
            let bigger = evaluate(&instance, &tensor, &grown);
            assert!(bigger.values()[0] <= base.values()[0], "f_cov grew");
            assert!(bigger.values()[1] >= base.values()[1], "f_i shrank");
        }
    }

    #[test]
    fn criterion_upper_bound_holds() {
        let instance = small_instance(4, 2, 1);
        let tensor = CoverageTensor::generate(&instance);
        let total_weight: f64 = instance.blocks.iter().map(|b| b.weight).sum();
        let mut rng = crate::engine::seeded_rng(5, 0);
        for _ in 0..100 {
            let mut solution = WlpSolution::empty(4);
            for i in 0..4 {
                if rng.random::<f64>() < 0.5 {
                    solution.assignments[i] = on(rng.random_range(0..2), 0);
                }
            }
            let objectives = evaluate(&instance, &tensor, &solution);
            for (value, profile) in objectives.values().iter().zip([
                &instance.coverage_profile,
                &instance.interference_profile,
                &instance.qos_profile,
            ]) {
                assert!(*value >= 0.0);
                assert!(*value <= profile.delta * total_weight.sqrt() + 1e-12);
            }
        }
    }
}
