//! Monte-Carlo validation oracle for the criteria dynamic program.
//!
//! The simulation draws fresh, independent link and forwarding coins for
//! every (node, relay, hop-level) context — exactly the independence
//! assumptions the recursion multiplies out — so the DP values are the true
//! means of the simulated samples.

use rand::Rng;

use super::criteria::PairLinks;
use super::{ForwardingSolution, WsnCriteria, WsnProblem};
use crate::engine::SearchRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Sample means of (f_r, f_d, f_e).
    pub mean: [f64; 3],
    /// Standard errors of the means.
    pub std_error: [f64; 3],
    pub trials: u64,
}

/// Simulates `trials` packet floods and returns per-criterion sample means
/// with standard errors. Multi-pair instances average each trial over the
/// source-destination pairs, mirroring the dynamic program.
pub fn monte_carlo_oracle(
    problem: &WsnProblem,
    solution: &ForwardingSolution,
    trials: u64,
    seed: u64,
) -> McEstimate {
    assert!(trials >= 1, "at least one trial required");
    let mut rng = crate::engine::seeded_rng(seed, 0);
    let pair_links: Vec<PairLinks> = problem
        .topology
        .destinations
        .iter()
        .map(|&d| PairLinks::build(problem, solution, d))
        .collect();
    let sources = &problem.topology.sources;
    let pairs = (sources.len() * pair_links.len()) as f64;

    let mut sum = [0.0f64; 3];
    let mut sum_sq = [0.0f64; 3];
    for _ in 0..trials {
        let mut trial = [0.0f64; 3];
        for links in &pair_links {
            for &source in sources {
                let (f_r, f_d, f_e) = simulate_flood(problem, links, source, &mut rng);
                trial[0] += f_r;
                trial[1] += f_d;
                trial[2] += f_e;
            }
        }
        for (i, value) in trial.iter().enumerate() {
            let sample = value / pairs;
            sum[i] += sample;
            sum_sq[i] += sample * sample;
        }
    }

    let n = trials as f64;
    let mut mean = [0.0f64; 3];
    let mut std_error = [0.0f64; 3];
    for i in 0..3 {
        mean[i] = sum[i] / n;
        let variance = if trials > 1 {
            ((sum_sq[i] - sum[i] * sum[i] / n) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        std_error[i] = (variance / n).sqrt();
    }
    McEstimate {
        mean,
        std_error,
        trials,
    }
}

/// One trial: per hop level an independent flood replica, first arrival
/// level sets the delay sample, relay energies accumulate on every
/// successful link-and-forward branch whether or not it reaches the sink.
fn simulate_flood(
    problem: &WsnProblem,
    links: &PairLinks,
    source: usize,
    rng: &mut SearchRng,
) -> (f64, f64, f64) {
    let mut arrived_at = None;
    let mut energy = 0.0;
    for h in 1..=problem.max_hops {
        let (arrived, spent) = sample_level(links, source, h, rng);
        energy += spent;
        if arrived && arrived_at.is_none() {
            arrived_at = Some(h);
        }
    }
    let f_r = if arrived_at.is_some() { 0.0 } else { 1.0 };
    let f_d = match arrived_at {
        Some(h) => {
            let delay = (h - 1) as f64;
            delay * delay
        }
        None => 0.0,
    };
    (f_r, f_d, energy)
}

fn sample_level(links: &PairLinks, node: usize, hops: usize, rng: &mut SearchRng) -> (bool, f64) {
    if hops == 1 {
        return (rng.random::<f64>() < links.direct[node], 0.0);
    }
    let mut arrived = false;
    let mut energy = 0.0;
    for (fi, &relay) in links.forwarders.iter().enumerate() {
        if relay == node {
            continue;
        }
        if rng.random::<f64>() < links.relay[node][fi]
            && rng.random::<f64>() < links.forward_prob[fi]
        {
            let (sub_arrived, sub_energy) = sample_level(links, relay, hops - 1, rng);
            energy += links.relay_energy[fi] + sub_energy;
            arrived |= sub_arrived;
        }
    }
    (arrived, energy)
}

/// Agreement scores between DP values and the oracle estimate.
///
/// The standard error is floored at the estimator's resolution,
/// `(1 + |mean|) / trials`: with a finite number of trials the oracle cannot
/// distinguish means closer than roughly one event, so a DP value below that
/// resolution agrees with an all-constant sample instead of dividing by a
/// zero standard error. Exact agreement still yields z = 0.
pub fn z_scores(dp: &WsnCriteria, estimate: &McEstimate) -> [f64; 3] {
    let dp_values = [dp.f_r, dp.f_d, dp.f_e];
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        let difference = dp_values[i] - estimate.mean[i];
        let resolution = (1.0 + estimate.mean[i].abs()) / estimate.trials as f64;
        out[i] = difference / estimate.std_error[i].max(resolution);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::criteria::{criteria, link_success};
    use super::super::fixtures::{line_problem, ten_node_problem};
    use super::*;
    use rand::Rng;

    #[test]
    fn all_zero_solution_estimates_the_direct_miss_rate() {
        let problem = ten_node_problem(91, vec![0.0, 1.0]);
        let solution = ForwardingSolution::all_zero(10);
        let estimate = monte_carlo_oracle(&problem, &solution, 100_000, 17);
        let expected = 1.0 - link_success(&problem, &solution, 0, 1);
        let z = (estimate.mean[0] - expected) / estimate.std_error[0].max(1e-12);
        assert!(z.abs() <= 3.0, "z = {z}");
        // Delay and energy are exactly zero in every trial.
        assert_eq!(estimate.mean[1], 0.0);
        assert_eq!(estimate.mean[2], 0.0);
        assert_eq!(estimate.std_error[1], 0.0);
    }

    #[test]
    fn deterministic_chain_agrees_exactly() {
        // All probabilities 1: zero variance, exact agreement with the DP.
        let problem = line_problem(5.0, 0.0);
        let mut solution = ForwardingSolution::all_zero(3);
        solution.levels[1] = 1;
        let estimate = monte_carlo_oracle(&problem, &solution, 500, 3);
        let dp = criteria(&problem, &solution);
        assert_eq!(estimate.std_error, [0.0, 0.0, 0.0]);
        let z = z_scores(&dp, &estimate);
        assert_eq!(z, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn dp_matches_oracle_within_three_sigma_on_random_instances() {
        let problem = ten_node_problem(101, vec![0.0, 0.5, 1.0]);
        let mut rng = crate::engine::seeded_rng(102, 0);
        for trial in 0..3 {
            let mut solution = ForwardingSolution::all_zero(10);
            for &node in problem.eligible() {
                if rng.random::<f64>() < 0.5 {
                    solution.levels[node] = rng.random_range(1..3);
                }
            }
            let dp = criteria(&problem, &solution);
            let estimate = monte_carlo_oracle(&problem, &solution, 100_000, 200 + trial);
            let z = z_scores(&dp, &estimate);
            for (i, zi) in z.iter().enumerate() {
                assert!(
                    zi.abs() <= 3.0,
                    "criterion {i} z-score {zi} (dp region {dp:?}, mc {estimate:?})"
                );
            }
        }
    }

    #[test]
    fn zero_se_scoring_uses_the_sampling_resolution() {
        // A large gap against constant samples fails loudly.
        let dp = WsnCriteria {
            f_r: 0.5,
            f_d: 0.0,
            f_e: 0.0,
        };
        let estimate = McEstimate {
            mean: [0.25, 0.0, 0.0],
            std_error: [0.0, 0.0, 0.0],
            trials: 10_000,
        };
        let z = z_scores(&dp, &estimate);
        assert!(z[0] > 100.0);
        assert_eq!(z[1], 0.0);

        // A DP value below one-event resolution is compatible with a
        // zero-event sample.
        let rare = WsnCriteria {
            f_r: 0.0,
            f_d: 3.0e-6,
            f_e: 0.0,
        };
        let z = z_scores(&rare, &estimate);
        assert!(z[1].abs() < 1.0, "z = {}", z[1]);
    }
}
