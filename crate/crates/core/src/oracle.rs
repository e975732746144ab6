//! Ground-truth generators: exhaustive Pareto enumeration for instances
//! small enough to sweep, and exact solution-space counting.

use num_bigint::BigUint;
use thiserror::Error;

use crate::engine::ProblemAdapter;
use crate::pareto::{EvaluatedSolution, ParetoArchive, ParetoError};
use crate::toy::ToyProblem;
use crate::wlp::{SiteAssignment, WlpProblem, WlpSolution};
use crate::wsn::{ForwardingSolution, WsnProblem};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration of {count} solutions exceeds the cap of {cap}")]
    CapExceeded { count: BigUint, cap: u64 },
    #[error("the enumeration space is empty")]
    EmptySpace,
    #[error(transparent)]
    Pareto(#[from] ParetoError),
}

/// A problem whose whole solution space (or a declared slice of it) can be
/// walked in a reproducible lexicographic order.
pub trait EnumerableProblem: ProblemAdapter {
    fn enumeration_count(&self) -> BigUint;
    fn enumerate(&self) -> Box<dyn Iterator<Item = Self::Solution> + '_>;
}

/// Evaluates every enumerated solution and keeps the non-dominated set: the
/// exact optimal front over the enumerated space. Refuses to start when the
/// declared count exceeds `cap`.
pub fn exhaustive_pareto<P: EnumerableProblem>(
    problem: &P,
    cap: u64,
) -> Result<ParetoArchive<P::Solution>, OracleError> {
    let count = problem.enumeration_count();
    if count == BigUint::ZERO {
        return Err(OracleError::EmptySpace);
    }
    if count > BigUint::from(cap) {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let mut archive = ParetoArchive::new();
    for (id, solution) in problem.enumerate().enumerate() {
        let objectives = problem.evaluate(&solution);
        archive.insert(EvaluatedSolution {
            id: id as u64,
            encoding: solution,
            objectives,
        })?;
    }
    Ok(archive)
}

/// Exact size of the solution subset with `selected` active sites:
/// `C(sites, selected) * (powers * directions)^selected`.
pub fn subset_size(sites: usize, selected: usize, powers: usize, directions: usize) -> BigUint {
    binomial(sites, selected) * BigUint::from(powers * directions).pow(selected as u32)
}

/// Exact binomial coefficient via the multiplicative formula; every
/// intermediate division is exact.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut result = BigUint::from(1u32);
    for i in 1..=k {
        result = result * BigUint::from(n - k + i) / BigUint::from(i);
    }
    result
}

impl EnumerableProblem for ToyProblem {
    fn enumeration_count(&self) -> BigUint {
        BigUint::from(self.size)
    }

    fn enumerate(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        Box::new(0..self.size)
    }
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.clone()?;
        let k = current.len();
        // Advance to the lexicographic successor.
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] + (k - i) < self.n {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(current)
    }
}

/// Odometer over `slots` digits of base `base`.
struct Odometer {
    digits: Option<Vec<usize>>,
    base: usize,
}

impl Odometer {
    fn new(slots: usize, base: usize) -> Self {
        let digits = if base > 0 { Some(vec![0; slots]) } else { None };
        Self { digits, base }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let digits = self.digits.clone()?;
        let mut next = digits.clone();
        let mut pos = next.len();
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < self.base {
                self.digits = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(digits)
    }
}

impl WlpProblem {
    /// All solutions with an active-site count in `[min_active, max_active]`,
    /// lexicographic in (count, site combination, option assignment).
    pub fn enumerate_assignments(
        &self,
        min_active: usize,
        max_active: usize,
    ) -> impl Iterator<Item = WlpSolution> + '_ {
        let m = self.instance.site_count();
        let option_count = self.instance.powers_dbm.len() * self.instance.directions_deg.len();
        let directions = self.instance.directions_deg.len();
        (min_active..=max_active.min(m)).flat_map(move |n| {
            Combinations::new(m, n).flat_map(move |sites| {
                Odometer::new(n, option_count).map({
                    let sites = sites.clone();
                    move |options| {
                        let mut solution = WlpSolution::empty(m);
                        for (&site, &option) in sites.iter().zip(&options) {
                            solution.assignments[site] = SiteAssignment::On {
                                power: option / directions,
                                direction: option % directions,
                            };
                        }
                        solution
                    }
                })
            })
        })
    }

    pub fn enumeration_count_in(&self, min_active: usize, max_active: usize) -> BigUint {
        let m = self.instance.site_count();
        let powers = self.instance.powers_dbm.len();
        let directions = self.instance.directions_deg.len();
        (min_active..=max_active.min(m))
            .map(|n| subset_size(m, n, powers, directions))
            .sum()
    }
}

impl EnumerableProblem for WlpProblem {
    fn enumeration_count(&self) -> BigUint {
        let cap = self
            .instance
            .max_active
            .unwrap_or(self.instance.site_count());
        self.enumeration_count_in(0, cap)
    }

    fn enumerate(&self) -> Box<dyn Iterator<Item = WlpSolution> + '_> {
        let cap = self
            .instance
            .max_active
            .unwrap_or(self.instance.site_count());
        Box::new(self.enumerate_assignments(0, cap))
    }
}

impl EnumerableProblem for WsnProblem {
    fn enumeration_count(&self) -> BigUint {
        let eligible = self.eligible().len();
        if eligible == 0 {
            // Only the all-zero pattern exists.
            return BigUint::from(1u32);
        }
        BigUint::from(self.levels.len()).pow(eligible as u32)
    }

    fn enumerate(&self) -> Box<dyn Iterator<Item = ForwardingSolution> + '_> {
        let eligible: Vec<usize> = self.eligible().to_vec();
        let nodes = self.topology.node_count();
        Box::new(
            Odometer::new(eligible.len(), self.levels.len()).map(move |digits| {
                let mut solution = ForwardingSolution::all_zero(nodes);
                for (&node, &level) in eligible.iter().zip(&digits) {
                    solution.levels[node] = level;
                }
                solution
            }),
        )
    }
}
