//! Bounded FIFO of forbidden move attributes with randomized tenure.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SearchRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TabuEntry<A> {
    attribute: A,
    /// First iteration at which the entry no longer blocks.
    expires_at: u64,
}

/// Per-path Tabu list. An attribute is taboo at iteration `i` iff it has an
/// entry with `expires_at > i`; an entry inserted at iteration `i` with tenure
/// `t` expires at `i + t`, so its lifetime is exactly `t` iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabuList<A> {
    entries: VecDeque<TabuEntry<A>>,
}

impl<A> Default for TabuList<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> TabuList<A> {
    pub fn new() -> Self {
        Self {
            entries: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops entries that no longer block at `iteration`. Tenures vary per
    /// entry, so this is a scan, not a front-pop.
    pub fn purge_expired(&mut self, iteration: u64) {
        self.entries.retain(|e| e.expires_at > iteration);
    }
}

impl<A: PartialEq> TabuList<A> {
    pub fn insert(&mut self, attribute: A, iteration: u64, tenure: u32) {
        self.entries.push_back(TabuEntry {
            attribute,
            expires_at: iteration + u64::from(tenure),
        });
    }

    pub fn is_taboo(&self, attribute: &A, iteration: u64) -> bool {
        self.entries
            .iter()
            .any(|e| e.expires_at > iteration && e.attribute == *attribute)
    }

    /// Latest expiry among live entries matching `attribute`; `None` when the
    /// attribute is not taboo at `iteration`.
    pub fn blocking_expiry(&self, attribute: &A, iteration: u64) -> Option<u64> {
        self.entries
            .iter()
            .filter(|e| e.expires_at > iteration && e.attribute == *attribute)
            .map(|e| e.expires_at)
            .max()
    }
}

/// Uniform tenure draw over the closed integer interval `[tenure_min, tenure_max]`.
pub fn sample_tenure(rng: &mut SearchRng, tenure_min: u32, tenure_max: u32) -> u32 {
    debug_assert!(tenure_min >= 1 && tenure_min <= tenure_max);
    rng.random_range(tenure_min..=tenure_max)
}
