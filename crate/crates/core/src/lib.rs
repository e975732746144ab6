//! Parallel multiobjective Tabu search (PMOTS) over pluggable combinatorial
//! problems.
//!
//! The crate is organized around a small dominance/archive core ([`pareto`]),
//! a K-path Tabu search engine ([`engine`]) that works against any
//! [`engine::ProblemAdapter`], and two wireless problem models: access-point
//! planning ([`wlp`]) and sensor-network forwarding evaluation ([`wsn`]).
//! Exhaustive enumeration oracles for small instances live in [`oracle`];
//! scenario files and the command layer used by the `pmots` binary live in
//! [`scenario`] and [`commands`].

pub mod commands;
pub mod engine;
pub mod export;
pub mod oracle;
pub mod pareto;
pub mod scenario;
pub mod toy;
pub mod wlp;
pub mod wsn;
