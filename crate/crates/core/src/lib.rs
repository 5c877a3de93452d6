//! Expected-goals (xG) modeling toolkit.
//!
//! The crate covers the full pipeline: ingesting shot-event data (from CSV
//! or provider match pages), engineering distance/angle features on a
//! standardized pitch, rebalancing the goal/no-goal classes, training tree
//! ensembles (random forests and gradient-boosted trees) from scratch,
//! scoring shots, evaluating with an imbalance-aware metric battery, and
//! explaining model behavior through ceteris-paribus / aggregated /
//! partial-dependence profiles that answer what-if questions about team and
//! player performance.

pub mod balance;
pub mod data;
pub mod metrics;
pub mod model;
pub mod profiles;
pub mod report;
pub mod synthetic;
pub mod understat;
