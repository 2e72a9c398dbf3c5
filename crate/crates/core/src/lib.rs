//! Sybil detection on social graphs with negative-feedback discounting.
//!
//! The crate builds a weighted *defense graph* from an undirected social
//! graph and a directed graph of negative feedback (rejected friend
//! requests, abuse flags), ranks nodes by degree-normalized trust obtained
//! through a short power iteration from honest seeds, and scores rankings by
//! ROC AUC. The unweighted baseline (SybilRank) is the same pipeline on unit
//! edge weights.
//!
//! Alongside the algorithm sit the pieces needed to reproduce the attack
//! experiments: Barabási–Albert and SNAP edge-list host graphs, a Sybil
//! region with simulated friend requests and rejections, and parameter
//! sweeps that emit CSV.

pub mod attack;
pub mod config;
pub mod defense;
mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod io;
pub mod rank;
pub mod rng;

pub use attack::{AttackConfig, LabeledPopulation, Role};
pub use config::SimConfig;
pub use defense::{build_defense_graph, DefenseGraph, OffsetFactor};
pub use error::{Error, Result};
pub use eval::{auc, roc_curve, run_sweep, SweepParam, SweepRow, SweepSpec};
pub use graph::{new_graphs, FeedbackGraph, NodeId, SocialGraph};
pub use rank::{sybilfence, sybilrank, RankedList, SeedSet, TrustVector};
