//! Unsupervised reconstruction of vessel trajectories from unlabeled AIS
//! position reports.
//!
//! The main entry point is [`reconstruct::run_cbtr`], which links every
//! report to its best possible next report and cuts the links that look
//! wrong. [`npc`] holds the simpler next-point-connection classifier and
//! grouping, [`metrics`] scores results against ground truth, and
//! [`synth`] generates reproducible test fleets.

pub mod cli;
pub mod error;
pub mod export;
mod graph;
mod order;
pub mod ingest;
pub mod kinematics;
pub mod metrics;
pub mod model;
pub mod npc;
pub mod reconstruct;
pub mod synth;

pub use error::{Error, Result};
pub use graph::UnionFind;
pub use model::{AisPoint, CbtrConfig, ClusterAssignment, Link, LinkSet, PairMode, TrackDataset, VesselId};
pub use reconstruct::{run_cbtr, run_cbtr_with_threads, AbnormalReport, Reconstruction};
