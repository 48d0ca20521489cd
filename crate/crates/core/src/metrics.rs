//! Evaluation against ground-truth vessel ids.
//!
//! A *jump* is an extra cluster a true vessel was split into; a *merge* is
//! an extra vessel a cluster absorbed. With those definitions
//! `clusters + merges - jumps` recovers the vessel count exactly: both sums
//! count the (vessel, cluster) incidences, once relative to the number of
//! vessels and once relative to the number of clusters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::{ClusterAssignment, VesselId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub correct_neighbor_rate: f64,
    pub jumps: usize,
    pub merges: usize,
    pub n_clusters_predicted: usize,
    pub n_vessels_true: usize,
    pub n_vessels_estimated: usize,
    pub runtime_s: f64,
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), MetricsError> {
    if got != expected {
        return Err(MetricsError::LengthMismatch { what, got, expected });
    }
    Ok(())
}

/// Fraction of linked points whose link target shares their vessel id.
/// Unlinked points are left out entirely; with no links at all the rate is 1.
pub fn correct_neighbor_rate(targets: &[Option<usize>], truth: &[VesselId]) -> Result<f64, MetricsError> {
    check_len("truth", truth.len(), targets.len())?;
    let mut linked = 0usize;
    let mut correct = 0usize;
    for (i, t) in targets.iter().enumerate() {
        if let Some(j) = *t {
            let target = truth.get(j).ok_or(MetricsError::LengthMismatch {
                what: "link target",
                got: j,
                expected: truth.len(),
            })?;
            linked += 1;
            if truth[i] == *target {
                correct += 1;
            }
        }
    }
    Ok(if linked == 0 {
        1.0
    } else {
        correct as f64 / linked as f64
    })
}

/// `(jumps, merges)` of a clustering.
pub fn jumps_merges(assignment: &ClusterAssignment, truth: &[VesselId]) -> Result<(usize, usize), MetricsError> {
    check_len("truth", truth.len(), assignment.len())?;
    let mut clusters_of_vessel: BTreeMap<VesselId, BTreeSet<usize>> = BTreeMap::new();
    let mut vessels_of_cluster: BTreeMap<usize, BTreeSet<VesselId>> = BTreeMap::new();
    for (&c, &v) in assignment.cluster_of.iter().zip(truth) {
        clusters_of_vessel.entry(v).or_default().insert(c);
        vessels_of_cluster.entry(c).or_default().insert(v);
    }
    let jumps = clusters_of_vessel.values().map(|s| s.len() - 1).sum();
    let merges = vessels_of_cluster.values().map(|s| s.len() - 1).sum();
    Ok((jumps, merges))
}

pub fn estimate_vessel_count(n_clusters: usize, jumps: usize, merges: usize) -> Result<usize, MetricsError> {
    let est = n_clusters as i64 + merges as i64 - jumps as i64;
    if est < 1 {
        return Err(MetricsError::InconsistentCount {
            clusters: n_clusters,
            jumps,
            merges,
        });
    }
    Ok(est as usize)
}

/// Unwraps per-point vessel ids, failing on the first missing one.
pub fn require_truth(vids: &[Option<VesselId>]) -> Result<Vec<VesselId>, MetricsError> {
    vids.iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(MetricsError::MissingVid(i)))
        .collect()
}

pub fn evaluate(
    assignment: &ClusterAssignment,
    targets: &[Option<usize>],
    truth: &[VesselId],
    runtime_s: f64,
) -> Result<EvalReport, MetricsError> {
    let rate = correct_neighbor_rate(targets, truth)?;
    let (jumps, merges) = jumps_merges(assignment, truth)?;
    let n_clusters = assignment.n_clusters();
    Ok(EvalReport {
        correct_neighbor_rate: rate,
        jumps,
        merges,
        n_clusters_predicted: n_clusters,
        n_vessels_true: truth.iter().collect::<BTreeSet<_>>().len(),
        n_vessels_estimated: estimate_vessel_count(n_clusters, jumps, merges)?,
        runtime_s,
    })
}

impl EvalReport {
    const FIELDS: [&'static str; 7] = [
        "correct_neighbor_rate",
        "jumps",
        "merges",
        "n_clusters_predicted",
        "n_vessels_true",
        "n_vessels_estimated",
        "runtime_s",
    ];

    fn values(&self) -> [String; 7] {
        [
            format!("{:.6}", self.correct_neighbor_rate),
            self.jumps.to_string(),
            self.merges.to_string(),
            self.n_clusters_predicted.to_string(),
            self.n_vessels_true.to_string(),
            self.n_vessels_estimated.to_string(),
            format!("{:.3}", self.runtime_s),
        ]
    }

    /// `key = value` lines. `runtime_s` is written only when `with_runtime`.
    pub fn to_kv_text(&self, with_runtime: bool) -> String {
        let mut out = String::new();
        for (k, v) in Self::FIELDS.iter().zip(self.values()) {
            if *k == "runtime_s" && !with_runtime {
                continue;
            }
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn csv_header() -> String {
        Self::FIELDS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values().join(",")
    }
}
