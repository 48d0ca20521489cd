//! Clustering-based trajectory reconstruction.
//!
//! Every point picks a best possible next point (BPNP) among the reports in
//! a forward time window, scored by dead-reckoning error and filtered by a
//! space-time angle gate. The worst-scoring links are then audited: links
//! that look like a tight turn are kept, the rest are severed. Clusters
//! are the connected components of the surviving links.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ReconstructError;
use crate::graph::UnionFind;
use crate::kinematics::{
    ground_distance_m, moving_error_with, pair_mode, steady_error, turning_cos, Motion,
};
use crate::order::coarse_key;
use crate::model::{AisPoint, CbtrConfig, ClusterAssignment, Link, LinkSet, PairMode, TrackDataset};

/// Outcome of the abnormal-link audit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AbnormalReport {
    /// Points without any surviving candidate.
    pub no_bpnp: BTreeSet<usize>,
    /// Linked points with the largest normalized error, worst first.
    pub worst_n: Vec<usize>,
    /// Members of `worst_n` kept as turning points.
    pub rescued_turns: BTreeSet<usize>,
    /// `(worst_n \ rescued_turns) ∪ no_bpnp`.
    pub abnormal: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub assignment: ClusterAssignment,
    pub links: LinkSet,
    pub report: AbnormalReport,
}

/// Indices `j` with `t[i] + 1 <= t[j] <= t[i] + window_s`. The dataset is
/// time sorted, so the candidates form a contiguous index range.
pub fn candidate_window(ds: &TrackDataset, i: usize, cfg: &CbtrConfig) -> Range<usize> {
    let pts = ds.points();
    let t = pts[i].t;
    let lo = pts.partition_point(|p| p.t < t + 1);
    let hi = pts.partition_point(|p| p.t <= t + cfg.window_s);
    lo..hi.max(lo)
}

/// Picks the BPNP of point `i`, or `None` when no candidate passes its gate.
pub fn select_bpnp(ds: &TrackDataset, i: usize, cfg: &CbtrConfig) -> Option<Link> {
    let motions: Vec<Motion> = ds.points().iter().map(Motion::of).collect();
    select_with(ds.points(), &motions, ds.alpha(), i, cfg)
}

fn select_with(
    pts: &[AisPoint],
    motions: &[Motion],
    alpha: f64,
    i: usize,
    cfg: &CbtrConfig,
) -> Option<Link> {
    let xi = &pts[i];
    let t = xi.t;
    let lo = i + pts[i..].partition_point(|p| p.t < t + 1);
    let mut best: Option<Link> = None;
    for (j, xj) in pts.iter().enumerate().skip(lo) {
        if xj.t > t + cfg.window_s {
            break;
        }
        let scored = match pair_mode(xi, xj, cfg) {
            PairMode::Moving => moving_error_with(xi, &motions[i], xj, &motions[j], alpha, cfg)
                .ok()
                .filter(|s| s.cos_theta > cfg.cos_moving_min)
                .map(|s| (s.d_ij, s.cos_theta, PairMode::Moving)),
            PairMode::Steady => steady_error(xi, xj, alpha, cfg)
                .ok()
                .filter(|s| s.cos_theta0 >= cfg.cos_steady_min)
                .map(|s| (s.d0, s.cos_theta0, PairMode::Steady)),
        };
        if let Some((error, cos, mode)) = scored {
            // candidates arrive in (t, index) order, so a strict comparison
            // keeps the earliest of equal scores
            if best.is_none_or(|b| error < b.error) {
                best = Some(Link {
                    target: j,
                    error,
                    mode,
                    cos,
                });
            }
        }
    }
    best
}

/// BPNP for every point. Output does not depend on the worker count.
pub fn select_all(ds: &TrackDataset, cfg: &CbtrConfig) -> LinkSet {
    let pts = ds.points();
    let motions: Vec<Motion> = pts.iter().map(Motion::of).collect();
    let bpnp = (0..pts.len())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| select_with(pts, &motions, ds.alpha(), i, cfg))
        .collect();
    LinkSet { bpnp }
}

/// Link error divided by the squared time gap of the link.
pub fn normalized_error(ds: &TrackDataset, i: usize, link: &Link) -> f64 {
    let dt = (ds.points()[link.target].t - ds.points()[i].t) as f64;
    link.error / (dt * dt)
}

/// Turning cosine at the link target along `i -> bpnp(i) -> bpnp(bpnp(i))`.
/// `None` when the target has no onward link.
pub fn turning_cos_at(ds: &TrackDataset, links: &LinkSet, i: usize, cfg: &CbtrConfig) -> Option<f64> {
    let next = links.get(i)?.target;
    let after = links.get(next)?.target;
    let p = ds.points();
    turning_cos(&p[i], &p[next], &p[after], ds.alpha(), cfg.angle_time_weight)
}

pub fn detect_abnormal(ds: &TrackDataset, links: &LinkSet, cfg: &CbtrConfig) -> AbnormalReport {
    let no_bpnp: BTreeSet<usize> = (0..links.len()).filter(|&i| links.get(i).is_none()).collect();

    // worst first; equal scores (at single precision) rank by index
    let mut ranked: Vec<(u64, usize)> = links
        .bpnp
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.as_ref().map(|l| (coarse_key(normalized_error(ds, i, l)), i)))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let worst_n: Vec<usize> = ranked.iter().take(cfg.n_abnormal).map(|&(_, i)| i).collect();

    let pts = ds.points();
    let rescued_turns: BTreeSet<usize> = worst_n
        .iter()
        .copied()
        .filter(|&z| {
            let Some(link) = links.get(z) else {
                return false;
            };
            ground_distance_m(&pts[z], &pts[link.target]) < cfg.turn_rescue_dist_m
                && turning_cos_at(ds, links, z, cfg).is_some_and(|c| c >= cfg.turn_rescue_cos_min)
        })
        .collect();

    let abnormal = worst_n
        .iter()
        .copied()
        .filter(|z| !rescued_turns.contains(z))
        .chain(no_bpnp.iter().copied())
        .collect();

    AbnormalReport {
        no_bpnp,
        worst_n,
        rescued_turns,
        abnormal,
    }
}

/// Connected components of the links, ignoring the outgoing links of
/// abnormal points.
pub fn assemble_clusters(ds: &TrackDataset, links: &LinkSet, report: &AbnormalReport) -> ClusterAssignment {
    let n = ds.len();
    let mut uf = UnionFind::new(n);
    for (i, link) in links.bpnp.iter().enumerate() {
        if let Some(link) = link {
            if !report.abnormal.contains(&i) {
                uf.union(i, link.target);
            }
        }
    }
    ClusterAssignment {
        cluster_of: uf.labels(),
        endpoints: report.abnormal.union(&report.no_bpnp).copied().collect(),
        abnormal: report.abnormal.clone(),
    }
}

/// Full pipeline on the current rayon pool.
pub fn run_cbtr(ds: &TrackDataset, cfg: &CbtrConfig) -> Result<Reconstruction, ReconstructError> {
    if ds.is_empty() {
        return Err(ReconstructError::EmptyDataset);
    }
    cfg.validate()?;
    let links = select_all(ds, cfg);
    let report = detect_abnormal(ds, &links, cfg);
    let assignment = assemble_clusters(ds, &links, &report);
    Ok(Reconstruction {
        assignment,
        links,
        report,
    })
}

/// Full pipeline on a dedicated pool of `threads` workers.
pub fn run_cbtr_with_threads(
    ds: &TrackDataset,
    cfg: &CbtrConfig,
    threads: usize,
) -> Result<Reconstruction, ReconstructError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| ReconstructError::ThreadPool(e.to_string()))?;
    pool.install(|| run_cbtr(ds, cfg))
}
