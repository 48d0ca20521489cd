//! Next-point connection: a supervised classifier that carries labels
//! forward by dead reckoning, and the unsupervised k-neighbour grouping
//! derived from it.

use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, NpcError};
use crate::graph::UnionFind;
use crate::kinematics::{ground_distance_m, Motion};
use crate::model::{AisPoint, ClusterAssignment, TrackDataset, VesselId};
use crate::order::coarse_key;

/// Per-feature weights of the neighbour metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub t: f64,
    /// `None` uses the dataset's `alpha`.
    pub lat: Option<f64>,
    pub lon: f64,
    pub sog: f64,
    pub cog: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        Self {
            t: 1e-5,
            lat: None,
            lon: 1.0,
            sog: 0.0,
            cog: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpcConfig {
    pub k_neighbors: usize,
    pub weights: FeatureWeights,
    /// How many of a label's most recent reports the classifier considers.
    pub recent_per_label: usize,
}

impl Default for NpcConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 3,
            weights: FeatureWeights::default(),
            recent_per_label: 10,
        }
    }
}

impl NpcConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k_neighbors < 1 {
            return Err(ConfigError::Invalid("k_neighbors must be >= 1".into()));
        }
        if self.recent_per_label < 1 {
            return Err(ConfigError::Invalid("recent_per_label must be >= 1".into()));
        }
        let w = &self.weights;
        let all = [w.t, w.lat.unwrap_or(0.0), w.lon, w.sog, w.cog];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(ConfigError::Invalid("feature weights must be >= 0".into()));
        }
        Ok(())
    }
}

fn estimate(from: &AisPoint, motion: &Motion, dt: f64) -> AisPoint {
    let (lat, lon) = motion.advance(from.lat, from.lon, dt);
    AisPoint { lat, lon, ..*from }
}

/// Labels each test point with the training vessel whose recent report,
/// dead-reckoned to the test time, lands closest to the observation.
///
/// Per label, only reports at or before the test time are eligible; among
/// the `recent_per_label` most recent, the one spatially closest to the test
/// point is projected forward.
pub fn npc_classify(
    train: &TrackDataset,
    test: &TrackDataset,
    cfg: &NpcConfig,
) -> Result<Vec<VesselId>, NpcError> {
    cfg.validate()?;
    let mut by_label: BTreeMap<VesselId, Vec<&AisPoint>> = BTreeMap::new();
    for p in train.points() {
        if let Some(v) = p.vid {
            by_label.entry(v).or_default().push(p);
        }
    }
    if by_label.is_empty() {
        return Err(NpcError::NoTrainingLabels);
    }
    let offset = test.epoch() - train.epoch();

    let mut labels = Vec::with_capacity(test.len());
    let mut missing = Vec::new();
    for (idx, obs) in test.points().iter().enumerate() {
        let t = obs.t + offset;
        let mut best: Option<(f64, VesselId)> = None;
        for (&vid, track) in &by_label {
            let upto = track.partition_point(|p| p.t <= t);
            if upto == 0 {
                continue;
            }
            let recent = &track[upto.saturating_sub(cfg.recent_per_label)..upto];
            // latest wins among equally close reports
            let anchor = recent
                .iter()
                .rev()
                .min_by(|a, b| ground_distance_m(a, obs).total_cmp(&ground_distance_m(b, obs)))
                .expect("non-empty");
            let projected = estimate(anchor, &Motion::of(anchor), (t - anchor.t) as f64);
            let d = ground_distance_m(&projected, obs);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, vid));
            }
        }
        match best {
            Some((_, vid)) => labels.push(vid),
            None => missing.push(idx),
        }
    }
    if !missing.is_empty() {
        return Err(NpcError::Unclassifiable { indices: missing });
    }
    Ok(labels)
}

/// Grouping result: the components plus each point's chosen partner.
#[derive(Debug, Clone, PartialEq)]
pub struct NpcClustering {
    pub assignment: ClusterAssignment,
    pub edges: Vec<Option<usize>>,
}

/// Neighbour ranked by a coarse distance key, then by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Scored(u64, usize);

fn features(p: &AisPoint, w: &FeatureWeights, lat_w: f64) -> [f64; 5] {
    [w.t * p.t as f64, lat_w * p.lat, w.lon * p.lon, w.sog * p.sog, w.cog * p.cog]
}

fn sq_dist(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact k nearest neighbours of `i` (excluding itself) under the weighted
/// feature metric, nearest first, ties (at single precision) to the smaller
/// index. The time axis
/// is sorted, so the scan stops once the time term alone exceeds the
/// current k-th distance.
pub fn k_nearest(ds: &TrackDataset, i: usize, cfg: &NpcConfig) -> Vec<usize> {
    let feats: Vec<[f64; 5]> = {
        let lat_w = cfg.weights.lat.unwrap_or(ds.alpha());
        ds.points().iter().map(|p| features(p, &cfg.weights, lat_w)).collect()
    };
    k_nearest_in(ds.points(), &feats, i, cfg.k_neighbors, cfg.weights.t)
}

fn k_nearest_in(pts: &[AisPoint], feats: &[[f64; 5]], i: usize, k: usize, wt: f64) -> Vec<usize> {
    let mut heap: BinaryHeap<Scored> = BinaryHeap::with_capacity(k + 1);
    let n = pts.len();
    let time_gap = |j: usize| {
        let g = wt * (pts[j].t - pts[i].t) as f64;
        g * g
    };
    let offer = |j: usize, heap: &mut BinaryHeap<Scored>| {
        let s = Scored(coarse_key(sq_dist(&feats[i], &feats[j])), j);
        if heap.len() < k {
            heap.push(s);
        } else if s < *heap.peek().expect("full heap") {
            heap.pop();
            heap.push(s);
        }
    };
    let (mut left, mut right) = (i, i + 1);
    let (mut left_open, mut right_open) = (i > 0, right < n);
    while left_open || right_open {
        if left_open {
            let j = left - 1;
            if heap.len() == k && coarse_key(time_gap(j)) > heap.peek().expect("full heap").0 {
                left_open = false;
            } else {
                offer(j, &mut heap);
                left = j;
                left_open = left > 0;
            }
        }
        if right_open {
            let j = right;
            if heap.len() == k && coarse_key(time_gap(j)) > heap.peek().expect("full heap").0 {
                right_open = false;
            } else {
                offer(j, &mut heap);
                right += 1;
                right_open = right < n;
            }
        }
    }
    heap.into_sorted_vec().into_iter().map(|s| s.1).collect()
}

/// Circular mean of two courses, degrees in `[0, 360)`.
pub fn mean_course(a: f64, b: f64) -> f64 {
    let (sa, ca) = a.to_radians().sin_cos();
    let (sb, cb) = b.to_radians().sin_cos();
    let deg = (sa + sb).atan2(ca + cb).to_degrees();
    if deg < 0.0 {
        deg + 360.0
    } else {
        deg
    }
}

/// Unsupervised next-point grouping.
///
/// For each point and each of its k nearest neighbours, the point is moved by
/// the pair's averaged speed and course over their (signed) time difference;
/// the point is grouped with the neighbour whose observed position is nearest
/// to that estimate. Clusters are the connected components.
pub fn npc_cluster(ds: &TrackDataset, cfg: &NpcConfig) -> Result<NpcClustering, NpcError> {
    cfg.validate()?;
    let n = ds.len();
    if n < cfg.k_neighbors + 1 {
        return Err(NpcError::TooFewPoints {
            needed: cfg.k_neighbors + 1,
            got: n,
        });
    }
    let pts = ds.points();
    let lat_w = cfg.weights.lat.unwrap_or(ds.alpha());
    let feats: Vec<[f64; 5]> = pts.iter().map(|p| features(p, &cfg.weights, lat_w)).collect();

    let edges: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let xi = &pts[i];
            k_nearest_in(pts, &feats, i, cfg.k_neighbors, cfg.weights.t)
                .into_iter()
                .enumerate()
                .map(|(rank, j)| {
                    let xj = &pts[j];
                    let motion =
                        Motion::from_velocity(0.5 * (xi.sog + xj.sog), mean_course(xi.cog, xj.cog));
                    let guess = estimate(xi, &motion, (xj.t - xi.t) as f64);
                    // millimetre resolution; equal misses go to the nearer neighbour
                    let miss_mm = (ground_distance_m(&guess, xj) * 1e3).floor() as u64;
                    (miss_mm, rank, j)
                })
                .min()
                .map(|(_, _, j)| j)
        })
        .collect();

    let mut uf = UnionFind::new(n);
    for (i, e) in edges.iter().enumerate() {
        if let Some(j) = e {
            uf.union(i, *j);
        }
    }
    Ok(NpcClustering {
        assignment: ClusterAssignment {
            cluster_of: uf.labels(),
            ..Default::default()
        },
        edges,
    })
}
