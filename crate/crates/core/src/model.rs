//! Domain types shared by every stage of the pipeline.
//!
//! Times are integer seconds measured from the earliest report in a dataset.
//! Positions stay in degrees; the latitude-scaling factor `alpha` makes
//! latitude differences commensurate with longitude differences.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, IngestError};
use crate::ingest::compute_alpha;

/// Anonymized vessel identifier. Ground truth only; never read by the
/// reconstruction algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VesselId(pub u64);

impl fmt::Display for VesselId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One timestamped position report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AisPoint {
    /// Seconds since the dataset epoch.
    pub t: i64,
    /// Degrees latitude.
    pub lat: f64,
    /// Degrees longitude.
    pub lon: f64,
    /// Speed over ground in knots.
    pub sog: f64,
    /// Course over ground in degrees clockwise from true north.
    pub cog: f64,
    pub vid: Option<VesselId>,
}

impl AisPoint {
    pub fn new(t: i64, lat: f64, lon: f64, sog: f64, cog: f64) -> Self {
        Self {
            t,
            lat,
            lon,
            sog,
            cog,
            vid: None,
        }
    }

    pub fn with_vid(mut self, vid: u64) -> Self {
        self.vid = Some(VesselId(vid));
        self
    }

    /// Name of the first field that violates its range, if any.
    pub fn range_violation(&self) -> Option<(&'static str, f64)> {
        if !(self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)) {
            return Some(("lat", self.lat));
        }
        if !(self.lon.is_finite() && (-180.0..=180.0).contains(&self.lon)) {
            return Some(("lon", self.lon));
        }
        if !(self.sog.is_finite() && self.sog >= 0.0) {
            return Some(("sog", self.sog));
        }
        if !(self.cog.is_finite() && (0.0..360.0).contains(&self.cog)) {
            return Some(("cog", self.cog));
        }
        None
    }
}

/// Time-sorted collection of reports plus the dataset-level latitude scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackDataset {
    points: Vec<AisPoint>,
    alpha: f64,
    /// Wall-clock value (seconds) that maps to `t = 0`.
    epoch: i64,
}

impl TrackDataset {
    /// Sorts `points` by time (stable, so ties keep their input order) and
    /// computes `alpha` from their mean latitude. Times are taken as given;
    /// use [`TrackDataset::from_absolute`] to shift them to start at zero.
    pub fn new(mut points: Vec<AisPoint>, epoch: i64) -> Result<Self, IngestError> {
        points.sort_by_key(|p| p.t);
        let alpha = compute_alpha(&points)?;
        Ok(Self {
            points,
            alpha,
            epoch,
        })
    }

    /// Builds a dataset from reports carrying absolute timestamps; the
    /// earliest timestamp becomes the epoch.
    pub fn from_absolute(mut points: Vec<AisPoint>) -> Result<Self, IngestError> {
        let epoch = points.iter().map(|p| p.t).min().ok_or(IngestError::Empty)?;
        for p in &mut points {
            p.t -= epoch;
        }
        Self::new(points, epoch)
    }

    /// Empty dataset. `alpha` is set to 1 since there are no latitudes to average.
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            alpha: 1.0,
            epoch: 0,
        }
    }

    pub fn points(&self) -> &[AisPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epoch(&self) -> i64 {
        self.epoch
    }

    pub fn has_labels(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.vid.is_some())
    }

    /// Ground-truth vessel id per point, if every point carries one.
    pub fn truth(&self) -> Option<Vec<VesselId>> {
        self.points.iter().map(|p| p.vid).collect()
    }

    /// Same points, vessel ids dropped.
    pub fn without_labels(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.vid = None;
        }
        out
    }

    /// Keeps the points whose index satisfies `keep`, preserving order and epoch.
    pub fn retain_indices(&self, mut keep: impl FnMut(usize) -> bool) -> Result<Self, IngestError> {
        let points: Vec<AisPoint> = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, p)| *p)
            .collect();
        if points.is_empty() {
            return Ok(Self {
                epoch: self.epoch,
                ..Self::empty()
            });
        }
        Self::new(points, self.epoch)
    }
}

/// Candidate pair classification by summed speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairMode {
    Moving,
    Steady,
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairMode::Moving => "moving",
            PairMode::Steady => "steady",
        })
    }
}

/// Tuning constants for trajectory reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbtrConfig {
    /// Maximum look-ahead for next-point candidates, seconds.
    pub window_s: i64,
    /// Pairs whose summed speeds exceed this many knots are moving.
    pub moving_speed_sum: f64,
    pub time_weight_moving: f64,
    pub time_weight_steady: f64,
    /// Time weight of the space-time vectors used for every angle test.
    pub angle_time_weight: f64,
    /// Moving candidates with `cos <= cos_moving_min` are discarded.
    pub cos_moving_min: f64,
    /// Steady candidates with `cos < cos_steady_min` are discarded.
    pub cos_steady_min: f64,
    /// Number of worst normalized-error links examined for severing.
    pub n_abnormal: usize,
    pub turn_rescue_dist_m: f64,
    pub turn_rescue_cos_min: f64,
}

impl Default for CbtrConfig {
    fn default() -> Self {
        Self {
            window_s: 1000,
            moving_speed_sum: 3.0,
            time_weight_moving: 2e-6,
            time_weight_steady: 2e-9,
            angle_time_weight: 1e-5,
            cos_moving_min: 0.1,
            cos_steady_min: 0.95,
            n_abnormal: 50,
            turn_rescue_dist_m: 350.0,
            turn_rescue_cos_min: 0.6,
        }
    }
}

impl CbtrConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.window_s < 1 {
            return bad("window_s must be >= 1");
        }
        let weights = [
            ("time_weight_moving", self.time_weight_moving),
            ("time_weight_steady", self.time_weight_steady),
            ("angle_time_weight", self.angle_time_weight),
            ("turn_rescue_dist_m", self.turn_rescue_dist_m),
        ];
        for (name, w) in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be > 0")));
            }
        }
        if !(self.moving_speed_sum.is_finite() && self.moving_speed_sum >= 0.0) {
            return bad("moving_speed_sum must be >= 0");
        }
        let cosines = [
            ("cos_moving_min", self.cos_moving_min),
            ("cos_steady_min", self.cos_steady_min),
            ("turn_rescue_cos_min", self.turn_rescue_cos_min),
        ];
        for (name, c) in cosines {
            if !(c > -1.0 && c < 1.0) {
                return Err(ConfigError::Invalid(format!("{name} must lie in (-1, 1)")));
            }
        }
        Ok(())
    }
}

/// A chosen best-possible-next-point link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub target: usize,
    /// `d_ij` for moving pairs, `d0` for steady pairs.
    pub error: f64,
    pub mode: PairMode,
    /// Cosine of the space-time angle the candidate passed.
    pub cos: f64,
}

/// Outgoing link per point, `None` when no candidate survived.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkSet {
    pub bpnp: Vec<Option<Link>>,
}

impl LinkSet {
    pub fn len(&self) -> usize {
        self.bpnp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bpnp.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Link> {
        self.bpnp.get(i).and_then(Option::as_ref)
    }

    pub fn targets(&self) -> Vec<Option<usize>> {
        self.bpnp.iter().map(|l| l.map(|l| l.target)).collect()
    }
}

/// Cluster id per point plus the endpoint and abnormal flags.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_of: Vec<usize>,
    pub endpoints: BTreeSet<usize>,
    pub abnormal: BTreeSet<usize>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_of.is_empty()
    }

    /// Ids are dense, so the count is one past the largest id.
    pub fn n_clusters(&self) -> usize {
        self.cluster_of.iter().max().map_or(0, |m| m + 1)
    }

    /// Point indices per cluster, in index order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (i, &c) in self.cluster_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}
