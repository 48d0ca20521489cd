//! Deterministic synthetic AIS fleets and down-sampling.
//!
//! Moving vessels enter from the edge of the bounding box and follow
//! piecewise-constant legs until they leave it or the window closes.
//! Steady vessels sit at an anchor, either motionless or drifting inside a
//! small radius. Reported speed and course are the true values of the
//! current leg. Course changes are flown at a finite rate of turn, as a run
//! of one-second constant-course steps. Position noise is a first-order
//! Gauss-Markov process per vessel, so reports close in time share most of
//! their error.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, SynthError};
use crate::kinematics::{ground_distance_m, m_per_deg_lon, Motion, M_PER_DEG_LAT};
use crate::model::{AisPoint, TrackDataset, VesselId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Archetype {
    Transit,
    Turning,
    SteadyDocked,
    SteadyDrifting,
}

impl Archetype {
    pub fn is_steady(self) -> bool {
        matches!(self, Archetype::SteadyDocked | Archetype::SteadyDrifting)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for BBox {
    fn default() -> Self {
        Self {
            lat_min: 36.906,
            lat_max: 37.050,
            lon_min: -76.330,
            lon_max: -75.980,
        }
    }
}

impl BBox {
    fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }

    fn mid_lat(&self) -> f64 {
        0.5 * (self.lat_min + self.lat_max)
    }
}

/// Extra silent periods inserted into each vessel's reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub per_vessel: usize,
    pub min_s: i64,
    pub max_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_vessels: usize,
    /// One archetype per vessel; empty picks archetypes at random.
    pub archetypes: Vec<Archetype>,
    pub duration_s: i64,
    pub bbox: BBox,
    /// Inclusive range of the gap between consecutive reports of a steady
    /// vessel, seconds.
    pub interval_s: (i64, i64),
    /// Same for vessels under way, which report more often.
    pub moving_interval_s: (i64, i64),
    /// Speed range of moving vessels, knots.
    pub speed_knots: (f64, f64),
    /// Standard deviation of position noise per axis, metres.
    pub noise_m: f64,
    /// Correlation time of the position noise, seconds; 0 makes every
    /// report's error independent.
    pub noise_correlation_s: f64,
    /// Rate of turn at course changes, degrees per second.
    pub turn_rate_deg_s: f64,
    /// Optional reported-velocity noise: (knots, degrees) standard deviations.
    pub velocity_noise: Option<(f64, f64)>,
    pub drift_radius_m: f64,
    /// Minimum distance between the anchors of steady vessels.
    pub min_anchor_separation_m: f64,
    pub gaps: Option<GapConfig>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_vessels: 20,
            archetypes: Vec::new(),
            duration_s: 14_400,
            bbox: BBox::default(),
            interval_s: (2, 180),
            moving_interval_s: (2, 30),
            speed_knots: (5.0, 15.0),
            noise_m: 10.0,
            noise_correlation_s: 120.0,
            turn_rate_deg_s: 1.0,
            velocity_noise: None,
            drift_radius_m: 11.0,
            min_anchor_separation_m: 600.0,
            gaps: None,
            seed: 0,
        }
    }
}

/// Seed of the pinned reference fleet.
pub const S1_SEED: u64 = 7;

impl SynthConfig {
    /// Archetype list with the given counts, in that order.
    pub fn mix(transit: usize, turning: usize, docked: usize, drifting: usize) -> Vec<Archetype> {
        [
            (Archetype::Transit, transit),
            (Archetype::Turning, turning),
            (Archetype::SteadyDocked, docked),
            (Archetype::SteadyDrifting, drifting),
        ]
        .into_iter()
        .flat_map(|(a, n)| std::iter::repeat_n(a, n))
        .collect()
    }

    /// Reference fleet: 20 vessels over four hours (14 transit, 3 turning,
    /// 3 steady), 10 m position noise, no gaps.
    pub fn scenario_s1(seed: u64) -> Self {
        Self {
            n_vessels: 20,
            archetypes: Self::mix(14, 3, 2, 1),
            noise_m: 10.0,
            seed,
            ..Self::default()
        }
    }

    /// The reference fleet with two reporting gaps per vessel, some shorter
    /// and some longer than the default candidate window.
    pub fn scenario_s1_with_gaps(seed: u64) -> Self {
        Self {
            gaps: Some(GapConfig {
                per_vessel: 2,
                min_s: 400,
                max_s: 1500,
            }),
            ..Self::scenario_s1(seed)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.n_vessels < 1 {
            return bad("n_vessels must be >= 1");
        }
        if !self.archetypes.is_empty() && self.archetypes.len() != self.n_vessels {
            return bad("archetype list length must equal n_vessels");
        }
        if self.duration_s <= 0 {
            return bad("duration must be > 0");
        }
        let b = &self.bbox;
        if !(b.lat_min < b.lat_max && b.lon_min < b.lon_max && b.lat_min > -89.0 && b.lat_max < 89.0) {
            return bad("bounding box is not well formed");
        }
        if !(b.lon_min >= -180.0 && b.lon_max <= 180.0) {
            return bad("bounding box longitude out of range");
        }
        for (lo, hi) in [self.interval_s, self.moving_interval_s] {
            if lo < 1 || hi < lo {
                return bad("interval range must satisfy 1 <= min <= max");
            }
        }
        let (s0, s1) = self.speed_knots;
        if !(s0 > 0.0 && s0 <= s1) {
            return bad("speed range must satisfy 0 < min <= max");
        }
        if !(self.noise_m >= 0.0 && self.drift_radius_m >= 0.0 && self.min_anchor_separation_m >= 0.0) {
            return bad("noise, drift radius and anchor separation must be >= 0");
        }
        if !(self.noise_correlation_s >= 0.0 && self.noise_correlation_s.is_finite()) {
            return bad("noise correlation time must be >= 0");
        }
        if !(self.turn_rate_deg_s > 0.0 && self.turn_rate_deg_s.is_finite()) {
            return bad("turn rate must be > 0");
        }
        if let Some(g) = self.gaps {
            if g.min_s < 1 || g.max_s < g.min_s {
                return bad("gap range must satisfy 1 <= min <= max");
            }
        }
        Ok(())
    }
}

/// One generated report before noise, with its leg index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TruthSample {
    pub t: i64,
    pub lat: f64,
    pub lon: f64,
    pub sog: f64,
    pub cog: f64,
    pub leg: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct VesselTrack {
    pub vid: u64,
    pub archetype: Archetype,
    pub anchor: Option<(f64, f64)>,
    pub samples: Vec<TruthSample>,
}

#[derive(Debug, Clone, Copy)]
struct Leg {
    sog: f64,
    cog: f64,
    until: i64,
}

fn wrap_course(c: f64) -> f64 {
    let w = c.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

fn course_between(from: (f64, f64), to: (f64, f64)) -> f64 {
    let north = (to.0 - from.0) * M_PER_DEG_LAT;
    let east = (to.1 - from.1) * m_per_deg_lon(0.5 * (from.0 + to.0));
    wrap_course(east.atan2(north).to_degrees())
}

struct Clock {
    next_gap: Vec<(i64, i64)>,
}

impl Clock {
    /// Next report time after `t`, applying any gap whose start is crossed.
    fn next(&mut self, t: i64, rng: &mut ChaCha8Rng, interval: (i64, i64)) -> i64 {
        let mut n = t + rng.random_range(interval.0..=interval.1);
        while let Some(&(start, len)) = self.next_gap.first() {
            if start > n {
                break;
            }
            n += len;
            self.next_gap.remove(0);
        }
        n
    }
}

fn make_clock(cfg: &SynthConfig, start: i64, rng: &mut ChaCha8Rng) -> Clock {
    let mut next_gap = Vec::new();
    if let Some(g) = cfg.gaps {
        let span = (cfg.duration_s - start).max(1);
        for _ in 0..g.per_vessel {
            let at = start + rng.random_range(0..span);
            next_gap.push((at, rng.random_range(g.min_s..=g.max_s)));
        }
        next_gap.sort_unstable();
    }
    Clock { next_gap }
}

fn edge_entry(b: &BBox, rng: &mut ChaCha8Rng) -> ((f64, f64), (f64, f64)) {
    let frac = |rng: &mut ChaCha8Rng| rng.random_range(0.05..0.95);
    let lat_at = |f: f64| b.lat_min + f * (b.lat_max - b.lat_min);
    let lon_at = |f: f64| b.lon_min + f * (b.lon_max - b.lon_min);
    let eps = 1e-6;
    let entry = match rng.random_range(0..4) {
        0 => (b.lat_min + eps, lon_at(frac(rng))),
        1 => (b.lat_max - eps, lon_at(frac(rng))),
        2 => (lat_at(frac(rng)), b.lon_min + eps),
        _ => (lat_at(frac(rng)), b.lon_max - eps),
    };
    let target = (lat_at(rng.random_range(0.25..0.75)), lon_at(rng.random_range(0.25..0.75)));
    (entry, target)
}

fn moving_track(cfg: &SynthConfig, vid: u64, archetype: Archetype, rng: &mut ChaCha8Rng) -> VesselTrack {
    let (entry, target) = edge_entry(&cfg.bbox, rng);
    let start = rng.random_range(0..=(cfg.duration_s / 2));
    let mut course = course_between(entry, target);
    let (s0, s1) = cfg.speed_knots;

    let mut legs = Vec::new();
    let mut until = start;
    let n_legs = match archetype {
        Archetype::Turning => 6,
        _ => 3,
    };
    for k in 0..n_legs {
        let len = match archetype {
            Archetype::Turning => rng.random_range(480..=1200),
            _ => rng.random_range(1200..=2400),
        };
        let sog = rng.random_range(s0..=s1);
        if k > 0 {
            let turn = match archetype {
                Archetype::Turning => rng.random_range(60.0..150.0),
                _ => rng.random_range(0.0..15.0),
            };
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut left: f64 = turn;
            while left > 0.0 {
                let step = left.min(cfg.turn_rate_deg_s);
                course = wrap_course(course + sign * step);
                left -= step;
                until += 1;
                legs.push(Leg { sog, cog: course, until });
            }
        }
        until += len;
        legs.push(Leg { sog, cog: course, until });
    }
    legs.last_mut().expect("legs").until = i64::MAX;

    let mut clock = make_clock(cfg, start, rng);
    let mut samples = Vec::new();
    let (mut lat, mut lon) = entry;
    let mut t = start;
    let mut leg = 0;
    while t <= cfg.duration_s && cfg.bbox.contains(lat, lon) {
        let l = legs[leg];
        samples.push(TruthSample {
            t,
            lat,
            lon,
            sog: l.sog,
            cog: l.cog,
            leg,
        });
        let next = clock.next(t, rng, cfg.moving_interval_s);
        // advance through any leg boundaries between t and next
        let mut now = t;
        while now < next {
            let l = legs[leg];
            let stop = next.min(l.until);
            let m = Motion::from_velocity(l.sog, l.cog);
            (lat, lon) = m.advance(lat, lon, (stop - now) as f64);
            now = stop;
            if now == l.until {
                leg += 1;
            }
        }
        t = next;
    }
    VesselTrack {
        vid,
        archetype,
        anchor: None,
        samples,
    }
}

fn steady_track(
    cfg: &SynthConfig,
    vid: u64,
    archetype: Archetype,
    anchor: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> VesselTrack {
    let start = rng.random_range(0..=(cfg.duration_s / 8));
    let mut clock = make_clock(cfg, start, rng);
    let mut samples = Vec::new();
    let (mut lat, mut lon) = anchor;
    let mut t = start;
    let drifting = archetype == Archetype::SteadyDrifting && cfg.drift_radius_m > 0.0;
    let mut leg = 0;
    let mut sog = 0.0;
    let mut cog = 0.0;
    let mut leg_until = t;
    while t <= cfg.duration_s {
        if drifting && t >= leg_until {
            leg += 1;
            sog = rng.random_range(0.02..0.2);
            cog = wrap_course(rng.random_range(0.0..360.0));
            leg_until = t + rng.random_range(120..=900);
        }
        samples.push(TruthSample {
            t,
            lat,
            lon,
            sog,
            cog,
            leg,
        });
        let next = clock.next(t, rng, cfg.interval_s);
        if drifting {
            (lat, lon) = Motion::from_velocity(sog, cog).advance(lat, lon, (next - t) as f64);
            let here = AisPoint::new(0, lat, lon, 0.0, 0.0);
            let home = AisPoint::new(0, anchor.0, anchor.1, 0.0, 0.0);
            let r = ground_distance_m(&here, &home);
            if r > cfg.drift_radius_m {
                // pull back inside the circle and head home
                let k = 0.9 * cfg.drift_radius_m / r;
                lat = anchor.0 + (lat - anchor.0) * k;
                lon = anchor.1 + (lon - anchor.1) * k;
                cog = course_between((lat, lon), anchor);
                leg += 1;
            }
        }
        t = next;
    }
    VesselTrack {
        vid,
        archetype,
        anchor: Some(anchor),
        samples,
    }
}

fn place_anchors(cfg: &SynthConfig, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>, SynthError> {
    let b = &cfg.bbox;
    let margin_lat = (cfg.drift_radius_m + 3.0 * cfg.noise_m) / M_PER_DEG_LAT;
    let margin_lon = (cfg.drift_radius_m + 3.0 * cfg.noise_m) / m_per_deg_lon(b.mid_lat());
    let lat_range = (b.lat_min + margin_lat, b.lat_max - margin_lat);
    let lon_range = (b.lon_min + margin_lon, b.lon_max - margin_lon);
    let too_small = SynthError::BboxTooSmall {
        vessels: count,
        separation_m: cfg.min_anchor_separation_m,
    };
    if count > 0 && (lat_range.0 > lat_range.1 || lon_range.0 > lon_range.1) {
        return Err(too_small);
    }
    let mut anchors: Vec<(f64, f64)> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..10_000 {
            let cand = (
                rng.random_range(lat_range.0..=lat_range.1),
                rng.random_range(lon_range.0..=lon_range.1),
            );
            let c = AisPoint::new(0, cand.0, cand.1, 0.0, 0.0);
            let clear = anchors.iter().all(|a| {
                ground_distance_m(&c, &AisPoint::new(0, a.0, a.1, 0.0, 0.0)) >= cfg.min_anchor_separation_m
            });
            if clear {
                anchors.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(too_small);
        }
    }
    Ok(anchors)
}

fn vessel_rng(seed: u64, vid: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vid);
    rng
}

pub(crate) fn generate_tracks(cfg: &SynthConfig) -> Result<Vec<VesselTrack>, SynthError> {
    cfg.validate()?;
    let mut fleet_rng = vessel_rng(cfg.seed, 0);
    let archetypes: Vec<Archetype> = if cfg.archetypes.is_empty() {
        const ALL: [Archetype; 4] = [
            Archetype::Transit,
            Archetype::Turning,
            Archetype::SteadyDocked,
            Archetype::SteadyDrifting,
        ];
        (0..cfg.n_vessels).map(|_| ALL[fleet_rng.random_range(0..4)]).collect()
    } else {
        cfg.archetypes.clone()
    };
    let n_steady = archetypes.iter().filter(|a| a.is_steady()).count();
    let mut anchors = place_anchors(cfg, n_steady, &mut fleet_rng)?.into_iter();

    Ok(archetypes
        .iter()
        .enumerate()
        .map(|(k, &arch)| {
            let vid = k as u64 + 1;
            let mut rng = vessel_rng(cfg.seed, vid);
            if arch.is_steady() {
                steady_track(cfg, vid, arch, anchors.next().expect("anchor per steady vessel"), &mut rng)
            } else {
                moving_track(cfg, vid, arch, &mut rng)
            }
        })
        .collect())
}

/// Generates a labeled fleet; identical configs give identical datasets.
pub fn generate_fleet(cfg: &SynthConfig) -> Result<TrackDataset, SynthError> {
    let tracks = generate_tracks(cfg)?;
    let mut noise_rng = vessel_rng(cfg.seed, u64::MAX);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut points = Vec::new();
    for track in &tracks {
        // stationary Gauss-Markov error, metres north and east
        let mut err = (0.0, 0.0);
        let mut prev_t: Option<i64> = None;
        for s in &track.samples {
            let (mut lat, mut lon) = (s.lat, s.lon);
            if cfg.noise_m > 0.0 {
                let rho = match prev_t {
                    Some(p) if cfg.noise_correlation_s > 0.0 => (-((s.t - p) as f64) / cfg.noise_correlation_s).exp(),
                    _ => 0.0,
                };
                let fresh = cfg.noise_m * (1.0 - rho * rho).sqrt();
                err.0 = rho * err.0 + fresh * unit.sample(&mut noise_rng);
                err.1 = rho * err.1 + fresh * unit.sample(&mut noise_rng);
                lat += err.0 / M_PER_DEG_LAT;
                lon += err.1 / m_per_deg_lon(s.lat);
            }
            prev_t = Some(s.t);
            let (mut sog, mut cog) = (s.sog, s.cog);
            if let Some((sd_kn, sd_deg)) = cfg.velocity_noise {
                sog = (sog + sd_kn * unit.sample(&mut noise_rng)).max(0.0);
                cog = wrap_course(cog + sd_deg * unit.sample(&mut noise_rng));
            }
            points.push(AisPoint {
                t: s.t,
                lat,
                lon,
                sog,
                cog,
                vid: Some(VesselId(track.vid)),
            });
        }
    }
    if points.is_empty() {
        return Ok(TrackDataset::empty());
    }
    TrackDataset::from_absolute(points).map_err(|e| SynthError::Config(ConfigError::Invalid(e.to_string())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DownsamplePattern {
    /// Drop the 5th, 10th, ... report (20% removal).
    EveryFifth,
    /// Drop the 2nd, 4th, ... report (50% removal).
    EverySecond,
}

impl DownsamplePattern {
    fn period(self) -> usize {
        match self {
            DownsamplePattern::EveryFifth => 5,
            DownsamplePattern::EverySecond => 2,
        }
    }
}

impl std::str::FromStr for DownsamplePattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "every-5th" => Ok(Self::EveryFifth),
            "every-2nd" => Ok(Self::EverySecond),
            other => Err(format!("unknown pattern {other:?} (expected every-5th or every-2nd)")),
        }
    }
}

/// Thins each vessel's sequence (or the global sequence when vessel ids are
/// missing) by removing every `period`-th report.
pub fn downsample(ds: &TrackDataset, pattern: DownsamplePattern) -> TrackDataset {
    let period = pattern.period();
    let mut seen: BTreeMap<Option<VesselId>, usize> = BTreeMap::new();
    let per_vessel = ds.has_labels();
    let mut keep = vec![true; ds.len()];
    for (i, p) in ds.points().iter().enumerate() {
        let key = if per_vessel { p.vid } else { None };
        let n = seen.entry(key).or_insert(0);
        *n += 1;
        if n.is_multiple_of(period) {
            keep[i] = false;
        }
    }
    ds.retain_indices(|i| keep[i]).expect("subset of a valid dataset")
}
