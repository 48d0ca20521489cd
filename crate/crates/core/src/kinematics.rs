//! Constant-velocity dead reckoning and the distance/angle primitives used to
//! score next-point candidates.
//!
//! Everything works on raw degree differences. Latitude differences are
//! multiplied by the dataset's `alpha` so both axes are on a comparable
//! scale; time differences enter through a small weight.

use crate::model::{AisPoint, CbtrConfig, PairMode};

/// Metres per second in one knot.
pub const KNOT_M_S: f64 = 0.514444;
/// Metres per degree of latitude.
pub const M_PER_DEG_LAT: f64 = 111_120.0;
/// Metres per degree of longitude at the equator.
pub const M_PER_DEG_LON_EQUATOR: f64 = 111_320.0;

/// Largest look-ahead/behind accepted by [`dead_reckon`].
pub const MAX_DEAD_RECKON_S: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedPosition {
    pub lat: f64,
    pub lon: f64,
    pub at_t: i64,
}

/// Velocity of a report split into a northward rate in degrees per second and
/// an eastward rate in metres per second (the longitude rate depends on the
/// latitude it is applied at).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub north_deg_s: f64,
    pub east_m_s: f64,
}

impl Motion {
    pub fn from_velocity(sog: f64, cog: f64) -> Self {
        let (sin, cos) = cog.to_radians().sin_cos();
        let ms = sog * KNOT_M_S;
        Self {
            north_deg_s: ms * cos / M_PER_DEG_LAT,
            east_m_s: ms * sin,
        }
    }

    pub fn of(p: &AisPoint) -> Self {
        Self::from_velocity(p.sog, p.cog)
    }

    /// Position after `dt` seconds from `(lat, lon)`. The longitude rate is
    /// taken at the mid-latitude of the leg, which makes a forward step
    /// followed by the reverse step return to the start.
    #[inline]
    pub fn advance(&self, lat: f64, lon: f64, dt: f64) -> (f64, f64) {
        let dlat = self.north_deg_s * dt;
        let mid = lat + 0.5 * dlat;
        let dlon = self.east_m_s * dt / (M_PER_DEG_LON_EQUATOR * mid.to_radians().cos());
        (lat + dlat, lon + dlon)
    }
}

/// Predicts where `p` is `dt` seconds later (earlier when negative) by
/// holding its speed and course.
pub fn dead_reckon(p: &AisPoint, dt: i64) -> PredictedPosition {
    debug_assert!(dt.abs() <= MAX_DEAD_RECKON_S, "dead reckoning over {dt} s");
    let (lat, lon) = Motion::of(p).advance(p.lat, p.lon, dt as f64);
    PredictedPosition {
        lat,
        lon,
        at_t: p.t + dt,
    }
}

/// Weighted `(time, alpha * lat, lon)` displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeVector {
    pub tau: f64,
    pub lat: f64,
    pub lon: f64,
}

impl SpaceTimeVector {
    pub fn new(dt: f64, dlat: f64, dlon: f64, alpha: f64, time_weight: f64) -> Self {
        Self {
            tau: time_weight * dt,
            lat: alpha * dlat,
            lon: dlon,
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.tau * other.tau + self.lat * other.lat + self.lon * other.lon
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Cosine of the angle to `other`; `None` if either vector has zero length.
    pub fn cos_to(&self, other: &Self) -> Option<f64> {
        let n = self.norm() * other.norm();
        (n > 0.0).then(|| self.dot(other) / n)
    }
}

/// Moving if the summed speeds strictly exceed the threshold.
pub fn pair_mode(a: &AisPoint, b: &AisPoint, cfg: &CbtrConfig) -> PairMode {
    if a.sog + b.sog > cfg.moving_speed_sum {
        PairMode::Moving
    } else {
        PairMode::Steady
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingScore {
    pub d_plus: f64,
    pub d_minus: f64,
    pub d_ij: f64,
    pub cos_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyScore {
    pub d0: f64,
    pub cos_theta0: f64,
}

/// Returned when a candidate is not strictly later than its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotLater;

/// Forward/backward dead-reckoning error of a moving pair and the space-time
/// angle between the predicted heading of `xi` and the displacement to `xj`.
pub fn moving_error(
    xi: &AisPoint,
    xj: &AisPoint,
    alpha: f64,
    cfg: &CbtrConfig,
) -> Result<MovingScore, NotLater> {
    moving_error_with(xi, &Motion::of(xi), xj, &Motion::of(xj), alpha, cfg)
}

#[inline]
pub(crate) fn moving_error_with(
    xi: &AisPoint,
    mi: &Motion,
    xj: &AisPoint,
    mj: &Motion,
    alpha: f64,
    cfg: &CbtrConfig,
) -> Result<MovingScore, NotLater> {
    if xj.t <= xi.t {
        return Err(NotLater);
    }
    let dt = (xj.t - xi.t) as f64;
    let time_term = (cfg.time_weight_moving * dt).powi(2);

    let (f_lat, f_lon) = mi.advance(xi.lat, xi.lon, dt);
    let d_plus = time_term + (alpha * (f_lat - xj.lat)).powi(2) + (f_lon - xj.lon).powi(2);

    let (b_lat, b_lon) = mj.advance(xj.lat, xj.lon, -dt);
    let d_minus = time_term + (alpha * (b_lat - xi.lat)).powi(2) + (b_lon - xi.lon).powi(2);

    let w = cfg.angle_time_weight;
    let heading = SpaceTimeVector::new(dt, f_lat - xi.lat, f_lon - xi.lon, alpha, w);
    let actual = SpaceTimeVector::new(dt, xj.lat - xi.lat, xj.lon - xi.lon, alpha, w);
    let cos_theta = heading.cos_to(&actual).ok_or(NotLater)?;

    Ok(MovingScore {
        d_plus,
        d_minus,
        d_ij: 0.5 * (d_plus + d_minus),
        cos_theta,
    })
}

/// Observed-position error of a steady pair and the angle between the
/// displacement and the pure time direction.
pub fn steady_error(
    xi: &AisPoint,
    xj: &AisPoint,
    alpha: f64,
    cfg: &CbtrConfig,
) -> Result<SteadyScore, NotLater> {
    if xj.t <= xi.t {
        return Err(NotLater);
    }
    let dt = (xj.t - xi.t) as f64;
    let dlat = xj.lat - xi.lat;
    let dlon = xj.lon - xi.lon;
    let d0 = (cfg.time_weight_steady * dt).powi(2) + alpha * alpha * dlat * dlat + dlon * dlon;
    let v = SpaceTimeVector::new(dt, dlat, dlon, alpha, cfg.angle_time_weight);
    let norm = v.norm();
    Ok(SteadyScore {
        d0,
        cos_theta0: v.tau / norm,
    })
}

fn segment(a: &AisPoint, b: &AisPoint, alpha: f64, w: f64) -> SpaceTimeVector {
    SpaceTimeVector::new((b.t - a.t) as f64, b.lat - a.lat, b.lon - a.lon, alpha, w)
}

/// Cosine of the space-time turning angle at `b` along `a -> b -> c`.
/// `None` if a segment has zero length.
pub fn turning_cos(a: &AisPoint, b: &AisPoint, c: &AisPoint, alpha: f64, time_weight: f64) -> Option<f64> {
    segment(a, b, alpha, time_weight).cos_to(&segment(b, c, alpha, time_weight))
}

/// Equirectangular distance in metres.
pub fn ground_distance_m(a: &AisPoint, b: &AisPoint) -> f64 {
    let mean_lat = 0.5 * (a.lat + b.lat);
    let dy = (b.lat - a.lat) * M_PER_DEG_LAT;
    let dx = (b.lon - a.lon) * M_PER_DEG_LON_EQUATOR * mean_lat.to_radians().cos();
    dx.hypot(dy)
}

/// Metres per degree of longitude at `lat`.
pub fn m_per_deg_lon(lat: f64) -> f64 {
    M_PER_DEG_LON_EQUATOR * lat.to_radians().cos()
}
