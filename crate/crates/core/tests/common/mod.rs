//! Reference implementations written directly from the formulas, sharing no
//! code with the library beyond the point type.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cbtr::synth::{generate_fleet, SynthConfig};
use cbtr::{AisPoint, CbtrConfig, LinkSet, TrackDataset};

pub const KN: f64 = 0.514444;

/// Position of `p` after `dt` seconds at constant speed and course, with the
/// longitude rate taken at the leg's mid-latitude.
pub fn project(p: &AisPoint, dt: f64) -> (f64, f64) {
    let v = p.sog * KN;
    let c = p.cog * std::f64::consts::PI / 180.0;
    let lat = p.lat + v * c.cos() * dt / 111_120.0;
    let mid = (p.lat + lat) / 2.0;
    let lon = p.lon + v * c.sin() * dt / (111_320.0 * (mid * std::f64::consts::PI / 180.0).cos());
    (lat, lon)
}

fn cosine(a: [f64; 3], b: [f64; 3]) -> Option<f64> {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if na * nb > 0.0 {
        Some(dot / (na * nb))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub error: f64,
    pub cos: f64,
    pub moving: bool,
}

/// Score of the ordered pair, or `None` when the candidate is rejected.
pub fn score(xi: &AisPoint, xj: &AisPoint, alpha: f64, cfg: &CbtrConfig) -> Option<Scored> {
    let dt = (xj.t - xi.t) as f64;
    if dt < 1.0 || dt > cfg.window_s as f64 {
        return None;
    }
    let w = cfg.angle_time_weight;
    if xi.sog + xj.sog > cfg.moving_speed_sum {
        let tt = (cfg.time_weight_moving * dt) * (cfg.time_weight_moving * dt);
        let f = project(xi, dt);
        let b = project(xj, -dt);
        let dp = tt + (alpha * (f.0 - xj.lat)).powi(2) + (f.1 - xj.lon).powi(2);
        let dm = tt + (alpha * (b.0 - xi.lat)).powi(2) + (b.1 - xi.lon).powi(2);
        let cos = cosine(
            [w * dt, alpha * (f.0 - xi.lat), f.1 - xi.lon],
            [w * dt, alpha * (xj.lat - xi.lat), xj.lon - xi.lon],
        )?;
        (cos > cfg.cos_moving_min).then_some(Scored {
            error: (dp + dm) / 2.0,
            cos,
            moving: true,
        })
    } else {
        let dlat = xj.lat - xi.lat;
        let dlon = xj.lon - xi.lon;
        let d0 = (cfg.time_weight_steady * dt).powi(2) + (alpha * dlat).powi(2) + dlon.powi(2);
        let cos = cosine([1.0, 0.0, 0.0], [w * dt, alpha * dlat, dlon])?;
        (cos >= cfg.cos_steady_min).then_some(Scored {
            error: d0,
            cos,
            moving: false,
        })
    }
}

/// Brute-force best next point: scans every other point, keeps the lowest
/// error, breaks ties by earliest time then lowest index.
pub fn oracle_bpnp(pts: &[AisPoint], alpha: f64, i: usize, cfg: &CbtrConfig) -> Option<(usize, Scored)> {
    let mut best: Option<(usize, Scored)> = None;
    for (j, xj) in pts.iter().enumerate() {
        if j == i {
            continue;
        }
        let Some(s) = score(&pts[i], xj, alpha, cfg) else {
            continue;
        };
        let better = match best {
            None => true,
            Some((bj, bs)) => {
                s.error < bs.error || (s.error == bs.error && (xj.t, j) < (pts[bj].t, bj))
            }
        };
        if better {
            best = Some((j, s));
        }
    }
    best
}

pub fn oracle_links(ds: &TrackDataset, cfg: &CbtrConfig) -> Vec<Option<(usize, Scored)>> {
    (0..ds.len()).map(|i| oracle_bpnp(ds.points(), ds.alpha(), i, cfg)).collect()
}

/// Same result as [`oracle_links`], scanning only the later points of a
/// time-sorted dataset up to the window edge.
pub fn oracle_links_windowed(ds: &TrackDataset, cfg: &CbtrConfig) -> Vec<Option<(usize, Scored)>> {
    let pts = ds.points();
    (0..pts.len())
        .map(|i| {
            let mut best: Option<(usize, Scored)> = None;
            for (j, xj) in pts.iter().enumerate().skip(i + 1) {
                if xj.t > pts[i].t + cfg.window_s {
                    break;
                }
                if let Some(s) = score(&pts[i], xj, ds.alpha(), cfg) {
                    if best.is_none_or(|(_, b)| s.error < b.error) {
                        best = Some((j, s));
                    }
                }
            }
            best
        })
        .collect()
}

pub fn metres(a: &AisPoint, b: &AisPoint) -> f64 {
    let mid = ((a.lat + b.lat) / 2.0).to_radians();
    let x = (b.lon - a.lon) * 111_320.0 * mid.cos();
    let y = (b.lat - a.lat) * 111_120.0;
    (x * x + y * y).sqrt()
}

fn turn_cos(a: &AisPoint, b: &AisPoint, c: &AisPoint, alpha: f64, w: f64) -> Option<f64> {
    let seg = |p: &AisPoint, q: &AisPoint| [w * (q.t - p.t) as f64, alpha * (q.lat - p.lat), q.lon - p.lon];
    cosine(seg(a, b), seg(b, c))
}

/// Drops the low 29 mantissa bits, leaving single-precision resolution.
fn truncate(x: f64) -> f64 {
    f64::from_bits(x.max(0.0).to_bits() & !((1u64 << 29) - 1))
}

/// Why a point may end a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    /// No candidate survives the gates.
    NoCandidate,
    /// Among the worst links and not a plausible turn.
    SeveredWorst,
}

/// Re-derives the endpoint set from raw points: points without candidates,
/// plus the worst-ranked links that fail the turning rescue.
pub fn expected_endpoints(ds: &TrackDataset, cfg: &CbtrConfig) -> Vec<(usize, EndReason)> {
    let pts = ds.points();
    let links = oracle_links_windowed(ds, cfg);
    let mut ranked: Vec<(f64, usize)> = links
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            l.map(|(j, s)| {
                let dt = (pts[j].t - pts[i].t) as f64;
                (truncate(s.error / (dt * dt)), i)
            })
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let worst: BTreeSet<usize> = ranked.iter().take(cfg.n_abnormal).map(|r| r.1).collect();

    let mut out = Vec::new();
    for (z, l) in links.iter().enumerate() {
        match l {
            None => out.push((z, EndReason::NoCandidate)),
            Some((next, _)) if worst.contains(&z) => {
                let near = metres(&pts[z], &pts[*next]) < cfg.turn_rescue_dist_m;
                let straight = links[*next]
                    .and_then(|(after, _)| {
                        turn_cos(&pts[z], &pts[*next], &pts[after], ds.alpha(), cfg.angle_time_weight)
                    })
                    .is_some_and(|c| c >= cfg.turn_rescue_cos_min);
                if !(near && straight) {
                    out.push((z, EndReason::SeveredWorst));
                }
            }
            Some(_) => {}
        }
    }
    out
}

/// Checks that the flagged endpoints are exactly the re-derived ones.
pub fn audit_endpoints(ds: &TrackDataset, cfg: &CbtrConfig, flagged: &BTreeSet<usize>) -> Result<usize, String> {
    let expected: BTreeSet<usize> = expected_endpoints(ds, cfg).into_iter().map(|e| e.0).collect();
    if &expected == flagged {
        Ok(flagged.len())
    } else {
        let extra: Vec<_> = flagged.difference(&expected).take(5).collect();
        let missing: Vec<_> = expected.difference(flagged).take(5).collect();
        Err(format!("flagged but unjustified: {extra:?}; justified but not flagged: {missing:?}"))
    }
}

/// Moving links whose recomputed space-time cosine is at or below the gate.
pub fn moving_angle_violations(ds: &TrackDataset, links: &LinkSet, cfg: &CbtrConfig) -> Vec<usize> {
    let pts = ds.points();
    (0..links.len())
        .filter(|&i| {
            links.get(i).is_some_and(|l| {
                let xi = &pts[i];
                let xj = &pts[l.target];
                if xi.sog + xj.sog <= cfg.moving_speed_sum {
                    return false;
                }
                let dt = (xj.t - xi.t) as f64;
                let f = project(xi, dt);
                let w = cfg.angle_time_weight;
                let a = ds.alpha();
                let c = cosine(
                    [w * dt, a * (f.0 - xi.lat), f.1 - xi.lon],
                    [w * dt, a * (xj.lat - xi.lat), xj.lon - xi.lon],
                );
                l.cos <= cfg.cos_moving_min || c.is_none_or(|c| c <= cfg.cos_moving_min)
            })
        })
        .collect()
}

/// Small mixed fleet truncated to at most `max_points` reports.
pub fn small_fleet(seed: u64, max_points: usize) -> TrackDataset {
    let cfg = SynthConfig {
        n_vessels: 2 + (seed % 5) as usize,
        duration_s: 1200 + (seed % 4) as i64 * 600,
        seed,
        ..SynthConfig::default()
    };
    let ds = generate_fleet(&cfg).expect("fleet");
    ds.retain_indices(|i| i < max_points).expect("prefix")
}
