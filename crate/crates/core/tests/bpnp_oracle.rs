mod common;

use cbtr::reconstruct::{candidate_window, select_all, select_bpnp};
use cbtr::{AisPoint, CbtrConfig, TrackDataset};
use proptest::prelude::*;

fn assert_matches_oracle(ds: &TrackDataset, cfg: &CbtrConfig) {
    let fast = select_all(ds, cfg);
    for (i, want) in common::oracle_links(ds, cfg).into_iter().enumerate() {
        let got = fast.get(i);
        assert_eq!(got.map(|l| l.target), want.map(|w| w.0), "point {i}");
        if let (Some(g), Some((_, w))) = (got, want) {
            assert!((g.error - w.error).abs() <= 1e-12 * w.error.max(1e-300), "point {i}");
            assert_eq!(g.mode == cbtr::PairMode::Moving, w.moving);
        }
    }
}

#[test]
fn synthetic_fleets_match_brute_force() {
    let cfg = CbtrConfig::default();
    for seed in 0..20 {
        let ds = common::small_fleet(seed, 200);
        assert!(!ds.is_empty());
        assert_matches_oracle(&ds, &cfg);
    }
}

#[test]
fn windowed_scan_equals_full_scan() {
    let cfg = CbtrConfig::default();
    for seed in 40..46 {
        let ds = common::small_fleet(seed, 300);
        let full: Vec<_> = common::oracle_links(&ds, &cfg).iter().map(|l| l.map(|x| x.0)).collect();
        let win: Vec<_> = common::oracle_links_windowed(&ds, &cfg).iter().map(|l| l.map(|x| x.0)).collect();
        assert_eq!(full, win);
    }
}

#[test]
fn short_window_and_steady_heavy_configs_match() {
    let cfg = CbtrConfig {
        window_s: 60,
        moving_speed_sum: 12.0,
        ..CbtrConfig::default()
    };
    for seed in 100..106 {
        assert_matches_oracle(&common::small_fleet(seed, 200), &cfg);
    }
}

#[test]
fn single_point_select_agrees_with_batch() {
    let ds = common::small_fleet(3, 120);
    let cfg = CbtrConfig::default();
    let all = select_all(&ds, &cfg);
    for i in (0..ds.len()).step_by(7) {
        assert_eq!(select_bpnp(&ds, i, &cfg).map(|l| l.target), all.get(i).map(|l| l.target));
    }
}

#[test]
fn window_bounds_are_inclusive() {
    let pts = [0, 1, 1000, 1001]
        .iter()
        .map(|&t| AisPoint::new(t, 37.0, -76.0, 0.0, 0.0))
        .collect();
    let ds = TrackDataset::new(pts, 0).unwrap();
    let w = candidate_window(&ds, 0, &CbtrConfig::default());
    assert_eq!(w, 1..3);
    let w = candidate_window(&ds, 3, &CbtrConfig::default());
    assert!(w.is_empty());
}

fn arb_point() -> impl Strategy<Value = AisPoint> {
    (0i64..3000, 36.95f64..37.0, -76.1f64..-76.0, 0.0f64..16.0, 0.0f64..360.0)
        .prop_map(|(t, lat, lon, sog, cog)| AisPoint::new(t, lat, lon, sog, cog))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_clouds_match_brute_force(pts in prop::collection::vec(arb_point(), 1..120)) {
        let ds = TrackDataset::new(pts, 0).unwrap();
        assert_matches_oracle(&ds, &CbtrConfig::default());
    }

    #[test]
    fn duplicated_reports_tie_to_the_earliest(p in arb_point(), copies in 2usize..5) {
        let mut pts = vec![AisPoint::new(0, p.lat, p.lon, 0.0, 0.0)];
        for _ in 0..copies {
            pts.push(AisPoint::new(10, p.lat, p.lon, 0.0, 0.0));
        }
        let ds = TrackDataset::new(pts, 0).unwrap();
        let links = select_all(&ds, &CbtrConfig::default());
        prop_assert_eq!(links.get(0).map(|l| l.target), Some(1));
    }
}
