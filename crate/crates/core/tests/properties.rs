mod common;

use std::collections::{BTreeMap, BTreeSet};

use cbtr::kinematics::{dead_reckon, steady_error};
use cbtr::metrics::{estimate_vessel_count, jumps_merges};
use cbtr::npc::{npc_classify, npc_cluster, NpcConfig};
use cbtr::synth::{generate_fleet, Archetype, SynthConfig};
use cbtr::{run_cbtr, AisPoint, CbtrConfig, ClusterAssignment, PairMode, TrackDataset, VesselId};
use proptest::prelude::*;

#[allow(clippy::too_many_arguments)]
fn straight(vid: u64, t0: i64, lat: f64, lon: f64, sog: f64, cog: f64, n: i64, step: i64) -> Vec<AisPoint> {
    let start = AisPoint::new(t0, lat, lon, sog, cog);
    (0..n)
        .map(|k| {
            let p = dead_reckon(&start, k * step);
            AisPoint::new(t0 + k * step, p.lat, p.lon, sog, cog).with_vid(vid)
        })
        .collect()
}

fn vids(ds: &TrackDataset) -> Vec<VesselId> {
    ds.truth().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moving_links_never_open_a_wide_angle(seed in 0u64..1000) {
        let ds = common::small_fleet(seed, 300);
        let cfg = CbtrConfig::default();
        let r = run_cbtr(&ds, &cfg).unwrap();
        prop_assert!(common::moving_angle_violations(&ds, &r.links, &cfg).is_empty());
        for l in r.links.bpnp.iter().flatten() {
            match l.mode {
                PairMode::Moving => prop_assert!(l.cos > cfg.cos_moving_min),
                PairMode::Steady => prop_assert!(l.cos >= cfg.cos_steady_min),
            }
        }
    }

    #[test]
    fn endpoints_are_exactly_the_justified_ones(seed in 0u64..1000, n in 5usize..60) {
        let ds = common::small_fleet(seed, 250);
        let cfg = CbtrConfig { n_abnormal: n, ..CbtrConfig::default() };
        let r = run_cbtr(&ds, &cfg).unwrap();
        prop_assert!(common::audit_endpoints(&ds, &cfg, &r.assignment.endpoints).is_ok());
        prop_assert!(r.assignment.abnormal.is_subset(&r.assignment.endpoints));
    }

    #[test]
    fn steady_pairs_beyond_the_angle_bound_are_rejected(
        dt in 1i64..=1000,
        bearing in 0.0f64..360.0,
        extra_m in 1.0f64..2000.0,
    ) {
        let cfg = CbtrConfig::default();
        let a = AisPoint::new(0, 37.0, -76.0, 0.0, 0.0);
        let alpha = 69.0 / (69.172 * 37f64.to_radians().cos());
        // distance at which the gate closes for this gap and bearing
        let tau = cfg.angle_time_weight * dt as f64;
        let limit_units = tau * (1.0 / (cfg.cos_steady_min * cfg.cos_steady_min) - 1.0).sqrt();
        let (s, c) = bearing.to_radians().sin_cos();
        let per_m = ((alpha * c / 111_120.0).powi(2) + (s / (111_320.0 * 37f64.to_radians().cos())).powi(2)).sqrt();
        let r = limit_units / per_m + extra_m;
        let b = AisPoint::new(dt, 37.0 + r * c / 111_120.0, -76.0 + r * s / (111_320.0 * 37f64.to_radians().cos()), 0.0, 0.0);
        let score = steady_error(&a, &b, alpha, &cfg).unwrap();
        prop_assert!(score.cos_theta0 < cfg.cos_steady_min);
    }

    #[test]
    fn vessel_count_identity_holds_for_any_partition(
        labels in prop::collection::vec(0u64..6, 1..80),
        clusters in prop::collection::vec(0usize..8, 80),
    ) {
        let truth: Vec<VesselId> = labels.iter().copied().map(VesselId).collect();
        let mut remap = BTreeMap::new();
        let cluster_of: Vec<usize> = clusters[..truth.len()]
            .iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(*c).or_insert(next)
            })
            .collect();
        let a = ClusterAssignment { cluster_of, ..Default::default() };
        let (j, m) = jumps_merges(&a, &truth).unwrap();
        let want = truth.iter().collect::<BTreeSet<_>>().len();
        prop_assert_eq!(estimate_vessel_count(a.n_clusters(), j, m).unwrap(), want);
    }

    #[test]
    fn row_order_does_not_change_the_result(seed in 0u64..500, rot in 1usize..50) {
        let ds = common::small_fleet(seed, 150);
        // distinct times make the sorted order unique
        let mut seen = BTreeSet::new();
        let pts: Vec<AisPoint> = ds.points().iter().copied().filter(|p| seen.insert(p.t)).collect();
        let ds = TrackDataset::new(pts.clone(), 0).unwrap();
        let mut shuffled = pts;
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let other = TrackDataset::new(shuffled, 0).unwrap();
        let cfg = CbtrConfig::default();
        prop_assert_eq!(run_cbtr(&ds, &cfg).unwrap().assignment, run_cbtr(&other, &cfg).unwrap().assignment);
        let npc = NpcConfig::default();
        prop_assert_eq!(npc_cluster(&ds, &npc).unwrap().edges, npc_cluster(&other, &npc).unwrap().edges);
    }

    #[test]
    fn classifier_only_emits_training_labels(seed in 0u64..500) {
        let ds = common::small_fleet(seed, 300);
        let train = ds.retain_indices(|i| i % 3 != 0).unwrap();
        let test = ds.retain_indices(|i| i % 3 == 0).unwrap().without_labels();
        let known: BTreeSet<VesselId> = train.points().iter().filter_map(|p| p.vid).collect();
        match npc_classify(&train, &test, &NpcConfig::default()) {
            Ok(labels) => {
                prop_assert_eq!(labels.len(), test.len());
                prop_assert!(labels.iter().all(|l| known.contains(l)));
            }
            Err(cbtr::error::NpcError::Unclassifiable { indices }) => {
                // only reports earlier than every training report
                let t0 = train.points()[0].t + train.epoch() - test.epoch();
                prop_assert!(indices.iter().all(|&i| test.points()[i].t < t0));
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn one_clean_vessel_stays_in_one_cluster() {
    let pts = straight(1, 0, 37.0, -76.2, 11.0, 65.0, 400, 9);
    let ds = TrackDataset::new(pts, 0).unwrap();
    let r = run_cbtr(&ds, &CbtrConfig::default()).unwrap();
    assert_eq!(r.assignment.n_clusters(), 1);
    assert_eq!(r.report.no_bpnp, BTreeSet::from([399]));
}

#[test]
fn crossing_vessels_are_kept_apart() {
    let mut pts = straight(1, 0, 37.00, -76.20, 10.0, 90.0, 120, 10);
    pts.extend(straight(2, 5, 36.99, -76.17, 10.0, 0.0, 120, 10));
    let ds = TrackDataset::new(pts, 0).unwrap();
    let r = run_cbtr(&ds, &CbtrConfig::default()).unwrap();
    let (j, m) = jumps_merges(&r.assignment, &vids(&ds)).unwrap();
    assert_eq!((j, m), (0, 0));
}

#[test]
fn far_apart_drifters_never_share_a_cluster() {
    for seed in 0..10 {
        let cfg = SynthConfig {
            n_vessels: 2,
            archetypes: vec![Archetype::SteadyDrifting; 2],
            min_anchor_separation_m: 600.0,
            seed,
            ..SynthConfig::default()
        };
        let ds = generate_fleet(&cfg).unwrap();
        let r = run_cbtr(&ds, &CbtrConfig::default()).unwrap();
        let (_, merges) = jumps_merges(&r.assignment, &vids(&ds)).unwrap();
        assert_eq!(merges, 0, "seed {seed}");
    }
}

#[test]
fn clusters_are_components_of_the_kept_links() {
    for seed in 0..20 {
        let ds = common::small_fleet(300 + seed, 400);
        let r = run_cbtr(&ds, &CbtrConfig::default()).unwrap();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(ds.len());
        for (i, l) in r.links.bpnp.iter().enumerate() {
            if let (Some(l), false) = (l, r.report.abnormal.contains(&i)) {
                uf.union(i, l.target);
            }
        }
        let roots = uf.into_labeling();
        let mut pairs = BTreeSet::new();
        for (i, c) in r.assignment.cluster_of.iter().enumerate() {
            pairs.insert((roots[i], *c));
        }
        let components: BTreeSet<usize> = roots.iter().copied().collect();
        assert_eq!(pairs.len(), components.len(), "seed {seed}");
        assert_eq!(components.len(), r.assignment.n_clusters(), "seed {seed}");
    }
}
