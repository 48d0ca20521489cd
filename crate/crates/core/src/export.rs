//! File exports: reconstructed tracks as GeoJSON and a label timeline as SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::model::{ClusterAssignment, TrackDataset, VesselId};

/// One feature per cluster, in cluster-id order. Clusters with a single point
/// become `Point` geometries since a `LineString` needs two positions.
pub fn export_geojson(ds: &TrackDataset, assignment: &ClusterAssignment) -> Value {
    let pts = ds.points();
    let features: Vec<Value> = assignment
        .members()
        .into_iter()
        .enumerate()
        .map(|(cluster, members)| {
            let coords: Vec<Value> = members.iter().map(|&i| json!([pts[i].lon, pts[i].lat])).collect();
            let geometry = if coords.len() == 1 {
                json!({ "type": "Point", "coordinates": coords[0] })
            } else {
                json!({ "type": "LineString", "coordinates": coords })
            };
            let endpoints: Vec<usize> = members
                .iter()
                .copied()
                .filter(|i| assignment.endpoints.contains(i))
                .collect();
            json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": {
                    "cluster_id": cluster,
                    "point_count": members.len(),
                    "point_indices": members,
                    "endpoint_indices": endpoints,
                },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

const WIDTH: f64 = 1000.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const ROW_H: f64 = 14.0;
const TRUTH_COLOR: &str = "#1f4fd1";
const CLUSTER_COLOR: &str = "#d12a1f";

fn span(times: &mut BTreeMap<usize, (i64, i64)>, key: usize, t: i64) {
    let e = times.entry(key).or_insert((t, t));
    e.0 = e.0.min(t);
    e.1 = e.1.max(t);
}

/// Horizontal time-span segments: one per true vessel (blue, when `truth` is
/// given) and one per predicted cluster (red). With truth, each cluster is
/// drawn just below the row of the vessel contributing most of its points;
/// without truth, rows are cluster ids.
pub fn export_label_timeline(
    ds: &TrackDataset,
    assignment: &ClusterAssignment,
    truth: Option<&[VesselId]>,
) -> String {
    let pts = ds.points();
    let t_max = pts.iter().map(|p| p.t).max().unwrap_or(0).max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let x = |t: i64| MARGIN_LEFT + plot_w * t as f64 / t_max;

    let mut cluster_span = BTreeMap::new();
    for (i, &c) in assignment.cluster_of.iter().enumerate() {
        span(&mut cluster_span, c, pts[i].t);
    }

    let mut rows: Vec<String> = Vec::new();
    let mut truth_segments = Vec::new();
    let mut cluster_rows: BTreeMap<usize, usize> = BTreeMap::new();
    match truth {
        Some(truth) => {
            let vessels: Vec<VesselId> = {
                let mut v: Vec<VesselId> = truth.to_vec();
                v.sort_unstable();
                v.dedup();
                v
            };
            let row_of: BTreeMap<VesselId, usize> = vessels.iter().enumerate().map(|(r, v)| (*v, r)).collect();
            let mut vessel_span = BTreeMap::new();
            let mut votes: BTreeMap<usize, BTreeMap<VesselId, usize>> = BTreeMap::new();
            for (i, v) in truth.iter().enumerate() {
                span(&mut vessel_span, row_of[v], pts[i].t);
                *votes.entry(assignment.cluster_of[i]).or_default().entry(*v).or_insert(0) += 1;
            }
            for (c, tally) in votes {
                let (vid, _) = tally
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .expect("non-empty tally");
                cluster_rows.insert(c, row_of[vid]);
            }
            rows = vessels.iter().map(|v| format!("vid {v}")).collect();
            truth_segments = vessel_span.into_iter().collect();
        }
        None => {
            for &c in cluster_span.keys() {
                cluster_rows.insert(c, c);
                rows.push(format!("cluster {c}"));
            }
        }
    }

    let height = MARGIN_TOP + ROW_H * rows.len().max(1) as f64 + 40.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT:.0}" y="18" font-family="sans-serif" font-size="12">{} clusters, {} points</text>"#,
        assignment.n_clusters(),
        pts.len()
    );
    let row_y = |r: usize| MARGIN_TOP + ROW_H * r as f64 + ROW_H * 0.4;
    for (r, label) in rows.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="4" y="{:.2}" font-family="sans-serif" font-size="9">{label}</text>"#,
            row_y(r) + 3.0
        );
    }
    let _ = writeln!(svg, r#"<g stroke="{TRUTH_COLOR}" stroke-width="3">"#);
    for (r, (t0, t1)) in &truth_segments {
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            x(*t0),
            row_y(*r),
            x(*t1),
            row_y(*r)
        );
    }
    let _ = writeln!(svg, "</g>");
    let offset = if truth.is_some() { 4.0 } else { 0.0 };
    let _ = writeln!(svg, r#"<g stroke="{CLUSTER_COLOR}" stroke-width="2">"#);
    for (c, (t0, t1)) in &cluster_span {
        let y = row_y(cluster_rows[c]) + offset;
        // zero-length spans get a 1 px tick so they remain visible
        let (x0, x1) = (x(*t0), x(*t1).max(x(*t0) + 1.0));
        let _ = writeln!(
            svg,
            r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" data-cluster="{c}"/>"#
        );
    }
    let _ = writeln!(svg, "</g>");
    let axis_y = height - 25.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT:.0}" y1="{axis_y:.2}" x2="{:.0}" y2="{axis_y:.2}" stroke="black" stroke-width="1"/>"#,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT:.0}" y="{:.2}" font-family="sans-serif" font-size="10">0 s</text>"#,
        axis_y + 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{t_max:.0} s</text>"#,
        WIDTH - MARGIN_RIGHT,
        axis_y + 14.0
    );
    svg.push_str("</svg>\n");
    svg
}
