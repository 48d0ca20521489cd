//! CSV ingestion.
//!
//! Schema: a header row naming, in order, an optional `vid` column followed
//! by `timestamp,lat,lon,sog,cog`. Timestamps are integer seconds or
//! ISO-8601 date-times; either way they are shifted so the dataset's
//! earliest report sits at `t = 0`.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};

use crate::error::IngestError;
use crate::model::{AisPoint, TrackDataset, VesselId};

const REQUIRED: [&str; 5] = ["timestamp", "lat", "lon", "sog", "cog"];

/// `69 / (69.172 * cos(mean latitude))`.
pub fn compute_alpha(points: &[AisPoint]) -> Result<f64, IngestError> {
    if points.is_empty() {
        return Err(IngestError::Alpha("no points".into()));
    }
    let mean = points.iter().map(|p| p.lat).sum::<f64>() / points.len() as f64;
    if mean.is_nan() || mean.abs() >= 90.0 {
        return Err(IngestError::Alpha(format!("mean latitude {mean} is at a pole")));
    }
    Ok(69.0 / (69.172 * mean.to_radians().cos()))
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(raw, fmt).ok())
        .map(|dt| dt.and_utc().timestamp())
}

/// Parses CSV into a dataset. With `has_labels` the `vid` column is
/// mandatory; otherwise it is optional and kept when present.
pub fn parse_ais_csv<R: Read>(source: R, has_labels: bool) -> Result<TrackDataset, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(IngestError::Empty);
    }
    let with_vid = header.first().map(String::as_str) == Some("vid");
    let rest = if with_vid { &header[1..] } else { &header[..] };
    if rest != REQUIRED {
        let expected = if with_vid || has_labels {
            "vid,timestamp,lat,lon,sog,cog"
        } else {
            "[vid,]timestamp,lat,lon,sog,cog"
        };
        return Err(IngestError::Header(format!(
            "expected columns {expected}, found {}",
            header.join(",")
        )));
    }
    if has_labels && !with_vid {
        return Err(IngestError::Header("missing required column vid".into()));
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        let width = header.len();
        if fields.len() != width {
            return Err(IngestError::Row {
                line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let (vid, f) = if with_vid {
            let vid = fields[0].parse::<u64>().map_err(|_| IngestError::Row {
                line,
                message: format!("vid {:?} is not a non-negative integer", fields[0]),
            })?;
            (Some(VesselId(vid)), &fields[1..])
        } else {
            (None, &fields[..])
        };
        let t = parse_timestamp(f[0]).ok_or_else(|| IngestError::Row {
            line,
            message: format!("unparseable timestamp {:?}", f[0]),
        })?;
        let mut nums = [0.0f64; 4];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = f[k + 1].parse::<f64>().map_err(|_| IngestError::Row {
                line,
                message: format!("{} {:?} is not a number", REQUIRED[k + 1], f[k + 1]),
            })?;
        }
        let point = AisPoint {
            t,
            lat: nums[0],
            lon: nums[1],
            sog: nums[2],
            cog: nums[3],
            vid,
        };
        if let Some((field, value)) = point.range_violation() {
            return Err(IngestError::OutOfRange { line, field, value });
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(IngestError::Empty);
    }
    TrackDataset::from_absolute(points)
}

/// Writes the dataset in the ingest schema with absolute integer timestamps,
/// so that parsing the output reproduces the dataset.
pub fn write_ais_csv<W: Write>(ds: &TrackDataset, sink: W, with_vid: bool) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    if with_vid {
        w.write_field("vid")?;
    }
    w.write_record(REQUIRED)?;
    for p in ds.points() {
        let mut row = Vec::with_capacity(6);
        if with_vid {
            row.push(p.vid.map(|v| v.to_string()).unwrap_or_default());
        }
        row.push((ds.epoch() + p.t).to_string());
        row.push(p.lat.to_string());
        row.push(p.lon.to_string());
        row.push(p.sog.to_string());
        row.push(p.cog.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
