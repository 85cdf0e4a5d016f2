//! JSON and CSV writers for reports, ring diagnostics and tracks.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::centers::Polarity;
use crate::error::{Error, Result};
use crate::extract::Eddy3D;
use crate::frame::OceanFrame;
use crate::track::EddyTrack;
use crate::verify::sample_ring;

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    Ok(text + "\n")
}

/// CSV with a header row taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| Error::at_path(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_text(path, &to_csv(rows)?)
}

/// One ring sample of an eddy's outermost verified ring on one layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingRow {
    pub eddy_id: usize,
    pub layer: usize,
    pub radius: usize,
    pub sample: usize,
    pub azimuth: f64,
    pub x: f64,
    pub y: f64,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub speed: Option<f64>,
    pub direction: Option<f64>,
    /// Direction change to the next sample.
    pub angular_difference: Option<f64>,
    pub tangent_deviation: Option<f64>,
}

/// Ring samples at the final radius of every layer of `eddy`.
pub fn ring_diagnostics(frame: &OceanFrame, eddy: &Eddy3D) -> Result<Vec<RingRow>> {
    let vel = frame.velocity()?;
    let mut rows = Vec::new();
    for l in &eddy.layers {
        let ring = sample_ring(vel.layer(l.layer), (l.center.0 as f64, l.center.1 as f64), l.radius as f64)?;
        let diffs = ring.angular_differences();
        let devs = ring.tangent_deviations(eddy.polarity);
        for (i, s) in ring.samples.iter().enumerate() {
            rows.push(RingRow {
                eddy_id: eddy.id,
                layer: l.layer,
                radius: l.radius,
                sample: i,
                azimuth: s.azimuth,
                x: s.position.0,
                y: s.position.1,
                u: s.velocity.map(|v| v.0),
                v: s.velocity.map(|v| v.1),
                speed: s.speed(),
                direction: s.direction(),
                angular_difference: diffs[i],
                tangent_deviation: devs[i],
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackRow {
    pub track_id: usize,
    pub frame_index: usize,
    pub eddy_id: usize,
    pub x: usize,
    pub y: usize,
    pub radius: usize,
    pub polarity: Polarity,
}

pub fn track_rows(tracks: &[EddyTrack]) -> Vec<TrackRow> {
    tracks
        .iter()
        .flat_map(|t| {
            t.observations.iter().map(move |o| TrackRow {
                track_id: t.track_id,
                frame_index: o.frame_index,
                eddy_id: o.eddy_id,
                x: o.center.0,
                y: o.center.1,
                radius: o.radius,
                polarity: o.polarity,
            })
        })
        .collect()
}
