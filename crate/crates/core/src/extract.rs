//! Footprint extraction and the full hybrid detection pipeline.
//!
//! A verified centre is grown outward one cell at a time while the rotation
//! criteria keep passing, then used as the seed for the next layer down.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centers::{locate_candidates, window_minimum, CenterCandidate, Polarity, SearchParams};
use crate::error::Result;
use crate::frame::OceanFrame;
use crate::grid::{LayerView, VectorField3D, VelocityLayer};
use crate::verify::{verify_at, Criterion, VerifyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EddyLayer {
    pub layer: usize,
    pub center: (usize, usize),
    /// Largest radius whose ring, and every smaller ring down to the initial
    /// radius, passed verification.
    pub radius: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Stats {
    fn collect(values: impl Iterator<Item = f64>) -> Option<Stats> {
        let (mut sum, mut min, mut max, mut count) = (0.0, f64::INFINITY, f64::NEG_INFINITY, 0);
        for v in values {
            sum += v;
            min = min.min(v);
            max = max.max(v);
            count += 1;
        }
        (count > 0).then(|| Stats {
            mean: sum / count as f64,
            min,
            max,
            count,
        })
    }
}

/// Property statistics over one layer of an eddy's footprint. `None` marks a
/// property the frame does not carry (or a footprint with no valid cells).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    pub layer: usize,
    pub temperature: Option<Stats>,
    pub salinity: Option<Stats>,
    pub w: Option<Stats>,
    pub speed: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eddy3D {
    pub id: usize,
    pub polarity: Polarity,
    /// Contiguous from the surface down.
    pub layers: Vec<EddyLayer>,
    #[serde(default)]
    pub profiles: Vec<LayerProfile>,
}

impl Eddy3D {
    pub fn surface(&self) -> &EddyLayer {
        &self.layers[0]
    }

    fn overlaps(&self, other: &Eddy3D) -> bool {
        self.layers.iter().any(|a| {
            other.layers.iter().any(|b| {
                a.layer == b.layer && {
                    let d2 = sq_dist(a.center, b.center);
                    let r = a.radius.max(b.radius);
                    d2 <= r * r
                }
            })
        })
    }
}

fn sq_dist(a: (usize, usize), b: (usize, usize)) -> usize {
    let dx = a.0.abs_diff(b.0);
    let dy = a.1.abs_diff(b.1);
    dx * dx + dy * dy
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub centers_s: f64,
    pub verify_s: f64,
    pub extract_s: f64,
    pub total_s: f64,
}

/// Rejection key for verified centres dropped as overlapping a larger eddy.
pub const DUPLICATE: &str = "duplicate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub frame_index: usize,
    pub candidates_total: usize,
    pub eddies: Vec<Eddy3D>,
    /// Count per rejection reason; every criterion label plus `duplicate` is present.
    pub rejections: BTreeMap<String, usize>,
    pub timing: PhaseTimings,
}

#[derive(Serialize)]
struct StableView<'a> {
    frame_index: usize,
    candidates_total: usize,
    accepted: usize,
    rejections: &'a BTreeMap<String, usize>,
    eddies: &'a [Eddy3D],
}

impl DetectionReport {
    pub fn accepted(&self) -> usize {
        self.eddies.len()
    }

    pub fn rejected(&self) -> usize {
        self.rejections.values().sum()
    }

    /// Centres that passed verification, including those later merged away.
    pub fn verified(&self) -> usize {
        self.accepted() + self.rejections.get(DUPLICATE).copied().unwrap_or(0)
    }

    pub fn rejections_for(&self, c: Criterion) -> usize {
        self.rejections.get(c.label()).copied().unwrap_or(0)
    }

    /// Everything except wall-clock timings, serialised deterministically.
    pub fn stable_json(&self) -> String {
        serde_json::to_string_pretty(&StableView {
            frame_index: self.frame_index,
            candidates_total: self.candidates_total,
            accepted: self.accepted(),
            rejections: &self.rejections,
            eddies: &self.eddies,
        })
        .expect("report serialises")
    }
}

/// Largest radius, starting from `rs` and stepping one cell, for which every
/// ring up to it passes. Never less than `rs`.
pub fn grow_boundary(
    layer: VelocityLayer<'_>,
    center: (usize, usize),
    polarity: Polarity,
    rs: usize,
    params: &VerifyParams,
) -> usize {
    let c = (center.0 as f64, center.1 as f64);
    let mut r = rs;
    while verify_at(layer, c, polarity, (r + 1) as f64, params).accepted {
        r += 1;
    }
    r
}

/// Follows a surface eddy downward: each deeper centre is the slowest cell in
/// an `rc`-wide window around the centre above, re-verified with the surface
/// polarity. Stops at the first layer that fails, or at the bottom.
pub fn descend_layers(
    vel: &VectorField3D,
    surface: EddyLayer,
    polarity: Polarity,
    search: &SearchParams,
    params: &VerifyParams,
) -> Eddy3D {
    let (nx, ny, nz) = vel.dims();
    let mut layers = vec![surface];
    let mut prev = surface.center;
    for k in surface.layer + 1..nz {
        let lv = vel.layer(k);
        let Some(center) = window_minimum(|i, j| lv.speed(i, j), nx, ny, prev, search.rc) else {
            break;
        };
        let c = (center.0 as f64, center.1 as f64);
        if !verify_at(lv, c, polarity, search.rs as f64, params).accepted {
            break;
        }
        let radius = grow_boundary(lv, center, polarity, search.rs, params);
        layers.push(EddyLayer {
            layer: k,
            center,
            radius,
        });
        prev = center;
    }
    Eddy3D {
        id: 0,
        polarity,
        layers,
        profiles: Vec::new(),
    }
}

/// Cells of a layer within Euclidean distance `radius` of `center`, inclusive.
pub fn disk_cells(
    center: (usize, usize),
    radius: usize,
    nx: usize,
    ny: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let r2 = radius * radius;
    let (i0, i1) = (center.0.saturating_sub(radius), (center.0 + radius).min(nx - 1));
    let (j0, j1) = (center.1.saturating_sub(radius), (center.1 + radius).min(ny - 1));
    (j0..=j1)
        .flat_map(move |j| (i0..=i1).map(move |i| (i, j)))
        .filter(move |&c| sq_dist(c, center) <= r2)
}

fn disk_stats(view: LayerView<'_>, layer: &EddyLayer) -> Option<Stats> {
    Stats::collect(
        disk_cells(layer.center, layer.radius, view.nx(), view.ny()).filter_map(|(i, j)| view.get(i, j)),
    )
}

/// Fills per-layer statistics of temperature, salinity, vertical velocity
/// and net speed over the eddy's cylindrical footprint.
pub fn extract_profiles(frame: &OceanFrame, mut eddy: Eddy3D) -> Eddy3D {
    eddy.profiles = eddy
        .layers
        .iter()
        .map(|l| {
            let speed = frame.vel.as_ref().and_then(|v| {
                let lv = v.layer(l.layer);
                Stats::collect(
                    disk_cells(l.center, l.radius, lv.nx(), lv.ny()).filter_map(|(i, j)| lv.speed(i, j)),
                )
            });
            LayerProfile {
                layer: l.layer,
                temperature: frame.temp.as_ref().and_then(|t| disk_stats(t.layer(l.layer), l)),
                salinity: frame.sal.as_ref().and_then(|s| disk_stats(s.layer(l.layer), l)),
                w: frame
                    .vel
                    .as_ref()
                    .and_then(|v| v.w())
                    .and_then(|w| disk_stats(w.layer(l.layer), l)),
                speed,
            }
        })
        .collect();
    eddy
}

fn empty_histogram() -> BTreeMap<String, usize> {
    Criterion::ALL
        .iter()
        .map(|c| c.label().to_string())
        .chain(std::iter::once(DUPLICATE.to_string()))
        .map(|k| (k, 0))
        .collect()
}

/// Runs the hybrid detector on one frame: locate candidates, verify them at
/// the initial radius, grow and descend each survivor, attach profiles, and
/// merge overlapping footprints in favour of the larger surface radius.
///
/// Candidate work is spread over the current rayon pool; the result does not
/// depend on the number of workers.
pub fn detect_hybrid(
    frame: &OceanFrame,
    search: &SearchParams,
    params: &VerifyParams,
) -> Result<DetectionReport> {
    search.validate()?;
    params.validate()?;
    let ssh = frame.ssh()?;
    let vel = frame.velocity()?;
    let surface = vel.layer(0);
    let start = Instant::now();

    let candidates: Vec<CenterCandidate> = locate_candidates(ssh, surface, search)?;
    let t_centers = start.elapsed().as_secs_f64();

    let reports: Vec<_> = candidates
        .par_iter()
        .map(|c| {
            let (i, j) = c.vel_minimum;
            verify_at(surface, (i as f64, j as f64), c.polarity, search.rs as f64, params)
        })
        .collect();
    let t_verify = start.elapsed().as_secs_f64();

    let mut rejections = empty_histogram();
    let mut verified = Vec::new();
    for (c, r) in candidates.iter().zip(&reports) {
        match r.failing_criterion {
            None => verified.push(c),
            Some(crit) => *rejections.get_mut(crit.label()).unwrap() += 1,
        }
    }

    let grown: Vec<Eddy3D> = verified
        .par_iter()
        .map(|c| {
            let radius = grow_boundary(surface, c.vel_minimum, c.polarity, search.rs, params);
            let top = EddyLayer {
                layer: 0,
                center: c.vel_minimum,
                radius,
            };
            extract_profiles(frame, descend_layers(vel, top, c.polarity, search, params))
        })
        .collect();

    let mut order: Vec<usize> = (0..grown.len()).collect();
    order.sort_by(|&a, &b| grown[b].surface().radius.cmp(&grown[a].surface().radius).then(a.cmp(&b)));
    let mut keep = vec![false; grown.len()];
    for &idx in &order {
        if order
            .iter()
            .any(|&other| keep[other] && grown[other].overlaps(&grown[idx]))
        {
            *rejections.get_mut(DUPLICATE).unwrap() += 1;
        } else {
            keep[idx] = true;
        }
    }
    let eddies: Vec<Eddy3D> = grown
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .enumerate()
        .map(|(n, mut e)| {
            e.id = n + 1;
            e
        })
        .collect();
    let total = start.elapsed().as_secs_f64();

    Ok(DetectionReport {
        frame_index: frame.frame_index,
        candidates_total: candidates.len(),
        eddies,
        rejections,
        timing: PhaseTimings {
            centers_s: t_centers,
            verify_s: t_verify - t_centers,
            extract_s: total - t_verify,
            total_s: total,
        },
    })
}
