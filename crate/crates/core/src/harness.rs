//! Method dispatch, parameter sweeps and timing comparisons.

use std::time::Instant;

use serde::Serialize;

use crate::baselines::{detect_ow, detect_wa, OwEddy, WaEddy};
use crate::error::{Error, Result};
use crate::extract::{detect_hybrid, DetectionReport, DUPLICATE};
use crate::frame::OceanFrame;
use crate::io::config::{Method, RunConfig};
use crate::verify::Criterion;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodOutput {
    Hybrid(DetectionReport),
    Ow { frame_index: usize, layer: usize, eddies: Vec<OwEddy> },
    Wa { frame_index: usize, layer: usize, eddies: Vec<WaEddy> },
}

impl MethodOutput {
    pub fn detections(&self) -> usize {
        match self {
            MethodOutput::Hybrid(r) => r.accepted(),
            MethodOutput::Ow { eddies, .. } => eddies.len(),
            MethodOutput::Wa { eddies, .. } => eddies.len(),
        }
    }
}

pub fn run_method(frame: &OceanFrame, cfg: &RunConfig, method: Method) -> Result<MethodOutput> {
    let (frame_index, layer) = (frame.frame_index, cfg.layer);
    Ok(match method {
        Method::Hybrid => MethodOutput::Hybrid(detect_hybrid(frame, &cfg.search, &cfg.verify)?),
        Method::Ow => MethodOutput::Ow {
            frame_index,
            layer,
            eddies: detect_ow(frame, layer, &cfg.ow)?,
        },
        Method::Wa => MethodOutput::Wa {
            frame_index,
            layer,
            eddies: detect_wa(frame, layer, &cfg.wa)?,
        },
    })
}

/// One sweep step. For the baselines every detection counts as a verified
/// candidate and the rejection columns stay zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub candidates: usize,
    /// Candidates passing verification, before overlapping footprints merge.
    pub verified: usize,
    pub accepted: usize,
    #[serde(rename = "C1")]
    pub c1: usize,
    #[serde(rename = "C2")]
    pub c2: usize,
    #[serde(rename = "C2a")]
    pub c2a: usize,
    #[serde(rename = "C3")]
    pub c3: usize,
    #[serde(rename = "C4")]
    pub c4: usize,
    pub masked_ring: usize,
    pub duplicate: usize,
}

impl SweepRow {
    fn new(parameter: &str, value: f64, out: &MethodOutput) -> Self {
        let mut row = SweepRow {
            parameter: parameter.to_string(),
            value,
            candidates: out.detections(),
            verified: out.detections(),
            accepted: out.detections(),
            c1: 0,
            c2: 0,
            c2a: 0,
            c3: 0,
            c4: 0,
            masked_ring: 0,
            duplicate: 0,
        };
        if let MethodOutput::Hybrid(r) = out {
            row.candidates = r.candidates_total;
            row.verified = r.verified();
            row.c1 = r.rejections_for(Criterion::SpeedRatio);
            row.c2 = r.rejections_for(Criterion::AngularRange);
            row.c2a = r.rejections_for(Criterion::AngularException);
            row.c3 = r.rejections_for(Criterion::Tangency);
            row.c4 = r.rejections_for(Criterion::Symmetry);
            row.masked_ring = r.rejections_for(Criterion::MaskedRing);
            row.duplicate = r.rejections.get(DUPLICATE).copied().unwrap_or(0);
        }
        row
    }
}

/// Runs the configured method once per value of the named parameter.
pub fn sweep(frame: &OceanFrame, cfg: &RunConfig, parameter: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    // reject unknown names even when there is nothing to run
    cfg.clone().set(parameter, values.first().copied().unwrap_or(3.0))?;
    values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            c.set(parameter, v)?;
            c.validate()?;
            Ok(SweepRow::new(parameter, v, &run_method(frame, &c, c.method)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub repetitions: usize,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub detections: usize,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Times each method `repetitions` times on the same frame inside a
/// single-worker pool.
pub fn bench(frame: &OceanFrame, cfg: &RunConfig, methods: &[Method], repetitions: usize) -> Result<Vec<BenchRow>> {
    if repetitions == 0 {
        return Err(Error::param("repetitions", "must be at least 1"));
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        methods
            .iter()
            .map(|&m| {
                let mut times = Vec::with_capacity(repetitions);
                let mut detections = 0;
                for _ in 0..repetitions {
                    let t = Instant::now();
                    let out = run_method(frame, cfg, m)?;
                    times.push(t.elapsed().as_secs_f64());
                    detections = out.detections();
                }
                times.sort_by(f64::total_cmp);
                Ok(BenchRow {
                    method: m,
                    repetitions,
                    median_s: median(&times),
                    min_s: times[0],
                    max_s: times[repetitions - 1],
                    detections,
                })
            })
            .collect()
    })
}
