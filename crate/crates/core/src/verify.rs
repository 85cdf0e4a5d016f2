//! Rotation tests on a circular path around a candidate centre.
//!
//! The ring is sampled counterclockwise starting from the bottom-most point
//! (azimuth −90°). Four criteria are applied in order, and the first failure
//! is reported:
//!
//! 1. consecutive net speeds differ by at most a factor `sv`;
//! 2. the direction change `θ(i) − θ(i+1)` lies in `[−sa, 0]`, with up to
//!    `san` small positive kinks of at most `sae` tolerated (2a);
//! 3. each velocity is within `sd` of the tangent for the expected sense;
//! 4. antipodal velocities point in roughly opposite directions (`sy`).
//!
//! Any coherent rotation, clockwise or counterclockwise, makes the direction
//! advance with azimuth under counterclockwise traversal, so the direction
//! change in criterion 2 is negative for both polarities.

use serde::{Deserialize, Serialize};

use crate::angle::{direction, wrap180, wrap360};
use crate::centers::{CenterCandidate, Polarity};
use crate::error::{Error, Result};
use crate::frame::OceanFrame;
use crate::grid::VelocityLayer;

/// Slack on angular comparisons so exact-boundary values are not lost to rounding.
const ANGLE_EPS: f64 = 1e-9;

/// Largest fraction of masked samples a ring may contain.
pub const MAX_MASKED_FRACTION: f64 = 0.25;

fn default_sv() -> f64 {
    3.0
}
fn default_sa() -> f64 {
    108.0
}
fn default_sae() -> f64 {
    18.0
}
fn default_san() -> usize {
    2
}
fn default_sd() -> f64 {
    24.0
}
fn default_sy() -> f64 {
    120.0
}

/// Thresholds of the rotation criteria. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    /// Largest allowed ratio between consecutive net speeds.
    #[serde(default = "default_sv")]
    pub sv: f64,
    /// Largest magnitude of a negative direction change.
    #[serde(default = "default_sa")]
    pub sa: f64,
    /// Largest tolerated positive direction change.
    #[serde(default = "default_sae")]
    pub sae: f64,
    /// Number of tolerated positive direction changes per ring.
    #[serde(default = "default_san")]
    pub san: usize,
    /// Largest deviation from the tangent direction.
    #[serde(default = "default_sd")]
    pub sd: f64,
    /// Half-width of the accepted band around 180° for antipodal pairs.
    #[serde(default = "default_sy")]
    pub sy: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            sv: default_sv(),
            sa: default_sa(),
            sae: default_sae(),
            san: default_san(),
            sd: default_sd(),
            sy: default_sy(),
        }
    }
}

impl VerifyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sv >= 1.0) {
            return Err(Error::param("sv", format!("{} must be >= 1", self.sv)));
        }
        if !(self.sa > 0.0 && self.sa <= 180.0) {
            return Err(Error::param("sa", format!("{} must lie in (0, 180]", self.sa)));
        }
        if !(self.sae >= 0.0 && self.sae < self.sa) {
            return Err(Error::param("sae", format!("{} must lie in [0, sa)", self.sae)));
        }
        if !(self.sd > 0.0 && self.sd < 90.0) {
            return Err(Error::param("sd", format!("{} must lie in (0, 90)", self.sd)));
        }
        if !(self.sy >= 0.0 && self.sy < 180.0) {
            return Err(Error::param("sy", format!("{} must lie in [0, 180)", self.sy)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "C1")]
    SpeedRatio,
    #[serde(rename = "C2")]
    AngularRange,
    #[serde(rename = "C2a")]
    AngularException,
    #[serde(rename = "C3")]
    Tangency,
    #[serde(rename = "C4")]
    Symmetry,
    #[serde(rename = "masked_ring")]
    MaskedRing,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::SpeedRatio,
        Criterion::AngularRange,
        Criterion::AngularException,
        Criterion::Tangency,
        Criterion::Symmetry,
        Criterion::MaskedRing,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::SpeedRatio => "C1",
            Criterion::AngularRange => "C2",
            Criterion::AngularException => "C2a",
            Criterion::Tangency => "C3",
            Criterion::Symmetry => "C4",
            Criterion::MaskedRing => "masked_ring",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A failed criterion and the first ring sample that broke it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Failure {
    pub criterion: Criterion,
    pub index: Option<usize>,
}

impl Failure {
    fn at(criterion: Criterion, index: usize) -> Self {
        Failure {
            criterion,
            index: Some(index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSample {
    /// Degrees, counterclockwise from east.
    pub azimuth: f64,
    pub position: (f64, f64),
    /// `None` where the sample fell on land.
    pub velocity: Option<(f64, f64)>,
}

impl RingSample {
    pub fn speed(&self) -> Option<f64> {
        self.velocity.map(|(u, v)| u.hypot(v))
    }

    pub fn direction(&self) -> Option<f64> {
        self.velocity.map(|(u, v)| direction(u, v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSamples {
    pub center: (f64, f64),
    pub radius: f64,
    pub samples: Vec<RingSample>,
}

/// Number of samples on a ring: 16 at radius 3, growing linearly with the
/// radius, never fewer than 16 and always even.
pub fn ring_sample_count(radius: f64) -> usize {
    let n = 2 * (8.0 * radius / 3.0).round() as usize;
    n.max(16)
}

impl RingSamples {
    /// Builds a ring from an arbitrary velocity lookup, which may report
    /// masked positions with `None`.
    pub fn from_fn(
        center: (f64, f64),
        radius: f64,
        n: usize,
        mut velocity: impl FnMut(f64, f64) -> Option<(f64, f64)>,
    ) -> Self {
        let step = 360.0 / n as f64;
        let samples = (0..n)
            .map(|i| {
                let azimuth = -90.0 + step * i as f64;
                let a = azimuth.to_radians();
                let position = (center.0 + radius * a.cos(), center.1 + radius * a.sin());
                RingSample {
                    azimuth,
                    position,
                    velocity: velocity(position.0, position.1),
                }
            })
            .collect();
        RingSamples {
            center,
            radius,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn masked_count(&self) -> usize {
        self.samples.iter().filter(|s| s.velocity.is_none()).count()
    }

    /// Direction change `θ(i) − θ(i+1)` wrapped to (−180°, 180°], cyclic,
    /// `None` where either end is masked.
    pub fn angular_differences(&self) -> Vec<Option<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let a = self.samples[i].direction()?;
                let b = self.samples[(i + 1) % n].direction()?;
                Some(wrap180(a - b))
            })
            .collect()
    }

    /// Signed deviation of each velocity from the tangent of the given sense.
    pub fn tangent_deviations(&self, polarity: Polarity) -> Vec<Option<f64>> {
        let offset = 90.0 * polarity.rotation_sign();
        self.samples
            .iter()
            .map(|s| Some(wrap180(s.direction()? - (s.azimuth + offset))))
            .collect()
    }

    /// Unsigned angle in [0°, 360°) between each sample and its antipode,
    /// for the first half of the ring.
    pub fn symmetry_angles(&self) -> Vec<Option<f64>> {
        let half = self.len() / 2;
        (0..half)
            .map(|i| {
                let a = self.samples[i].direction()?;
                let b = self.samples[i + half].direction()?;
                Some(wrap360(a - b))
            })
            .collect()
    }
}

/// Samples velocity at `ring_sample_count(radius)` uniform azimuths.
pub fn sample_ring(layer: VelocityLayer<'_>, center: (f64, f64), radius: f64) -> Result<RingSamples> {
    let (x, y) = center;
    if !(radius > 0.0)
        || !layer.contains(x - radius, y - radius)
        || !layer.contains(x + radius, y + radius)
    {
        return Err(Error::RingOutOfBounds { x, y, radius });
    }
    let ring = RingSamples::from_fn(center, radius, ring_sample_count(radius), |px, py| {
        layer.sample(px, py).ok()
    });
    let masked = ring.masked_count();
    if masked as f64 > MAX_MASKED_FRACTION * ring.len() as f64 {
        return Err(Error::MaskedRing {
            masked,
            total: ring.len(),
        });
    }
    Ok(ring)
}

/// Criterion 1: every consecutive speed ratio lies in `[1/sv, sv]`.
pub fn criterion_speed_ratio(ring: &RingSamples, sv: f64) -> Result<(), Failure> {
    let n = ring.len();
    for i in 0..n {
        let (Some(a), Some(b)) = (ring.samples[i].speed(), ring.samples[(i + 1) % n].speed()) else {
            continue;
        };
        if a == 0.0 || b == 0.0 {
            return Err(Failure::at(Criterion::SpeedRatio, i));
        }
        let ratio = a / b;
        if ratio > sv || ratio < 1.0 / sv {
            return Err(Failure::at(Criterion::SpeedRatio, i));
        }
    }
    Ok(())
}

/// Criteria 2 and 2a. Returns the number of tolerated positive kinks.
pub fn criterion_angular(ring: &RingSamples, sa: f64, sae: f64, san: usize) -> Result<usize, Failure> {
    let mut exceptions = 0;
    for (i, d) in ring.angular_differences().into_iter().enumerate() {
        let Some(d) = d else { continue };
        if d < -sa - ANGLE_EPS {
            return Err(Failure::at(Criterion::AngularRange, i));
        }
        if d > ANGLE_EPS {
            if d > sae + ANGLE_EPS {
                return Err(Failure::at(Criterion::AngularException, i));
            }
            exceptions += 1;
            if exceptions > san {
                return Err(Failure::at(Criterion::AngularException, i));
            }
        }
    }
    Ok(exceptions)
}

/// Criterion 3: velocity within `sd` of the tangent; cyclonic rings turn
/// counterclockwise, anticyclonic clockwise.
pub fn criterion_tangency(ring: &RingSamples, sd: f64, polarity: Polarity) -> Result<(), Failure> {
    for (i, dev) in ring.tangent_deviations(polarity).into_iter().enumerate() {
        if matches!(dev, Some(d) if d.abs() > sd + ANGLE_EPS) {
            return Err(Failure::at(Criterion::Tangency, i));
        }
    }
    Ok(())
}

/// Criterion 4: antipodal directions differ by `180° ± sy`.
pub fn criterion_symmetry(ring: &RingSamples, sy: f64) -> Result<(), Failure> {
    for (i, sa) in ring.symmetry_angles().into_iter().enumerate() {
        if matches!(sa, Some(a) if (a - 180.0).abs() > sy + ANGLE_EPS) {
            return Err(Failure::at(Criterion::Symmetry, i));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub accepted: bool,
    pub failing_criterion: Option<Criterion>,
    pub failing_sample_index: Option<usize>,
    pub exception_count: usize,
}

impl VerificationReport {
    fn rejected(f: Failure, exception_count: usize) -> Self {
        VerificationReport {
            accepted: false,
            failing_criterion: Some(f.criterion),
            failing_sample_index: f.index,
            exception_count,
        }
    }
}

/// Applies all criteria, in order, to an already sampled ring.
pub fn evaluate_ring(ring: &RingSamples, polarity: Polarity, params: &VerifyParams) -> VerificationReport {
    let checks = || -> Result<usize, (Failure, usize)> {
        criterion_speed_ratio(ring, params.sv).map_err(|f| (f, 0))?;
        let ex = criterion_angular(ring, params.sa, params.sae, params.san).map_err(|f| (f, 0))?;
        criterion_tangency(ring, params.sd, polarity).map_err(|f| (f, ex))?;
        criterion_symmetry(ring, params.sy).map_err(|f| (f, ex))?;
        Ok(ex)
    };
    match checks() {
        Ok(exception_count) => VerificationReport {
            accepted: true,
            failing_criterion: None,
            failing_sample_index: None,
            exception_count,
        },
        Err((f, ex)) => VerificationReport::rejected(f, ex),
    }
}

/// Samples a ring on one layer and evaluates it. Rings leaving the domain or
/// over too much land are rejected as `masked_ring`.
pub fn verify_at(
    layer: VelocityLayer<'_>,
    center: (f64, f64),
    polarity: Polarity,
    radius: f64,
    params: &VerifyParams,
) -> VerificationReport {
    match sample_ring(layer, center, radius) {
        Ok(ring) => evaluate_ring(&ring, polarity, params),
        Err(_) => VerificationReport::rejected(
            Failure {
                criterion: Criterion::MaskedRing,
                index: None,
            },
            0,
        ),
    }
}

pub fn verify_center(
    frame: &OceanFrame,
    candidate: &CenterCandidate,
    radius: f64,
    params: &VerifyParams,
) -> Result<VerificationReport> {
    let vel = frame.velocity()?;
    let nz = vel.dims().2;
    if candidate.layer >= nz {
        return Err(Error::param("layer", format!("{} >= nz = {nz}", candidate.layer)));
    }
    let (i, j) = candidate.vel_minimum;
    Ok(verify_at(
        vel.layer(candidate.layer),
        (i as f64, j as f64),
        candidate.polarity,
        radius,
        params,
    ))
}
