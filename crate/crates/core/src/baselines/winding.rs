//! Winding-angle detection: integrate streamlines from a seed lattice, keep
//! the ones that close on themselves after a full turn, and cluster them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{direction, wrap180};
use crate::centers::Polarity;
use crate::error::{Error, Result};
use crate::frame::OceanFrame;
use crate::grid::VelocityLayer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaParams {
    pub seed_spacing: usize,
    /// Geometric step length in cells; the direction field has unit speed.
    pub step: f64,
    pub max_steps: usize,
    /// Degrees of net turning a kept streamline must reach.
    pub threshold: f64,
    /// Slack below `threshold` still accepted, in degrees.
    pub tolerance: f64,
    pub closure_distance: f64,
    pub merge_distance: f64,
    /// Speeds below this end a streamline as a stagnation point.
    pub min_speed: f64,
}

impl Default for WaParams {
    fn default() -> Self {
        WaParams {
            seed_spacing: 4,
            step: 0.5,
            max_steps: 2000,
            threshold: 360.0,
            tolerance: 10.0,
            closure_distance: 1.0,
            merge_distance: 4.0,
            min_speed: 1e-12,
        }
    }
}

impl WaParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wa.step", self.step),
            ("wa.closure_distance", self.closure_distance),
            ("wa.merge_distance", self.merge_distance),
            ("wa.threshold", self.threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        if !(self.tolerance >= 0.0 && self.tolerance < self.threshold) {
            return Err(Error::param("wa.tolerance", "must lie in [0, threshold)"));
        }
        if self.seed_spacing == 0 {
            return Err(Error::param("wa.seed_spacing", "must be at least 1"));
        }
        if self.max_steps < 8 {
            return Err(Error::param("wa.max_steps", "must be at least 8"));
        }
        if !(self.min_speed >= 0.0) {
            return Err(Error::param("wa.min_speed", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Closed,
    LeftDomain,
    MaxSteps,
    Stagnation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Streamline {
    pub seed: (f64, f64),
    /// Starts at the seed; consecutive points are one step apart.
    pub points: Vec<(f64, f64)>,
    /// Signed net turning of the flow direction in degrees, positive
    /// counterclockwise. For closed streamlines it is measured up to the
    /// point of closest return to the seed.
    pub cumulative_turn: f64,
    pub termination: Termination,
    /// Distance of closest return, when closed.
    pub closure_distance: Option<f64>,
}

impl Streamline {
    pub fn closed(&self) -> bool {
        self.termination == Termination::Closed
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        (sx / n, sy / n)
    }

    pub fn mean_distance(&self, c: (f64, f64)) -> f64 {
        self.points
            .iter()
            .map(|p| (p.0 - c.0).hypot(p.1 - c.1))
            .sum::<f64>()
            / self.points.len() as f64
    }
}

fn unit_direction(layer: VelocityLayer<'_>, p: (f64, f64), min_speed: f64) -> Option<Result<(f64, f64)>> {
    match layer.sample(p.0, p.1) {
        Ok((u, v)) => {
            let s = u.hypot(v);
            if s <= min_speed {
                None
            } else {
                Some(Ok((u / s, v / s)))
            }
        }
        Err(e) => Some(Err(e)),
    }
}

enum Step {
    To((f64, f64), f64),
    Stop(Termination),
}

fn rk4(layer: VelocityLayer<'_>, p: (f64, f64), h: f64, min_speed: f64) -> Step {
    let mut k = [(0.0, 0.0); 4];
    let offsets = [0.0, 0.5, 0.5, 1.0];
    let mut heading = 0.0;
    for s in 0..4 {
        let prev = if s == 0 { (0.0, 0.0) } else { k[s - 1] };
        let q = (p.0 + offsets[s] * h * prev.0, p.1 + offsets[s] * h * prev.1);
        match unit_direction(layer, q, min_speed) {
            None => return Step::Stop(Termination::Stagnation),
            Some(Err(_)) => return Step::Stop(Termination::LeftDomain),
            Some(Ok(d)) => {
                if s == 0 {
                    heading = direction(d.0, d.1);
                }
                k[s] = d;
            }
        }
    }
    let dx = (k[0].0 + 2.0 * k[1].0 + 2.0 * k[2].0 + k[3].0) / 6.0;
    let dy = (k[0].1 + 2.0 * k[1].1 + 2.0 * k[2].1 + k[3].1) / 6.0;
    Step::To((p.0 + h * dx, p.1 + h * dy), heading)
}

/// Fraction along segment `a -> b` of the point closest to `s`, and its distance.
fn closest_on_segment(a: (f64, f64), b: (f64, f64), s: (f64, f64)) -> (f64, f64) {
    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 {
        (((s.0 - a.0) * ex + (s.1 - a.1) * ey) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (a.0 + t * ex, a.1 + t * ey);
    (t, (px - s.0).hypot(py - s.1))
}

/// Fixed-step fourth-order integration of the unit direction field from
/// `seed`. Stops on leaving the domain or valid water, on stagnation, after
/// `max_steps`, or on closure: once the path has moved more than the closure
/// distance away, at least 8 steps in, and then starts receding again from
/// within that distance of the seed.
pub fn integrate_streamline(
    layer: VelocityLayer<'_>,
    seed: (f64, f64),
    params: &WaParams,
) -> Result<Streamline> {
    layer.sample(seed.0, seed.1)?;
    let h = params.step;
    let eps = params.closure_distance;
    let dist = |p: (f64, f64)| (p.0 - seed.0).hypot(p.1 - seed.1);

    let mut points = vec![seed];
    let mut headings: Vec<f64> = Vec::new();
    let mut turn = 0.0;
    let mut departed = false;
    let mut termination = Termination::MaxSteps;
    let mut closure = None;

    for step in 0..params.max_steps {
        let p = *points.last().unwrap();
        let (next, heading) = match rk4(layer, p, h, params.min_speed) {
            Step::To(q, hd) => (q, hd),
            Step::Stop(t) => {
                termination = t;
                break;
            }
        };
        if let Some(&prev) = headings.last() {
            turn += wrap180(heading - prev);
        }
        headings.push(heading);
        let (d_prev, d_next) = (dist(p), dist(next));
        if departed && step + 1 >= 8 && d_prev <= eps && d_next > d_prev {
            // closest return lies on one of the two segments around `p`;
            // headings[n - 1] is the flow direction at `p`
            let n = points.len();
            let prev_pt = points[n - 2];
            let (t_back, d_back) = closest_on_segment(prev_pt, p, seed);
            let (t_fwd, d_fwd) = closest_on_segment(p, next, seed);
            let dh_back = wrap180(headings[n - 1] - headings[n - 2]);
            if d_fwd <= d_back {
                let h_next = match unit_direction(layer, next, params.min_speed) {
                    Some(Ok(d)) => direction(d.0, d.1),
                    _ => headings[n - 1],
                };
                turn += t_fwd * wrap180(h_next - headings[n - 1]);
                closure = Some(d_fwd);
            } else {
                turn -= (1.0 - t_back) * dh_back;
                closure = Some(d_back);
            }
            termination = Termination::Closed;
            break;
        }
        departed |= d_next > eps;
        points.push(next);
    }
    Ok(Streamline {
        seed,
        points,
        cumulative_turn: turn,
        termination,
        closure_distance: closure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaEddy {
    pub center: (f64, f64),
    pub polarity: Polarity,
    pub members: usize,
    /// Mean distance of the boundary streamline from `center`.
    pub radius: f64,
    /// Member streamline lying farthest from the centre on average.
    pub boundary: Streamline,
}

struct Cluster {
    sum: (f64, f64),
    members: Vec<Streamline>,
    polarity: Polarity,
}

impl Cluster {
    fn center(&self) -> (f64, f64) {
        let n = self.members.len() as f64;
        (self.sum.0 / n, self.sum.1 / n)
    }
}

/// Winding-angle detection on one layer.
///
/// Seeds sit on a lattice with the configured spacing, offset by half a
/// spacing from the origin. Streamlines that close with at least
/// `threshold - tolerance` degrees of turning are clustered greedily in seed
/// order: each joins the first same-sense cluster whose running centroid is
/// within the merge distance of its own centroid.
pub fn detect_wa(frame: &OceanFrame, layer: usize, params: &WaParams) -> Result<Vec<WaEddy>> {
    params.validate()?;
    let vel = frame.velocity()?;
    let (nx, ny, nz) = vel.dims();
    if layer >= nz {
        return Err(Error::param("layer", format!("{layer} >= nz = {nz}")));
    }
    let lv = vel.layer(layer);
    let s = params.seed_spacing;
    let seeds: Vec<(usize, usize)> = (s / 2..ny)
        .step_by(s)
        .flat_map(|j| (s / 2..nx).step_by(s).map(move |i| (i, j)))
        .filter(|&(i, j)| lv.get(i, j).is_some())
        .collect();
    let need = params.threshold - params.tolerance;
    let kept: Vec<Streamline> = seeds
        .par_iter()
        .filter_map(|&(i, j)| integrate_streamline(lv, (i as f64, j as f64), params).ok())
        .filter(|sl| sl.closed() && sl.cumulative_turn.abs() >= need)
        .collect();

    let mut clusters: Vec<Cluster> = Vec::new();
    for sl in kept {
        let c = sl.centroid();
        let pol = if sl.cumulative_turn > 0.0 {
            Polarity::Cyclonic
        } else {
            Polarity::Anticyclonic
        };
        let hit = clusters.iter_mut().find(|cl| {
            let cc = cl.center();
            cl.polarity == pol && (cc.0 - c.0).hypot(cc.1 - c.1) <= params.merge_distance
        });
        match hit {
            Some(cl) => {
                cl.sum = (cl.sum.0 + c.0, cl.sum.1 + c.1);
                cl.members.push(sl);
            }
            None => clusters.push(Cluster {
                sum: c,
                members: vec![sl],
                polarity: pol,
            }),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|cl| {
            let center = cl.center();
            let members = cl.members.len();
            let (radius, boundary) = cl
                .members
                .into_iter()
                .map(|m| (m.mean_distance(center), m))
                .fold(None, |best: Option<(f64, Streamline)>, (r, m)| match best {
                    Some((br, _)) if br >= r => best,
                    _ => Some((r, m)),
                })
                .unwrap();
            WaEddy {
                center,
                polarity: cl.polarity,
                members,
                radius,
                boundary,
            }
        })
        .collect())
}
