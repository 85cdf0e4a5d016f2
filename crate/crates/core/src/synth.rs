//! Synthetic flows with known ground truth.
//!
//! Eddies are Rankine (or Gaussian) vortices with a compact parabolic SSH
//! signature, optionally tilted with depth and advected between frames. A
//! scene superposes eddies, a background flow and isotropic velocity noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::centers::Polarity;
use crate::error::{Error, Result};
use crate::frame::OceanFrame;
use crate::grid::{GridSpec, ScalarField2D, ScalarField3D, VectorField3D};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VortexProfile {
    /// Solid-body core, `1/r` decay outside.
    #[default]
    Rankine,
    /// `r·exp(−r²/2R0²)` shape, peaking at the core radius.
    Gaussian,
}

fn default_ssh() -> f64 {
    0.1
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticEddySpec {
    /// Surface centre on frame 0, in cells.
    pub center: (f64, f64),
    pub core_radius: f64,
    pub peak_speed: f64,
    pub polarity: Polarity,
    /// SSH magnitude; cyclones get a depression, anticyclones a bump.
    #[serde(default = "default_ssh")]
    pub ssh_amplitude: f64,
    /// Number of layers carrying the eddy's velocity, counted from the surface.
    #[serde(default = "one")]
    pub depth_extent: usize,
    /// Velocity multiplier applied per layer of depth.
    #[serde(default = "unit")]
    pub decay: f64,
    /// Horizontal centre shift per layer of depth, in cells.
    #[serde(default)]
    pub tilt: (f64, f64),
    /// Centre displacement per frame, in cells.
    #[serde(default)]
    pub advection: (f64, f64),
    #[serde(default)]
    pub profile: VortexProfile,
}

impl SyntheticEddySpec {
    pub fn rankine(center: (f64, f64), core_radius: f64, peak_speed: f64, polarity: Polarity) -> Self {
        SyntheticEddySpec {
            center,
            core_radius,
            peak_speed,
            polarity,
            ssh_amplitude: default_ssh(),
            depth_extent: 1,
            decay: 1.0,
            tilt: (0.0, 0.0),
            advection: (0.0, 0.0),
            profile: VortexProfile::Rankine,
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.core_radius >= 1.0) {
            return Err(Error::Scene(format!(
                "core radius {} must be at least 1 cell",
                self.core_radius
            )));
        }
        if !(self.peak_speed > 0.0) {
            return Err(Error::Scene("peak speed must be positive".into()));
        }
        if !(self.ssh_amplitude >= 0.0) {
            return Err(Error::Scene("ssh amplitude must be non-negative".into()));
        }
        if self.depth_extent == 0 || self.depth_extent > grid.nz {
            return Err(Error::Scene(format!(
                "depth extent {} outside 1..={}",
                self.depth_extent, grid.nz
            )));
        }
        if !(self.decay > 0.0) {
            return Err(Error::Scene("decay factor must be positive".into()));
        }
        Ok(())
    }

    /// Centre of the eddy on `layer` at `frame`.
    pub fn center_at(&self, frame: usize, layer: usize) -> (f64, f64) {
        let f = frame as f64;
        let k = layer as f64;
        (
            self.center.0 + f * self.advection.0 + k * self.tilt.0,
            self.center.1 + f * self.advection.1 + k * self.tilt.1,
        )
    }

    /// Azimuthal speed at distance `r` from the centre on the surface.
    pub fn tangential_speed(&self, r: f64) -> f64 {
        let q = r / self.core_radius;
        match self.profile {
            VortexProfile::Rankine if q <= 1.0 => self.peak_speed * q,
            VortexProfile::Rankine => self.peak_speed / q,
            VortexProfile::Gaussian => self.peak_speed * q * (0.5 * (1.0 - q * q)).exp(),
        }
    }

    pub fn velocity(&self, x: f64, y: f64, frame: usize, layer: usize) -> (f64, f64) {
        if layer >= self.depth_extent {
            return (0.0, 0.0);
        }
        let (cx, cy) = self.center_at(frame, layer);
        let (dx, dy) = (x - cx, y - cy);
        let r = dx.hypot(dy);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let scale = self.tangential_speed(r) * self.decay.powi(layer as i32) / r;
        let s = self.polarity.rotation_sign();
        (-s * dy * scale, s * dx * scale)
    }

    pub fn ssh(&self, x: f64, y: f64, frame: usize) -> f64 {
        let (cx, cy) = self.center_at(frame, 0);
        let q = (x - cx).hypot(y - cy) / (2.0 * self.core_radius);
        self.polarity.ssh_sign() * self.ssh_amplitude * (1.0 - q * q).max(0.0)
    }
}

fn default_width() -> f64 {
    3.0
}

fn default_modulation() -> f64 {
    0.5
}

fn default_meander_ssh() -> f64 {
    0.05
}

/// A sinusoidal jet whose speed dips at the SSH extrema along its axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanderSpec {
    pub amplitude: f64,
    pub wavelength: f64,
    pub jet_speed: f64,
    /// Mean axis row; defaults to the middle of the grid.
    #[serde(default)]
    pub axis_y: Option<f64>,
    /// Gaussian half-width of the jet across its axis, in cells.
    #[serde(default = "default_width")]
    pub width: f64,
    /// Fractional speed drop at the SSH extrema.
    #[serde(default = "default_modulation")]
    pub modulation: f64,
    #[serde(default = "default_meander_ssh")]
    pub ssh_amplitude: f64,
}

impl MeanderSpec {
    pub fn new(amplitude: f64, wavelength: f64, jet_speed: f64) -> Self {
        MeanderSpec {
            amplitude,
            wavelength,
            jet_speed,
            axis_y: None,
            width: default_width(),
            modulation: default_modulation(),
            ssh_amplitude: default_meander_ssh(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.wavelength >= 4.0) {
            return Err(Error::Scene(format!(
                "meander wavelength {} must be at least 4 cells",
                self.wavelength
            )));
        }
        if !(self.width > 0.0) {
            return Err(Error::Scene("meander width must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.modulation) {
            return Err(Error::Scene("meander modulation must lie in [0, 1)".into()));
        }
        Ok(())
    }

    fn axis(&self, grid: &GridSpec) -> f64 {
        self.axis_y.unwrap_or((grid.ny as f64 - 1.0) / 2.0)
    }

    /// Cross-axis offset, along-axis phase, and unit tangent of the axis.
    fn local(&self, grid: &GridSpec, x: f64, y: f64) -> (f64, f64, (f64, f64)) {
        let k = std::f64::consts::TAU / self.wavelength;
        let offset = y - (self.axis(grid) + self.amplitude * (k * x).sin());
        let slope = self.amplitude * k * (k * x).cos();
        let norm = slope.hypot(1.0);
        (offset, (k * x).cos(), (1.0 / norm, slope / norm))
    }

    pub fn velocity(&self, grid: &GridSpec, x: f64, y: f64) -> (f64, f64) {
        let (d, c, t) = self.local(grid, x, y);
        let speed = self.jet_speed
            * (1.0 - self.modulation * c * c)
            * (-d * d / (2.0 * self.width * self.width)).exp();
        (speed * t.0, speed * t.1)
    }

    pub fn ssh(&self, grid: &GridSpec, x: f64, y: f64) -> f64 {
        let (d, c, _) = self.local(grid, x, y);
        self.ssh_amplitude * c * (-d * d / (2.0 * self.width * self.width)).exp()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Background {
    #[default]
    None,
    Uniform {
        u: f64,
        v: f64,
    },
    /// `u = rate·(y − y_mid)`.
    Shear {
        rate: f64,
    },
    Meander(MeanderSpec),
}

impl Background {
    fn velocity(&self, grid: &GridSpec, x: f64, y: f64) -> (f64, f64) {
        match self {
            Background::None => (0.0, 0.0),
            Background::Uniform { u, v } => (*u, *v),
            Background::Shear { rate } => (rate * (y - (grid.ny as f64 - 1.0) / 2.0), 0.0),
            Background::Meander(m) => m.velocity(grid, x, y),
        }
    }

    fn ssh(&self, grid: &GridSpec, x: f64, y: f64) -> f64 {
        match self {
            Background::Meander(m) => m.ssh(grid, x, y),
            _ => 0.0,
        }
    }
}

/// Linear temperature/salinity stratification with eddy core anomalies
/// (warm/salty anticyclones, cold/fresh cyclones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratification {
    pub surface_temp: f64,
    pub temp_lapse: f64,
    pub surface_sal: f64,
    pub sal_lapse: f64,
    pub core_temp_anomaly: f64,
    pub core_sal_anomaly: f64,
}

impl Default for Stratification {
    fn default() -> Self {
        Stratification {
            surface_temp: 25.0,
            temp_lapse: 0.5,
            surface_sal: 38.0,
            sal_lapse: 0.05,
            core_temp_anomaly: 1.5,
            core_sal_anomaly: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub grid: GridSpec,
    #[serde(default)]
    pub eddies: Vec<SyntheticEddySpec>,
    #[serde(default)]
    pub background: Background,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default = "one")]
    pub frames: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stratification: Option<Stratification>,
}

impl SceneSpec {
    pub fn new(grid: GridSpec) -> Self {
        SceneSpec {
            grid,
            eddies: Vec::new(),
            background: Background::None,
            noise_std: 0.0,
            frames: 1,
            seed: 0,
            stratification: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid
            .validate()
            .map_err(|e| Error::Scene(format!("grid: {e}")))?;
        if let Background::Meander(m) = &self.background {
            m.validate()?;
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Scene("noise_std must be non-negative".into()));
        }
        if self.frames == 0 {
            return Err(Error::Scene("a scene needs at least one frame".into()));
        }
        for (n, e) in self.eddies.iter().enumerate() {
            e.validate(&self.grid)
                .map_err(|err| Error::Scene(format!("eddy {n}: {err}")))?;
        }
        for f in 0..self.frames {
            for (n, e) in self.eddies.iter().enumerate() {
                for k in 0..e.depth_extent {
                    let (x, y) = e.center_at(f, k);
                    if !self.grid.contains(x, y) {
                        return Err(Error::Scene(format!(
                            "eddy {n} leaves the grid at frame {f}, layer {k}"
                        )));
                    }
                }
            }
            for (a, ea) in self.eddies.iter().enumerate() {
                for (b, eb) in self.eddies.iter().enumerate().skip(a + 1) {
                    let (xa, ya) = ea.center_at(f, 0);
                    let (xb, yb) = eb.center_at(f, 0);
                    if (xa - xb).hypot(ya - yb) < ea.core_radius + eb.core_radius {
                        return Err(Error::Scene(format!(
                            "eddies {a} and {b} have overlapping cores at frame {f}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Surface centres and polarities of every eddy on `frame`.
    pub fn ground_truth(&self, frame: usize) -> Vec<((f64, f64), Polarity)> {
        self.eddies
            .iter()
            .map(|e| (e.center_at(frame, 0), e.polarity))
            .collect()
    }
}

fn noise_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (frame as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn build_frame(scene: &SceneSpec, frame: usize) -> Result<OceanFrame> {
    let g = &scene.grid;
    let ssh = ScalarField2D::from_fn(g.nx, g.ny, |i, j| {
        let (x, y) = (i as f64, j as f64);
        scene.background.ssh(g, x, y) + scene.eddies.iter().map(|e| e.ssh(x, y, frame)).sum::<f64>()
    });
    let mut vel = VectorField3D::from_fn(g.nx, g.ny, g.nz, |i, j, k| {
        let (x, y) = (i as f64, j as f64);
        let (mut u, mut v) = scene.background.velocity(g, x, y);
        for e in &scene.eddies {
            let (eu, ev) = e.velocity(x, y, frame, k);
            u += eu;
            v += ev;
        }
        (u, v)
    });
    if scene.noise_std > 0.0 {
        let normal = Normal::new(0.0, scene.noise_std)
            .map_err(|e| Error::Scene(format!("noise: {e}")))?;
        let mut rng = noise_rng(scene.seed, frame);
        let n = vel.u().len();
        for idx in 0..n {
            let du = normal.sample(&mut rng);
            let dv = normal.sample(&mut rng);
            vel.u_mut()[idx] += du;
            vel.v_mut()[idx] += dv;
        }
    }
    let mut out = OceanFrame::new(g.clone(), frame);
    if let Some(strat) = &scene.stratification {
        let anomaly = |x: f64, y: f64, k: usize| -> f64 {
            scene
                .eddies
                .iter()
                .filter(|e| k < e.depth_extent)
                .map(|e| {
                    let (cx, cy) = e.center_at(frame, k);
                    let q = (x - cx).hypot(y - cy) / (2.0 * e.core_radius);
                    e.polarity.ssh_sign() * (1.0 - q * q).max(0.0)
                })
                .sum()
        };
        out.temp = Some(ScalarField3D::from_fn(g.nx, g.ny, g.nz, |i, j, k| {
            strat.surface_temp - strat.temp_lapse * k as f64
                + strat.core_temp_anomaly * anomaly(i as f64, j as f64, k)
        }));
        out.sal = Some(ScalarField3D::from_fn(g.nx, g.ny, g.nz, |i, j, k| {
            strat.surface_sal - strat.sal_lapse * k as f64
                + strat.core_sal_anomaly * anomaly(i as f64, j as f64, k)
        }));
    }
    out.ssh = Some(ssh);
    out.vel = Some(vel);
    Ok(out)
}

/// A single eddy in an otherwise still ocean.
pub fn rankine_eddy(spec: &SyntheticEddySpec, grid: &GridSpec) -> Result<OceanFrame> {
    let mut scene = SceneSpec::new(grid.clone());
    scene.eddies.push(spec.clone());
    scene.validate()?;
    build_frame(&scene, 0)
}

/// A lone meandering jet.
pub fn meander_field(grid: &GridSpec, spec: &MeanderSpec) -> Result<OceanFrame> {
    let mut scene = SceneSpec::new(grid.clone());
    scene.background = Background::Meander(spec.clone());
    scene.validate()?;
    build_frame(&scene, 0)
}

/// Generates one frame of a scene.
pub fn compose_frame(scene: &SceneSpec, frame: usize) -> Result<OceanFrame> {
    scene.validate()?;
    if frame >= scene.frames {
        return Err(Error::Scene(format!(
            "frame {frame} beyond scene length {}",
            scene.frames
        )));
    }
    build_frame(scene, frame)
}

/// Generates every frame of a scene. Deterministic for a given seed.
pub fn compose_scene(scene: &SceneSpec) -> Result<Vec<OceanFrame>> {
    scene.validate()?;
    (0..scene.frames).map(|f| build_frame(scene, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::uniform(n, n, 1)
    }

    fn speed_at(frame: &OceanFrame, i: usize, j: usize) -> f64 {
        frame.velocity().unwrap().layer(0).speed(i, j).unwrap()
    }

    #[test]
    fn rankine_speed_profile() {
        let spec = SyntheticEddySpec::rankine((20.0, 20.0), 5.0, 2.0, Polarity::Cyclonic);
        let f = rankine_eddy(&spec, &grid(41)).unwrap();
        assert_eq!(speed_at(&f, 20, 20), 0.0);
        assert!((speed_at(&f, 25, 20) - 2.0).abs() < 1e-12);
        assert!((speed_at(&f, 20, 30) - 1.0).abs() < 1e-12);
        // counterclockwise: east of the centre the flow heads north
        let (u, v) = f.velocity().unwrap().layer(0).get(25, 20).unwrap();
        assert!(u.abs() < 1e-12 && v > 0.0);
    }

    #[test]
    fn ssh_extremum_sits_at_centre() {
        for (pol, want_min) in [(Polarity::Cyclonic, true), (Polarity::Anticyclonic, false)] {
            let spec = SyntheticEddySpec::rankine((12.0, 17.0), 4.0, 1.0, pol);
            let f = rankine_eddy(&spec, &grid(33)).unwrap();
            let ssh = f.ssh().unwrap();
            let mut best = (0, 0);
            for j in 0..33 {
                for i in 0..33 {
                    let (a, b) = (ssh.get(i, j).unwrap(), ssh.get(best.0, best.1).unwrap());
                    if (want_min && a < b) || (!want_min && a > b) {
                        best = (i, j);
                    }
                }
            }
            assert_eq!(best, (12, 17));
        }
    }

    #[test]
    fn single_eddy_scene_matches_rankine() {
        let g = GridSpec::uniform(30, 30, 2);
        let mut spec = SyntheticEddySpec::rankine((14.0, 15.0), 4.0, 1.0, Polarity::Anticyclonic);
        spec.depth_extent = 2;
        spec.decay = 0.8;
        let mut scene = SceneSpec::new(g.clone());
        scene.eddies.push(spec.clone());
        let frames = compose_scene(&scene).unwrap();
        assert_eq!(frames[0], rankine_eddy(&spec, &g).unwrap());
    }

    #[test]
    fn advection_moves_centres_linearly() {
        let mut spec = SyntheticEddySpec::rankine((10.0, 20.0), 3.0, 1.0, Polarity::Cyclonic);
        spec.advection = (2.0, 0.0);
        let xs: Vec<f64> = (0..5).map(|f| spec.center_at(f, 0).0).collect();
        assert_eq!(xs, vec![10.0, 12.0, 14.0, 16.0, 18.0]);
    }

    #[test]
    fn scene_validation() {
        let mut scene = SceneSpec::new(grid(50));
        scene.eddies.push(SyntheticEddySpec::rankine((20.0, 20.0), 5.0, 1.0, Polarity::Cyclonic));
        scene.eddies.push(SyntheticEddySpec::rankine((27.0, 20.0), 5.0, 1.0, Polarity::Cyclonic));
        assert!(matches!(compose_scene(&scene), Err(Error::Scene(_))));
        scene.eddies[1].center = (40.0, 20.0);
        assert!(compose_scene(&scene).is_ok());
        scene.eddies[1].advection = (3.0, 0.0);
        scene.frames = 5;
        assert!(matches!(compose_scene(&scene), Err(Error::Scene(_))));
        let mut bad = SyntheticEddySpec::rankine((5.0, 5.0), 0.5, 1.0, Polarity::Cyclonic);
        assert!(bad.validate(&grid(10)).is_err());
        bad.core_radius = 2.0;
        bad.depth_extent = 2;
        assert!(bad.validate(&grid(10)).is_err());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let mut scene = SceneSpec::new(grid(24));
        scene.eddies.push(SyntheticEddySpec::rankine((12.0, 12.0), 4.0, 1.0, Polarity::Cyclonic));
        scene.noise_std = 0.05;
        scene.frames = 2;
        scene.seed = 7;
        let a = compose_scene(&scene).unwrap();
        let b = compose_scene(&scene).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].vel, a[1].vel);
        assert_eq!(a[0].ssh, a[1].ssh);
        scene.seed = 8;
        assert_ne!(compose_scene(&scene).unwrap()[0].vel, a[0].vel);
    }

    #[test]
    fn straight_jet_when_amplitude_is_zero() {
        let g = grid(40);
        let mut m = MeanderSpec::new(0.0, 20.0, 1.0);
        m.modulation = 0.0;
        let f = meander_field(&g, &m).unwrap();
        let vel = f.velocity().unwrap().layer(0);
        for i in 0..40 {
            let (u, v) = vel.get(i, 20).unwrap();
            assert_eq!(v, 0.0);
            assert!((u - (-(0.5f64).powi(2) / 18.0).exp()).abs() < 1e-12);
        }
        assert!(meander_field(&g, &MeanderSpec::new(2.0, 3.0, 1.0)).is_err());
    }

    #[test]
    fn stratification_marks_cores() {
        let g = GridSpec::uniform(30, 30, 3);
        let mut scene = SceneSpec::new(g);
        let mut e = SyntheticEddySpec::rankine((15.0, 15.0), 4.0, 1.0, Polarity::Anticyclonic);
        e.depth_extent = 2;
        scene.eddies.push(e);
        scene.stratification = Some(Stratification::default());
        let f = compose_frame(&scene, 0).unwrap();
        let t = f.temp.as_ref().unwrap();
        assert!((t.layer(0).get(15, 15).unwrap() - 26.5).abs() < 1e-12);
        assert!((t.layer(2).get(15, 15).unwrap() - 24.0).abs() < 1e-12);
        assert!((t.layer(0).get(0, 0).unwrap() - 25.0).abs() < 1e-12);
    }
}
