//! Named synthetic scenes shared by tests, benchmarks and the command line.

use crate::centers::Polarity;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::synth::{Background, MeanderSpec, SceneSpec, Stratification, SyntheticEddySpec};

pub const NAMES: &[&str] = &["oracle", "meander", "deep", "tilted", "advected", "lattice", "two-bump"];

fn eddy(center: (f64, f64), r0: f64, pol: Polarity) -> SyntheticEddySpec {
    SyntheticEddySpec::rankine(center, r0, 1.0, pol)
}

/// Three separated Rankine eddies of mixed polarity spanning ten layers, a
/// meandering jet along the north and velocity noise at 5% of peak speed.
pub fn oracle() -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(200, 200, 10));
    for (c, pol) in [
        ((45.0, 50.0), Polarity::Cyclonic),
        ((155.0, 55.0), Polarity::Anticyclonic),
        ((100.0, 115.0), Polarity::Cyclonic),
    ] {
        let mut e = eddy(c, 6.0, pol);
        e.depth_extent = 10;
        e.decay = 0.9;
        s.eddies.push(e);
    }
    let mut jet = MeanderSpec::new(6.0, 50.0, 0.6);
    jet.axis_y = Some(172.0);
    s.background = Background::Meander(jet);
    s.noise_std = 0.05;
    s.seed = 20_240_601;
    s.stratification = Some(Stratification::default());
    s
}

/// The jet alone.
pub fn meander() -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(200, 100, 1));
    s.background = Background::Meander(MeanderSpec::new(8.0, 50.0, 1.0));
    s
}

/// One eddy with velocity on the top `depth` layers of a 14-layer grid,
/// shifted by `tilt` cells per layer.
pub fn deep(depth: usize, tilt: (f64, f64)) -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(80, 60, 14));
    let mut e = eddy((30.0, 30.0), 5.0, Polarity::Anticyclonic);
    e.depth_extent = depth;
    e.decay = 0.9;
    e.tilt = tilt;
    s.eddies.push(e);
    s.stratification = Some(Stratification::default());
    s
}

/// One eddy moving two cells east per frame over five frames.
pub fn advected() -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(90, 60, 1));
    let mut e = eddy((30.0, 30.0), 5.0, Polarity::Cyclonic);
    e.advection = (2.0, 0.0);
    s.eddies.push(e);
    s.frames = 5;
    s.noise_std = 0.02;
    s.seed = 7;
    s
}

/// `count` eddies (at most 20) on a 5 by 4 lattice over a 500 by 500 grid,
/// alternating polarity.
pub fn lattice(count: usize) -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(500, 500, 1));
    for n in 0..count.min(20) {
        let (i, j) = (n % 5, n / 5);
        let c = (50.0 + 100.0 * i as f64, 62.0 + 125.0 * j as f64);
        let pol = if (i + j) % 2 == 0 {
            Polarity::Cyclonic
        } else {
            Polarity::Anticyclonic
        };
        s.eddies.push(eddy(c, 6.0, pol));
    }
    s.noise_std = 0.02;
    s.seed = 11;
    s
}

/// Two anticyclones of unequal SSH amplitude 30 cells apart.
pub fn two_bump() -> SceneSpec {
    let mut s = SceneSpec::new(GridSpec::uniform(100, 70, 1));
    s.eddies.push(eddy((35.0, 35.0), 6.0, Polarity::Anticyclonic));
    let mut weaker = eddy((65.0, 35.0), 6.0, Polarity::Anticyclonic);
    weaker.ssh_amplitude = 0.08;
    s.eddies.push(weaker);
    s
}

pub fn by_name(name: &str) -> Result<SceneSpec> {
    Ok(match name {
        "oracle" => oracle(),
        "meander" => meander(),
        "deep" => deep(10, (0.0, 0.0)),
        "tilted" => deep(10, (1.0, 0.0)),
        "advected" => advected(),
        "lattice" => lattice(20),
        "two-bump" => two_bump(),
        _ => {
            return Err(Error::param(
                "preset",
                format!("unknown preset {name:?}; known: {}", NAMES.join(", ")),
            ))
        }
    })
}
