//! Fixed frames shared by the criterion benches.

use eddy_core::presets;
use eddy_core::synth::compose_frame;
use eddy_core::OceanFrame;

/// Frame 0 of a named preset scene.
pub fn preset_frame(name: &str) -> OceanFrame {
    let scene = presets::by_name(name).expect("known preset");
    compose_frame(&scene, 0).expect("preset composes")
}

/// A 500x500 lattice of `count` alternating-polarity eddies.
pub fn lattice_frame(count: usize) -> OceanFrame {
    compose_frame(&presets::lattice(count), 0).expect("lattice composes")
}
