//! Three-dimensional mesoscale eddy detection on gridded ocean fields.
//!
//! Centres come from sea-surface-height extrema refined to velocity minima.
//! Each candidate is kept only if rings of sampled velocity around it pass
//! the rotation criteria, then grown outward and followed down the water
//! column. Okubo-Weiss and winding-angle detectors are provided as
//! baselines, along with a synthetic scene generator, frame-file I/O,
//! parameter sweeps and frame-to-frame tracking.

pub mod angle;
pub mod baselines;
pub mod centers;
pub mod error;
pub mod extract;
pub mod frame;
pub mod grid;
pub mod harness;
pub mod io;
pub mod presets;
pub mod synth;
pub mod track;
pub mod verify;

pub use baselines::{OwEddy, OwParams, WaEddy, WaParams};
pub use centers::{CenterCandidate, Polarity, SearchParams};
pub use error::{Error, ErrorKind, Result};
pub use extract::{detect_hybrid, DetectionReport, Eddy3D, EddyLayer, LayerProfile, Stats};
pub use frame::OceanFrame;
pub use synth::{SceneSpec, SyntheticEddySpec};
pub use io::{Method, RunConfig};
pub use grid::{GridSpec, ScalarField2D, ScalarField3D, VectorField3D, VelocityLayer};
pub use track::{associate, EddyTrack, TrackParams};
pub use verify::{Criterion, VerificationReport, VerifyParams};
