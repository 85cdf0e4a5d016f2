//! Reference detectors used for comparison with the hybrid method.

pub mod ow;
pub mod winding;

pub use ow::{detect_ow, ow_regions, Connectivity, OwEddy, OwParams, OwRegion};
pub use winding::{detect_wa, integrate_streamline, Streamline, Termination, WaEddy, WaParams};
