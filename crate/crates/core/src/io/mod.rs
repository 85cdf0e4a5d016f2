//! File formats: frame headers with raw payloads, run configuration, and
//! report, diagnostic and table writers.

pub mod config;
pub mod frame_file;
pub mod report;

pub use config::{load_config, Method, OutputPaths, RunConfig};
pub use frame_file::{load_frame, load_scene, save_frame, ByteOrder, FrameHeader, VariableEntry};
pub use report::{
    ring_diagnostics, to_csv, to_json, track_rows, write_csv, write_json, write_text, RingRow, TrackRow,
};
