//! Frame files: a TOML header next to one raw `f32` array per variable,
//! x fastest, then y, then layer.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::OceanFrame;
use crate::grid::{GridSpec, ScalarField2D, ScalarField3D, VectorField3D};
use crate::synth::SceneSpec;

pub const DEFAULT_FILL: f32 = -9999.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    /// Relative paths resolve against the header's directory.
    pub file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameHeader {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<(f64, f64)>,
    #[serde(default)]
    pub frame_index: usize,
    #[serde(default = "default_fill")]
    pub fill_value: f32,
    #[serde(default)]
    pub byte_order: ByteOrder,
    #[serde(default)]
    pub variables: Vec<VariableEntry>,
}

fn default_fill() -> f32 {
    DEFAULT_FILL
}

impl FrameHeader {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            dx: self.dx,
            dy: self.dy,
            dz: self.dz.clone(),
            origin: self.origin,
        }
    }
}

/// Dimensionality of each recognised variable.
fn variable_dims(name: &str) -> Option<usize> {
    match name {
        "ssh" => Some(2),
        "u" | "v" | "w" | "temp" | "sal" => Some(3),
        _ => None,
    }
}

fn read_payload(path: &Path, name: &str, expect: usize, order: ByteOrder) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::at_path(path, e))?;
    if bytes.len() != 4 * expect {
        return Err(Error::load(
            name,
            format!("{} holds {} bytes, expected {}", path.display(), bytes.len(), 4 * expect),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            match order {
                ByteOrder::Little => f32::from_le_bytes(b),
                ByteOrder::Big => f32::from_be_bytes(b),
            }
        })
        .collect())
}

fn split_mask(raw: &[f32], fill: f32) -> (Vec<f64>, Vec<bool>) {
    raw.iter()
        .map(|&x| {
            if x.is_nan() || x == fill {
                (0.0, false)
            } else {
                (x as f64, true)
            }
        })
        .unzip()
}

/// Reads a header and all payloads it lists. Variables the header does not
/// list stay absent from the frame.
pub fn load_frame(header_path: &Path) -> Result<OceanFrame> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::at_path(header_path, e))?;
    let header: FrameHeader =
        toml::from_str(&text).map_err(|e| Error::load("header", format!("{}: {e}", header_path.display())))?;
    let grid = header.grid();
    grid.validate().map_err(|e| Error::load("header", e.to_string()))?;
    let base = header_path.parent().unwrap_or(Path::new("."));
    let (nx, ny, nz) = (header.nx, header.ny, header.nz);

    let mut raw: std::collections::BTreeMap<&str, Vec<f32>> = Default::default();
    for var in &header.variables {
        let dims = variable_dims(&var.name).ok_or_else(|| Error::load(&var.name, "unknown variable"))?;
        if var.dims.is_some_and(|d| d != dims) {
            return Err(Error::load(&var.name, format!("declared {}D, expected {dims}D", var.dims.unwrap())));
        }
        if raw.contains_key(var.name.as_str()) {
            return Err(Error::load(&var.name, "listed twice"));
        }
        let expect = nx * ny * if dims == 2 { 1 } else { nz };
        let path = base.join(&var.file);
        raw.insert(&var.name, read_payload(&path, &var.name, expect, header.byte_order)?);
    }

    let fill = header.fill_value;
    let mut frame = OceanFrame::new(grid, header.frame_index);
    if let Some(ssh) = raw.get("ssh") {
        let (values, mask) = split_mask(ssh, fill);
        frame.ssh = Some(ScalarField2D::new(nx, ny, values, mask)?);
    }
    let scalar3 = |data: &[f32]| {
        let (values, mask) = split_mask(data, fill);
        ScalarField3D::new(nx, ny, nz, values, mask)
    };
    match (raw.get("u"), raw.get("v")) {
        (Some(u), Some(v)) => {
            let (u, mu) = split_mask(u, fill);
            let (v, mv) = split_mask(v, fill);
            let mask = mu.iter().zip(&mv).map(|(a, b)| *a && *b).collect();
            let mut vel = VectorField3D::new(nx, ny, nz, u, v, mask)?;
            if let Some(w) = raw.get("w") {
                vel = vel.with_w(scalar3(w)?)?;
            }
            frame.vel = Some(vel);
        }
        (None, None) => {
            if raw.contains_key("w") {
                return Err(Error::load("w", "requires u and v"));
            }
        }
        (Some(_), None) => return Err(Error::load("v", "required alongside u")),
        (None, Some(_)) => return Err(Error::load("u", "required alongside v")),
    }
    if let Some(t) = raw.get("temp") {
        frame.temp = Some(scalar3(t)?);
    }
    if let Some(s) = raw.get("sal") {
        frame.sal = Some(scalar3(s)?);
    }
    frame.validate()?;
    Ok(frame)
}

fn write_payload(path: &Path, values: &[f64], mask: &[bool], fill: f32) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for (&x, &ok) in values.iter().zip(mask) {
        let y = if ok { x as f32 } else { fill };
        bytes.extend_from_slice(&y.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::at_path(path, e))
}

/// Writes `<stem>.toml` plus `<stem>_<var>.bin` for every present variable
/// into `dir`, little-endian with the default fill value. Returns the header
/// path.
pub fn save_frame(frame: &OceanFrame, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let s = &frame.spec;
    let fill = DEFAULT_FILL;
    let mut variables = Vec::new();
    let mut put = |name: &str, values: &[f64], mask: &[bool]| -> Result<()> {
        let file = PathBuf::from(format!("{stem}_{name}.bin"));
        write_payload(&dir.join(&file), values, mask, fill)?;
        variables.push(VariableEntry {
            name: name.to_string(),
            file,
            dims: variable_dims(name),
        });
        Ok(())
    };
    if let Some(ssh) = &frame.ssh {
        put("ssh", ssh.values(), ssh.mask())?;
    }
    if let Some(vel) = &frame.vel {
        put("u", vel.u(), vel.mask())?;
        put("v", vel.v(), vel.mask())?;
        if let Some(w) = vel.w() {
            put("w", w.values(), w.mask())?;
        }
    }
    if let Some(t) = &frame.temp {
        put("temp", t.values(), t.mask())?;
    }
    if let Some(sal) = &frame.sal {
        put("sal", sal.values(), sal.mask())?;
    }
    let header = FrameHeader {
        nx: s.nx,
        ny: s.ny,
        nz: s.nz,
        dx: s.dx,
        dy: s.dy,
        dz: s.dz.clone(),
        origin: s.origin,
        frame_index: frame.frame_index,
        fill_value: fill,
        byte_order: ByteOrder::Little,
        variables,
    };
    let path = dir.join(format!("{stem}.toml"));
    let text = toml::to_string_pretty(&header).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::at_path(&path, e))?;
    Ok(path)
}

/// Parses a synthetic scene description.
pub fn load_scene(path: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::at_path(path, e))?;
    let scene: SceneSpec = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    scene.validate()?;
    Ok(scene)
}
