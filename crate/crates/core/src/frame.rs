use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField2D, ScalarField3D, VectorField3D};

/// One time step of gridded ocean state.
///
/// Every variable is optional so that partially populated files load; the
/// accessors report the first missing variable a detector needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OceanFrame {
    pub spec: GridSpec,
    pub frame_index: usize,
    pub ssh: Option<ScalarField2D>,
    pub vel: Option<VectorField3D>,
    pub temp: Option<ScalarField3D>,
    pub sal: Option<ScalarField3D>,
}

impl OceanFrame {
    pub fn new(spec: GridSpec, frame_index: usize) -> Self {
        OceanFrame {
            spec,
            frame_index,
            ssh: None,
            vel: None,
            temp: None,
            sal: None,
        }
    }

    pub fn ssh(&self) -> Result<&ScalarField2D> {
        self.ssh
            .as_ref()
            .ok_or_else(|| Error::MissingVariable("ssh".into()))
    }

    pub fn velocity(&self) -> Result<&VectorField3D> {
        self.vel
            .as_ref()
            .ok_or_else(|| Error::MissingVariable("u".into()))
    }

    /// Checks that every present variable matches the grid extents.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let s = &self.spec;
        if let Some(ssh) = &self.ssh {
            if (ssh.nx(), ssh.ny()) != (s.nx, s.ny) {
                return Err(Error::Shape(format!(
                    "ssh is {}x{}, grid is {}x{}",
                    ssh.nx(),
                    ssh.ny(),
                    s.nx,
                    s.ny
                )));
            }
        }
        if let Some(vel) = &self.vel {
            if vel.dims() != (s.nx, s.ny, s.nz) {
                return Err(Error::Shape("velocity extents differ from grid".into()));
            }
        }
        for (name, f) in [("temp", &self.temp), ("sal", &self.sal)] {
            if let Some(f) = f {
                if f.dims() != (s.nx, s.ny, s.nz) {
                    return Err(Error::Shape(format!("{name} extents differ from grid")));
                }
            }
        }
        Ok(())
    }
}
