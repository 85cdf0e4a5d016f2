//! Okubo-Weiss region growing with a threshold relative to each local minimum.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::centers::{check_window, Polarity};
use crate::error::{Error, Result};
use crate::frame::OceanFrame;
use crate::grid::{clipped_window, okubo_weiss_vorticity, ScalarField2D};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OwParams {
    /// Region membership is `W <= k * W_min`; smaller k grows larger regions.
    pub k: f64,
    pub window: usize,
    pub connectivity: Connectivity,
}

impl Default for OwParams {
    fn default() -> Self {
        OwParams {
            k: 0.2,
            window: 7,
            connectivity: Connectivity::Four,
        }
    }
}

impl OwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::param("ow.k", format!("{} not in (0, 1]", self.k)));
        }
        check_window("ow.window", self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwRegion {
    pub core: (usize, usize),
    pub w_min: f64,
    /// Row-major sorted.
    pub cells: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwEddy {
    pub core: (usize, usize),
    pub polarity: Polarity,
    pub w_min: f64,
    pub cells: Vec<(usize, usize)>,
}

impl OwEddy {
    /// Radius of the disk with the same cell count.
    pub fn equivalent_radius(&self) -> f64 {
        (self.cells.len() as f64 / std::f64::consts::PI).sqrt()
    }
}

/// Minimum of the valid cells in each `width`-wide window, as a separable
/// filter. Windows without a valid cell hold infinity.
fn window_minima(w: &ScalarField2D, width: usize) -> Vec<f64> {
    let (nx, ny) = (w.nx(), w.ny());
    let mut rows = vec![f64::INFINITY; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            rows[j * nx + i] = clipped_window(i, width, nx)
                .filter_map(|ii| w.get(ii, j))
                .fold(f64::INFINITY, f64::min);
        }
    }
    let mut out = vec![f64::INFINITY; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = clipped_window(j, width, ny)
                .map(|jj| rows[jj * nx + i])
                .fold(f64::INFINITY, f64::min);
        }
    }
    out
}

/// Grows one region per local minimum of `w`.
///
/// Minima are negative cells no greater than any valid cell of their window.
/// They are processed from deepest to shallowest (row-major among equals) and
/// a minimum already inside an earlier region is skipped, so a flat negative
/// plateau yields a single region. Regions never share cells.
pub fn ow_regions(w: &ScalarField2D, params: &OwParams) -> Result<Vec<OwRegion>> {
    params.validate()?;
    let (nx, ny) = (w.nx(), w.ny());
    let lowest = window_minima(w, params.window);
    let mut minima: Vec<((usize, usize), f64)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if let Some(c) = w.get(i, j).filter(|&c| c < 0.0 && c <= lowest[j * nx + i]) {
                minima.push(((i, j), c));
            }
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));

    let offsets: &[(isize, isize)] = match params.connectivity {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    };
    let mut owner = vec![false; nx * ny];
    let mut out = Vec::new();
    for (core, w_min) in minima {
        if owner[core.1 * nx + core.0] {
            continue;
        }
        let threshold = params.k * w_min;
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([core]);
        owner[core.1 * nx + core.0] = true;
        while let Some((i, j)) = queue.pop_front() {
            cells.push((i, j));
            for &(di, dj) in offsets {
                let (ii, jj) = (i as isize + di, j as isize + dj);
                if ii < 0 || jj < 0 || ii >= nx as isize || jj >= ny as isize {
                    continue;
                }
                let (ii, jj) = (ii as usize, jj as usize);
                let idx = jj * nx + ii;
                if !owner[idx] && w.get(ii, jj).is_some_and(|v| v <= threshold) {
                    owner[idx] = true;
                    queue.push_back((ii, jj));
                }
            }
        }
        cells.sort_by_key(|&(i, j)| (j, i));
        out.push(OwRegion { core, w_min, cells });
    }
    Ok(out)
}

/// Okubo-Weiss detection on one layer. Polarity follows the sign of relative
/// vorticity at the core: positive (counterclockwise) is cyclonic.
pub fn detect_ow(frame: &OceanFrame, layer: usize, params: &OwParams) -> Result<Vec<OwEddy>> {
    let (w, vorticity) = okubo_weiss_vorticity(frame.velocity()?, layer)?;
    Ok(ow_regions(&w, params)?
        .into_iter()
        .map(|r| {
            let (i, j) = r.core;
            let vort = vorticity.get(i, j).unwrap_or(0.0);
            OwEddy {
                core: r.core,
                polarity: if vort >= 0.0 {
                    Polarity::Cyclonic
                } else {
                    Polarity::Anticyclonic
                },
                w_min: r.w_min,
                cells: r.cells,
            }
        })
        .collect())
}
