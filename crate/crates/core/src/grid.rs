//! Gridded field storage, masked bilinear interpolation and finite differences.
//!
//! Fields are node-centred: integer coordinates `(i, j)` coincide with data
//! nodes, `i` runs along x (east) and `j` along y (north). Storage is flat with
//! x fastest, then y, then layer. Every field carries a validity mask; masked
//! cells (land, missing data) are never read by the numerical routines here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid geometry shared by every field of a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    /// Thickness of each layer, surface first.
    pub dz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<(f64, f64)>,
}

impl GridSpec {
    /// Unit-spaced grid with unit layer thickness.
    pub fn uniform(nx: usize, ny: usize, nz: usize) -> Self {
        GridSpec {
            nx,
            ny,
            nz,
            dx: 1.0,
            dy: 1.0,
            dz: vec![1.0; nz],
            origin: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Shape(format!(
                "grid dimensions must be positive, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) {
            return Err(Error::Shape("dx and dy must be positive".into()));
        }
        if self.dz.len() != self.nz {
            return Err(Error::Shape(format!(
                "dz has {} entries for {} layers",
                self.dz.len(),
                self.nz
            )));
        }
        if let Some(k) = self.dz.iter().position(|&t| !(t > 0.0)) {
            return Err(Error::Shape(format!("dz[{k}] must be positive")));
        }
        Ok(())
    }

    pub fn cells_per_layer(&self) -> usize {
        self.nx * self.ny
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        in_domain(self.nx, self.ny, x, y)
    }
}

const DOMAIN_EPS: f64 = 1e-9;

fn in_domain(nx: usize, ny: usize, x: f64, y: f64) -> bool {
    x >= -DOMAIN_EPS
        && y >= -DOMAIN_EPS
        && x <= (nx - 1) as f64 + DOMAIN_EPS
        && y <= (ny - 1) as f64 + DOMAIN_EPS
}

/// Inclusive index range of a `width`-wide window centred on `c`, clipped to `0..n`.
pub fn clipped_window(c: usize, width: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    let half = width / 2;
    c.saturating_sub(half)..=(c + half).min(n - 1)
}

/// Borrowed view of one 2D layer of a scalar field.
#[derive(Debug, Clone, Copy)]
pub struct LayerView<'a> {
    nx: usize,
    ny: usize,
    values: &'a [f64],
    mask: &'a [bool],
}

impl<'a> LayerView<'a> {
    pub fn new(nx: usize, ny: usize, values: &'a [f64], mask: &'a [bool]) -> Result<Self> {
        if values.len() != nx * ny || mask.len() != nx * ny {
            return Err(Error::Shape(format!(
                "layer view of {nx}x{ny} needs {} values, got {} values and {} mask cells",
                nx * ny,
                values.len(),
                mask.len()
            )));
        }
        Ok(LayerView {
            nx,
            ny,
            values,
            mask,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = j * self.nx + i;
        self.mask[idx].then(|| self.values[idx])
    }

    pub fn bilinear(&self, x: f64, y: f64) -> Result<f64> {
        bilinear_sample(*self, x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField2D {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField2D {
    pub fn new(nx: usize, ny: usize, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        LayerView::new(nx, ny, &values, &mask)?;
        Ok(ScalarField2D {
            nx,
            ny,
            values,
            mask,
        })
    }

    /// Fully valid field evaluated at every node.
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(i, j));
            }
        }
        ScalarField2D {
            nx,
            ny,
            values,
            mask: vec![true; nx * ny],
        }
    }

    pub fn filled(nx: usize, ny: usize, value: f64) -> Self {
        ScalarField2D {
            nx,
            ny,
            values: vec![value; nx * ny],
            mask: vec![true; nx * ny],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn view(&self) -> LayerView<'_> {
        LayerView {
            nx: self.nx,
            ny: self.ny,
            values: &self.values,
            mask: &self.mask,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.view().get(i, j)
    }

    #[inline]
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = j * self.nx + i;
        self.values[idx] = value;
    }

    pub fn set_masked(&mut self, i: usize, j: usize, masked: bool) {
        let idx = j * self.nx + i;
        self.mask[idx] = !masked;
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField3D {
    nx: usize,
    ny: usize,
    nz: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField3D {
    pub fn new(nx: usize, ny: usize, nz: usize, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let n = nx * ny * nz;
        if values.len() != n || mask.len() != n {
            return Err(Error::Shape(format!(
                "3D field of {nx}x{ny}x{nz} needs {n} values, got {} values and {} mask cells",
                values.len(),
                mask.len()
            )));
        }
        Ok(ScalarField3D {
            nx,
            ny,
            nz,
            values,
            mask,
        })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        nz: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    values.push(f(i, j, k));
                }
            }
        }
        ScalarField3D {
            nx,
            ny,
            nz,
            values,
            mask: vec![true; nx * ny * nz],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn layer(&self, k: usize) -> LayerView<'_> {
        let n = self.nx * self.ny;
        LayerView {
            nx: self.nx,
            ny: self.ny,
            values: &self.values[k * n..(k + 1) * n],
            mask: &self.mask[k * n..(k + 1) * n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn set_masked(&mut self, i: usize, j: usize, k: usize, masked: bool) {
        let idx = (k * self.ny + j) * self.nx + i;
        self.mask[idx] = !masked;
    }
}

/// Horizontal velocity on every layer with a shared validity mask, plus an
/// optional vertical component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField3D {
    nx: usize,
    ny: usize,
    nz: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    mask: Vec<bool>,
    w: Option<ScalarField3D>,
}

impl VectorField3D {
    pub fn new(
        nx: usize,
        ny: usize,
        nz: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let n = nx * ny * nz;
        if u.len() != n || v.len() != n || mask.len() != n {
            return Err(Error::Shape(format!(
                "velocity of {nx}x{ny}x{nz} needs {n} cells, got u={}, v={}, mask={}",
                u.len(),
                v.len(),
                mask.len()
            )));
        }
        Ok(VectorField3D {
            nx,
            ny,
            nz,
            u,
            v,
            mask,
            w: None,
        })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        nz: usize,
        mut f: impl FnMut(usize, usize, usize) -> (f64, f64),
    ) -> Self {
        let n = nx * ny * nz;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let (a, b) = f(i, j, k);
                    u.push(a);
                    v.push(b);
                }
            }
        }
        VectorField3D {
            nx,
            ny,
            nz,
            u,
            v,
            mask: vec![true; n],
            w: None,
        }
    }

    pub fn with_w(mut self, w: ScalarField3D) -> Result<Self> {
        if w.dims() != self.dims() {
            return Err(Error::Shape("w extents differ from u/v".into()));
        }
        self.w = Some(w);
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn w(&self) -> Option<&ScalarField3D> {
        self.w.as_ref()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    pub fn set_masked(&mut self, i: usize, j: usize, k: usize, masked: bool) {
        let idx = (k * self.ny + j) * self.nx + i;
        self.mask[idx] = !masked;
    }

    pub fn layer(&self, k: usize) -> VelocityLayer<'_> {
        let n = self.nx * self.ny;
        let r = k * n..(k + 1) * n;
        VelocityLayer {
            nx: self.nx,
            ny: self.ny,
            u: &self.u[r.clone()],
            v: &self.v[r.clone()],
            mask: &self.mask[r],
        }
    }
}

/// Borrowed horizontal velocity on a single layer.
#[derive(Debug, Clone, Copy)]
pub struct VelocityLayer<'a> {
    nx: usize,
    ny: usize,
    u: &'a [f64],
    v: &'a [f64],
    mask: &'a [bool],
}

impl<'a> VelocityLayer<'a> {
    pub fn new(nx: usize, ny: usize, u: &'a [f64], v: &'a [f64], mask: &'a [bool]) -> Result<Self> {
        LayerView::new(nx, ny, u, mask)?;
        LayerView::new(nx, ny, v, mask)?;
        Ok(VelocityLayer { nx, ny, u, v, mask })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn u_view(&self) -> LayerView<'a> {
        LayerView {
            nx: self.nx,
            ny: self.ny,
            values: self.u,
            mask: self.mask,
        }
    }

    pub fn v_view(&self) -> LayerView<'a> {
        LayerView {
            nx: self.nx,
            ny: self.ny,
            values: self.v,
            mask: self.mask,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let idx = j * self.nx + i;
        self.mask[idx].then(|| (self.u[idx], self.v[idx]))
    }

    #[inline]
    pub fn speed(&self, i: usize, j: usize) -> Option<f64> {
        self.get(i, j).map(|(u, v)| u.hypot(v))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        in_domain(self.nx, self.ny, x, y)
    }

    /// Bilinear velocity at an off-grid point, sharing one set of weights for u and v.
    pub fn sample(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let c = Corners::locate(self.nx, self.ny, x, y)?;
        let u = c.interpolate(self.u, self.mask).ok_or(Error::Masked { x, y })?;
        let v = c.interpolate(self.v, self.mask).ok_or(Error::Masked { x, y })?;
        Ok((u, v))
    }

    /// Net horizontal speed, masked where velocity is masked.
    pub fn speed_field(&self) -> ScalarField2D {
        let values = self
            .u
            .iter()
            .zip(self.v)
            .zip(self.mask)
            .map(|((u, v), &m)| if m { u.hypot(*v) } else { 0.0 })
            .collect();
        ScalarField2D {
            nx: self.nx,
            ny: self.ny,
            values,
            mask: self.mask.to_vec(),
        }
    }
}

struct Corners {
    idx: [usize; 4],
    weight: [f64; 4],
    fx: f64,
    fy: f64,
}

impl Corners {
    fn locate(nx: usize, ny: usize, x: f64, y: f64) -> Result<Self> {
        if !in_domain(nx, ny, x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let (i0, i1, fx) = axis_cell(nx, x);
        let (j0, j1, fy) = axis_cell(ny, y);
        Ok(Corners {
            idx: [j0 * nx + i0, j0 * nx + i1, j1 * nx + i0, j1 * nx + i1],
            weight: [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
            fx,
            fy,
        })
    }

    fn interpolate(&self, values: &[f64], mask: &[bool]) -> Option<f64> {
        let [a, b, c, d] = self.idx;
        if mask[a] && mask[b] && mask[c] && mask[d] {
            let (gx, gy) = (1.0 - self.fx, 1.0 - self.fy);
            let lo = gx * values[a] + self.fx * values[b];
            let hi = gx * values[c] + self.fx * values[d];
            return Some(gy * lo + self.fy * hi);
        }
        let mut acc = 0.0;
        let mut total = 0.0;
        for (&idx, &w) in self.idx.iter().zip(&self.weight) {
            if mask[idx] && w > 0.0 {
                acc += w * values[idx];
                total += w;
            }
        }
        (total > 1e-12).then(|| acc / total)
    }
}

fn axis_cell(n: usize, x: f64) -> (usize, usize, f64) {
    if n == 1 {
        return (0, 0, 0.0);
    }
    let x = x.clamp(0.0, (n - 1) as f64);
    let i0 = (x.floor() as usize).min(n - 2);
    (i0, i0 + 1, x - i0 as f64)
}

/// Bilinear interpolation at a real cell coordinate.
///
/// When some of the four surrounding nodes are masked the weights are
/// renormalised over the valid ones; if none carries weight the sample fails
/// with [`Error::Masked`].
pub fn bilinear_sample(field: LayerView<'_>, x: f64, y: f64) -> Result<f64> {
    Corners::locate(field.nx, field.ny, x, y)?
        .interpolate(field.values, field.mask)
        .ok_or(Error::Masked { x, y })
}

fn derivative(
    field: LayerView<'_>,
    i: usize,
    j: usize,
    step: (isize, isize),
    spacing: f64,
) -> Option<f64> {
    let centre = field.get(i, j)?;
    let at = |s: isize| -> Option<f64> {
        let ii = i as isize + s * step.0;
        let jj = j as isize + s * step.1;
        if ii < 0 || jj < 0 || ii >= field.nx as isize || jj >= field.ny as isize {
            None
        } else {
            field.get(ii as usize, jj as usize)
        }
    };
    match (at(-1), at(1)) {
        (Some(lo), Some(hi)) => Some((hi - lo) / (2.0 * spacing)),
        (None, Some(hi)) => Some((hi - centre) / spacing),
        (Some(lo), None) => Some((centre - lo) / spacing),
        (None, None) => None,
    }
}

/// Centred differences in the interior, one-sided next to boundaries and
/// masked cells. Cells with no valid neighbour along an axis come out masked.
pub fn central_gradient(
    field: LayerView<'_>,
    dx: f64,
    dy: f64,
) -> Result<(ScalarField2D, ScalarField2D)> {
    let (nx, ny) = (field.nx, field.ny);
    if nx < 3 || ny < 3 {
        return Err(Error::Shape(format!(
            "gradient needs at least 3x3 cells, got {nx}x{ny}"
        )));
    }
    let n = nx * ny;
    let mut gx = ScalarField2D {
        nx,
        ny,
        values: vec![0.0; n],
        mask: vec![false; n],
    };
    let mut gy = gx.clone();
    for j in 0..ny {
        for i in 0..nx {
            let idx = j * nx + i;
            if let Some(d) = derivative(field, i, j, (1, 0), dx) {
                gx.values[idx] = d;
                gx.mask[idx] = true;
            }
            if let Some(d) = derivative(field, i, j, (0, 1), dy) {
                gy.values[idx] = d;
                gy.mask[idx] = true;
            }
        }
    }
    Ok((gx, gy))
}

/// Okubo-Weiss parameter `W = s_n² + s_s² − ω²` on one layer, with
/// derivatives taken in cell units.
pub fn okubo_weiss(vel: &VectorField3D, layer: usize) -> Result<ScalarField2D> {
    Ok(okubo_weiss_vorticity(vel, layer)?.0)
}

/// `W` and relative vorticity `ω = ∂v/∂x − ∂u/∂y` from one set of gradients.
/// Both share the same mask.
pub fn okubo_weiss_vorticity(vel: &VectorField3D, layer: usize) -> Result<(ScalarField2D, ScalarField2D)> {
    let (nx, ny, nz) = vel.dims();
    if layer >= nz {
        return Err(Error::param("layer", format!("{layer} >= nz = {nz}")));
    }
    if nx < 3 || ny < 3 {
        return Err(Error::Shape(format!("gradient needs at least 3x3 cells, got {nx}x{ny}")));
    }
    let lv = vel.layer(layer);
    let (u, v) = (lv.u_view(), lv.v_view());
    let n = nx * ny;
    let mut values = vec![0.0; n];
    let mut vorticity = vec![0.0; n];
    let mut mask = vec![false; n];
    for j in 0..ny {
        for i in 0..nx {
            let d = |f: LayerView<'_>, step| derivative(f, i, j, step, 1.0);
            let (Some(dudx), Some(dudy), Some(dvdx), Some(dvdy)) = (d(u, (1, 0)), d(u, (0, 1)), d(v, (1, 0)), d(v, (0, 1)))
            else {
                continue;
            };
            let idx = j * nx + i;
            let normal = dudx - dvdy;
            let shear = dvdx + dudy;
            let vort = dvdx - dudy;
            values[idx] = normal * normal + shear * shear - vort * vort;
            vorticity[idx] = vort;
            mask[idx] = true;
        }
    }
    let w = ScalarField2D {
        nx,
        ny,
        values,
        mask: mask.clone(),
    };
    let vort = ScalarField2D {
        nx,
        ny,
        values: vorticity,
        mask,
    };
    Ok((w, vort))
}
