//! Regular 3D grid geometry, per-cell vector fields and reductions.
//!
//! Cells are addressed by `(i, j, k)` with `i` along x. The linear index is
//! x-fastest: `index = i + nx * (j + ny * k)`. Every array in the engine
//! (fields, snapshots, FFT buffers) uses this order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Vacuum permeability in T·m/A.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Default cell edge length (1 nm).
pub const DEFAULT_CELL: f64 = 1e-9;

/// Cells per partial sum in fixed-order reductions. Independent of the
/// thread count, so reductions are bit-reproducible.
const REDUCTION_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    nz: usize,
    dx: f64,
    dy: f64,
    dz: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, dx: f64, dy: f64, dz: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidGrid(format!(
                "cell counts must be >= 1, got {nx}x{ny}x{nz}"
            )));
        }
        for (name, d) in [("dx", dx), ("dy", dy), ("dz", dz)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be positive and finite, got {d}"
                )));
            }
        }
        Ok(Grid {
            nx,
            ny,
            nz,
            dx,
            dy,
            dz,
        })
    }

    /// Grid with the default 1 nm cubic cells.
    pub fn with_default_cells(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::new(nx, ny, nz, DEFAULT_CELL, DEFAULT_CELL, DEFAULT_CELL)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn cell_size(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let i = index % self.nx;
        let rest = index / self.nx;
        (i, rest % self.ny, rest / self.ny)
    }

    /// Dimensions of the zero-padded convolution domain. Singleton axes are
    /// left unpadded.
    pub fn padded_dims(&self) -> [usize; 3] {
        self.dims().map(|n| if n == 1 { 1 } else { 2 * n })
    }

    pub(crate) fn describe(&self) -> String {
        format!(
            "{}x{}x{} cells of {:e}x{:e}x{:e} m",
            self.nx, self.ny, self.nz, self.dx, self.dy, self.dz
        )
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.describe(),
                got: other.describe(),
            })
        }
    }
}

/// Per-cell 3-vector data stored as three contiguous component lanes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_cells();
        VectorField {
            grid,
            x: vec![0.0; n],
            y: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    pub fn uniform(grid: Grid, v: Vec3) -> Self {
        let n = grid.n_cells();
        VectorField {
            grid,
            x: vec![v[0]; n],
            y: vec![v[1]; n],
            z: vec![v[2]; n],
        }
    }

    /// Builds a field by evaluating `f(i, j, k)` for every cell.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.n_cells() {
            let (i, j, k) = grid.coords(idx);
            out.set(idx, f(i, j, k));
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Vec3 {
        [self.x[idx], self.y[idx], self.z[idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: Vec3) {
        self.x[idx] = v[0];
        self.y[idx] = v[1];
        self.z[idx] = v[2];
    }

    pub fn components(&self) -> [&[f64]; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn components_mut(&mut self) -> [&mut [f64]; 3] {
        [&mut self.x, &mut self.y, &mut self.z]
    }

    pub fn fill(&mut self, v: Vec3) {
        self.x.fill(v[0]);
        self.y.fill(v[1]);
        self.z.fill(v[2]);
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &VectorField) {
        for (dst, src) in self.components_mut().into_iter().zip(other.components()) {
            dst.par_iter_mut()
                .zip(src.par_iter())
                .for_each(|(d, v)| *d += s * v);
        }
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let mut out = self.clone();
        for lane in out.components_mut() {
            lane.par_iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    /// Fixed-order sum of the cellwise dot product with `other`.
    pub fn dot(&self, other: &VectorField) -> f64 {
        let n = self.len();
        fixed_sum(n, |idx| vec3::dot(self.get(idx), other.get(idx)))
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    /// Largest |v| over all cells.
    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|idx| vec3::norm(self.get(idx)))
            .reduce(|| 0.0, f64::max)
    }
}

/// Sums `term(idx)` for `idx in 0..n` in a fixed order: fixed-size chunks
/// summed in parallel, then the partials summed sequentially.
pub fn fixed_sum(n: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(n);
            (lo..hi).map(&term).sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

/// Uniform material parameters, strict SI.
///
/// The anisotropy field `h_k` is stored; `Ku = μ0·Ms·H_k/2` is derived.
/// `gamma` is the gyromagnetic ratio in m/(A·s), i.e. the factor that
/// multiplies `H` (in A/m) directly in the precession term; it already
/// contains μ0 relative to the rad/(s·T) convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub alpha: f64,
    pub a_exch: f64,
    pub ms: f64,
    pub aniso_axis: Vec3,
    pub h_k: f64,
    pub gamma: f64,
}

/// Gyromagnetic ratio in m/(A·s).
pub const GAMMA_DEFAULT: f64 = 2.211e5;

impl MaterialParams {
    pub fn new(alpha: f64, a_exch: f64, ms: f64) -> Result<Self> {
        let p = MaterialParams {
            alpha,
            a_exch,
            ms,
            aniso_axis: [1.0, 0.0, 0.0],
            h_k: 0.0,
            gamma: GAMMA_DEFAULT,
        };
        p.validate()?;
        Ok(p)
    }

    /// Sets the anisotropy from a vector whose direction is the easy axis and
    /// whose length is H_k. The zero vector disables anisotropy.
    pub fn with_anisotropy_vector(mut self, h_aniso: Vec3) -> Result<Self> {
        let hk = vec3::norm(h_aniso);
        if hk == 0.0 {
            self.h_k = 0.0;
            self.aniso_axis = [1.0, 0.0, 0.0];
        } else {
            self.h_k = hk;
            self.aniso_axis = vec3::scale(h_aniso, 1.0 / hk);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    /// Uniaxial anisotropy constant in J/m³.
    pub fn ku(&self) -> f64 {
        0.5 * MU0 * self.ms * self.h_k
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMaterial(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.a_exch >= 0.0 && self.a_exch.is_finite()) {
            return bad(format!("A must be >= 0, got {}", self.a_exch));
        }
        if !(self.ms > 0.0 && self.ms.is_finite()) {
            return bad(format!("Ms must be > 0, got {}", self.ms));
        }
        if !(self.h_k >= 0.0 && self.h_k.is_finite()) {
            return bad(format!("H_k must be >= 0, got {}", self.h_k));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        let n = vec3::norm(self.aniso_axis);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitAxis { norm: n });
        }
        Ok(())
    }
}

/// Mean magnetization in units of `ms`.
pub fn average_magnetization(m: &VectorField, ms: f64) -> Vec3 {
    let n = m.len();
    let scale = 1.0 / (n as f64 * ms);
    [&m.x, &m.y, &m.z].map(|lane| fixed_sum(n, |i| lane[i]) * scale)
}

/// Rescales every cell to magnitude `ms`, keeping its direction.
pub fn renormalize(m: &mut VectorField, ms: f64) -> Result<()> {
    let [x, y, z] = m.components_mut();
    let bad = x
        .par_iter_mut()
        .zip(y.par_iter_mut())
        .zip(z.par_iter_mut())
        .enumerate()
        .filter_map(|(idx, ((x, y), z))| {
            let r = (*x * *x + *y * *y + *z * *z).sqrt();
            if r == 0.0 {
                return Some(idx);
            }
            let s = ms / r;
            *x *= s;
            *y *= s;
            *z *= s;
            None
        })
        .min();
    match bad {
        Some(index) => Err(Error::ZeroMagnitude { index }),
        None => Ok(()),
    }
}

/// Interpolates `m` onto `grid`, which must span the same sample. Values
/// are trilinear in the cell-centre positions, clamped to the outermost
/// centres; the result is not renormalized.
pub fn resample(m: &VectorField, grid: Grid) -> VectorField {
    let src = *m.grid();
    let (sn, sh) = (src.dims(), src.cell_size());
    let (tn, th) = (grid.dims(), grid.cell_size());
    // Per axis: for each target index, the two source indices and weight.
    let stencil: [Vec<(usize, usize, f64)>; 3] = std::array::from_fn(|a| {
        (0..tn[a])
            .map(|i| {
                let u = ((i as f64 + 0.5) * th[a] / sh[a] - 0.5).clamp(0.0, (sn[a] - 1) as f64);
                // Snap roundoff so coincident centres copy exactly.
                let u = if (u - u.round()).abs() < 1e-9 { u.round() } else { u };
                let lo = (u.floor() as usize).min(sn[a] - 1);
                let hi = (lo + 1).min(sn[a] - 1);
                (lo, hi, u - lo as f64)
            })
            .collect()
    });
    VectorField::from_fn(grid, |i, j, k| {
        let (x0, x1, wx) = stencil[0][i];
        let (y0, y1, wy) = stencil[1][j];
        let (z0, z1, wz) = stencil[2][k];
        let mut v = [0.0; 3];
        for (zi, fz) in [(z0, 1.0 - wz), (z1, wz)] {
            for (yi, fy) in [(y0, 1.0 - wy), (y1, wy)] {
                for (xi, fx) in [(x0, 1.0 - wx), (x1, wx)] {
                    let w = fx * fy * fz;
                    if w != 0.0 {
                        v = vec3::add(v, vec3::scale(m.get(src.index(xi, yi, zi)), w));
                    }
                }
            }
        }
        v
    })
}
