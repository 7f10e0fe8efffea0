//! Demagnetizing field by zero-padded FFT convolution.
//!
//! The magnetostatic field of a cell-wise uniform magnetization is
//! `H_a(r) = -Σ_r' Σ_b N_ab(r - r') M_b(r')`. [`DemagKernel`] holds the six
//! independent tensor components for every displacement that can occur on
//! the grid, and their spectra over the doubled (zero-padded) domain, so
//! circular convolution reproduces the open-boundary sum.
//!
//! [`brute_force_demag`] evaluates the same sum directly in O(N²) and is
//! kept as a test oracle.

mod cache;
mod fft;
pub mod tensor;

use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{Grid, VectorField};
pub use tensor::Component;

use fft::Fft3;

/// Distance (in cell diagonals) beyond which the point-dipole form replaces
/// the exact prism formulas.
pub const DEFAULT_FAR_FIELD_CUTOFF: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemagOptions {
    pub far_field_cutoff: f64,
}

impl Default for DemagOptions {
    fn default() -> Self {
        DemagOptions {
            far_field_cutoff: DEFAULT_FAR_FIELD_CUTOFF,
        }
    }
}

struct Workspace {
    spec: [Vec<Complex64>; 3],
}

pub struct DemagKernel {
    grid: Grid,
    options: DemagOptions,
    /// Real-space components for displacements in `[0, nx) × [0, ny) × [0, nz)`,
    /// x-fastest. Other octants follow by parity.
    octant: [Vec<f64>; 6],
    spectral: [Vec<Complex64>; 6],
    fft: Fft3,
    pool: Mutex<Vec<Workspace>>,
}

impl std::fmt::Debug for DemagKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DemagKernel")
            .field("grid", &self.grid)
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

fn alloc<T: Clone>(len: usize, value: T, bytes: u128) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| Error::Resource { bytes })?;
    v.resize(len, value);
    Ok(v)
}

/// Displacement represented by padded index `a` on an axis with `n` cells
/// padded to `p`. The midpoint of a doubled axis is never reached by the
/// convolution and maps to `None`.
fn padded_offset(a: usize, n: usize, p: usize) -> Option<i64> {
    if p == 1 || a < n {
        Some(a as i64)
    } else if a == n {
        None
    } else {
        Some(a as i64 - p as i64)
    }
}

impl DemagKernel {
    pub fn new(grid: &Grid) -> Result<Self> {
        Self::with_options(grid, DemagOptions::default())
    }

    pub fn with_options(grid: &Grid, options: DemagOptions) -> Result<Self> {
        let octant = Self::assemble(grid, &options)?;
        Self::from_octant(grid, options, octant)
    }

    /// Loads the real-space tensor from `cache_dir` if a matching file
    /// exists, otherwise builds it and tries to store it there. Cache
    /// problems never fail the call.
    pub fn load_or_build(grid: &Grid, options: DemagOptions, cache_dir: &Path) -> Result<Self> {
        let path = cache_dir.join(cache::file_name(grid, &options));
        if let Some(octant) = cache::read(&path, grid, &options) {
            return Self::from_octant(grid, options, octant);
        }
        let kernel = Self::with_options(grid, options)?;
        let _ = std::fs::create_dir_all(cache_dir)
            .and_then(|_| cache::write(&path, grid, &options, &kernel.octant));
        Ok(kernel)
    }

    /// Bytes held by a kernel for `grid`, plus one convolution workspace.
    pub fn required_bytes(grid: &Grid) -> u128 {
        let n = grid.n_cells() as u128;
        let [px, py, pz] = grid.padded_dims();
        let spec = ((px / 2 + 1) * py * pz) as u128;
        6 * n * 8 + 6 * spec * 16 + 3 * spec * 16
    }

    fn assemble(grid: &Grid, options: &DemagOptions) -> Result<[Vec<f64>; 6]> {
        let n = grid.n_cells();
        let bytes = Self::required_bytes(grid);
        let h = grid.cell_size();
        let mut octant: [Vec<f64>; 6] = Default::default();
        for (c, lane) in Component::ALL.into_iter().zip(octant.iter_mut()) {
            *lane = alloc(n, 0.0, bytes)?;
            lane.par_iter_mut().enumerate().for_each(|(idx, v)| {
                let (i, j, k) = grid.coords(idx);
                *v = tensor::component_at(
                    c,
                    [i as i64, j as i64, k as i64],
                    h,
                    options.far_field_cutoff,
                );
            });
        }
        Ok(octant)
    }

    fn from_octant(grid: &Grid, options: DemagOptions, octant: [Vec<f64>; 6]) -> Result<Self> {
        let fft = Fft3::new(grid.padded_dims());
        let bytes = Self::required_bytes(grid);
        let [nx, ny, nz] = grid.dims();
        let [px, py, pz] = grid.padded_dims();
        let mut spectral: [Vec<Complex64>; 6] = Default::default();
        for (c, spec) in Component::ALL.into_iter().zip(spectral.iter_mut()) {
            *spec = alloc(fft.spectrum_len(), Complex64::default(), bytes)?;
            let lane = &octant[c as usize];
            fft.forward(
                [py, pz],
                |j, k, row| {
                    let (Some(oy), Some(oz)) = (padded_offset(j, ny, py), padded_offset(k, nz, pz))
                    else {
                        return;
                    };
                    for (a, out) in row.iter_mut().enumerate() {
                        if let Some(ox) = padded_offset(a, nx, px) {
                            *out = lookup(lane, grid, c, [ox, oy, oz]);
                        }
                    }
                },
                spec,
            );
        }
        Ok(DemagKernel {
            grid: *grid,
            options,
            octant,
            spectral,
            fft,
            pool: Mutex::new(Vec::new()),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn options(&self) -> &DemagOptions {
        &self.options
    }

    /// One tensor component at a displacement in cells. Displacements must
    /// satisfy `|offset[a]| < n[a]`.
    pub fn component(&self, c: Component, offset: [i64; 3]) -> f64 {
        lookup(&self.octant[c as usize], &self.grid, c, offset)
    }

    /// Full symmetric 3×3 tensor at a displacement in cells.
    pub fn tensor(&self, offset: [i64; 3]) -> [[f64; 3]; 3] {
        let mut t = [[0.0; 3]; 3];
        for (a, row) in t.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.component(Component::from_axes(a, b), offset);
            }
        }
        t
    }

    /// Component `c` laid out over the padded domain in circulant order,
    /// x-fastest.
    pub fn circulant(&self, c: Component) -> Vec<f64> {
        let [nx, ny, nz] = self.grid.dims();
        let [px, py, pz] = self.grid.padded_dims();
        let mut out = vec![0.0; px * py * pz];
        for k in 0..pz {
            for j in 0..py {
                for i in 0..px {
                    if let (Some(ox), Some(oy), Some(oz)) = (
                        padded_offset(i, nx, px),
                        padded_offset(j, ny, py),
                        padded_offset(k, nz, pz),
                    ) {
                        out[i + px * (j + py * k)] = self.component(c, [ox, oy, oz]);
                    }
                }
            }
        }
        out
    }

    /// Spectrum of component `c` (half spectrum along x).
    pub fn spectral(&self, c: Component) -> &[Complex64] {
        &self.spectral[c as usize]
    }

    fn take_workspace(&self) -> Workspace {
        let cached = self.pool.lock().expect("workspace pool poisoned").pop();
        cached.unwrap_or_else(|| {
            let len = self.fft.spectrum_len();
            Workspace {
                spec: std::array::from_fn(|_| vec![Complex64::default(); len]),
            }
        })
    }

    fn return_workspace(&self, ws: Workspace) {
        self.pool.lock().expect("workspace pool poisoned").push(ws);
    }

    /// Demagnetizing field of `m` (A/m).
    pub fn demag_field(&self, m: &VectorField) -> Result<VectorField> {
        let mut out = VectorField::zeros(*m.grid());
        self.demag_field_into(m, &mut out)?;
        Ok(out)
    }

    /// Writes the demagnetizing field of `m` into `out`.
    pub fn demag_field_into(&self, m: &VectorField, out: &mut VectorField) -> Result<()> {
        self.grid.ensure_same(m.grid())?;
        self.grid.ensure_same(out.grid())?;
        let [nx, ny, nz] = self.grid.dims();
        let mut ws = self.take_workspace();

        for (lane, spec) in m.components().into_iter().zip(ws.spec.iter_mut()) {
            self.fft.forward(
                [ny, nz],
                |j, k, row| row[..nx].copy_from_slice(&lane[nx * (j + ny * k)..][..nx]),
                spec,
            );
        }

        let k = &self.spectral;
        let [sx, sy, sz] = &mut ws.spec;
        sx.par_iter_mut()
            .zip(sy.par_iter_mut())
            .zip(sz.par_iter_mut())
            .enumerate()
            .for_each(|(s, ((x, y), z))| {
                let (mx, my, mz) = (*x, *y, *z);
                let (kxx, kxy, kxz) = (k[0][s], k[1][s], k[2][s]);
                let (kyy, kyz, kzz) = (k[3][s], k[4][s], k[5][s]);
                *x = -(kxx * mx + kxy * my + kxz * mz);
                *y = -(kxy * mx + kyy * my + kyz * mz);
                *z = -(kxz * mx + kyz * my + kzz * mz);
            });

        let scale = 1.0 / self.fft.real_len() as f64;
        for (spec, lane) in ws.spec.iter_mut().zip(out.components_mut()) {
            self.fft.inverse([ny, nz], spec, lane, nx, scale);
        }
        self.return_workspace(ws);
        Ok(())
    }
}

fn lookup(lane: &[f64], grid: &Grid, c: Component, offset: [i64; 3]) -> f64 {
    let [nx, ny, _] = grid.dims();
    let neg = offset.map(|o| o < 0);
    let [i, j, k] = offset.map(|o| o.unsigned_abs() as usize);
    c.parity(neg) * lane[i + nx * (j + ny * k)]
}

/// Direct O(N²) evaluation of the demagnetizing field from the real-space
/// tensor. Intended for small grids.
pub fn brute_force_demag(m: &VectorField, kernel: &DemagKernel) -> Result<VectorField> {
    let grid = *kernel.grid();
    grid.ensure_same(m.grid())?;
    let n = grid.n_cells();
    let mut out = VectorField::zeros(grid);
    let values: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|obs| {
            let (i, j, k) = grid.coords(obs);
            let mut h = [0.0; 3];
            for src in 0..n {
                let (si, sj, sk) = grid.coords(src);
                let t = kernel.tensor([
                    i as i64 - si as i64,
                    j as i64 - sj as i64,
                    k as i64 - sk as i64,
                ]);
                let mv = m.get(src);
                for (a, ha) in h.iter_mut().enumerate() {
                    *ha -= t[a][0] * mv[0] + t[a][1] * mv[1] + t[a][2] * mv[2];
                }
            }
            h
        })
        .collect();
    for (idx, v) in values.into_iter().enumerate() {
        out.set(idx, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_self_demag() {
        let g = Grid::with_default_cells(1, 1, 1).unwrap();
        let kernel = DemagKernel::new(&g).unwrap();
        let ms = 8e5;
        let h = kernel
            .demag_field(&VectorField::uniform(g, [ms, 0.0, 0.0]))
            .unwrap();
        assert!((h.get(0)[0] + ms / 3.0).abs() < 1e-10 * ms);
        assert!(h.get(0)[1].abs() < 1e-10 * ms && h.get(0)[2].abs() < 1e-10 * ms);

        let h = brute_force_demag(&VectorField::uniform(g, [0.0, 0.0, ms]), &kernel).unwrap();
        assert!((h.get(0)[2] + ms / 3.0).abs() < 1e-10 * ms);
    }

    #[test]
    fn zero_magnetization_gives_zero_field() {
        let g = Grid::with_default_cells(3, 2, 2).unwrap();
        let kernel = DemagKernel::new(&g).unwrap();
        let h = kernel.demag_field(&VectorField::zeros(g)).unwrap();
        assert_eq!(h.max_norm(), 0.0);
    }

    #[test]
    fn off_diagonal_vanishes_at_origin() {
        let g = Grid::new(4, 3, 2, 2e-9, 1e-9, 1.5e-9).unwrap();
        let kernel = DemagKernel::new(&g).unwrap();
        for c in [Component::Xy, Component::Xz, Component::Yz] {
            assert_eq!(kernel.component(c, [0, 0, 0]), 0.0);
        }
    }

    #[test]
    fn two_cells_along_x() {
        let g = Grid::with_default_cells(2, 1, 1).unwrap();
        let kernel = DemagKernel::new(&g).unwrap();
        let ms = 1e6;
        let m = VectorField::uniform(g, [ms, 0.0, 0.0]);
        let self_term = tensor::newell_component(Component::Xx, [0.0; 3], [1e-9; 3]);
        let mutual = tensor::newell_component(Component::Xx, [1e-9, 0.0, 0.0], [1e-9; 3]);
        assert!(mutual < 0.0);
        let expected = -(self_term + mutual) * ms;
        for h in [
            brute_force_demag(&m, &kernel).unwrap(),
            kernel.demag_field(&m).unwrap(),
        ] {
            for idx in 0..2 {
                assert!((h.get(idx)[0] - expected).abs() < 1e-10 * ms);
                assert!(h.get(idx)[0].abs() < ms / 3.0);
            }
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = Grid::with_default_cells(2, 2, 2).unwrap();
        let other = Grid::with_default_cells(2, 2, 3).unwrap();
        let kernel = DemagKernel::new(&g).unwrap();
        assert!(matches!(
            kernel.demag_field(&VectorField::zeros(other)),
            Err(Error::GridMismatch { .. })
        ));
        assert!(brute_force_demag(&VectorField::zeros(other), &kernel).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(3, 2, 2, 1e-9, 2e-9, 1e-9).unwrap();
        let opts = DemagOptions::default();
        let built = DemagKernel::load_or_build(&g, opts, dir.path()).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let loaded = DemagKernel::load_or_build(&g, opts, dir.path()).unwrap();
        assert_eq!(built.octant, loaded.octant);

        // A corrupted file is a silent miss.
        let path = files[0].as_ref().unwrap().path();
        std::fs::write(&path, b"garbage").unwrap();
        let rebuilt = DemagKernel::load_or_build(&g, opts, dir.path()).unwrap();
        assert_eq!(built.octant, rebuilt.octant);
    }
}
