//! On-disk cache of the real-space demag tensor.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `GRACEDMG`                          |
//! | 4     | format version (u32, currently 1)         |
//! | 24    | nx, ny, nz (u64)                          |
//! | 32    | dx, dy, dz, far-field cutoff (f64)        |
//! | 8     | values per component `n = nx·ny·nz` (u64) |
//! | 48·n  | xx, xy, xz, yy, yz, zz, each `n` f64      |
//!
//! Each component covers displacements `[0, nx) × [0, ny) × [0, nz)` in
//! x-fastest order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::DemagOptions;
use crate::mesh::Grid;

const MAGIC: &[u8; 8] = b"GRACEDMG";
const VERSION: u32 = 1;

pub(super) fn file_name(grid: &Grid, options: &DemagOptions) -> String {
    let [nx, ny, nz] = grid.dims();
    let [dx, dy, dz] = grid.cell_size();
    format!(
        "demag_{nx}x{ny}x{nz}_{:016x}{:016x}{:016x}_{:016x}.bin",
        dx.to_bits(),
        dy.to_bits(),
        dz.to_bits(),
        options.far_field_cutoff.to_bits()
    )
}

fn header(grid: &Grid, options: &DemagOptions) -> Vec<u8> {
    let mut h = Vec::with_capacity(76);
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&VERSION.to_le_bytes());
    for n in grid.dims() {
        h.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for d in grid.cell_size() {
        h.extend_from_slice(&d.to_le_bytes());
    }
    h.extend_from_slice(&options.far_field_cutoff.to_le_bytes());
    h.extend_from_slice(&(grid.n_cells() as u64).to_le_bytes());
    h
}

pub(super) fn write(
    path: &Path,
    grid: &Grid,
    options: &DemagOptions,
    octant: &[Vec<f64>; 6],
) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&header(grid, options))?;
        for lane in octant {
            for v in lane {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)
}

/// Returns `None` on any mismatch or read error.
pub(super) fn read(path: &Path, grid: &Grid, options: &DemagOptions) -> Option<[Vec<f64>; 6]> {
    let mut r = BufReader::new(File::open(path).ok()?);
    let expected = header(grid, options);
    let mut got = vec![0u8; expected.len()];
    r.read_exact(&mut got).ok()?;
    if got != expected {
        return None;
    }
    let n = grid.n_cells();
    let mut octant: [Vec<f64>; 6] = Default::default();
    let mut buf = [0u8; 8];
    for lane in octant.iter_mut() {
        lane.reserve_exact(n);
        for _ in 0..n {
            r.read_exact(&mut buf).ok()?;
            lane.push(f64::from_le_bytes(buf));
        }
    }
    // Trailing bytes mean the file is not what we wrote.
    if r.read(&mut buf).ok()? != 0 {
        return None;
    }
    Some(octant)
}
