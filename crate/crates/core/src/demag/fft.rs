//! Real-to-complex 3D FFT over the padded convolution domain.
//!
//! Real data is `px × py × pz`, x-fastest. The half spectrum is
//! `hx × py × pz` with `hx = px/2 + 1`, also x-fastest. Transforms along y
//! and z gather strided lines into a contiguous batch, run the batch, and
//! scatter back.
//!
//! Both directions can be pruned: only the first `ny × nz` rows of the real
//! array carry data on the forward path, and only those rows are needed on
//! the inverse path.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    padded: [usize; 3],
    hx: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    fwd_z: Arc<dyn Fft<f64>>,
    inv_z: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(padded: [usize; 3]) -> Self {
        let mut real = RealFftPlanner::<f64>::new();
        let mut cplx = FftPlanner::<f64>::new();
        Fft3 {
            padded,
            hx: padded[0] / 2 + 1,
            r2c: real.plan_fft_forward(padded[0]),
            c2r: real.plan_fft_inverse(padded[0]),
            fwd_y: cplx.plan_fft_forward(padded[1]),
            inv_y: cplx.plan_fft_inverse(padded[1]),
            fwd_z: cplx.plan_fft_forward(padded[2]),
            inv_z: cplx.plan_fft_inverse(padded[2]),
        }
    }

    pub fn spectrum_len(&self) -> usize {
        self.hx * self.padded[1] * self.padded[2]
    }

    pub fn real_len(&self) -> usize {
        self.padded.iter().product()
    }

    /// Forward transform of a real array supplied row by row. Only rows with
    /// `j < active[0]` and `k < active[1]` may be nonzero; `row_fn(j, k, row)`
    /// fills such a row (length `px`, pre-zeroed).
    pub fn forward(
        &self,
        active: [usize; 2],
        row_fn: impl Fn(usize, usize, &mut [f64]) + Sync,
        spec: &mut [Complex64],
    ) {
        let [px, py, pz] = self.padded;
        let hx = self.hx;
        let [ay, az] = active;
        debug_assert_eq!(spec.len(), self.spectrum_len());

        // x: real-to-complex per active row; inactive rows are zero.
        spec.par_chunks_mut(hx).enumerate().for_each_init(
            || (vec![0.0; px], self.r2c.make_scratch_vec()),
            |(row, sc), (r, out)| {
                let (j, k) = (r % py, r / py);
                if j >= ay || k >= az {
                    out.fill(Complex64::default());
                    return;
                }
                row.fill(0.0);
                row_fn(j, k, row);
                if px == 1 {
                    out[0] = Complex64::new(row[0], 0.0);
                } else {
                    self.r2c
                        .process_with_scratch(row, out, sc)
                        .expect("r2c buffer sizes are fixed at plan time");
                }
            },
        );

        // y: planes k < az only.
        if py > 1 {
            for k in 0..az {
                let plane = &mut spec[k * hx * py..(k + 1) * hx * py];
                transform_strided(plane, hx, py, &*self.fwd_y);
            }
        }

        // z: every (x, y) line.
        if pz > 1 {
            transform_strided(spec, hx * py, pz, &*self.fwd_z);
        }
    }

    /// Inverse transform. Writes the first `keep` samples of each of the
    /// first `active[0] × active[1]` real rows, multiplied by `scale`, into
    /// `out` (rows of length `keep`, y-fastest).
    pub fn inverse(
        &self,
        active: [usize; 2],
        spec: &mut [Complex64],
        out: &mut [f64],
        keep: usize,
        scale: f64,
    ) {
        let [px, py, pz] = self.padded;
        let hx = self.hx;
        let [ay, az] = active;
        debug_assert_eq!(out.len(), keep * ay * az);

        if pz > 1 {
            transform_strided(spec, hx * py, pz, &*self.inv_z);
        }
        if py > 1 {
            for k in 0..az {
                let plane = &mut spec[k * hx * py..(k + 1) * hx * py];
                transform_strided(plane, hx, py, &*self.inv_y);
            }
        }

        for k in 0..az {
            let plane = &mut spec[k * hx * py..][..hx * ay];
            let dst = &mut out[k * keep * ay..][..keep * ay];
            plane
                .par_chunks_mut(hx)
                .zip(dst.par_chunks_mut(keep))
                .for_each_init(
                    || (vec![0.0; px], self.c2r.make_scratch_vec()),
                    |(row, sc), (input, dst)| {
                        if px == 1 {
                            row[0] = input[0].re;
                        } else {
                            // Imaginary parts of the DC and Nyquist bins are roundoff.
                            input[0].im = 0.0;
                            if px % 2 == 0 {
                                input[hx - 1].im = 0.0;
                            }
                            self.c2r
                                .process_with_scratch(input, row, sc)
                                .expect("c2r buffer sizes are fixed at plan time");
                        }
                        for (d, v) in dst.iter_mut().zip(row.iter()) {
                            *d = v * scale;
                        }
                    },
                );
        }
    }
}

/// Lines transformed together. Adjacent lines start at adjacent offsets,
/// so each gather and scatter touches `TILE` contiguous values.
const TILE: usize = 16;

/// Shares a mutable buffer between workers that touch disjoint indices.
#[derive(Clone, Copy)]
struct SharedMut(*mut Complex64);

// SAFETY: `transform_strided` hands each worker a distinct set of lines, and
// lines never overlap.
unsafe impl Send for SharedMut {}
unsafe impl Sync for SharedMut {}

impl SharedMut {
    fn get(&self) -> *mut Complex64 {
        self.0
    }
}

/// Transforms every line of length `n` with stride `stride` in `data`
/// (lines start at each offset `< stride` within each block of
/// `stride * n`). Lines are processed in tiles: gathered into a small
/// buffer, transformed, and written straight back.
fn transform_strided(data: &mut [Complex64], stride: usize, n: usize, fft: &dyn Fft<f64>) {
    let block = stride * n;
    debug_assert_eq!(data.len() % block, 0);
    let tiles_per_block = stride.div_ceil(TILE);
    let n_tiles = data.len() / block * tiles_per_block;
    let ptr = SharedMut(data.as_mut_ptr());
    (0..n_tiles).into_par_iter().for_each_init(
        || {
            (
                vec![Complex64::default(); TILE * n],
                vec![Complex64::default(); fft.get_inplace_scratch_len()],
            )
        },
        |(buf, sc), tile| {
            let (b, s0) = (tile / tiles_per_block, tile % tiles_per_block * TILE);
            let width = TILE.min(stride - s0);
            let base = b * block + s0;
            let buf = &mut buf[..width * n];
            for t in 0..n {
                // SAFETY: offsets `base + t*stride + q`, q < width, stay in
                // this tile's lines, which belong to no other tile.
                let run = unsafe { std::slice::from_raw_parts(ptr.get().add(base + t * stride), width) };
                for (q, v) in run.iter().enumerate() {
                    buf[q * n + t] = *v;
                }
            }
            fft.process_with_scratch(buf, sc);
            for t in 0..n {
                // SAFETY: as above.
                let run = unsafe { std::slice::from_raw_parts_mut(ptr.get().add(base + t * stride), width) };
                for (q, v) in run.iter_mut().enumerate() {
                    *v = buf[q * n + t];
                }
            }
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Naive 3D DFT of a real array.
    fn naive_dft(data: &[f64], p: [usize; 3]) -> Vec<Complex64> {
        let hx = p[0] / 2 + 1;
        let mut out = vec![Complex64::default(); hx * p[1] * p[2]];
        for kz in 0..p[2] {
            for ky in 0..p[1] {
                for kx in 0..hx {
                    let mut acc = Complex64::default();
                    for z in 0..p[2] {
                        for y in 0..p[1] {
                            for x in 0..p[0] {
                                let phase = -2.0
                                    * std::f64::consts::PI
                                    * ((kx * x) as f64 / p[0] as f64
                                        + (ky * y) as f64 / p[1] as f64
                                        + (kz * z) as f64 / p[2] as f64);
                                acc += data[x + p[0] * (y + p[1] * z)]
                                    * Complex64::new(phase.cos(), phase.sin());
                            }
                        }
                    }
                    out[kx + hx * (ky + p[1] * kz)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_and_inverts() {
        for p in [[4, 6, 2], [1, 4, 6], [6, 1, 1], [5, 3, 4]] {
            let fft = Fft3::new(p);
            let n: usize = p.iter().product();
            let data: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
            let mut spec = vec![Complex64::default(); fft.spectrum_len()];
            fft.forward(
                [p[1], p[2]],
                |j, k, row| row.copy_from_slice(&data[p[0] * (j + p[1] * k)..][..p[0]]),
                &mut spec,
            );
            let reference = naive_dft(&data, p);
            for (a, b) in spec.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-10, "{p:?}: {a} vs {b}");
            }

            let mut back = vec![0.0; n];
            fft.inverse([p[1], p[2]], &mut spec, &mut back, p[0], 1.0 / n as f64);
            for (a, b) in back.iter().zip(&data) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
