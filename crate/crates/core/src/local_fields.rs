//! Exchange, uniaxial anisotropy and applied-field contributions to H_eff,
//! with the discrete energies they derive from.
//!
//! Each field here is exactly `-1/(μ0 V) ∂E/∂M_i` of the matching energy
//! function, cell by cell.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{fixed_sum, Grid, VectorField, MU0};
use crate::vec3::{self, Vec3};

/// Applied field `h0` (A/m) switched on at `start`, held until `decay`,
/// ramped linearly to zero at `stop`. All times are step indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSchedule {
    pub h0: Vec3,
    pub start: u64,
    pub decay: u64,
    pub stop: u64,
}

impl FieldSchedule {
    pub fn new(h0: Vec3, start: u64, decay: u64, stop: u64) -> Result<Self> {
        if start <= decay && decay <= stop {
            Ok(FieldSchedule {
                h0,
                start,
                decay,
                stop,
            })
        } else {
            Err(Error::InvalidSchedule { start, decay, stop })
        }
    }

    /// No applied field.
    pub fn zero() -> Self {
        FieldSchedule {
            h0: [0.0; 3],
            start: 0,
            decay: 0,
            stop: 0,
        }
    }

    /// `h0` at every step.
    pub fn constant(h0: Vec3) -> Self {
        FieldSchedule {
            h0,
            start: 0,
            decay: u64::MAX,
            stop: u64::MAX,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.h0 == [0.0; 3] || self.start == self.stop
    }
}

/// Applied field at `step`.
pub fn external_field(schedule: &FieldSchedule, step: u64) -> Vec3 {
    let s = schedule;
    let factor = if step < s.start || step >= s.stop {
        0.0
    } else if step < s.decay {
        1.0
    } else {
        (s.stop - step) as f64 / (s.stop - s.decay) as f64
    };
    vec3::scale(s.h0, factor)
}

/// Neighbour of `idx` along `axis` in direction `dir`, if inside the grid.
#[inline]
fn neighbour(grid: &Grid, ijk: [usize; 3], axis: usize, forward: bool) -> Option<usize> {
    let n = grid.dims()[axis];
    let mut c = ijk;
    if forward {
        if c[axis] + 1 >= n {
            return None;
        }
        c[axis] += 1;
    } else {
        if c[axis] == 0 {
            return None;
        }
        c[axis] -= 1;
    }
    Some(grid.index(c[0], c[1], c[2]))
}

/// Six-neighbour exchange field,
/// `H = 2A/(μ0 Ms²) Σ_axes [M(r+δ) - 2M(r) + M(r-δ)] / Δ²`,
/// with mirror (Neumann) boundaries: a missing neighbour contributes nothing.
pub fn exchange_field(m: &VectorField, a_exch: f64, ms: f64) -> VectorField {
    let mut out = VectorField::zeros(*m.grid());
    add_exchange_field(m, a_exch, ms, &mut out).expect("output built on the same grid");
    out
}

/// Adds the exchange field of `m` to `out`.
pub fn add_exchange_field(m: &VectorField, a_exch: f64, ms: f64, out: &mut VectorField) -> Result<()> {
    let grid = *m.grid();
    grid.ensure_same(out.grid())?;
    if a_exch == 0.0 {
        return Ok(());
    }
    let pref = 2.0 * a_exch / (MU0 * ms * ms);
    let weights = grid.cell_size().map(|d| pref / (d * d));
    let [ox, oy, oz] = out.components_mut();
    ox.par_iter_mut()
        .zip(oy.par_iter_mut())
        .zip(oz.par_iter_mut())
        .enumerate()
        .for_each(|(idx, ((hx, hy), hz))| {
            let (i, j, k) = grid.coords(idx);
            let center = m.get(idx);
            let mut acc = [0.0; 3];
            for (axis, w) in weights.iter().enumerate() {
                for forward in [false, true] {
                    if let Some(nb) = neighbour(&grid, [i, j, k], axis, forward) {
                        let d = vec3::sub(m.get(nb), center);
                        acc = vec3::add(acc, vec3::scale(d, *w));
                    }
                }
            }
            *hx += acc[0];
            *hy += acc[1];
            *hz += acc[2];
        });
    Ok(())
}

/// Exchange energy (J): `A V/Ms² Σ_pairs |M_i - M_j|² / Δ²` over each
/// nearest-neighbour pair counted once.
pub fn exchange_energy(m: &VectorField, a_exch: f64, ms: f64) -> f64 {
    let grid = *m.grid();
    let pref = a_exch * grid.cell_volume() / (ms * ms);
    let h = grid.cell_size();
    fixed_sum(grid.n_cells(), |idx| {
        let (i, j, k) = grid.coords(idx);
        let center = m.get(idx);
        (0..3)
            .filter_map(|axis| {
                neighbour(&grid, [i, j, k], axis, true).map(|nb| {
                    let d = vec3::sub(m.get(nb), center);
                    vec3::dot(d, d) / (h[axis] * h[axis])
                })
            })
            .sum::<f64>()
    }) * pref
}

fn check_axis(axis: Vec3) -> Result<()> {
    let n = vec3::norm(axis);
    if (n - 1.0).abs() > 1e-12 {
        Err(Error::NonUnitAxis { norm: n })
    } else {
        Ok(())
    }
}

/// Uniaxial anisotropy field `H = H_k (M·u / Ms) u`.
pub fn anisotropy_field(m: &VectorField, axis: Vec3, h_k: f64, ms: f64) -> Result<VectorField> {
    let mut out = VectorField::zeros(*m.grid());
    add_anisotropy_field(m, axis, h_k, ms, &mut out)?;
    Ok(out)
}

pub fn add_anisotropy_field(
    m: &VectorField,
    axis: Vec3,
    h_k: f64,
    ms: f64,
    out: &mut VectorField,
) -> Result<()> {
    check_axis(axis)?;
    m.grid().ensure_same(out.grid())?;
    if h_k == 0.0 {
        return Ok(());
    }
    let s = h_k / ms;
    let [ox, oy, oz] = out.components_mut();
    ox.par_iter_mut()
        .zip(oy.par_iter_mut())
        .zip(oz.par_iter_mut())
        .enumerate()
        .for_each(|(idx, ((hx, hy), hz))| {
            let p = s * vec3::dot(m.get(idx), axis);
            *hx += p * axis[0];
            *hy += p * axis[1];
            *hz += p * axis[2];
        });
    Ok(())
}

/// Anisotropy energy (J): `Ku V Σ (1 - (M·u)²/Ms²)` with `Ku = μ0 Ms H_k / 2`.
pub fn anisotropy_energy(m: &VectorField, axis: Vec3, h_k: f64, ms: f64) -> f64 {
    let ku = 0.5 * MU0 * ms * h_k;
    let vol = m.grid().cell_volume();
    let n = m.len();
    ku * vol
        * fixed_sum(n, |idx| {
            let p = vec3::dot(m.get(idx), axis) / ms;
            1.0 - p * p
        })
}

/// Adds a uniform field to every cell of `out`.
pub fn add_uniform_field(h: Vec3, out: &mut VectorField) {
    if h == [0.0; 3] {
        return;
    }
    for (lane, v) in out.components_mut().into_iter().zip(h) {
        lane.par_iter_mut().for_each(|x| *x += v);
    }
}

/// Zeeman energy (J): `-μ0 V Σ M·H`.
pub fn zeeman_energy(m: &VectorField, h: Vec3) -> f64 {
    let vol = m.grid().cell_volume();
    -MU0 * vol * fixed_sum(m.len(), |idx| vec3::dot(m.get(idx), h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MS: f64 = 8e5;
    const A: f64 = 1.3e-11;

    #[test]
    fn uniform_magnetization_has_no_exchange_field() {
        let g = Grid::new(5, 4, 3, 1e-9, 2e-9, 3e-9).unwrap();
        let m = VectorField::uniform(g, [0.6 * MS, 0.0, 0.8 * MS]);
        let h = exchange_field(&m, A, MS);
        assert_eq!(h.max_norm(), 0.0);
        assert_eq!(exchange_energy(&m, A, MS), 0.0);
    }

    #[test]
    fn three_cell_chain_by_hand() {
        let d = 1e-9;
        let g = Grid::with_default_cells(3, 1, 1).unwrap();
        let mut m = VectorField::uniform(g, [MS, 0.0, 0.0]);
        m.set(1, [0.0, MS, 0.0]);
        let h = exchange_field(&m, A, MS);
        let c = 2.0 * A / (MU0 * MS * MS * d * d);
        let expect_center = [2.0 * MS * c, -2.0 * MS * c, 0.0];
        // End cells see one neighbour: (M_center - M_end).
        let expect_end = [-MS * c, MS * c, 0.0];
        for a in 0..3 {
            assert!((h.get(1)[a] - expect_center[a]).abs() < 1e-9 * c * MS);
            assert!((h.get(0)[a] - expect_end[a]).abs() < 1e-9 * c * MS);
            assert!((h.get(2)[a] - expect_end[a]).abs() < 1e-9 * c * MS);
        }
    }

    #[test]
    fn spin_wave_is_an_eigenvector() {
        // Interior cells of a long chain follow the discrete dispersion.
        let n = 64;
        let d = 1e-9;
        let g = Grid::with_default_cells(n, 1, 1).unwrap();
        let k = 2.0 * std::f64::consts::PI / (16.0 * d);
        let m = VectorField::from_fn(g, |i, _, _| {
            let x = i as f64 * d;
            [MS * (k * x).cos(), MS * (k * x).sin(), 0.0]
        });
        let h = exchange_field(&m, A, MS);
        let mag = 2.0 * A / (MU0 * MS * d * d) * (2.0 - 2.0 * (k * d).cos());
        for i in 1..n - 1 {
            let hv = h.get(i);
            let mv = m.get(i);
            // Antiparallel to M with the dispersion magnitude.
            for a in 0..3 {
                assert!((hv[a] + mag * mv[a] / MS).abs() < 1e-8 * mag, "cell {i}");
            }
        }
    }

    #[test]
    fn anisotropy_cases() {
        let g = Grid::with_default_cells(1, 1, 1).unwrap();
        let hk = 1e5;
        let axis = [0.0, 0.0, 1.0];
        let h = anisotropy_field(&VectorField::uniform(g, [0.0, 0.0, MS]), axis, hk, MS).unwrap();
        assert_eq!(h.get(0), [0.0, 0.0, hk]);
        let h = anisotropy_field(&VectorField::uniform(g, [MS, 0.0, 0.0]), axis, hk, MS).unwrap();
        assert_eq!(h.get(0), [0.0, 0.0, 0.0]);
        let h = anisotropy_field(&VectorField::uniform(g, [0.0, 0.0, MS]), axis, 0.0, MS).unwrap();
        assert_eq!(h.get(0), [0.0, 0.0, 0.0]);
        assert!(matches!(
            anisotropy_field(&VectorField::uniform(g, [MS, 0.0, 0.0]), [1.0, 1.0, 0.0], hk, MS),
            Err(Error::NonUnitAxis { .. })
        ));
    }

    #[test]
    fn anisotropy_energy_extremes() {
        let g = Grid::with_default_cells(1, 1, 1).unwrap();
        let hk = 1e5;
        let axis = [1.0, 0.0, 0.0];
        let v = g.cell_volume();
        assert_eq!(anisotropy_energy(&VectorField::uniform(g, [MS, 0.0, 0.0]), axis, hk, MS), 0.0);
        let e = anisotropy_energy(&VectorField::uniform(g, [0.0, MS, 0.0]), axis, hk, MS);
        assert!((e - 0.5 * MU0 * hk * MS * v).abs() < 1e-12 * e);
    }

    #[test]
    fn schedule_shape() {
        let h0 = [-2e4, 4e3, 0.0];
        let s = FieldSchedule::new(h0, 10, 1000, 2000).unwrap();
        assert_eq!(external_field(&s, 0), [0.0; 3]);
        assert_eq!(external_field(&s, 9), [0.0; 3]);
        assert_eq!(external_field(&s, 10), h0);
        assert_eq!(external_field(&s, 999), h0);
        assert_eq!(external_field(&s, 1000), h0);
        assert_eq!(external_field(&s, 1500), vec3::scale(h0, 0.5));
        assert_eq!(external_field(&s, 2000), [0.0; 3]);
        assert_eq!(external_field(&s, 5000), [0.0; 3]);
        assert!(FieldSchedule::new(h0, 5, 4, 10).is_err());
        assert!(FieldSchedule::new(h0, 0, 11, 10).is_err());
        assert_eq!(external_field(&FieldSchedule::constant(h0), 1 << 40), h0);
    }

    fn field_from(values: &[(f64, f64, f64)], g: Grid) -> VectorField {
        VectorField::from_fn(g, |i, j, k| {
            let v = values[g.index(i, j, k)];
            [v.0 * MS, v.1 * MS, v.2 * MS]
        })
    }

    proptest! {
        #[test]
        fn exchange_is_self_adjoint(
            a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 24),
            b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 24),
        ) {
            let g = Grid::new(4, 3, 2, 1e-9, 2e-9, 1.5e-9).unwrap();
            let (m1, m2) = (field_from(&a, g), field_from(&b, g));
            let l1 = exchange_field(&m1, A, MS);
            let l2 = exchange_field(&m2, A, MS);
            let lhs = m1.dot(&l2);
            let rhs = m2.dot(&l1);
            let scale = m1.norm_squared().sqrt() * l2.norm_squared().sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);

            // Linearity.
            let mut sum = m1.scaled(2.0);
            sum.add_scaled(-3.0, &m2);
            let ls = exchange_field(&sum, A, MS);
            let mut expected = l1.scaled(2.0);
            expected.add_scaled(-3.0, &l2);
            for idx in 0..g.n_cells() {
                for c in 0..3 {
                    prop_assert!((ls.get(idx)[c] - expected.get(idx)[c]).abs() <= 1e-9 * scale.sqrt());
                }
            }
        }

        #[test]
        fn anisotropy_is_axis_sign_invariant(
            a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 8),
            theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..std::f64::consts::TAU,
        ) {
            let g = Grid::with_default_cells(2, 2, 2).unwrap();
            let m = field_from(&a, g);
            let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let flipped = vec3::scale(axis, -1.0);
            let h1 = anisotropy_field(&m, axis, 5e4, MS).unwrap();
            let h2 = anisotropy_field(&m, flipped, 5e4, MS).unwrap();
            for idx in 0..8 {
                for c in 0..3 {
                    prop_assert!((h1.get(idx)[c] - h2.get(idx)[c]).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn schedule_is_zero_outside_window(start in 0u64..50, plateau in 0u64..50, ramp in 0u64..50, step in 0u64..300) {
            let s = FieldSchedule::new([1.0, 2.0, 3.0], start, start + plateau, start + plateau + ramp).unwrap();
            let h = external_field(&s, step);
            if step < s.start || step >= s.stop {
                prop_assert_eq!(h, [0.0; 3]);
            } else {
                prop_assert!(h[2] > 0.0 && h[2] <= 3.0);
            }
        }
    }
}
