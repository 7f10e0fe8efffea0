//! Cell-averaged demagnetization tensor of a rectangular prism.
//!
//! Near cells use the exact Newell-Dunlop-Ryan expressions: the tensor is
//! the mixed second difference of the auxiliary functions `f` (diagonal) and
//! `g` (off-diagonal) over the 27 combinations of `±cell, 0` per axis. Far
//! cells use the point-dipole limit, which avoids the cancellation the
//! 27-term difference suffers at large separation.
//!
//! Sign convention: `H_a = -Σ_b N_ab M_b`, so `N_aa(0) > 0` and the
//! collinear far-field coupling `N_xx(r x̂)` is negative.

use std::f64::consts::PI;

/// Index of one of the six independent tensor components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Xx = 0,
    Xy = 1,
    Xz = 2,
    Yy = 3,
    Yz = 4,
    Zz = 5,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Xx,
        Component::Xy,
        Component::Xz,
        Component::Yy,
        Component::Yz,
        Component::Zz,
    ];

    /// The (row, column) pair, row <= column.
    pub fn axes(self) -> (usize, usize) {
        match self {
            Component::Xx => (0, 0),
            Component::Xy => (0, 1),
            Component::Xz => (0, 2),
            Component::Yy => (1, 1),
            Component::Yz => (1, 2),
            Component::Zz => (2, 2),
        }
    }

    pub fn from_axes(a: usize, b: usize) -> Component {
        match (a.min(b), a.max(b)) {
            (0, 0) => Component::Xx,
            (0, 1) => Component::Xy,
            (0, 2) => Component::Xz,
            (1, 1) => Component::Yy,
            (1, 2) => Component::Yz,
            (2, 2) => Component::Zz,
            _ => panic!("axis out of range: ({a}, {b})"),
        }
    }

    /// Sign picked up when the displacement is mirrored along the axes
    /// flagged in `negative`. Diagonal components are even in every
    /// coordinate; `N_ab` is odd in `a` and `b` and even in the third.
    pub fn parity(self, negative: [bool; 3]) -> f64 {
        let (a, b) = self.axes();
        if a == b {
            1.0
        } else if negative[a] ^ negative[b] {
            -1.0
        } else {
            1.0
        }
    }
}

/// Newell's auxiliary function for the diagonal components. Even in every
/// argument.
fn newell_f(x: f64, y: f64, z: f64) -> f64 {
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    let mut out = (2.0 * x2 - y2 - z2) * r / 6.0;
    if y > 0.0 && x2 + z2 > 0.0 {
        out += 0.5 * y * (z2 - x2) * (y / (x2 + z2).sqrt()).asinh();
    }
    if z > 0.0 && x2 + y2 > 0.0 {
        out += 0.5 * z * (y2 - x2) * (z / (x2 + y2).sqrt()).asinh();
    }
    if x > 0.0 && y > 0.0 && z > 0.0 {
        out -= x * y * z * (y * z / (x * r)).atan();
    }
    out
}

/// Newell's auxiliary function for the off-diagonal components. Odd in `x`
/// and `y`, even in `z`.
fn newell_g(x: f64, y: f64, z: f64) -> f64 {
    let sign = x.signum() * y.signum();
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    let mut out = -x * y * r / 3.0;
    if z > 0.0 {
        out += x * y * z * (z / (x2 + y2).sqrt()).asinh();
        out -= z * z2 / 6.0 * (x * y / (z * r)).atan();
        out -= 0.5 * z * y2 * (x * z / (y * r)).atan();
        out -= 0.5 * z * x2 * (y * z / (x * r)).atan();
    }
    out += y / 6.0 * (3.0 * z2 - y2) * (x / (y2 + z2).sqrt()).asinh();
    out += x / 6.0 * (3.0 * z2 - x2) * (y / (x2 + z2).sqrt()).asinh();
    sign * out
}

const STENCIL: [(f64, f64); 3] = [(-1.0, -1.0), (0.0, 2.0), (1.0, -1.0)];

/// Mixed second difference of `func` around displacement `r` with cell
/// edges `h`: Σ w_i w_j w_k func(r + (i, j, k)·h), w = (-1, 2, -1).
fn second_difference(func: impl Fn(f64, f64, f64) -> f64, r: [f64; 3], h: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for (si, wi) in STENCIL {
        for (sj, wj) in STENCIL {
            for (sk, wk) in STENCIL {
                acc += wi
                    * wj
                    * wk
                    * func(r[0] + si * h[0], r[1] + sj * h[1], r[2] + sk * h[2]);
            }
        }
    }
    acc
}

/// Exact cell-averaged tensor component between two cells displaced by `r`
/// (meters), for cells of size `h`.
pub fn newell_component(c: Component, r: [f64; 3], h: [f64; 3]) -> f64 {
    // Evaluate in the positive octant and apply parity, so mirror symmetry
    // holds bit for bit.
    let sign = c.parity(r.map(|v| v < 0.0));
    let (a, b) = c.axes();
    if a != b && (r[a] == 0.0 || r[b] == 0.0) {
        return 0.0;
    }
    // The tensor is scale free; work in units of the largest edge so the
    // auxiliary functions stay O(distance³) in cell units.
    let s = h[0].max(h[1]).max(h[2]);
    let r = r.map(|v| v.abs() / s);
    let h = h.map(|v| v / s);
    let vol = h[0] * h[1] * h[2];
    // Permute coordinates so the component becomes xx or xy.
    let (perm, diagonal) = match c {
        Component::Xx => ([0, 1, 2], true),
        Component::Yy => ([1, 0, 2], true),
        Component::Zz => ([2, 1, 0], true),
        Component::Xy => ([0, 1, 2], false),
        Component::Xz => ([0, 2, 1], false),
        Component::Yz => ([1, 2, 0], false),
    };
    let rp = perm.map(|a| r[a]);
    let hp = perm.map(|a| h[a]);
    let sum = if diagonal {
        second_difference(newell_f, rp, hp)
    } else {
        second_difference(newell_g, rp, hp)
    };
    sign * sum / (4.0 * PI * vol)
}

/// Point-dipole limit: `V/(4π) (δ_ab r² - 3 r_a r_b) / r⁵`.
pub fn dipole_component(c: Component, r: [f64; 3], h: [f64; 3]) -> f64 {
    let (a, b) = c.axes();
    let vol = h[0] * h[1] * h[2];
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let delta = if a == b { r2 } else { 0.0 };
    vol / (4.0 * PI) * (delta - 3.0 * r[a] * r[b]) / (r2 * r2 * r2.sqrt())
}

/// Tensor component at a displacement of `offset` cells, switching to the
/// dipole form once the distance exceeds `cutoff` cell diagonals.
pub fn component_at(c: Component, offset: [i64; 3], h: [f64; 3], cutoff: f64) -> f64 {
    let r = [
        offset[0] as f64 * h[0],
        offset[1] as f64 * h[1],
        offset[2] as f64 * h[2],
    ];
    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let diag = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if dist > cutoff * diag {
        dipole_component(c, r, h)
    } else {
        newell_component(c, r, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: [f64; 3] = [1e-9, 1e-9, 1e-9];

    #[test]
    fn cube_self_term_is_one_third() {
        for c in [Component::Xx, Component::Yy, Component::Zz] {
            let n = newell_component(c, [0.0; 3], CUBE);
            assert!((n - 1.0 / 3.0).abs() < 1e-14, "{c:?}: {n}");
        }
        for c in [Component::Xy, Component::Xz, Component::Yz] {
            assert_eq!(newell_component(c, [0.0; 3], CUBE), 0.0);
        }
    }

    #[test]
    fn flat_cell_self_terms_sum_to_one() {
        let h = [5e-9, 2e-9, 1e-9];
        let t: f64 = [Component::Xx, Component::Yy, Component::Zz]
            .iter()
            .map(|&c| newell_component(c, [0.0; 3], h))
            .sum();
        assert!((t - 1.0).abs() < 1e-12, "trace {t}");
        // Thin in z: out-of-plane factor dominates.
        assert!(newell_component(Component::Zz, [0.0; 3], h) > 0.5);
    }

    #[test]
    fn nearest_neighbour_along_x_is_negative() {
        let n = newell_component(Component::Xx, [1e-9, 0.0, 0.0], CUBE);
        assert!(n < 0.0);
        // Adjacent cubes couple about 15% more weakly than point dipoles.
        let d = dipole_component(Component::Xx, [1e-9, 0.0, 0.0], CUBE);
        assert!((n - d).abs() / d.abs() < 0.2, "{n} vs {d}");
    }

    #[test]
    fn far_field_matches_dipole() {
        let r = [10e-9, 0.0, 0.0];
        let n = newell_component(Component::Xx, r, CUBE);
        let expected = -2.0 * 1e-27 / (4.0 * PI * 1e-24);
        assert!(((n - expected) / expected).abs() < 1e-3, "{n} vs {expected}");

        let r = [6e-9, 5e-9, 3e-9];
        for c in Component::ALL {
            let n = newell_component(c, r, CUBE);
            let d = dipole_component(c, r, CUBE);
            assert!((n - d).abs() < 1e-3 * d.abs().max(1e-5), "{c:?}: {n} vs {d}");
        }
    }

    #[test]
    fn parity_under_reflection() {
        let h = [2e-9, 1e-9, 3e-9];
        let r = [3e-9, 2e-9, 6e-9];
        for c in Component::ALL {
            let base = newell_component(c, r, h);
            for mask in 0..8u8 {
                let neg = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
                let rr = [0, 1, 2].map(|a| if neg[a] { -r[a] } else { r[a] });
                let v = newell_component(c, rr, h);
                assert_eq!(v, c.parity(neg) * base, "{c:?} {neg:?}");
            }
        }
    }

    #[test]
    fn cutoff_selects_dipole() {
        let off = [40, 0, 0];
        let near = component_at(Component::Xx, off, CUBE, 1000.0);
        let far = component_at(Component::Xx, off, CUBE, 1.0);
        assert_eq!(far, dipole_component(Component::Xx, [40e-9, 0.0, 0.0], CUBE));
        assert!((near - far).abs() < 1e-4 * far.abs());
    }
}
