//! Demagnetizing field against closed-form and brute-force references.

use std::f64::consts::PI;

use grace_core::demag::{brute_force_demag, Component, DemagKernel, DemagOptions};
use grace_core::{Grid, VectorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Demagnetizing factor along the third axis of a rectangular prism with
/// half-edges `a`, `b`, `c` (Aharoni 1998).
fn prism_factor(a: f64, b: f64, c: f64) -> f64 {
    let r = (a * a + b * b + c * c).sqrt();
    let ab = (a * a + b * b).sqrt();
    let bc = (b * b + c * c).sqrt();
    let ac = (a * a + c * c).sqrt();
    let s = (b * b - c * c) / (2.0 * b * c) * ((r - a) / (r + a)).ln()
        + (a * a - c * c) / (2.0 * a * c) * ((r - b) / (r + b)).ln()
        + b / (2.0 * c) * ((ab + a) / (ab - a)).ln()
        + a / (2.0 * c) * ((ab + b) / (ab - b)).ln()
        + c / (2.0 * a) * ((bc - b) / (bc + b)).ln()
        + c / (2.0 * b) * ((ac - a) / (ac + a)).ln()
        + 2.0 * (a * b / (c * r)).atan()
        + (a.powi(3) + b.powi(3) - 2.0 * c.powi(3)) / (3.0 * a * b * c)
        + (a * a + b * b - 2.0 * c * c) / (3.0 * a * b * c) * r
        + c / (a * b) * (ac + bc)
        - (ab.powi(3) + bc.powi(3) + ac.powi(3)) / (3.0 * a * b * c);
    s / PI
}

fn mean_field(kernel: &DemagKernel, m: &VectorField) -> [f64; 3] {
    let h = kernel.demag_field(m).unwrap();
    let n = h.len() as f64;
    [&h.x, &h.y, &h.z].map(|lane| lane.iter().sum::<f64>() / n)
}

fn random_field(grid: Grid, rng: &mut impl Rng) -> VectorField {
    VectorField::from_fn(grid, |_, _, _| {
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
    })
}

fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
    let mut d = a.clone();
    d.add_scaled(-1.0, b);
    (d.norm_squared() / b.norm_squared()).sqrt()
}

#[test]
fn cube_factor_is_one_third() {
    assert!((prism_factor(1.0, 1.0, 1.0) - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn uniform_prism_matches_closed_form() {
    // 16 nm × 6 nm × 2 nm built from anisotropic cells.
    let grid = Grid::new(8, 4, 2, 2e-9, 1.5e-9, 1e-9).unwrap();
    let (a, b, c) = (8.0, 3.0, 1.0);
    let expected = [prism_factor(b, c, a), prism_factor(c, a, b), prism_factor(a, b, c)];
    assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let kernel = DemagKernel::new(&grid).unwrap();
    for axis in 0..3 {
        let mut dir = [0.0; 3];
        dir[axis] = 1.0;
        let h = mean_field(&kernel, &VectorField::uniform(grid, dir));
        assert!(
            (-h[axis] - expected[axis]).abs() < 1e-10,
            "axis {axis}: {} vs {}",
            -h[axis],
            expected[axis]
        );
        for other in (0..3).filter(|&o| o != axis) {
            assert!(h[other].abs() < 1e-12);
        }
    }
}

#[test]
fn far_field_approximation_keeps_prism_factor() {
    let grid = Grid::with_default_cells(48, 12, 1).unwrap();
    let exact = prism_factor(24.0, 6.0, 0.5);
    let options = DemagOptions {
        far_field_cutoff: 4.0,
    };
    let kernel = DemagKernel::with_options(&grid, options).unwrap();
    let h = mean_field(&kernel, &VectorField::uniform(grid, [0.0, 0.0, 1.0]));
    assert!((-h[2] - exact).abs() < 1e-4 * exact, "{} vs {exact}", -h[2]);
}

#[test]
fn trace_sum_rule_on_16_cubed() {
    let grid = Grid::with_default_cells(16, 16, 16).unwrap();
    let kernel = DemagKernel::new(&grid).unwrap();
    let trace = |o: [i64; 3]| {
        kernel.component(Component::Xx, o)
            + kernel.component(Component::Yy, o)
            + kernel.component(Component::Zz, o)
    };
    assert!((trace([0, 0, 0]) - 1.0).abs() < 1e-12);
    for i in -15..16 {
        for j in -15..16 {
            for k in -15..16 {
                if (i, j, k) != (0, 0, 0) {
                    assert!(trace([i, j, k]).abs() < 1e-8, "({i},{j},{k})");
                }
            }
        }
    }
}

#[test]
fn fft_matches_direct_sum_on_odd_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for dims in [[3, 5, 2], [1, 7, 1], [6, 1, 3], [2, 3, 4]] {
        let grid = Grid::new(dims[0], dims[1], dims[2], 2e-9, 1e-9, 3e-9).unwrap();
        let kernel = DemagKernel::new(&grid).unwrap();
        for _ in 0..3 {
            let m = random_field(grid, &mut rng);
            let fast = kernel.demag_field(&m).unwrap();
            let slow = brute_force_demag(&m, &kernel).unwrap();
            assert!(rel_l2(&fast, &slow) < 1e-12, "{dims:?}");
        }
    }
}

#[test]
fn cache_round_trip_gives_identical_fields() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::with_default_cells(6, 4, 2).unwrap();
    let built = DemagKernel::load_or_build(&grid, DemagOptions::default(), dir.path()).unwrap();
    let loaded = DemagKernel::load_or_build(&grid, DemagOptions::default(), dir.path()).unwrap();
    let m = random_field(grid, &mut ChaCha8Rng::seed_from_u64(3));
    assert_eq!(built.demag_field(&m).unwrap(), loaded.demag_field(&m).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn demag_is_linear_symmetric_and_dissipative(seed in any::<u64>(), nx in 1usize..5, ny in 1usize..5, nz in 1usize..3) {
        let grid = Grid::with_default_cells(nx, ny, nz).unwrap();
        let kernel = DemagKernel::new(&grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m1 = random_field(grid, &mut rng);
        let m2 = random_field(grid, &mut rng);
        let h1 = kernel.demag_field(&m1).unwrap();
        let h2 = kernel.demag_field(&m2).unwrap();

        let mut sum = m1.scaled(2.0);
        sum.add_scaled(-3.0, &m2);
        let mut expected = h1.scaled(2.0);
        expected.add_scaled(-3.0, &h2);
        prop_assert!(rel_l2(&kernel.demag_field(&sum).unwrap(), &expected) < 1e-12);

        // Reciprocity: the tensor is symmetric.
        let (a, b) = (m1.dot(&h2), m2.dot(&h1));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-30));

        // Self-energy -½ M·H is non-negative.
        prop_assert!(-m1.dot(&h1) >= -1e-12 * m1.norm_squared());
    }
}
