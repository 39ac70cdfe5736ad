use std::f64::consts::PI;

use conelab_core::geometry::{mode_table, Circle, CrossSectionModel};
use conelab_core::heat::{apply_laplacian, l2_norm, solve_heat, FnForcing, HeatConfig, NoForcing};
use conelab_core::mellin::{LogGrid, RadialField};
use conelab_core::special::{bessel_j, radial_wavenumbers, OuterBc};
use conelab_core::verify::{bessel_solver_error, bump};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn circle_field(grid: LogGrid, groups: usize, f: impl Fn(usize, f64) -> C64) -> RadialField {
    let cs = Circle { circumference: 2.0 * PI };
    RadialField::from_fn(grid, 1, cs.volume(), mode_table(&cs.groups(groups)), f)
}

#[test]
fn first_dirichlet_wavenumbers() {
    // zeros of J_0 (Abramowitz & Stegun table 9.5)
    let ks = radial_wavenumbers(1, 0.0, OuterBc::Dirichlet, 2, 10.0).unwrap();
    assert!((ks[0] - 2.404_825_557_695_773).abs() < 1e-12);
    assert!((ks[1] - 5.520_078_110_286_311).abs() < 1e-12);
}

/// Crank-Nicolson in time: errors against a fine-step run on the same grid.
#[test]
fn temporal_order_is_two() {
    let grid = LogGrid::new(-8.0, 256).unwrap();
    let ks = radial_wavenumbers(1, 0.0, OuterBc::Dirichlet, 2, 50.0).unwrap();
    let u0 = circle_field(grid, 1, |_, x| c(bessel_j(0.0, ks[0] * x) + 0.5 * bessel_j(0.0, ks[1] * x)));
    let run = |dt: f64| {
        solve_heat(&u0, &NoForcing, &HeatConfig::new(grid, 0.1, dt, OuterBc::Dirichlet))
            .unwrap()
            .last()
            .clone()
    };
    let reference = run(1e-5);
    let errs: Vec<f64> = [5e-3, 2.5e-3, 1.25e-3]
        .iter()
        .map(|&dt| l2_norm(&run(dt).axpby(c(1.0), &reference, c(-1.0))))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for o in &orders {
        assert!((1.7..=2.3).contains(o), "orders {orders:?}, errors {errs:?}");
    }
}

#[test]
fn spatial_order_is_two() {
    let errs: Vec<f64> = [128usize, 256, 512]
        .iter()
        .map(|&j| bessel_solver_error(LogGrid::new(-8.0, j).unwrap(), 1e-4, 0.1).unwrap())
        .collect();
    for w in errs.windows(2) {
        let o = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&o), "errors {errs:?}");
    }
}

fn max_abs(u: &RadialField) -> f64 {
    u.values[0].iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn maximum_principle_for_real_mode_zero_data() {
    let grid = LogGrid::new(-8.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (theta, dt) in [(1.0, 1e-3), (0.5, 1e-4)] {
        for _ in 0..5 {
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(0.3..0.9));
            let u0 = circle_field(grid, 1, |_, x| c(a + (-(x - b).powi(2) * 40.0).exp()));
            let mut cfg = HeatConfig::new(grid, 0.2, dt, OuterBc::Neumann);
            cfg.theta = theta;
            cfg.output_times = (1..=20).map(|i| 0.01 * i as f64).collect();
            let traj = solve_heat(&u0, &NoForcing, &cfg).unwrap();
            let mut prev = max_abs(&u0);
            for u in &traj.snapshots {
                let m = max_abs(u);
                assert!(m <= prev * (1.0 + 1e-12), "theta={theta}: {prev} -> {m}");
                prev = m;
            }
        }
    }
}

/// `(Σ h |v_j|^2)^{1/2}` over `0.05 <= x <= 0.9`. Nested difference
/// quotients scale like `x^{-4} h^{-4}` near the tip, where they only
/// amplify rounding, so the tip and the outer edge are left out.
fn interior_norm(u: &RadialField) -> f64 {
    let h = u.grid.h();
    let xs = u.grid.xs();
    let s: f64 = (0..xs.len())
        .filter(|&j| (0.05..=0.9).contains(&xs[j]))
        .map(|j| h * u.values[0][j].norm_sqr())
        .sum();
    s.sqrt()
}

/// Rough data smooths out: `Δu` and `Δ²u` at t = 0.1 settle under refinement.
#[test]
fn rough_data_is_smoothed() {
    let coarse = LogGrid::new(-8.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nodes: Vec<f64> = (0..coarse.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    // piecewise linear in τ through the random node values
    let rough = |x: f64| {
        let s = (x.ln() - coarse.tau_min) / coarse.h();
        let j = (s.floor() as usize).min(coarse.intervals - 1);
        let w = s - j as f64;
        c(nodes[j] * (1.0 - w) + nodes[j + 1] * w)
    };
    let norms: Vec<(f64, f64)> = [256usize, 512, 1024]
        .iter()
        .map(|&j| {
            let grid = LogGrid::new(-8.0, j).unwrap();
            let u0 = circle_field(grid, 1, |_, x| rough(x));
            let u = solve_heat(&u0, &NoForcing, &HeatConfig::new(grid, 0.1, 1e-4, OuterBc::Neumann))
                .unwrap()
                .last()
                .clone();
            let d1 = apply_laplacian(&u, OuterBc::Neumann);
            let d2 = apply_laplacian(&d1, OuterBc::Neumann);
            (interior_norm(&d1), interior_norm(&d2))
        })
        .collect();
    for w in norms.windows(2) {
        for (a, b) in [(w[0].0, w[1].0), (w[0].1, w[1].1)] {
            assert!(a.is_finite() && b.is_finite());
            assert!((b - a).abs() <= 0.2 * a, "{norms:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solution_is_linear_in_data(a in -3.0f64..3.0, b in -3.0f64..3.0, shift in 0.3f64..0.7) {
        let grid = LogGrid::new(-6.0, 128).unwrap();
        let u0 = circle_field(grid, 2, |m, x| c(bump(x) * (m as f64 + 1.0)));
        let v0 = circle_field(grid, 2, |m, x| C64::new((-(x - shift).powi(2) * 30.0).exp(), m as f64 * x));
        let f = |m: usize, t: f64, x: f64| c((1.0 + t) * x * (1.0 - x) * (m + 1) as f64);
        let g = |m: usize, t: f64, x: f64| C64::new(t.cos() * x, (m as f64) * x * x);
        let mut cfg = HeatConfig::new(grid, 0.05, 1e-3, OuterBc::Dirichlet);
        cfg.output_times = vec![0.01, 0.03];
        let combined = |m: usize, t: f64, x: f64| f(m, t, x) * a + g(m, t, x) * b;
        let w = solve_heat(&u0.axpby(c(a), &v0, c(b)), &FnForcing(combined), &cfg).unwrap();
        let p = solve_heat(&u0, &FnForcing(f), &cfg).unwrap();
        let q = solve_heat(&v0, &FnForcing(g), &cfg).unwrap();
        for ((ws, ps), qs) in w.snapshots.iter().zip(&p.snapshots).zip(&q.snapshots) {
            let lin = ps.axpby(c(a), qs, c(b));
            let scale = 1.0 + l2_norm(&lin);
            prop_assert!(ws.max_abs_diff(&lin) <= 1e-12 * scale);
        }
    }
}
