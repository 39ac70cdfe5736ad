use conelab_core::asymptotics::Term;
use conelab_core::geometry::{mode_table, Circle, CrossSectionModel};
use conelab_core::mellin::{mellin_norm, membership_probe, Cutoff, LogGrid, RadialField};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(grid: LogGrid, f: impl Fn(f64) -> Complex64) -> RadialField {
    let cs = Circle { circumference: 1.0 };
    RadialField::from_fn(grid, 1, cs.volume(), mode_table(&cs.groups(1)), |_, x| f(x))
}

fn power_law(a: f64) -> impl Fn(f64) -> Complex64 {
    move |x| Complex64::new(Cutoff::Smooth.omega(x) * x.powf(a), 0.0)
}

/// At least second order; the integrands are smooth and flat at both ends of
/// the window, so the trapezoid rule can do better. The cutoff's τ-derivative
/// is steep, so the s = 1 ladder starts finer.
#[test]
fn norm_converges_at_second_order() {
    for a in [0.5, 0.0, -0.5] {
        for (s, ladder) in [(0usize, [64usize, 128, 256, 512]), (1, [512, 1024, 2048, 4096])] {
            let norms: Vec<f64> = ladder
                .iter()
                .map(|&j| mellin_norm(&field(LogGrid::new(-12.0, j).unwrap(), power_law(a)), s, 0.0, 2.0).unwrap())
                .collect();
            // differences at roundoff level carry no order information
            let d: Vec<f64> = norms
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .filter(|&d| d > 1e-9 * norms[0])
                .collect();
            let orders: Vec<f64> = d.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            assert!(!orders.is_empty(), "a={a}, s={s}: norms {norms:?}");
            for o in &orders {
                assert!(*o >= 1.7, "a={a}, s={s}: orders {orders:?}, norms {norms:?}");
            }
        }
    }
}

#[test]
fn non_member_norm_grows_with_the_domain() {
    let t = Term {
        rho: Complex64::new(2.0, 0.0),
        m: 0,
        group: 0,
        mode: "k=0".into(),
        c: Complex64::new(1.0, 0.0),
    };
    assert!(!membership_probe(&t, 1, 0.0).unwrap());
    let mut grid = LogGrid::new(-4.0, 128).unwrap();
    let mut prev = mellin_norm(&field(grid, |x| t.eval(x) * Cutoff::Smooth.omega(x)), 0, 0.0, 2.0).unwrap();
    for _ in 0..2 {
        grid = LogGrid::new(2.0 * grid.tau_min, 2 * grid.intervals).unwrap();
        let next = mellin_norm(&field(grid, |x| t.eval(x) * Cutoff::Smooth.omega(x)), 0, 0.0, 2.0).unwrap();
        assert!(next >= 10.0 * prev, "{prev} -> {next}");
        prev = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_absolutely_homogeneous(
        a in -0.9f64..2.0,
        re in -5.0f64..5.0,
        im in -5.0f64..5.0,
        s in 0usize..3,
        gamma in -1.0f64..1.0,
    ) {
        let u = field(LogGrid::new(-8.0, 128).unwrap(), power_law(a));
        let c = Complex64::new(re, im);
        let base = mellin_norm(&u, s, gamma, 2.0).unwrap();
        let scaled = mellin_norm(&u.scaled(c), s, gamma, 2.0).unwrap();
        prop_assert!((scaled - c.norm() * base).abs() <= 1e-12 * (1.0 + c.norm() * base));
        if s == 0 {
            let p = 1.5;
            let base = mellin_norm(&u, 0, gamma, p).unwrap();
            let scaled = mellin_norm(&u.scaled(c), 0, gamma, p).unwrap();
            prop_assert!((scaled - c.norm() * base).abs() <= 1e-12 * (1.0 + c.norm() * base));
        }
    }

    #[test]
    fn norm_is_nondecreasing_in_gamma(
        terms in prop::collection::vec((-1.0f64..3.0, -2.0f64..2.0), 1..4),
        g1 in -1.0f64..1.0,
        dg in 0.0f64..1.0,
    ) {
        let f = |x: f64| {
            let v: f64 = if x <= 0.5 { terms.iter().map(|(a, c)| c * x.powf(*a)).sum() } else { 0.0 };
            Complex64::new(v, 0.0)
        };
        let u = field(LogGrid::new(-8.0, 256).unwrap(), f);
        let lo = mellin_norm(&u, 0, g1, 2.0).unwrap();
        let hi = mellin_norm(&u, 0, g1 + dg, 2.0).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-14));
    }
}
