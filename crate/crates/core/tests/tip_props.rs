use std::f64::consts::PI;
use std::sync::OnceLock;

use conelab_core::asymptotics::{enumerate_asymptotics, AsymptoticsBasis};
use conelab_core::geometry::{mode_table, Circle, CrossSectionModel};
use conelab_core::heat::{solve_heat, HeatConfig, NoForcing};
use conelab_core::mellin::{LogGrid, RadialField};
use conelab_core::special::OuterBc;
use conelab_core::symbols::{laplacian, pole_set_power, ConeOperatorSpec};
use conelab_core::tip::{fit_tip_expansion, tail_terms, FitOptions};
use conelab_core::verify::bump;
use num_complex::Complex64;
use proptest::prelude::*;

type C64 = Complex64;

fn circle_spec(l: f64) -> (Circle, ConeOperatorSpec) {
    let cs = Circle { circumference: l };
    let spec = laplacian(1, &cs.groups(3));
    (cs, spec)
}

fn basis(spec: &ConeOperatorSpec, power: usize) -> AsymptoticsBasis {
    enumerate_asymptotics(&pole_set_power(spec, 0.0, power, None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// A field built from the basis is recovered exactly.
    #[test]
    fn fit_recovers_basis_combinations(
        coeffs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 16),
        power in 1usize..3,
    ) {
        let (cs, spec) = circle_spec(2.0 * PI);
        let b = basis(&spec, power);
        prop_assume!(b.terms.len() <= coeffs.len());
        let cs_of: Vec<C64> = coeffs.iter().take(b.terms.len()).map(|&(re, im)| C64::new(re, im)).collect();
        let grid = LogGrid::new(-8.0, 256).unwrap();
        let modes = mode_table(&cs.groups(3));
        let labels: Vec<String> = modes.iter().map(|m| m.label.clone()).collect();
        let u = RadialField::from_fn(grid, 1, cs.volume(), modes, |mi, x| {
            b.terms
                .iter()
                .zip(&cs_of)
                .filter(|(t, _)| t.mode == labels[mi])
                .map(|(t, c)| c * t.eval(x))
                .sum()
        });
        let fit = fit_tip_expansion(&u, &b, &FitOptions::default(), 0.0).unwrap();
        prop_assert_eq!(fit.terms.len(), b.terms.len());
        for (t, want) in b.terms.iter().zip(&cs_of) {
            let got = fit.terms.iter().find(|f| f.mode == t.mode && f.m == t.m && f.rho == t.rho).unwrap().c;
            prop_assert!((got - want).norm() <= 1e-8 * (1.0 + want.norm()), "{} {} {}: {got} vs {want}", t.mode, t.rho, t.m);
        }
        for r in &fit.modes {
            prop_assert!(r.residual <= 1e-10, "{}: {}", r.mode, r.residual);
        }
    }
}

/// Heat solution from a bump on the cone over a circle of length π at t = 0.05.
fn heat_field() -> &'static (ConeOperatorSpec, RadialField) {
    static CELL: OnceLock<(ConeOperatorSpec, RadialField)> = OnceLock::new();
    CELL.get_or_init(|| {
        let (cs, _) = circle_spec(PI);
        let groups = cs.groups(2);
        let spec = laplacian(1, &groups);
        let grid = LogGrid::new(-10.0, 4096).unwrap();
        let u0 = RadialField::from_fn(grid, 1, PI, mode_table(&groups), |_, x| C64::new(bump(x), 0.0));
        let traj = solve_heat(&u0, &NoForcing, &HeatConfig::new(grid, 0.05, 1e-4, OuterBc::Dirichlet)).unwrap();
        (spec, traj.last().clone())
    })
}

#[test]
fn leading_coefficients_do_not_depend_on_the_window() {
    let (spec, u) = heat_field();
    let b = basis(spec, 2);
    let tail = tail_terms(spec, &b, 2).unwrap();
    let fit = |window| {
        let opts = FitOptions {
            window: Some(window),
            tail: tail.clone(),
            ..FitOptions::default()
        };
        fit_tip_expansion(u, &b, &opts, 0.05).unwrap()
    };
    let reference = fit((0.005, 0.125));
    for window in [(0.0025, 0.125), (0.01, 0.125), (0.005, 0.1), (0.005, 0.15)] {
        let f = fit(window);
        for (mode, rho) in [("k=0", 0.0), ("k=+1", -2.0), ("k=-1", -2.0)] {
            let a = reference.coefficient(mode, rho, 0).unwrap();
            let b = f.coefficient(mode, rho, 0).unwrap();
            assert!((a - b).norm() <= 0.02 * a.norm(), "{mode} on {window:?}: {b} vs {a}");
        }
    }
}

/// The residual decays at least like the first exponent left out of the basis.
#[test]
fn residual_exponent_reaches_the_next_term() {
    let (spec, u) = heat_field();
    // level 1: k = ±1 has no terms in the strip, the next is x^2
    let f1 = fit_tip_expansion(u, &basis(spec, 1), &FitOptions::default(), 0.05).unwrap();
    // level 2 removes x^2; the next candidate is x^4 (k = ±1, r^2 x^2 correction)
    let b2 = basis(spec, 2);
    let opts = FitOptions {
        window: Some((0.005, 0.125)),
        tail: tail_terms(spec, &b2, 2).unwrap(),
        ..FitOptions::default()
    };
    let f2 = fit_tip_expansion(u, &b2, &opts, 0.05).unwrap();
    for mode in ["k=+1", "k=-1"] {
        let e1 = f1.residual(mode).unwrap().decay_exponent;
        let e2 = f2.residual(mode).unwrap().decay_exponent;
        assert!(e1 >= 2.0 - 0.1, "{mode}: {e1}");
        assert!(e2 >= 4.0 - 0.1, "{mode}: {e2}");
    }
}
