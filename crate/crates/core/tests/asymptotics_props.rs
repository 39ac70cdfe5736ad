use std::f64::consts::PI;

use conelab_core::algebra::{CRat, Rat};
use conelab_core::asymptotics::{apply_expansion, apply_operator_symbolic, merge_terms, ExactTerm, Term};
use conelab_core::geometry::{eigen_data, Circle, Sphere};
use conelab_core::symbols::{conormal_symbol, laplacian, ConeOperatorSpec, PresetRegistry};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn circle() -> ConeOperatorSpec {
    laplacian(1, &eigen_data(&Circle { circumference: 2.0 * PI }, 4).unwrap())
}

fn warped() -> ConeOperatorSpec {
    let groups = eigen_data(&Sphere { n: 2 }, 3).unwrap();
    PresetRegistry::default()
        .get("warped")
        .unwrap()
        .build(2, &groups, &serde_json::json!({"eps": 0.5}))
        .unwrap()
}

fn q(num: i64, den: i64) -> CRat {
    CRat::new(Rat::new(num.into(), den.into()), Rat::zero())
}

fn term(spec: &ConeOperatorSpec, group: usize, rho: CRat, m: usize, c: CRat) -> ExactTerm {
    Term {
        rho,
        m,
        group,
        mode: spec.modes[group].components[0].clone(),
        c,
    }
}

fn sorted(mut v: Vec<ExactTerm>) -> Vec<ExactTerm> {
    v.sort_by(|a, b| {
        let (x, y) = (a.rho.re.clone(), b.rho.re.clone());
        x.cmp(&y).then(a.rho.im.cmp(&b.rho.im)).then(a.m.cmp(&b.m)).then(a.mode.cmp(&b.mode))
    });
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// The `x^{-ρ-μ}` coefficient of `A x^{-ρ}` is the conormal symbol at ρ.
    #[test]
    fn leading_coefficient_is_the_symbol(num in -40i64..40, den in 1i64..9, group in 0usize..3, w in any::<bool>()) {
        let spec = if w { warped() } else { circle() };
        let rho = q(num, den);
        let t = term(&spec, group, rho.clone(), 0, CRat::one());
        let out = apply_operator_symbolic(&spec, &t).unwrap();
        let sigma = conormal_symbol(&spec, group).unwrap().eval(&rho);
        let lead_rho = rho + q(spec.mu as i64, 1);
        let lead: Vec<_> = out.iter().filter(|o| o.rho == lead_rho && o.m == 0).collect();
        if sigma.is_zero() {
            prop_assert!(lead.is_empty());
        } else {
            prop_assert_eq!(lead.len(), 1);
            prop_assert_eq!(&lead[0].c, &sigma);
        }
    }

    #[test]
    fn linear_in_terms(
        a in -9i64..9, b in -9i64..9,
        r1 in -20i64..20, r2 in -20i64..20,
        m1 in 0usize..3, m2 in 0usize..3,
        g1 in 0usize..3, g2 in 0usize..3,
        w in any::<bool>(),
    ) {
        let spec = if w { warped() } else { circle() };
        let t1 = term(&spec, g1, q(r1, 2), m1, q(a, 1));
        let t2 = term(&spec, g2, q(r2, 3), m2, q(b, 1));
        let joint = apply_expansion(&spec, &[t1.clone(), t2.clone()]).unwrap();
        let mut parts = apply_operator_symbolic(&spec, &t1).unwrap();
        parts.extend(apply_operator_symbolic(&spec, &t2).unwrap());
        prop_assert_eq!(sorted(joint), sorted(merge_terms(parts)));
    }
}
