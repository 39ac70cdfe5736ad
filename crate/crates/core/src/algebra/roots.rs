//! Polynomial roots via balanced companion matrices.
//!
//! The numeric path takes eigenvalues of the balanced companion matrix,
//! applies one Newton step per root and clusters roots closer than the
//! merge tolerance. The exact path first splits the polynomial into
//! square-free factors so multiplicities are exact, then tries to recover
//! each numeric root as a (Gaussian) rational and certifies it by exact
//! evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use super::poly::{rationalize, CRat, Coeff, Poly, Rat};
use crate::error::{Error, Result};

/// Default tolerance for merging numerically coincident roots.
pub const TOL_POLE: f64 = 1e-9;

/// Largest denominator tried when recovering an exact rational root.
const MAX_ROOT_DENOMINATOR: i64 = 1_000_000;

/// A root with its multiplicity. `exact` is set when the root was certified
/// as a rational (or Gaussian rational) number.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub exact: Option<CRat>,
    pub multiplicity: usize,
}

impl Root {
    pub fn exact(r: CRat, multiplicity: usize) -> Self {
        Root {
            value: r.to_c64(),
            exact: Some(r),
            multiplicity,
        }
    }

    /// Same root value, compared exactly when both sides are exact.
    pub fn same_point(&self, other: &Root, tol: f64) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => (self.value - other.value).norm() <= tol * (1.0 + self.value.norm()),
        }
    }
}

/// Balance a square matrix by diagonal similarity with powers of two
/// (Parlett–Reinsch), reducing the norm before eigenvalue extraction.
pub fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            let mut cc = c;
            while cc < g {
                f *= radix;
                cc *= radix * radix;
            }
            g = r * radix;
            while cc > g {
                f /= radix;
                cc /= radix * radix;
            }
            if (c * f + r / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a complex square matrix from its Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    if n == 1 {
        return Some(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}

fn companion(p: &Poly<Complex64>) -> DMatrix<Complex64> {
    let d = p.degree().unwrap_or(0);
    let lead = *p.leading().unwrap();
    let mut c = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        c[(i, d - 1)] = -p.coeff(i) / lead;
    }
    c
}

fn newton_polish(p: &Poly<Complex64>, dp: &Poly<Complex64>, z: Complex64) -> Complex64 {
    let f = p.eval(&z);
    let df = dp.eval(&z);
    if df.norm() == 0.0 || !df.norm().is_finite() {
        return z;
    }
    let step = f / df;
    let cand = z - step;
    // keep the polish only if it does not make things worse
    if cand.is_finite() && p.eval(&cand).norm() <= f.norm() {
        cand
    } else {
        z
    }
}

/// Roots of a polynomial with floating coefficients, with multiplicities
/// obtained by clustering within `tol_merge`.
pub fn roots_numeric(p: &Poly<Complex64>, tol_merge: f64) -> Result<Vec<Root>> {
    let Some(deg) = p.degree() else {
        return Err(Error::InvalidInput("roots of the zero polynomial".into()));
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    // strip zero roots exactly
    let zeros = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = Poly::new(p.coeffs()[zeros..].to_vec());
    let mut raw: Vec<Complex64> = vec![Complex64::zero(); zeros];
    if reduced.degree().unwrap_or(0) > 0 {
        let mut c = companion(&reduced);
        balance(&mut c);
        let eig = eigenvalues(&c).ok_or_else(|| root_error(p))?;
        let dp = reduced.derivative();
        for z in eig {
            if !z.is_finite() {
                return Err(root_error(p));
            }
            raw.push(newton_polish(&reduced, &dp, z));
        }
    }
    Ok(cluster(raw, tol_merge))
}

fn root_error(p: &Poly<Complex64>) -> Error {
    Error::RootFinding {
        coeffs: p.coeffs().iter().map(|c| (c.re, c.im)).collect(),
    }
}

/// Group nearby values; each cluster becomes one root at the cluster mean.
fn cluster(mut raw: Vec<Complex64>, tol: f64) -> Vec<Root> {
    raw.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    'outer: for z in raw {
        for (c, m) in out.iter_mut() {
            let centre = *c / (*m as f64);
            if (centre - z).norm() <= tol * (1.0 + centre.norm()) {
                *c += z;
                *m += 1;
                continue 'outer;
            }
        }
        out.push((z, 1));
    }
    out.into_iter()
        .map(|(s, m)| Root {
            value: s / (m as f64),
            exact: None,
            multiplicity: m,
        })
        .collect()
}

/// Try to certify `z` as an exact root of `p`.
fn certify(p: &Poly<CRat>, z: Complex64) -> Option<CRat> {
    let tol = 1e-7 * (1.0 + z.norm());
    let re = rationalize(z.re, MAX_ROOT_DENOMINATOR, tol)?;
    let im = if z.im.abs() <= tol {
        Rat::zero()
    } else {
        rationalize(z.im, MAX_ROOT_DENOMINATOR, tol)?
    };
    let cand = CRat::new(re, im);
    p.eval(&cand).is_zero().then_some(cand)
}

/// Roots of an exact polynomial. Multiplicities come from the exact
/// square-free decomposition; rational roots are certified exactly.
pub fn roots_exact(p: &Poly<CRat>) -> Result<Vec<Root>> {
    if p.is_zero() {
        return Err(Error::InvalidInput("roots of the zero polynomial".into()));
    }
    let mut out = Vec::new();
    for (factor, mult) in p.square_free() {
        let mut rest = factor.clone();
        // peel certified rational roots off this square-free factor
        loop {
            if rest.degree().unwrap_or(0) == 0 {
                break;
            }
            let numeric = roots_numeric(&rest.to_c64(), 0.0)?;
            let mut peeled = false;
            for r in &numeric {
                if let Some(q) = certify(&rest, r.value) {
                    rest = rest.div_rem(&Poly::linear_root(q.clone())).0;
                    out.push(Root::exact(q, mult));
                    peeled = true;
                    break;
                }
            }
            if !peeled {
                for r in numeric {
                    out.push(Root {
                        value: r.value,
                        exact: None,
                        multiplicity: mult * r.multiplicity,
                    });
                }
                break;
            }
        }
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::crat;

    fn cpoly(c: &[f64]) -> Poly<Complex64> {
        Poly::new(c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    #[test]
    fn quadratic_roots_numeric() {
        let r = roots_numeric(&cpoly(&[-4.0, 0.0, 1.0]), TOL_POLE).unwrap();
        let mut v: Vec<f64> = r.iter().map(|r| r.value.re).collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 2.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn double_root_merged_numerically() {
        // (λ-1)^2 (λ+3)
        let r = roots_numeric(&cpoly(&[3.0, -5.0, 1.0, 1.0]), 1e-6).unwrap();
        let double = r.iter().find(|r| (r.value.re - 1.0).abs() < 1e-6).unwrap();
        assert_eq!(double.multiplicity, 2);
    }

    #[test]
    fn exact_multiplicities_and_values() {
        // λ^2 (λ - 1/2)^2 (λ^2 - 3)
        let l = Poly::<CRat>::x();
        let half = Poly::linear_root(crat(1, 2));
        let irr = Poly::new(vec![crat(-3, 1), crat(0, 1), crat(1, 1)]);
        let p = &(&l.pow(2) * &half.pow(2)) * &irr;
        let roots = roots_exact(&p).unwrap();
        assert_eq!(roots.len(), 4);
        let zero = roots.iter().find(|r| r.exact == Some(crat(0, 1))).unwrap();
        assert_eq!(zero.multiplicity, 2);
        let h = roots.iter().find(|r| r.exact == Some(crat(1, 2))).unwrap();
        assert_eq!(h.multiplicity, 2);
        let sq: Vec<_> = roots.iter().filter(|r| r.exact.is_none()).collect();
        assert_eq!(sq.len(), 2);
        for r in sq {
            assert!((r.value.re.abs() - 3f64.sqrt()).abs() < 1e-12);
            assert_eq!(r.multiplicity, 1);
        }
    }

    #[test]
    fn balancing_preserves_spectrum() {
        let p = cpoly(&[1e6, -3e3, 1.0, 1e-3]);
        let mut c = companion(&p);
        let before = eigenvalues(&c).unwrap();
        balance(&mut c);
        let after = eigenvalues(&c).unwrap();
        let key = |z: &Complex64| (z.re, z.im);
        let mut b: Vec<_> = before.iter().map(key).collect();
        let mut a: Vec<_> = after.iter().map(key).collect();
        b.sort_by(|x, y| x.0.total_cmp(&y.0));
        a.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (x, y) in a.iter().zip(&b) {
            let scale = 1.0 + x.0.hypot(x.1);
            assert!((x.0 - y.0).abs() < 1e-8 * scale && (x.1 - y.1).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn gaussian_rational_root_certified() {
        // λ^2 + 1/4 has roots ±i/2
        let p = Poly::new(vec![crat(1, 4), crat(0, 1), crat(1, 1)]);
        let roots = roots_exact(&p).unwrap();
        assert!(roots.iter().all(|r| r.exact.is_some()));
    }
}
