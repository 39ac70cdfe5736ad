//! Tridiagonal systems and small dense helpers over `Complex64`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Pivot magnitude treated as singular.
const PIVOT_MIN: f64 = 1e-300;

/// Tridiagonal matrix; `sub[i]` is entry `(i+1, i)` and `sup[i]` is `(i, i+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<C64>,
    pub diag: Vec<C64>,
    pub sup: Vec<C64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            sub: vec![C64::zero(); n.saturating_sub(1)],
            diag: vec![C64::zero(); n],
            sup: vec![C64::zero(); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.sub[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// `a·self + b·I`.
    pub fn affine(&self, a: C64, b: C64) -> Tridiagonal {
        Tridiagonal {
            sub: self.sub.iter().map(|v| a * v).collect(),
            diag: self.diag.iter().map(|v| a * v + b).collect(),
            sup: self.sup.iter().map(|v| a * v).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Tridiagonal {
        Tridiagonal {
            sub: self.sup.iter().map(|v| v.conj()).collect(),
            diag: self.diag.iter().map(|v| v.conj()).collect(),
            sup: self.sub.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Diagonal similarity `W T W^{-1}` with `W = diag(w)`.
    pub fn similarity(&self, w: &[f64]) -> Tridiagonal {
        Tridiagonal {
            sub: self.sub.iter().enumerate().map(|(i, v)| v * (w[i + 1] / w[i])).collect(),
            diag: self.diag.clone(),
            sup: self.sup.iter().enumerate().map(|(i, v)| v * (w[i] / w[i + 1])).collect(),
        }
    }

    /// Symmetric matrix similar to a real tridiagonal one with
    /// `sub[i]·sup[i] > 0`; off-diagonals become `sqrt(sub·sup)`.
    pub fn symmetrized(&self) -> Option<Tridiagonal> {
        let real = self.diag.iter().chain(&self.sub).chain(&self.sup).all(|z| z.im == 0.0);
        if !real || self.sub.iter().zip(&self.sup).any(|(a, b)| a.re * b.re <= 0.0) {
            return None;
        }
        let off: Vec<C64> = self
            .sub
            .iter()
            .zip(&self.sup)
            .map(|(a, b)| C64::new((a.re * b.re).sqrt(), 0.0))
            .collect();
        Some(Tridiagonal {
            sub: off.clone(),
            diag: self.diag.clone(),
            sup: off,
        })
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.adjoint().norm_inf()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.sup[i];
                m[(i + 1, i)] = self.sub[i];
            }
        }
        m
    }

    pub fn factor(&self) -> Result<TriLu> {
        TriLu::new(self)
    }

    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        let mut x = rhs.to_vec();
        self.factor()?.solve_in_place(&mut x);
        Ok(x)
    }

    /// Largest absolute row sum, a cheap bound for the 2-norm's scale.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].norm();
                if i > 0 {
                    s += self.sub[i - 1].norm();
                }
                if i + 1 < n {
                    s += self.sup[i].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// Thomas elimination stored for repeated solves.
#[derive(Clone, Debug)]
pub struct TriLu {
    sub: Vec<C64>,
    inv_pivot: Vec<C64>,
    sup_mod: Vec<C64>,
}

impl TriLu {
    fn new(t: &Tridiagonal) -> Result<Self> {
        let n = t.dim();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut sup_mod = Vec::with_capacity(n.saturating_sub(1));
        let scale = t.norm_inf().max(f64::MIN_POSITIVE);
        let mut prev = C64::zero();
        for i in 0..n {
            let mut piv = t.diag[i];
            if i > 0 {
                piv -= t.sub[i - 1] * prev;
            }
            if piv.norm() <= PIVOT_MIN * scale || !piv.is_finite() {
                return Err(Error::SingularSystem {
                    row: i,
                    pivot: piv.norm(),
                });
            }
            let inv = piv.inv();
            inv_pivot.push(inv);
            if i + 1 < n {
                prev = t.sup[i] * inv;
                sup_mod.push(prev);
            }
        }
        Ok(TriLu {
            sub: t.sub.clone(),
            inv_pivot,
            sup_mod,
        })
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.inv_pivot.len();
        for i in 0..n {
            if i > 0 {
                let prev = x[i - 1];
                x[i] -= self.sub[i - 1] * prev;
            }
            x[i] *= self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.sup_mod[i] * next;
        }
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖T^{-1}‖_2` from the largest eigenvalue of `(T T^H)^{-1}`, by Lanczos
/// with full reorthogonalisation. `tol` bounds the relative error of the
/// Ritz value, which is quadratic in the residual, so iteration stops once
/// the residual is below `sqrt(tol)` relative to the Ritz value.
pub fn inverse_norm2(t: &Tridiagonal, tol: f64, max_iter: usize) -> Result<f64> {
    let lu = t.factor()?;
    let lu_h = t.adjoint().factor()?;
    let n = t.dim();
    let steps = max_iter.min(n).max(1);
    // deterministic start vector with all components present
    let mut q: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.5 * ((i * 7919) % 97) as f64 / 97.0, 0.3 * ((i * 104729) % 89) as f64 / 89.0))
        .collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|z| *z /= nq);
    let mut basis: Vec<Vec<C64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best = 0.0;
    for k in 0..steps {
        let mut w = basis[k].clone();
        lu.solve_in_place(&mut w);
        lu_h.solve_in_place(&mut w);
        if w.iter().any(|z| !z.is_finite()) {
            return Err(Error::SingularSystem { row: 0, pivot: 0.0 });
        }
        let a: f64 = basis[k].iter().zip(&w).map(|(q, w)| (q.conj() * w).re).sum();
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&w).map(|(b, w)| b.conj() * w).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let b = norm2(&w);
        let m = alpha.len();
        let tri = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(tri);
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        best = theta;
        let resid = b * eig.eigenvectors[(m - 1, imax)].abs();
        if resid <= tol.sqrt() * theta || b <= f64::EPSILON * theta || k + 1 == steps {
            break;
        }
        beta.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    if !(best > 0.0) || !best.is_finite() {
        return Err(Error::SingularSystem { row: 0, pivot: 0.0 });
    }
    Ok(best.sqrt())
}

/// Number of negative eigenvalues of a real symmetrisable tridiagonal
/// matrix (`sub·sup > 0`), via the signs of the LDLᵀ pivots.
pub fn negative_eigen_count(t: &Tridiagonal) -> Option<usize> {
    let n = t.dim();
    t.symmetrized()?;
    let mut count = 0;
    let mut d = 0.0;
    for i in 0..n {
        d = if i == 0 {
            t.diag[0].re
        } else {
            let off = t.sub[i - 1].re * t.sup[i - 1].re;
            t.diag[i].re - off / if d == 0.0 { f64::MIN_POSITIVE } else { d }
        };
        if d < 0.0 {
            count += 1;
        }
    }
    Some(count)
}
