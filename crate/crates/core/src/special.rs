//! Bessel functions of the first kind, their zeros, and Gauss–Legendre rules.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Below this argument the power series is used.
const SERIES_MAX: f64 = 8.0;

fn series(nu: f64, z: f64) -> f64 {
    let half = z / 2.0;
    let q = -half * half;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence, normalised by
/// `(z/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! J_{ν+2k}(z)`.
fn miller(nu: f64, z: f64) -> f64 {
    let start = (z + 30.0 + 2.0 * z.sqrt() * 10.0).ceil() as usize;
    let start = start + (start & 1);
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut at_nu = 0.0;
    let mut norm = 0.0;
    for m in (0..=start).rev() {
        let order = nu + m as f64;
        if m % 2 == 0 {
            let k = (m / 2) as f64;
            let w = if m == 0 {
                ln_gamma(nu + 1.0).exp()
            } else {
                (nu + 2.0 * k) * (ln_gamma(nu + k) - ln_gamma(k + 1.0)).exp()
            };
            norm += w * j;
        }
        if m == 0 {
            at_nu = j;
            break;
        }
        let jm1 = 2.0 * order / z * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
        }
    }
    at_nu * (z / 2.0).powf(nu) / norm
}

/// Hankel asymptotic expansion for large arguments.
fn hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let eight_z = 8.0 * z;
    for k in 1..30 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * eight_z);
        if term.abs() < 1e-17 {
            break;
        }
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 1 { -term } else { term };
        }
    }
    let chi = z - (nu / 2.0 + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_ν(z)` for `ν >= 0`, `z >= 0`.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    assert!(nu >= 0.0 && z >= 0.0, "bessel_j needs ν >= 0 and z >= 0");
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if z <= SERIES_MAX || z < 0.5 * nu {
        series(nu, z)
    } else if z > 40.0 + nu * nu {
        hankel(nu, z)
    } else {
        miller(nu, z)
    }
}

/// `J_ν'(z) = (ν/z) J_ν(z) - J_{ν+1}(z)`.
pub fn bessel_j_prime(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return match nu {
            v if v == 0.0 => 0.0,
            v if v == 1.0 => 0.5,
            v if v > 1.0 => 0.0,
            _ => f64::INFINITY,
        };
    }
    nu / z * bessel_j(nu, z) - bessel_j(nu + 1.0, z)
}

/// Boundary condition at the outer edge `x = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBc {
    Dirichlet,
    Neumann,
}

/// Radial eigenfunction `x^{-a} J_ν(k x)` with `a = (n-1)/2`; the `k = 0`
/// Neumann zero mode is the constant 1.
pub fn radial_eigenfunction(n: usize, nu: f64, k: f64, x: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let a = (n as f64 - 1.0) / 2.0;
    x.powf(-a) * bessel_j(nu, k * x)
}

fn bc_function(n: usize, nu: f64, bc: OuterBc, k: f64) -> f64 {
    match bc {
        OuterBc::Dirichlet => bessel_j(nu, k),
        OuterBc::Neumann => {
            let a = (n as f64 - 1.0) / 2.0;
            k * bessel_j_prime(nu, k) - a * bessel_j(nu, k)
        }
    }
}

/// First `count` wavenumbers `k_j` of the radial problem on `[0, 1]`
/// with the given outer condition; eigenvalues of `-Δ` are `k_j^2`.
pub fn radial_wavenumbers(n: usize, eigenvalue: f64, bc: OuterBc, count: usize, k_max: f64) -> Result<Vec<f64>> {
    let nu = crate::geometry::bessel_order(n, eigenvalue);
    let mut out = Vec::with_capacity(count);
    if bc == OuterBc::Neumann && eigenvalue == 0.0 {
        out.push(0.0);
    }
    let f = |k: f64| bc_function(n, nu, bc, k);
    let step = 0.02;
    let mut a = 1e-3;
    let mut fa = f(a);
    while out.len() < count && a < k_max {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            out.push(refine_root(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    if out.len() < count {
        return Err(Error::TooFewRoots {
            found: out.len(),
            requested: count,
        });
    }
    Ok(out)
}

/// Bisection to adjacent floats, then a secant step if it helps.
fn refine_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let fb = f(b);
    let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if fb != fa {
        let s = a - fa * (b - a) / (fb - fa);
        if s >= a && s <= b && f(s).abs() < fx.abs() {
            return s;
        }
    }
    x
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
