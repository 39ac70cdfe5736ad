//! Log-radial grids, per-mode radial fields and Mellin–Sobolev norms.
//!
//! With `τ = log x` the operator `x∂_x` becomes `∂_τ` and the measure
//! `dx/x` becomes `dτ`, so the collar integrals are plain integrals in τ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::poly::rat;
use crate::asymptotics::Term;
use crate::algebra::poly::Coeff;
use crate::error::{Error, Result};
use crate::geometry::{exact_real, Mode};

/// Uniform grid `τ_j = τ_min + j h`, `j = 0..=intervals`, ending at `τ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub tau_min: f64,
    pub intervals: usize,
}

impl LogGrid {
    pub fn new(tau_min: f64, intervals: usize) -> Result<Self> {
        if !(tau_min < 0.0) || !tau_min.is_finite() {
            return Err(Error::InvalidInput(format!("tau_min = {tau_min} must be negative")));
        }
        if intervals < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 intervals".into()));
        }
        Ok(LogGrid { tau_min, intervals })
    }

    pub fn h(&self) -> f64 {
        -self.tau_min / self.intervals as f64
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tau(&self, j: usize) -> f64 {
        if j == self.intervals {
            0.0
        } else {
            self.tau_min + j as f64 * self.h()
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        self.tau(j).exp()
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.tau(j)).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Half the spacing and twice the depth: `h/2` over `[2 τ_min, 0]`.
    pub fn refine_deeper(&self) -> LogGrid {
        LogGrid {
            tau_min: 2.0 * self.tau_min,
            intervals: 4 * self.intervals,
        }
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.len()];
        w[0] = h / 2.0;
        w[self.intervals] = h / 2.0;
        w
    }
}

/// Cut-off profile `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Cutoff {
    /// 1 on `x <= 1/2`, 0 on `x >= 1`, smooth in between.
    Smooth,
    /// 1 on `x <= x0`, 0 beyond.
    Sharp { x0: f64 },
}

fn smooth_step(t: f64) -> f64 {
    // 0 for t <= 0, 1 for t >= 1
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

impl Cutoff {
    pub fn omega(&self, x: f64) -> f64 {
        match *self {
            Cutoff::Smooth => smooth_step((1.0 - x) / 0.5),
            Cutoff::Sharp { x0 } => {
                if x <= x0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Per-mode complex samples on a shared grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: LogGrid,
    pub n: usize,
    /// Cross-section volume.
    pub volume: f64,
    pub modes: Vec<Mode>,
    pub values: Vec<Vec<Complex64>>,
    pub cutoff: Cutoff,
}

impl RadialField {
    pub fn zeros(grid: LogGrid, n: usize, volume: f64, modes: Vec<Mode>) -> Self {
        let values = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; modes.len()];
        RadialField {
            grid,
            n,
            volume,
            modes,
            values,
            cutoff: Cutoff::Smooth,
        }
    }

    /// Samples `f(mode index, x)` on the grid.
    pub fn from_fn(
        grid: LogGrid,
        n: usize,
        volume: f64,
        modes: Vec<Mode>,
        f: impl Fn(usize, f64) -> Complex64,
    ) -> Self {
        let mut u = Self::zeros(grid, n, volume, modes);
        for (m, row) in u.values.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(m, grid.x(j));
            }
        }
        u
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.into()))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut u = self.clone();
        u.values.iter_mut().flatten().for_each(|v| *v *= c);
        u
    }

    /// `a·self + b·other` on the same grid and modes.
    pub fn axpby(&self, a: Complex64, other: &RadialField, b: Complex64) -> Self {
        let mut u = self.clone();
        for (row, orow) in u.values.iter_mut().zip(&other.values) {
            for (v, o) in row.iter_mut().zip(orow) {
                *v = a * *v + b * o;
            }
        }
        u
    }

    pub fn max_abs_diff(&self, other: &RadialField) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_finite(&self) -> Result<()> {
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("field contains non-finite values".into()));
        }
        Ok(())
    }
}

/// First τ-derivative, central inside and second-order one-sided at the ends.
pub fn d_tau(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return d;
    }
    for j in 1..n - 1 {
        d[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

/// `Σ_{k+a<=s} |λ|^a ∫ |x^{w} ∂_τ^k v|^2 dτ` by the trapezoid rule.
fn weighted_sobolev_sq(v: &[Complex64], grid: &LogGrid, w_exp: f64, eigenvalue: f64, s: usize) -> f64 {
    let qw = grid.weights();
    let xs = grid.xs();
    let mut deriv = v.to_vec();
    let mut total = 0.0;
    for k in 0..=s {
        let base: f64 = deriv
            .iter()
            .zip(&xs)
            .zip(&qw)
            .map(|((u, x), q)| q * (x.powf(w_exp) * u.norm()).powi(2))
            .sum();
        // spectral weights for the y-derivatives of total order a <= s-k
        let ysum: f64 = (0..=s - k).map(|a| eigenvalue.abs().powi(a as i32)).sum();
        total += base * ysum;
        if k < s {
            deriv = d_tau(&deriv, grid.h());
        }
    }
    total
}

/// `‖u‖_{H^{s,γ}_p} = ‖ω u‖_collar + ‖(1-ω) u‖_interior`.
pub fn mellin_norm(u: &RadialField, s: usize, gamma: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("p = {p} must lie in (1, ∞)")));
    }
    u.check_finite()?;
    let two = p == 2.0;
    if !two && s >= 1 {
        return Err(Error::Unsupported("p != 2 with s >= 1".into()));
    }
    let xs = u.grid.xs();
    let omega: Vec<f64> = xs.iter().map(|&x| u.cutoff.omega(x)).collect();
    let w_collar = (u.n as f64 + 1.0) / 2.0 - gamma;
    if !two {
        let active: Vec<_> = (0..u.modes.len())
            .filter(|&m| u.values[m].iter().any(|v| v.norm() != 0.0))
            .collect();
        if active.len() > 1 || active.iter().any(|&m| u.modes[m].eigenvalue != 0.0) {
            return Err(Error::Unsupported(
                "p != 2 is supported only for fields carried by the constant mode".into(),
            ));
        }
        let Some(&m) = active.first() else { return Ok(0.0) };
        let qw = u.grid.weights();
        let mut collar = 0.0;
        let mut interior = 0.0;
        for j in 0..xs.len() {
            let v = u.values[m][j].norm();
            collar += qw[j] * (xs[j].powf(w_collar) * omega[j] * v).powf(p);
            interior += qw[j] * ((1.0 - omega[j]) * v).powf(p);
        }
        let vol = u.volume.powf(1.0 / p);
        return Ok(vol * (collar.powf(1.0 / p) + interior.powf(1.0 / p)));
    }
    let mut collar = 0.0;
    let mut interior = 0.0;
    for (m, mode) in u.modes.iter().enumerate() {
        let inner: Vec<Complex64> = u.values[m].iter().zip(&omega).map(|(v, w)| v * w).collect();
        let outer: Vec<Complex64> = u.values[m].iter().zip(&omega).map(|(v, w)| v * (1.0 - w)).collect();
        collar += weighted_sobolev_sq(&inner, &u.grid, w_collar, mode.eigenvalue, s);
        interior += weighted_sobolev_sq(&outer, &u.grid, 0.0, mode.eigenvalue, s);
    }
    Ok((u.volume * collar).sqrt() + (u.volume * interior).sqrt())
}

/// Whether `ω x^{-ρ} log^m x` lies in `H^{s,γ}_p` near the tip:
/// `Re(-ρ) + (n+1)/2 - γ > 0`. Equality is reported as critical.
pub fn membership_probe<T: Coeff>(term: &Term<T>, n: usize, gamma: f64) -> Result<bool> {
    let root = term.rho_root();
    let (g, g_exact) = exact_real(gamma);
    if let (Some(r), true) = (&root.exact, g_exact) {
        let margin = -r.re.clone() + rat(n as i64 + 1, 2) - g;
        if margin == rat(0, 1) {
            return Err(Error::CriticalExponent(format!(
                "Re(-ρ) + (n+1)/2 - γ = 0 for ρ = {}",
                root.value
            )));
        }
        return Ok(margin > rat(0, 1));
    }
    let margin = -root.value.re + (n as f64 + 1.0) / 2.0 - gamma;
    if margin.abs() <= 1e-12 {
        return Err(Error::CriticalExponent(format!(
            "Re(-ρ) + (n+1)/2 - γ ≈ 0 for ρ = {}",
            root.value
        )));
    }
    Ok(margin > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::crat;
    use std::f64::consts::PI;

    fn zero_mode() -> Vec<Mode> {
        vec![Mode {
            label: "k=0".into(),
            group: 0,
            eigenvalue: 0.0,
        }]
    }

    #[test]
    fn grid_basics() {
        let g = LogGrid::new(-4.0, 8).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.x(8), 1.0);
        assert!((g.h() - 0.5).abs() < 1e-15);
        assert!(LogGrid::new(1.0, 8).is_err());
    }

    fn sharp_power_field(intervals: usize) -> RadialField {
        // τ_min = -16 ln 2 puts ln(1/2) on a node when 16 | intervals
        let g = LogGrid::new(-16.0 * 2f64.ln(), intervals).unwrap();
        let jump = intervals * 15 / 16;
        assert!((g.tau(jump) - 0.5f64.ln()).abs() < 1e-12);
        let mut u = RadialField::zeros(g, 1, 2.0 * PI, zero_mode());
        for j in 0..=jump {
            // the trapezoid weight of |u|^2 at the jump node is halved
            let s = if j == jump { 0.5f64.sqrt() } else { 1.0 };
            u.values[0][j] = Complex64::new(s * g.x(j), 0.0);
        }
        u
    }

    #[test]
    fn sharp_cutoff_power_closed_form() {
        let exact = PI / 32.0;
        let e1 = (mellin_norm(&sharp_power_field(1024), 0, 0.0, 2.0).unwrap().powi(2) - exact).abs();
        let n4 = mellin_norm(&sharp_power_field(4096), 0, 0.0, 2.0).unwrap();
        let e4 = (n4 * n4 - exact).abs();
        // trapezoid error h^2 |f''|/12 relative to the integral of e^{4τ}
        assert!(e1 < 2e-4 * exact, "{e1}");
        assert!((e1 / e4 - 16.0).abs() < 0.5, "{}", e1 / e4);
        assert!((n4 - 0.313329).abs() < 1e-5);
    }

    #[test]
    fn zero_field() {
        let g = LogGrid::new(-5.0, 50).unwrap();
        let u = RadialField::zeros(g, 1, 1.0, zero_mode());
        assert_eq!(mellin_norm(&u, 2, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let g = LogGrid::new(-5.0, 50).unwrap();
        let mut u = RadialField::zeros(g, 1, 1.0, zero_mode());
        assert!(matches!(mellin_norm(&u, 1, 0.0, 3.0), Err(Error::Unsupported(_))));
        u.values[0][3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(mellin_norm(&u, 0, 0.0, 2.0), Err(Error::Data(_))));
    }

    fn t(rho: i64, d: i64, m: usize) -> Term<crate::algebra::poly::CRat> {
        Term {
            rho: crat(rho, d),
            m,
            group: 0,
            mode: "k=0".into(),
            c: crat(1, 1),
        }
    }

    #[test]
    fn probes() {
        assert!(membership_probe(&t(-1, 5, 0), 1, 0.5).unwrap());
        assert!(!membership_probe(&t(1, 1, 0), 1, 0.5).unwrap());
        assert!(membership_probe(&t(0, 1, 1), 1, -0.5).unwrap());
        assert!(matches!(
            membership_probe(&t(1, 2, 0), 1, 0.5),
            Err(Error::CriticalExponent(_))
        ));
    }
}
