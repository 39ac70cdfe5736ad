//! Per-mode radial heat flow `u' - Δu = f` on the model cone `[0,1] × Y`.
//!
//! Each cross-section mode evolves independently under
//! `x^{-2}((x∂_x)^2 + (n-1)(x∂_x) + λ)`, discretised in `τ = log x`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bessel_order, Mode};
use crate::linalg::{Tridiagonal, TriLu};
use crate::mellin::{LogGrid, RadialField};
use crate::special::{radial_eigenfunction, radial_wavenumbers, OuterBc};

type C64 = Complex64;

/// Discrete radial Laplacian of one mode.
#[derive(Clone, Debug)]
pub struct RadialOperator {
    pub n: usize,
    pub eigenvalue: f64,
    pub grid: LogGrid,
    pub bc: OuterBc,
    /// Acts on the unknown nodes; Dirichlet drops the outer node.
    pub matrix: Tridiagonal,
}

impl RadialOperator {
    pub fn unknowns(&self) -> usize {
        self.matrix.dim()
    }

    pub fn restrict(&self, full: &[C64]) -> Vec<C64> {
        full[..self.unknowns()].to_vec()
    }

    pub fn extend(&self, v: Vec<C64>) -> Vec<C64> {
        let mut v = v;
        v.resize(self.grid.len(), C64::new(0.0, 0.0));
        v
    }

    /// `Δu` on all grid nodes (zero at a Dirichlet outer node).
    pub fn apply(&self, full: &[C64]) -> Vec<C64> {
        self.extend(self.matrix.matvec(&self.restrict(full)))
    }
}

/// Exponent `s_+ = -(n-1)/2 + ν` of the regular solution `x^{s_+}`.
pub fn regular_exponent(n: usize, eigenvalue: f64) -> f64 {
    -(n as f64 - 1.0) / 2.0 + bessel_order(n, eigenvalue)
}

pub fn assemble_mode_operator(n: usize, eigenvalue: f64, grid: &LogGrid, bc: OuterBc) -> RadialOperator {
    let big_j = grid.intervals;
    let h = grid.h();
    let b = (n as f64 - 1.0) / (2.0 * h);
    let lo = 1.0 / (h * h) - b;
    let hi = 1.0 / (h * h) + b;
    let mid = -2.0 / (h * h) + eigenvalue;
    let size = match bc {
        OuterBc::Dirichlet => big_j,
        OuterBc::Neumann => big_j + 1,
    };
    let mut t = Tridiagonal::zeros(size);
    let c = |v: f64| C64::new(v, 0.0);
    for j in 0..size {
        let s = (-2.0 * grid.tau(j)).exp();
        let (mut l, mut d, mut u) = (lo, mid, hi);
        if j == 0 {
            // inner ghost u_{-1}
            if eigenvalue == 0.0 {
                u += l;
            } else {
                d += l * (-regular_exponent(n, eigenvalue) * h).exp();
            }
            l = 0.0;
        }
        if j == big_j {
            // Neumann ghost u_{J+1} = u_{J-1}
            l += u;
            u = 0.0;
        }
        t.diag[j] = c(s * d);
        if j > 0 {
            t.sub[j - 1] = c(s * l);
        }
        if j + 1 < size {
            t.sup[j] = c(s * u);
        }
    }
    RadialOperator {
        n,
        eigenvalue,
        grid: *grid,
        bc,
        matrix: t,
    }
}

/// Per-mode source term.
pub trait Forcing: Sync {
    /// Samples on all grid nodes, or `None` where the forcing vanishes.
    fn sample(&self, mode: usize, t: f64, grid: &LogGrid) -> Option<Vec<C64>>;
}

pub struct NoForcing;

impl Forcing for NoForcing {
    fn sample(&self, _: usize, _: f64, _: &LogGrid) -> Option<Vec<C64>> {
        None
    }
}

/// Forcing `f(mode, t, x)` evaluated pointwise.
pub struct FnForcing<F>(pub F);

impl<F: Fn(usize, f64, f64) -> C64 + Sync> Forcing for FnForcing<F> {
    fn sample(&self, mode: usize, t: f64, grid: &LogGrid) -> Option<Vec<C64>> {
        Some(grid.xs().into_iter().map(|x| (self.0)(mode, t, x)).collect())
    }
}

/// Piecewise-linear interpolation in time between field snapshots.
pub struct TableForcing {
    pub times: Vec<f64>,
    pub fields: Vec<RadialField>,
}

impl Forcing for TableForcing {
    fn sample(&self, mode: usize, t: f64, _: &LogGrid) -> Option<Vec<C64>> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Some(self.fields.first()?.values[mode].clone());
        }
        if k == self.times.len() {
            return Some(self.fields.last()?.values[mode].clone());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        let a = &self.fields[k - 1].values[mode];
        let b = &self.fields[k].values[mode];
        Some(a.iter().zip(b).map(|(a, b)| a * (1.0 - w) + b * w).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatConfig {
    pub grid: LogGrid,
    pub t_final: f64,
    pub dt: f64,
    pub outer_bc: OuterBc,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Snapshot times; `t_final` is always included.
    #[serde(default)]
    pub output_times: Vec<f64>,
    /// Initial steps replaced by two implicit Euler half-steps.
    #[serde(default = "default_rannacher")]
    pub rannacher_steps: usize,
}

fn default_theta() -> f64 {
    0.5
}

fn default_rannacher() -> usize {
    2
}

impl HeatConfig {
    pub fn new(grid: LogGrid, t_final: f64, dt: f64, outer_bc: OuterBc) -> Self {
        HeatConfig {
            grid,
            t_final,
            dt,
            outer_bc,
            theta: default_theta(),
            output_times: Vec::new(),
            rannacher_steps: default_rannacher(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidInput(format!("T = {} must be positive", self.t_final)));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::InvalidInput(format!("dt = {} must lie in (0, 1]", self.dt)));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::InvalidInput(format!("theta = {} must lie in [1/2, 1]", self.theta)));
        }
        if self.output_times.iter().any(|&t| !(0.0..=self.t_final).contains(&t)) {
            return Err(Error::InvalidInput("output times must lie in [0, T]".into()));
        }
        Ok(())
    }

    /// Sorted, deduplicated output times ending at `T`.
    pub fn schedule(&self) -> Vec<f64> {
        let mut ts = self.output_times.clone();
        ts.push(self.t_final);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * self.t_final);
        ts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTrajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialField>,
}

impl HeatTrajectory {
    pub fn last(&self) -> &RadialField {
        self.snapshots.last().expect("trajectory is never empty")
    }
}

/// One θ-step `(I - θ dt L) u_new = (I + (1-θ) dt L) u_old + dt f_blend`
/// on all grid nodes.
pub fn step(
    op: &RadialOperator,
    u: &[C64],
    f_old: Option<&[C64]>,
    f_new: Option<&[C64]>,
    dt: f64,
    theta: f64,
) -> Result<Vec<C64>> {
    let lhs = op.matrix.affine(C64::new(-theta * dt, 0.0), C64::new(1.0, 0.0)).factor()?;
    let mut v = op.restrict(u);
    explicit_part(op, &mut v, f_old, f_new, dt, theta);
    lhs.solve_in_place(&mut v);
    Ok(op.extend(v))
}

fn explicit_part(op: &RadialOperator, v: &mut Vec<C64>, f_old: Option<&[C64]>, f_new: Option<&[C64]>, dt: f64, theta: f64) {
    if theta < 1.0 {
        let lv = op.matrix.matvec(v);
        for (a, b) in v.iter_mut().zip(lv) {
            *a += (1.0 - theta) * dt * b;
        }
    }
    for (f, w) in [(f_old, 1.0 - theta), (f_new, theta)] {
        if let Some(f) = f {
            if w > 0.0 {
                for (a, b) in v.iter_mut().zip(f) {
                    *a += dt * w * b;
                }
            }
        }
    }
}

struct Stepper {
    dt: f64,
    theta: f64,
    lu: TriLu,
}

impl Stepper {
    fn new(op: &RadialOperator, dt: f64, theta: f64) -> Result<Self> {
        let lu = op.matrix.affine(C64::new(-theta * dt, 0.0), C64::new(1.0, 0.0)).factor()?;
        Ok(Stepper { dt, theta, lu })
    }

    fn advance(&self, op: &RadialOperator, v: &mut Vec<C64>, t: f64, mode: usize, forcing: &dyn Forcing) {
        let sample = |s: f64| forcing.sample(mode, s, &op.grid).map(|f| op.restrict(&f));
        let f_old = if self.theta < 1.0 { sample(t) } else { None };
        let f_new = sample(t + self.dt);
        explicit_part(op, v, f_old.as_deref(), f_new.as_deref(), self.dt, self.theta);
        self.lu.solve_in_place(v);
    }
}

fn evolve_mode(
    op: &RadialOperator,
    u0: &[C64],
    mode: usize,
    forcing: &dyn Forcing,
    cfg: &HeatConfig,
    schedule: &[f64],
) -> Result<Vec<Vec<C64>>> {
    let mut v = op.restrict(u0);
    let mut out = Vec::with_capacity(schedule.len());
    let mut t = 0.0;
    let mut started = false;
    for &target in schedule {
        let span = target - t;
        if span > 0.0 {
            let steps = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            let main = Stepper::new(op, dt, cfg.theta)?;
            let mut first = 0;
            if !started && cfg.theta < 1.0 && cfg.rannacher_steps > 0 {
                let half = Stepper::new(op, dt / 2.0, 1.0)?;
                first = cfg.rannacher_steps.min(steps);
                for _ in 0..2 * first {
                    half.advance(op, &mut v, t, mode, forcing);
                    t += dt / 2.0;
                }
            }
            started = true;
            for _ in first..steps {
                main.advance(op, &mut v, t, mode, forcing);
                t += dt;
            }
            t = target;
        }
        out.push(op.extend(v.clone()));
    }
    Ok(out)
}

pub fn solve_heat(u0: &RadialField, forcing: &dyn Forcing, cfg: &HeatConfig) -> Result<HeatTrajectory> {
    cfg.validate()?;
    if u0.grid != cfg.grid {
        return Err(Error::InvalidInput("initial field grid differs from the configured grid".into()));
    }
    if u0.values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Data("initial field contains non-finite values".into()));
    }
    let schedule = cfg.schedule();
    let per_mode: Vec<Vec<Vec<C64>>> = u0
        .modes
        .par_iter()
        .enumerate()
        .map(|(m, mode)| {
            let op = assemble_mode_operator(u0.n, mode.eigenvalue, &cfg.grid, cfg.outer_bc);
            evolve_mode(&op, &u0.values[m], m, forcing, cfg, &schedule)
        })
        .collect::<Result<_>>()?;
    let snapshots = (0..schedule.len())
        .map(|s| {
            let mut f = u0.clone();
            for (m, row) in f.values.iter_mut().enumerate() {
                *row = per_mode[m][s].clone();
            }
            f
        })
        .collect();
    Ok(HeatTrajectory {
        times: schedule,
        snapshots,
    })
}

/// `Σ_j a_j e^{-k_j^2 t} x^{-(n-1)/2} J_ν(k_j x)` over the first
/// `coeffs.len()` radial wavenumbers.
pub fn bessel_series_solution(
    coeffs: &[C64],
    n: usize,
    eigenvalue: f64,
    t: f64,
    xs: &[f64],
    bc: OuterBc,
) -> Result<Vec<C64>> {
    let ks = radial_wavenumbers(n, eigenvalue, bc, coeffs.len(), 1e4)?;
    let nu = bessel_order(n, eigenvalue);
    Ok(xs
        .iter()
        .map(|&x| {
            coeffs
                .iter()
                .zip(&ks)
                .map(|(a, &k)| a * (-k * k * t).exp() * radial_eigenfunction(n, nu, k, x))
                .sum()
        })
        .collect())
}

/// Physical `L^2` norm `(vol Σ_modes ∫ |u|^2 x^{n+1} dτ)^{1/2}` by the
/// trapezoid rule.
pub fn l2_norm(u: &RadialField) -> f64 {
    let w = u.grid.weights();
    let xs = u.grid.xs();
    let e = u.n as f64 + 1.0;
    let s: f64 = u
        .values
        .iter()
        .map(|row| {
            row.iter()
                .zip(&xs)
                .zip(&w)
                .map(|((v, x), q)| q * x.powf(e) * v.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    (u.volume * s).sqrt()
}

/// Discrete `Δu` for every mode of a field.
pub fn apply_laplacian(u: &RadialField, bc: OuterBc) -> RadialField {
    let mut out = u.clone();
    out.values = u
        .modes
        .par_iter()
        .zip(&u.values)
        .map(|(mode, row)| assemble_mode_operator(u.n, mode.eigenvalue, &u.grid, bc).apply(row))
        .collect();
    out
}

/// A field carried by one mode.
pub fn single_mode_field(grid: LogGrid, n: usize, volume: f64, modes: Vec<Mode>, mode: usize, f: impl Fn(f64) -> C64) -> RadialField {
    RadialField::from_fn(grid, n, volume, modes, |m, x| if m == mode { f(x) } else { C64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn zero_mode() -> Vec<Mode> {
        vec![Mode {
            label: "k=0".into(),
            group: 0,
            eigenvalue: 0.0,
        }]
    }

    #[test]
    fn interior_stencil_n1() {
        let g = LogGrid::new(-4.0, 40).unwrap();
        let op = assemble_mode_operator(1, 0.0, &g, OuterBc::Neumann);
        let h = g.h();
        let j = 17;
        let s = (-2.0 * g.tau(j)).exp() / (h * h);
        assert!((op.matrix.sub[j - 1].re - s).abs() < 1e-9 * s);
        assert!((op.matrix.diag[j].re + 2.0 * s).abs() < 1e-9 * s);
        assert!((op.matrix.sup[j].re - s).abs() < 1e-9 * s);
    }

    #[test]
    fn constants_are_harmonic() {
        let g = LogGrid::new(-6.0, 60).unwrap();
        let op = assemble_mode_operator(3, 0.0, &g, OuterBc::Neumann);
        let r = op.apply(&vec![c(1.0); g.len()]);
        let h = g.h();
        for (j, v) in r.iter().enumerate() {
            let scale = (-2.0 * g.tau(j)).exp() / (h * h);
            assert!(v.norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn regular_solution_residual_is_second_order() {
        // n = 2, λ = -2: indicial roots of s^2 + s - 2 are 1 and -2
        let resid = |intervals| {
            let g = LogGrid::new(-3.0, intervals).unwrap();
            let op = assemble_mode_operator(2, -2.0, &g, OuterBc::Neumann);
            let u: Vec<C64> = g.xs().iter().map(|&x| c(x)).collect();
            let r = op.apply(&u);
            (1..g.intervals).map(|j| r[j].norm() * g.x(j)).fold(0.0, f64::max)
        };
        let (a, b) = (resid(64), resid(128));
        assert!(a < 1e-2);
        assert!((a / b - 4.0).abs() < 0.2);
    }

    #[test]
    fn zero_stays_zero() {
        let g = LogGrid::new(-5.0, 50).unwrap();
        let op = assemble_mode_operator(1, -1.0, &g, OuterBc::Dirichlet);
        let u = step(&op, &vec![c(0.0); g.len()], None, None, 1e-2, 0.5).unwrap();
        assert!(u.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_is_steady_under_neumann() {
        let g = LogGrid::new(-10.0, 400).unwrap();
        let u0 = RadialField::from_fn(g, 1, 2.0 * PI, zero_mode(), |_, _| c(1.0));
        let mut cfg = HeatConfig::new(g, 0.2, 1e-3, OuterBc::Neumann);
        cfg.output_times = vec![0.05, 0.1];
        let traj = solve_heat(&u0, &NoForcing, &cfg).unwrap();
        assert_eq!(traj.times, vec![0.05, 0.1, 0.2]);
        for s in &traj.snapshots {
            assert!(s.values[0].iter().all(|v| (v - 1.0).norm() < 1e-10));
        }
    }

    #[test]
    fn first_eigenfunction_decays() {
        let g = LogGrid::new(-8.0, 512).unwrap();
        let k = 2.404825557695773;
        let u0 = RadialField::from_fn(g, 1, 2.0 * PI, zero_mode(), |_, x| c(crate::special::bessel_j(0.0, k * x)));
        let cfg = HeatConfig::new(g, 0.1, 1e-3, OuterBc::Dirichlet);
        let traj = solve_heat(&u0, &NoForcing, &cfg).unwrap();
        let expect = u0.scaled(c((-k * k * 0.1).exp()));
        let err = l2_norm(&traj.last().axpby(c(1.0), &expect, c(-1.0))) / l2_norm(&expect);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn series_solution_at_zero_time_reproduces_profile() {
        let xs = [0.0, 0.1, 0.5, 0.9];
        let v = bessel_series_solution(&[c(2.0)], 1, -1.0, 0.0, &xs, OuterBc::Dirichlet).unwrap();
        let k = radial_wavenumbers(1, -1.0, OuterBc::Dirichlet, 1, 50.0).unwrap()[0];
        for (x, v) in xs.iter().zip(&v) {
            assert!((v.re - 2.0 * crate::special::bessel_j(1.0, k * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let g = LogGrid::new(-5.0, 50).unwrap();
        let mut cfg = HeatConfig::new(g, 0.1, 1e-3, OuterBc::Neumann);
        cfg.theta = 0.3;
        assert!(cfg.validate().is_err());
        cfg.theta = 0.5;
        cfg.dt = 2.0;
        assert!(cfg.validate().is_err());
    }
}
