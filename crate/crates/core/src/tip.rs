//! Near-tip expansion fits of radial fields against a predicted basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{enumerate_asymptotics, AsymptoticsBasis, BasisTerm};
use crate::error::{Error, Result};
use crate::heat::HeatTrajectory;
use crate::mellin::RadialField;
use crate::symbols::{pole_set_power, ConeOperatorSpec};

type C64 = Complex64;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// `[x_a, x_b]`; defaults to `[4 x_min, 1/8]`.
    pub window: Option<(f64, f64)>,
    /// Extra columns fitted alongside the basis but not removed from the
    /// residual; they absorb the next terms of the expansion.
    #[serde(skip)]
    pub tail: Vec<BasisTerm>,
    pub max_cond: f64,
    /// Cap on the points used by the log-log regression.
    pub regression_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            window: None,
            tail: Vec::new(),
            max_cond: 1e10,
            regression_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedTerm {
    pub rho: C64,
    pub m: usize,
    pub mode: String,
    pub c: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeResidual {
    pub mode: String,
    /// `(h Σ |r_j|^2)^{1/2}` over the window.
    pub residual: f64,
    /// Slope of `log|r|` against `log x` on the inner half of the window.
    pub decay_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TipFit {
    pub t: f64,
    pub window: (f64, f64),
    pub terms: Vec<FittedTerm>,
    pub modes: Vec<ModeResidual>,
}

impl TipFit {
    pub fn coefficient(&self, mode: &str, rho: f64, m: usize) -> Option<C64> {
        self.terms
            .iter()
            .find(|t| t.mode == mode && t.m == m && (t.rho - C64::new(rho, 0.0)).norm() < 1e-9)
            .map(|t| t.c)
    }

    pub fn residual(&self, mode: &str) -> Option<&ModeResidual> {
        self.modes.iter().find(|r| r.mode == mode)
    }
}

/// Terms of `Q_{A^{k+1}}, ..., Q_{A^{k+levels}}` that are not already in
/// the level-`k` basis.
pub fn tail_terms(spec: &ConeOperatorSpec, basis: &AsymptoticsBasis, levels: usize) -> Result<Vec<BasisTerm>> {
    let mut out: Vec<BasisTerm> = Vec::new();
    for k in basis.power + 1..=basis.power + levels {
        let ps = pole_set_power(spec, basis.gamma, k, None)?;
        for t in enumerate_asymptotics(&ps).terms {
            let known = basis.contains(t.group, &t.mode, &t.rho_root(), t.m)
                || out.iter().any(|o| o.mode == t.mode && o.m == t.m && o.rho_root().same_point(&t.rho_root(), 1e-9));
            if !known {
                out.push(t);
            }
        }
    }
    Ok(out)
}

fn window_of(u: &RadialField, opts: &FitOptions) -> Result<(f64, f64, usize, usize)> {
    let x_min = u.grid.x(0);
    let (xa, xb) = opts.window.unwrap_or((4.0 * x_min, 0.125));
    if !(xa > x_min && xa < xb && xb <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "fit window [{xa}, {xb}] must satisfy x_min = {x_min} < x_a < x_b <= 1"
        )));
    }
    let xs = u.grid.xs();
    let ja = xs.partition_point(|&x| x < xa * (1.0 - 1e-12));
    let jb = xs.partition_point(|&x| x <= xb * (1.0 + 1e-12));
    if jb <= ja + 1 {
        return Err(Error::InvalidInput("fit window contains fewer than two grid points".into()));
    }
    Ok((xa, xb, ja, jb))
}

/// Least-squares fit with column scaling; returns the coefficients.
fn least_squares(cols: &[Vec<C64>], data: &[C64], max_cond: f64) -> Result<Vec<C64>> {
    let rows = data.len();
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    if rows < cols.len() {
        return Err(Error::IllConditionedFit { cond: f64::INFINITY });
    }
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    if scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::IllConditionedFit { cond: f64::INFINITY });
    }
    let a = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i] / scale[j]);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if !(cond <= max_cond) {
        return Err(Error::IllConditionedFit { cond });
    }
    let b = DMatrix::from_column_slice(rows, 1, data);
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Data(format!("least squares failed: {e}")))?;
    Ok((0..cols.len()).map(|j| x[(j, 0)] / scale[j]).collect())
}

/// Slope of `log|r|` vs `log x` on `[x_a, sqrt(x_a x_b)]`.
fn decay_exponent(xs: &[f64], r: &[C64], xa: f64, xb: f64, cap: usize) -> f64 {
    let xm = (xa * xb).sqrt();
    let idx: Vec<usize> = (0..xs.len()).filter(|&j| xs[j] >= xa && xs[j] <= xm && r[j].norm() > 0.0).collect();
    if idx.len() < 2 {
        return f64::NAN;
    }
    let stride = idx.len().div_ceil(cap.max(2));
    let pts: Vec<(f64, f64)> = idx.iter().step_by(stride).map(|&j| (xs[j].ln(), r[j].norm().ln())).collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    sxy / sxx
}

pub fn fit_tip_expansion(u: &RadialField, basis: &AsymptoticsBasis, opts: &FitOptions, t: f64) -> Result<TipFit> {
    let (xa, xb, ja, jb) = window_of(u, opts)?;
    for b in &basis.terms {
        u.mode_index(&b.mode)?;
    }
    let xs: Vec<f64> = u.grid.xs()[ja..jb].to_vec();
    let h = u.grid.h();
    let per_mode: Vec<(Vec<FittedTerm>, ModeResidual)> = u
        .modes
        .par_iter()
        .enumerate()
        .map(|(m, mode)| {
            let data = &u.values[m][ja..jb];
            let own: Vec<&BasisTerm> = basis.for_mode(&mode.label).collect();
            let tail: Vec<&BasisTerm> = opts.tail.iter().filter(|b| b.mode == mode.label).collect();
            let cols: Vec<Vec<C64>> = own
                .iter()
                .chain(&tail)
                .map(|b| xs.iter().map(|&x| b.eval(x)).collect())
                .collect();
            let c = least_squares(&cols, data, opts.max_cond)?;
            let mut r = data.to_vec();
            for (col, cj) in cols.iter().zip(&c).take(own.len()) {
                for (ri, v) in r.iter_mut().zip(col) {
                    *ri -= cj * v;
                }
            }
            let residual = (h * r.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
            let fitted = own
                .iter()
                .zip(&c)
                .map(|(b, &c)| FittedTerm {
                    rho: b.rho,
                    m: b.m,
                    mode: b.mode.clone(),
                    c,
                })
                .collect();
            let res = ModeResidual {
                mode: mode.label.clone(),
                residual,
                decay_exponent: decay_exponent(&xs, &r, xa, xb, opts.regression_points),
            };
            Ok((fitted, res))
        })
        .collect::<Result<_>>()?;
    let mut terms = Vec::new();
    let mut modes = Vec::new();
    for (f, r) in per_mode {
        terms.extend(f);
        modes.push(r);
    }
    Ok(TipFit {
        t,
        window: (xa, xb),
        terms,
        modes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionTrack {
    pub fits: Vec<TipFit>,
    /// Largest `|Δc|` between consecutive fits, per term in fit order.
    pub max_jumps: Vec<f64>,
    pub warnings: Vec<String>,
}

impl DecompositionTrack {
    pub fn path(&self, mode: &str, rho: f64, m: usize) -> Vec<C64> {
        self.fits.iter().filter_map(|f| f.coefficient(mode, rho, m)).collect()
    }

    pub fn max_jump(&self) -> f64 {
        self.max_jumps.iter().copied().fold(0.0, f64::max)
    }
}

/// One fit per snapshot. A jump `|Δc| > 10 Δt (‖f‖ + max|c|)` between
/// snapshots `Δt` apart is reported as a warning.
pub fn decomposition_track(
    traj: &HeatTrajectory,
    basis: &AsymptoticsBasis,
    opts: &FitOptions,
    forcing_scale: f64,
) -> Result<DecompositionTrack> {
    let fits: Vec<TipFit> = traj
        .snapshots
        .par_iter()
        .zip(&traj.times)
        .map(|(u, &t)| fit_tip_expansion(u, basis, opts, t))
        .collect::<Result<_>>()?;
    let nterms = fits.first().map_or(0, |f| f.terms.len());
    let mut max_jumps = vec![0.0f64; nterms];
    let mut warnings = Vec::new();
    for w in fits.windows(2) {
        let dt = w[1].t - w[0].t;
        let scale = w.iter().flat_map(|f| &f.terms).map(|t| t.c.norm()).fold(0.0, f64::max);
        let bound = 10.0 * dt * (forcing_scale + scale);
        for (i, (a, b)) in w[0].terms.iter().zip(&w[1].terms).enumerate() {
            let jump = (b.c - a.c).norm();
            max_jumps[i] = max_jumps[i].max(jump);
            if jump > bound {
                warnings.push(format!(
                    "jump {jump:.3e} in c(ρ={}, m={}, {}) between t={} and t={} exceeds {bound:.3e}",
                    a.rho, a.m, a.mode, w[0].t, w[1].t
                ));
            }
        }
    }
    Ok(DecompositionTrack {
        fits,
        max_jumps,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mode_table, Circle, CrossSectionModel};
    use crate::mellin::LogGrid;
    use crate::symbols::{laplacian, pole_set};
    use std::f64::consts::PI;

    fn setup(l: f64, groups: usize) -> (ConeOperatorSpec, Vec<crate::geometry::Mode>) {
        let groups = Circle { circumference: l }.groups(groups);
        let spec = laplacian(1, &groups);
        (spec, mode_table(&groups))
    }

    #[test]
    fn recovers_its_own_model() {
        // circle of circumference π: ν_1 = 2, so the k=±1 profile is x^2
        let (spec, modes) = setup(PI, 2);
        let basis = enumerate_asymptotics(&pole_set_power(&spec, 0.0, 2, None).unwrap());
        let g = LogGrid::new(-10.0, 2000).unwrap();
        let k1 = modes.iter().position(|m| m.label == "k=+1").unwrap();
        let u = RadialField::from_fn(g, 1, PI, modes.clone(), |m, x| match m {
            0 => C64::new(3.0, 0.0),
            _ if m == k1 => C64::new(0.5 * x * x, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let fit = fit_tip_expansion(&u, &basis, &FitOptions::default(), 0.0).unwrap();
        assert!((fit.coefficient("k=0", 0.0, 0).unwrap() - 3.0).norm() < 1e-8);
        assert!(fit.coefficient("k=0", 0.0, 1).unwrap().norm() < 1e-8);
        assert!((fit.coefficient("k=+1", -2.0, 0).unwrap() - 0.5).norm() < 1e-8);
        assert!(fit.coefficient("k=+1", 0.0, 0).unwrap().norm() < 1e-8);
        assert!(fit.modes.iter().all(|r| r.residual < 1e-10));
    }

    #[test]
    fn constant_has_no_mode_one_content() {
        let (spec, modes) = setup(2.0 * PI, 2);
        let basis = enumerate_asymptotics(&pole_set(&spec, -0.5, None).unwrap());
        assert!(basis.for_mode("k=+1").any(|t| t.rho.re == 1.0));
        let g = LogGrid::new(-8.0, 800).unwrap();
        let u = RadialField::from_fn(g, 1, 2.0 * PI, modes, |m, _| C64::new(if m == 0 { 1.0 } else { 0.0 }, 0.0));
        let fit = fit_tip_expansion(&u, &basis, &FitOptions::default(), 0.0).unwrap();
        assert!(fit.coefficient("k=+1", 1.0, 0).unwrap().norm() < 1e-8);
        assert!(fit.coefficient("k=-1", 1.0, 0).unwrap().norm() < 1e-8);
    }

    #[test]
    fn residual_exponent_of_pure_power() {
        let (spec, modes) = setup(PI, 2);
        let basis = enumerate_asymptotics(&pole_set(&spec, 0.0, None).unwrap());
        let g = LogGrid::new(-10.0, 2000).unwrap();
        let u = RadialField::from_fn(g, 1, PI, modes, |m, x| C64::new(if m == 1 { x.powi(2) * (1.0 + x) } else { 0.0 }, 0.0));
        let fit = fit_tip_expansion(&u, &basis, &FitOptions::default(), 0.0).unwrap();
        let e = fit.residual("k=+1").unwrap().decay_exponent;
        assert!((e - 2.0).abs() < 0.01, "{e}");
    }

    #[test]
    fn tail_terms_extend_the_basis() {
        let (spec, _) = setup(PI, 2);
        let basis = enumerate_asymptotics(&pole_set(&spec, 0.0, None).unwrap());
        let tail = tail_terms(&spec, &basis, 1).unwrap();
        assert!(tail.iter().any(|t| t.mode == "k=+1" && (t.rho.re + 2.0).abs() < 1e-12));
        assert!(!tail.iter().any(|t| basis.contains(t.group, &t.mode, &t.rho_root(), t.m)));
    }

    #[test]
    fn ill_conditioned_design_rejected() {
        let cols = vec![vec![C64::new(1.0, 0.0); 10], vec![C64::new(1.0, 0.0); 10]];
        assert!(matches!(
            least_squares(&cols, &vec![C64::new(1.0, 0.0); 10], 1e10),
            Err(Error::IllConditionedFit { .. })
        ));
    }

    #[test]
    fn bad_window_rejected() {
        let (spec, modes) = setup(PI, 2);
        let basis = enumerate_asymptotics(&pole_set(&spec, 0.0, None).unwrap());
        let g = LogGrid::new(-4.0, 100).unwrap();
        let u = RadialField::zeros(g, 1, PI, modes);
        let opts = FitOptions {
            window: Some((1e-6, 0.1)),
            ..FitOptions::default()
        };
        assert!(fit_tip_expansion(&u, &basis, &opts, 0.0).is_err());
    }
}
