//! Resolvent bounds, randomized R-bound estimates and complex powers of
//! finite-dimensional operators via the Dunford integral.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::roots::eigenvalues;
use crate::asymptotics::{Realization, Term};
use crate::error::{Error, Result};
use crate::heat::assemble_mode_operator;
use crate::linalg::{inverse_norm2, negative_eigen_count, norm2, Tridiagonal};
use crate::mellin::{Cutoff, LogGrid};
use crate::special::{gauss_legendre, OuterBc};

type C64 = Complex64;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Above this size tridiagonal resolvent norms use inverse iteration
/// instead of a dense SVD.
const DENSE_MAX: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: String,
    pub n: usize,
    pub eigenvalue: f64,
    pub gamma: f64,
    pub grid: LogGrid,
    pub shift: f64,
    pub outer_bc: OuterBc,
}

#[derive(Clone, Debug)]
pub enum MatrixData {
    Dense(DMatrix<C64>),
    Tri(Tridiagonal),
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub data: MatrixData,
    pub provenance: Option<Provenance>,
}

/// Where the spectrum sits, as needed by the contour and the sector test.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumInfo {
    pub min_abs: f64,
    /// Largest `|arg μ|` over the spectrum.
    pub max_arg: f64,
    pub eigenvalues: Option<Vec<C64>>,
}

impl OperatorMatrix {
    pub fn dense(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput("operator matrix must be square and non-empty".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("operator matrix has non-finite entries".into()));
        }
        Ok(OperatorMatrix {
            data: MatrixData::Dense(m),
            provenance: None,
        })
    }

    pub fn tri(t: Tridiagonal) -> Result<Self> {
        let all = t.diag.iter().chain(&t.sub).chain(&t.sup);
        if t.dim() == 0 || all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("operator matrix is empty or has non-finite entries".into()));
        }
        Ok(OperatorMatrix {
            data: MatrixData::Tri(t),
            provenance: None,
        })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::dense(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&v| c(v)))))
            .expect("finite diagonal")
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            MatrixData::Dense(m) => m.nrows(),
            MatrixData::Tri(t) => t.dim(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match &self.data {
            MatrixData::Dense(m) => (m * nalgebra::DVector::from_column_slice(v)).iter().copied().collect(),
            MatrixData::Tri(t) => t.matvec(v),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.data {
            MatrixData::Dense(m) => m.clone(),
            MatrixData::Tri(t) => t.to_dense(),
        }
    }

    /// An upper bound for the operator 2-norm.
    pub fn norm_bound(&self) -> f64 {
        match &self.data {
            MatrixData::Dense(m) => m.norm(),
            MatrixData::Tri(t) => (t.norm_inf() * t.norm_one()).sqrt(),
        }
    }

    /// `S M S^{-1}` as a dense matrix.
    pub fn conjugated(&self, s: &DMatrix<C64>) -> Result<OperatorMatrix> {
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("conjugating matrix is singular".into()))?;
        Self::dense(s * self.to_dense() * inv)
    }

    /// `(M + λ)^{-1} v`.
    pub fn resolvent_solve(&self, lambda: C64, v: &[C64]) -> Result<Vec<C64>> {
        match &self.data {
            MatrixData::Dense(m) => {
                let a = m + DMatrix::identity(m.nrows(), m.nrows()) * lambda;
                a.lu()
                    .solve(&nalgebra::DVector::from_column_slice(v))
                    .map(|x| x.iter().copied().collect())
                    .ok_or(Error::SingularSystem { row: 0, pivot: 0.0 })
            }
            MatrixData::Tri(t) => t.affine(c(1.0), lambda).solve(v),
        }
    }

    /// `‖(M + λ)^{-1}‖_2`.
    pub fn resolvent_norm(&self, lambda: C64) -> Result<f64> {
        let dense = |m: DMatrix<C64>| -> Result<f64> {
            let n = m.nrows();
            let sv = (m + DMatrix::identity(n, n) * lambda).singular_values();
            let smin = sv.min();
            if !(smin > 0.0) {
                return Err(Error::SingularSystem { row: 0, pivot: smin });
            }
            Ok(1.0 / smin)
        };
        match &self.data {
            MatrixData::Dense(m) => dense(m.clone()),
            MatrixData::Tri(t) if t.dim() <= DENSE_MAX => dense(t.to_dense()),
            MatrixData::Tri(t) => inverse_norm2(&t.affine(c(1.0), lambda), 1e-10, 400),
        }
    }

    pub fn spectrum(&self) -> Result<SpectrumInfo> {
        if let MatrixData::Tri(t) = &self.data {
            if let Some(sym) = t.symmetrized() {
                // real spectrum: count eigenvalues below zero, then the smallest |μ|
                let negatives = negative_eigen_count(t).unwrap_or(0);
                let min_abs = 1.0 / inverse_norm2(&sym, 1e-12, 400)?;
                return Ok(SpectrumInfo {
                    min_abs,
                    max_arg: if negatives > 0 { PI } else { 0.0 },
                    eigenvalues: None,
                });
            }
        }
        let eig = eigenvalues(&self.to_dense()).ok_or_else(|| Error::RootFinding { coeffs: Vec::new() })?;
        let min_abs = eig.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let max_arg = eig.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        Ok(SpectrumInfo {
            min_abs,
            max_arg,
            eigenvalues: Some(eig),
        })
    }

    /// Error unless `-spec(M)` avoids the closed sector `S_θ`.
    pub fn check_sector(&self, theta: f64) -> Result<SpectrumInfo> {
        let info = self.spectrum()?;
        if !(info.min_abs > 0.0) {
            return Err(Error::NotSectorial {
                theta,
                detail: "0 lies in the spectrum".into(),
            });
        }
        if info.max_arg >= PI - theta - 1e-12 {
            return Err(Error::NotSectorial {
                theta,
                detail: format!("an eigenvalue has |arg| = {:.6} >= π - θ", info.max_arg),
            });
        }
        Ok(info)
    }
}

/// Sample points of `S_θ`: `λ = 0` plus `count` log-spaced moduli in
/// `[r_min, r_max]` on the rays `±θ` and the positive axis.
pub fn sector_samples(theta: f64, count: usize, r_min: f64, r_max: f64) -> Vec<C64> {
    let mut out = vec![c(0.0)];
    let radii: Vec<f64> = (0..count)
        .map(|i| {
            let s = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            (r_min.ln() + s * (r_max / r_min).ln()).exp()
        })
        .collect();
    let mut angles = vec![0.0];
    if theta > 0.0 {
        angles.extend([theta, -theta]);
    }
    for a in angles {
        out.extend(radii.iter().map(|&r| C64::from_polar(r, a)));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorialReport {
    pub theta: f64,
    pub k: f64,
    pub argmax: C64,
    /// `(λ, (1 + |λ|) ‖(M + λ)^{-1}‖)` per sample.
    pub samples: Vec<(C64, f64)>,
}

pub fn sectorial_probe(m: &OperatorMatrix, theta: f64, samples: &[C64]) -> Result<SectorialReport> {
    if !(0.0..PI).contains(&theta) {
        return Err(Error::InvalidInput(format!("theta = {theta} must lie in [0, π)")));
    }
    m.check_sector(theta)?;
    let values: Vec<(C64, f64)> = samples
        .par_iter()
        .map(|&l| Ok((l, (1.0 + l.norm()) * m.resolvent_norm(l)?)))
        .collect::<Result<_>>()?;
    let (argmax, k) = values
        .iter()
        .copied()
        .fold((c(0.0), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Ok(SectorialReport {
        theta,
        k,
        argmax,
        samples: values,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RBoundReport {
    pub estimate: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// The estimate only bounds the R-bound from below.
    pub lower_bound: bool,
}

/// `(∫_0^1 ‖Σ ε_k(t) v_k‖^2 dt)^{1/2}`, averaging over all `2^N` signs.
pub fn rademacher_norm(v: &[Vec<C64>]) -> f64 {
    let n = v.len();
    let dim = v.first().map_or(0, |x| x.len());
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        let mut s = vec![c(0.0); dim];
        for (k, vk) in v.iter().enumerate() {
            let sign = if mask & (1 << k) != 0 { -1.0 } else { 1.0 };
            for (a, b) in s.iter_mut().zip(vk) {
                *a += sign * b;
            }
        }
        total += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    (total / (1u64 << n) as f64).sqrt()
}

/// Ratio of Rademacher averages for one choice of `λ_k`, `x_k`.
pub fn r_ratio(m: &OperatorMatrix, lambdas: &[C64], xs: &[Vec<C64>]) -> Result<f64> {
    let ys: Vec<Vec<C64>> = lambdas
        .iter()
        .zip(xs)
        .map(|(&l, x)| Ok(m.resolvent_solve(l, x)?.into_iter().map(|v| l * v).collect()))
        .collect::<Result<_>>()?;
    Ok(rademacher_norm(&ys) / rademacher_norm(xs))
}

/// Monte-Carlo lower estimate of the R-sectorial bound at angle θ.
pub fn r_bound_estimate(m: &OperatorMatrix, theta: f64, n: usize, trials: usize, seed: u64) -> Result<RBoundReport> {
    if n == 0 || n > 12 {
        return Err(Error::Unsupported(format!(
            "exact Rademacher averages need 1 <= N <= 12, got {n}"
        )));
    }
    m.check_sector(theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = m.dim();
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let lambdas: Vec<C64> = (0..n)
            .map(|_| {
                let r = (rng.random_range(-3.0f64..6.0) * std::f64::consts::LN_10).exp();
                let a = if theta > 0.0 { rng.random_range(-theta..=theta) } else { 0.0 };
                C64::from_polar(r, a)
            })
            .collect();
        let xs: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                let v: Vec<C64> = (0..dim)
                    .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let nv = norm2(&v);
                v.into_iter().map(|z| z / nv).collect()
            })
            .collect();
        best = best.max(r_ratio(m, &lambdas, &xs)?);
    }
    Ok(RBoundReport {
        estimate: best,
        n,
        trials,
        seed,
        lower_bound: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContourSpec {
    /// Circle radius; defaults to half the smallest `|μ|`.
    pub rho: Option<f64>,
    pub theta: f64,
    /// Gauss points per panel.
    pub n_quad: usize,
    /// Ray truncation; chosen from the tail bound when absent.
    pub r_max: Option<f64>,
    pub tail_tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            rho: None,
            theta: 3.0 * PI / 4.0,
            n_quad: 64,
            r_max: None,
            tail_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourInfo {
    pub rho: f64,
    pub theta: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub tail_bound: f64,
}

struct Contour {
    /// `(λ, w)` with `A^z ≈ Σ w (-λ)^z (A+λ)^{-1} + tail·I`.
    nodes: Vec<(C64, C64)>,
    tail: C64,
    info: ContourInfo,
}

/// Bound on the ray contributions beyond `R` after the `1/λ` tail
/// correction.
fn tail_bound(z: C64, theta: f64, norm: f64, r: f64) -> f64 {
    if r <= norm {
        return f64::INFINITY;
    }
    (z.im.abs() * (PI - theta)).exp() / PI * norm * r / (r - norm) * r.powf(z.re - 1.0) / (1.0 - z.re)
}

fn contour(m: &OperatorMatrix, z: C64, spec: &ContourSpec) -> Result<Contour> {
    if !(z.re < 0.0) {
        return Err(Error::InvalidInput(format!("Dunford integral needs Re z < 0, got {z}")));
    }
    if !(spec.theta > 0.0 && spec.theta < PI) {
        return Err(Error::InvalidInput(format!("contour angle {} must lie in (0, π)", spec.theta)));
    }
    let info = m.check_sector(spec.theta)?;
    let rho = spec.rho.unwrap_or(0.5 * info.min_abs);
    if !(rho > 0.0 && rho < info.min_abs) {
        return Err(Error::InvalidInput(format!(
            "contour radius {rho} must lie in (0, min|μ| = {})",
            info.min_abs
        )));
    }
    let norm = m.norm_bound();
    let r_max = match spec.r_max {
        Some(r) => {
            let b = tail_bound(z, spec.theta, norm, r);
            if !(b <= spec.tail_tol) {
                return Err(Error::TailBound { bound: b, tol: spec.tail_tol });
            }
            r
        }
        None => {
            let mut r = (2.0 * norm).max(10.0 * rho);
            while !(tail_bound(z, spec.theta, norm, r) <= spec.tail_tol) {
                r *= 2.0;
                if !r.is_finite() {
                    return Err(Error::TailBound {
                        bound: f64::INFINITY,
                        tol: spec.tail_tol,
                    });
                }
            }
            r
        }
    };
    if !(r_max > rho) {
        return Err(Error::InvalidInput("R_max must exceed the contour radius".into()));
    }
    let theta = spec.theta;
    let (gx, gw) = gauss_legendre(spec.n_quad.max(2));
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut nodes = Vec::new();
    // rays in s = log(r/ρ), unit-width panels
    let s_max = (r_max / rho).ln();
    let panels = s_max.ceil().max(1.0) as usize;
    let width = s_max / panels as f64;
    let up = C64::from_polar(1.0, theta);
    let down = C64::from_polar(1.0, -theta);
    for p in 0..panels {
        for (x, w) in gx.iter().zip(&gw) {
            let s = (p as f64 + 0.5 * (x + 1.0)) * width;
            let r = rho * s.exp();
            let ds = 0.5 * w * width;
            // upper ray outward, lower ray inward
            nodes.push((r * up, up * r * ds / two_pi_i));
            nodes.push((r * down, -down * r * ds / two_pi_i));
        }
    }
    // arc from angle 2π-θ down to θ through π
    let arc_panels = 4;
    let span = 2.0 * (PI - theta);
    for p in 0..arc_panels {
        for (x, w) in gx.iter().zip(&gw) {
            let phi = theta + (p as f64 + 0.5 * (x + 1.0)) * span / arc_panels as f64;
            let l = C64::from_polar(rho, phi);
            let dphi = 0.5 * w * span / arc_panels as f64;
            nodes.push((l, -l * C64::i() * dphi / two_pi_i));
        }
    }
    let tail = c(r_max).powc(z) * (z * (PI - theta)).sin() / (PI * z);
    let tail_bound = tail_bound(z, theta, norm, r_max);
    let count = nodes.len();
    Ok(Contour {
        nodes,
        tail,
        info: ContourInfo {
            rho,
            theta,
            r_max,
            nodes: count,
            tail_bound,
        },
    })
}

fn neg_pow(lambda: C64, z: C64) -> C64 {
    (-lambda).powc(z)
}

/// `A^z v` for `Re z < 0`.
pub fn dunford_apply(m: &OperatorMatrix, z: C64, v: &[C64], spec: &ContourSpec) -> Result<(Vec<C64>, ContourInfo)> {
    let ct = contour(m, z, spec)?;
    let parts: Vec<Vec<C64>> = ct
        .nodes
        .par_iter()
        .map(|&(l, w)| {
            let f = w * neg_pow(l, z);
            Ok(m.resolvent_solve(l, v)?.into_iter().map(|x| f * x).collect())
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<C64> = v.iter().map(|x| ct.tail * x).collect();
    for p in &parts {
        for (a, b) in out.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok((out, ct.info))
}

/// `A^z` for `Re z < 0` as a dense matrix.
pub fn dunford_power(m: &OperatorMatrix, z: C64, spec: &ContourSpec) -> Result<(OperatorMatrix, ContourInfo)> {
    let ct = contour(m, z, spec)?;
    let n = m.dim();
    let a = m.to_dense();
    let id = DMatrix::<C64>::identity(n, n);
    let parts: Vec<DMatrix<C64>> = ct
        .nodes
        .par_iter()
        .map(|&(l, w)| {
            let inv = (&a + &id * l)
                .try_inverse()
                .ok_or(Error::SingularSystem { row: 0, pivot: 0.0 })?;
            Ok(inv * (w * neg_pow(l, z)))
        })
        .collect::<Result<_>>()?;
    let mut out = &id * ct.tail;
    for p in &parts {
        out += p;
    }
    let mut res = OperatorMatrix::dense(out)?;
    res.provenance = m.provenance.clone();
    Ok((res, ct.info))
}

/// `A^z v` for any `z`: integer powers directly, otherwise
/// `A^m A^{z-m}` with `Re(z-m) ∈ [-1, 0)`.
pub fn power_apply(m: &OperatorMatrix, z: C64, v: &[C64], spec: &ContourSpec) -> Result<Vec<C64>> {
    Ok(power_apply_info(m, z, v, spec)?.0)
}

/// As [`power_apply`], also returning the contour used, if any.
pub fn power_apply_info(
    m: &OperatorMatrix,
    z: C64,
    v: &[C64],
    spec: &ContourSpec,
) -> Result<(Vec<C64>, Option<ContourInfo>)> {
    if z.im == 0.0 && z.re.fract() == 0.0 && z.re >= 0.0 {
        let mut out = v.to_vec();
        for _ in 0..z.re as usize {
            out = m.apply(&out);
        }
        return Ok((out, None));
    }
    if z.re < 0.0 {
        let (out, info) = dunford_apply(m, z, v, spec)?;
        return Ok((out, Some(info)));
    }
    let k = z.re.floor() as usize + 1;
    let (mut out, info) = dunford_apply(m, z - k as f64, v, spec)?;
    for _ in 0..k {
        out = m.apply(&out);
    }
    Ok((out, Some(info)))
}

/// Weights `sqrt(q_j) x_j^{(n+1)/2 - γ}` turning the `H^{0,γ}_2` norm of
/// grid samples into the Euclidean norm.
pub fn mellin_weights(grid: &LogGrid, n: usize, gamma: f64, len: usize) -> Vec<f64> {
    let e = (n as f64 + 1.0) / 2.0 - gamma;
    grid.weights()
        .iter()
        .zip(grid.xs())
        .take(len)
        .map(|(q, x)| q.sqrt() * x.powf(e))
        .collect()
}

/// `W (-Δ_h + c) W^{-1}` for one mode, so that Euclidean norms are
/// `H^{0,γ}_2` norms.
pub fn mode_operator_matrix(
    mode: &str,
    n: usize,
    eigenvalue: f64,
    gamma: f64,
    grid: &LogGrid,
    bc: OuterBc,
    shift: f64,
) -> OperatorMatrix {
    let op = assemble_mode_operator(n, eigenvalue, grid, bc);
    let a = op.matrix.affine(c(-1.0), c(shift));
    let w = mellin_weights(grid, n, gamma, a.dim());
    OperatorMatrix {
        data: MatrixData::Tri(a.similarity(&w)),
        provenance: Some(Provenance {
            mode: mode.into(),
            n,
            eigenvalue,
            gamma,
            grid: *grid,
            shift,
            outer_bc: bc,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftLadder {
    pub start: f64,
    pub factor: f64,
    pub max_steps: usize,
    /// Accept the first shift whose probe bound is at most this.
    pub k_target: f64,
}

impl Default for ShiftLadder {
    fn default() -> Self {
        ShiftLadder {
            start: 0.125,
            factor: 2.0,
            max_steps: 40,
            k_target: 4.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftResult {
    pub shift: f64,
    pub report: SectorialReport,
    /// `(c, K or None when the sector test failed)` per rung tried.
    pub attempts: Vec<(f64, Option<f64>)>,
}

/// First rung `c` of the ladder with a sectorial bound `K <= k_target`.
pub fn find_shift(
    build: impl Fn(f64) -> OperatorMatrix,
    theta: f64,
    samples: &[C64],
    ladder: &ShiftLadder,
) -> Result<ShiftResult> {
    let mut attempts = Vec::new();
    let mut shift = ladder.start;
    for _ in 0..ladder.max_steps {
        match sectorial_probe(&build(shift), theta, samples) {
            Ok(rep) => {
                attempts.push((shift, Some(rep.k)));
                if rep.k <= ladder.k_target {
                    return Ok(ShiftResult {
                        shift,
                        report: rep,
                        attempts,
                    });
                }
            }
            Err(Error::NotSectorial { .. }) | Err(Error::SingularSystem { .. }) => attempts.push((shift, None)),
            Err(e) => return Err(e),
        }
        shift *= ladder.factor;
    }
    Err(Error::NotSectorial {
        theta,
        detail: format!("no shift up to {shift:e} reached K <= {}", ladder.k_target),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerProbeConfig {
    pub z: C64,
    /// Order `k` of the power scale; `0 < Re z < k`.
    pub k: usize,
    pub realization: Realization,
    pub shift: f64,
    pub outer_bc: OuterBc,
    pub levels: usize,
    pub stabilize_ratio: f64,
    pub blowup_ratio: f64,
    pub contour: ContourSpec,
}

impl Default for PowerProbeConfig {
    fn default() -> Self {
        PowerProbeConfig {
            z: c(0.5),
            k: 1,
            realization: Realization::Dd,
            shift: 1.0,
            outer_bc: OuterBc::Dirichlet,
            levels: 3,
            stabilize_ratio: 1.2,
            blowup_ratio: 5.0,
            contour: ContourSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeLevel {
    pub tau_min: f64,
    pub intervals: usize,
    pub norm: f64,
    pub contour: Option<ContourInfo>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerProbeReport {
    pub z: C64,
    pub levels: Vec<ProbeLevel>,
    pub ratios: Vec<f64>,
    pub verdict: ProbeVerdict,
    pub stabilize_ratio: f64,
    pub blowup_ratio: f64,
}

/// `ω(x) x^{-ρ} log^m x`.
pub fn term_profile<T: crate::algebra::poly::Coeff>(term: &Term<T>, cutoff: Cutoff) -> impl Fn(f64) -> C64 + Sync {
    let t = Term {
        rho: term.rho.to_c64(),
        m: term.m,
        group: term.group,
        mode: term.mode.clone(),
        c: term.c.to_c64(),
    };
    move |x| cutoff.omega(x) * t.eval(x)
}

/// `‖A_h^z u_h‖_{H^{0,γ}}` over grids that halve `h` and double `|τ_min|`.
pub fn power_domain_probe(
    profile: &(dyn Fn(f64) -> C64 + Sync),
    mode: &str,
    n: usize,
    eigenvalue: f64,
    gamma: f64,
    base: &LogGrid,
    cfg: &PowerProbeConfig,
) -> Result<PowerProbeReport> {
    if !(cfg.z.re > 0.0 && cfg.z.re < cfg.k as f64) {
        return Err(Error::InvalidInput(format!("need 0 < Re z < {}, got {}", cfg.k, cfg.z)));
    }
    if cfg.realization != Realization::Dd {
        return Err(Error::Unsupported(format!(
            "power-domain probes discretise the dd realization only, got {}",
            cfg.realization
        )));
    }
    if cfg.levels < 2 {
        return Err(Error::InvalidInput("at least two refinement levels are needed".into()));
    }
    let mut grid = *base;
    let mut levels = Vec::new();
    for _ in 0..cfg.levels {
        let a = mode_operator_matrix(mode, n, eigenvalue, gamma, &grid, cfg.outer_bc, cfg.shift);
        let w = mellin_weights(&grid, n, gamma, a.dim());
        let u: Vec<C64> = grid.xs().iter().zip(&w).map(|(&x, &wj)| wj * profile(x)).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("probe profile is not finite on the grid".into()));
        }
        let (y, contour) = power_apply_info(&a, cfg.z, &u, &cfg.contour)?;
        levels.push(ProbeLevel {
            tau_min: grid.tau_min,
            intervals: grid.intervals,
            norm: norm2(&y),
            contour,
        });
        grid = grid.refine_deeper();
    }
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[1].norm / w[0].norm).collect();
    let verdict = if ratios.iter().all(|&r| r <= cfg.stabilize_ratio) {
        ProbeVerdict::Member
    } else if ratios.iter().all(|&r| r >= cfg.blowup_ratio) {
        ProbeVerdict::NonMember
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(PowerProbeReport {
        z: cfg.z,
        levels,
        ratios,
        verdict,
        stabilize_ratio: cfg.stabilize_ratio,
        blowup_ratio: cfg.blowup_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_inverse_and_square_root() {
        let m = OperatorMatrix::diagonal(&[2.0]);
        let spec = ContourSpec::default();
        let (p, info) = dunford_power(&m, c(-1.0), &spec).unwrap();
        assert!((p.to_dense()[(0, 0)] - 0.5).norm() < 1e-10);
        assert!(info.tail_bound <= 1e-10);
        let (p, _) = dunford_power(&m, c(-0.5), &spec).unwrap();
        assert!((p.to_dense()[(0, 0)] - 0.5f64.sqrt()).norm() < 1e-8);
    }

    #[test]
    fn diagonal_power() {
        let m = OperatorMatrix::diagonal(&[1.0, 4.0]);
        let (p, _) = dunford_power(&m, c(-0.3), &ContourSpec::default()).unwrap();
        let d = p.to_dense();
        assert!((d[(0, 0)] - 1.0).norm() < 1e-8);
        assert!((d[(1, 1)] - 4f64.powf(-0.3)).norm() < 1e-8);
        assert!(d[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn complex_exponent_matches_scalar() {
        let m = OperatorMatrix::diagonal(&[3.0]);
        let z = C64::new(-0.4, 0.7);
        let (p, _) = dunford_power(&m, z, &ContourSpec::default()).unwrap();
        assert!((p.to_dense()[(0, 0)] - c(3.0).powc(z)).norm() < 1e-9);
    }

    #[test]
    fn self_adjoint_probe_bound() {
        let m = OperatorMatrix::diagonal(&[1.0, 2.0]);
        // on the real axis (1 + λ)/(1 + λ) = 1
        let rep = sectorial_probe(&m, 0.0, &sector_samples(0.0, 200, 1e-3, 1e6)).unwrap();
        assert!(rep.k <= 1.0 + 1e-9);
        // on the imaginary axis (1 + t)/|1 + it| peaks at √2 for t = 1
        let rep = sectorial_probe(&m, PI / 2.0, &sector_samples(PI / 2.0, 200, 1e-3, 1e6)).unwrap();
        assert!(rep.k <= 2f64.sqrt() + 1e-9 && rep.k > 2f64.sqrt() - 1e-3);
        // closed form (1 + |λ|)/dist(-λ, {1, 2})
        for (l, v) in &rep.samples {
            let exact = (1.0 + l.norm()) / (l + 1.0).norm().min((l + 2.0).norm());
            assert!((v - exact).abs() < 1e-10 * exact);
        }
    }

    #[test]
    fn one_by_one_on_the_axis() {
        let m = OperatorMatrix::diagonal(&[1.0]);
        let rep = sectorial_probe(&m, 0.0, &sector_samples(0.0, 50, 1e-3, 1e6)).unwrap();
        assert!((rep.k - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_in_sector_rejected() {
        let m = OperatorMatrix::diagonal(&[-1.0, 2.0]);
        assert!(matches!(
            sectorial_probe(&m, PI / 2.0, &[c(0.0)]),
            Err(Error::NotSectorial { .. })
        ));
    }

    #[test]
    fn r_bound_single_term() {
        let m = OperatorMatrix::diagonal(&[1.0, 2.0]);
        let rep = r_bound_estimate(&m, 0.0, 1, 200, 7).unwrap();
        assert!(rep.estimate <= 1.0 && rep.lower_bound);
        assert!(matches!(r_bound_estimate(&m, 0.0, 13, 1, 7), Err(Error::Unsupported(_))));
    }

    #[test]
    fn collapsed_rademacher_sum() {
        let m = OperatorMatrix::diagonal(&[1.0, 3.0]);
        let l = C64::new(0.5, 0.2);
        let x = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let ratio = r_ratio(&m, &[l; 3], &vec![x.clone(); 3]).unwrap();
        let y: Vec<C64> = m.resolvent_solve(l, &x).unwrap().into_iter().map(|v| l * v).collect();
        assert!((ratio - norm2(&y) / norm2(&x)).abs() < 1e-14);
    }

    #[test]
    fn tail_bound_enforced() {
        let m = OperatorMatrix::diagonal(&[2.0]);
        let spec = ContourSpec {
            r_max: Some(10.0),
            ..ContourSpec::default()
        };
        assert!(matches!(dunford_power(&m, c(-0.5), &spec), Err(Error::TailBound { .. })));
    }

    #[test]
    fn integer_and_fractional_apply() {
        let m = OperatorMatrix::diagonal(&[2.0, 5.0]);
        let v = vec![c(1.0), c(1.0)];
        let spec = ContourSpec::default();
        let y = power_apply(&m, c(2.0), &v, &spec).unwrap();
        assert!((y[1] - 25.0).norm() < 1e-14);
        let y = power_apply(&m, c(1.5), &v, &spec).unwrap();
        assert!((y[0] - 2f64.powf(1.5)).norm() < 1e-8);
        assert!((y[1] - 5f64.powf(1.5)).norm() < 1e-7);
    }
}
