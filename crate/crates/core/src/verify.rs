//! The acceptance suite: each criterion is a self-contained experiment with
//! an independent reference, registered by id and grouped into suites.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::asymptotics::{apply_expansion, apply_operator_symbolic, enumerate_asymptotics};
use crate::error::{Error, Result};
use crate::geometry::{eigen_data, mode_table, weight_window, Circle, CrossSectionModel, Sphere};
use crate::heat::{bessel_series_solution, l2_norm, solve_heat, HeatConfig, NoForcing};
use crate::io;
use crate::mellin::{Cutoff, LogGrid, RadialField};
use crate::powers::{
    dunford_power, find_shift, mode_operator_matrix, power_domain_probe, sector_samples, ContourSpec, OperatorMatrix,
    PowerProbeConfig, ProbeVerdict, ShiftLadder,
};
use crate::special::{bessel_j, radial_wavenumbers, OuterBc};
use crate::symbols::{laplacian, pole_set, pole_set_power};
use crate::tip::{decomposition_track, fit_tip_expansion, tail_terms, FitOptions};

type C64 = Complex64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Tolerance overrides keyed `c<id>.<name>`.
#[derive(Clone, Debug, Default)]
pub struct Tolerances {
    overrides: Map<String, Value>,
}

impl Tolerances {
    pub fn new(overrides: Map<String, Value>) -> Self {
        Tolerances { overrides }
    }

    pub fn get(&self, id: usize, name: &str, default: f64) -> f64 {
        self.overrides
            .get(&format!("c{id}.{name}"))
            .and_then(Value::as_f64)
            .unwrap_or(default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

pub trait Criterion: Send + Sync {
    fn id(&self) -> usize;
    fn title(&self) -> &'static str;
    fn suite(&self) -> &'static str;
    fn budget(&self) -> Duration;
    fn check(&self, tol: &Tolerances) -> Result<Outcome>;
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: String,
    pub suite: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionReport {
    /// `PASS  4 title (1.2 s / 60 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {} ({:.1} s / {:.0} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

pub struct CriterionRegistry {
    items: Vec<Box<dyn Criterion>>,
}

impl Default for CriterionRegistry {
    fn default() -> Self {
        let mut r = CriterionRegistry { items: Vec::new() };
        r.register(Box::new(PoleFormula));
        r.register(Box::new(WeightWindowValues));
        r.register(Box::new(IndicialAnnihilation));
        r.register(Box::new(SolverOracle));
        r.register(Box::new(ConstantPreservation));
        r.register(Box::new(TipExponents));
        r.register(Box::new(DecompositionPreservation));
        r.register(Box::new(ComplexPowers));
        r.register(Box::new(PowerDomainMembership));
        r.register(Box::new(SectorialBound));
        r
    }
}

impl CriterionRegistry {
    pub fn register(&mut self, c: Box<dyn Criterion>) {
        self.items.retain(|o| o.id() != c.id());
        self.items.push(c);
        self.items.sort_by_key(|c| c.id());
    }

    pub fn suites(&self) -> Vec<&'static str> {
        let mut s: Vec<_> = self.items.iter().map(|c| c.suite()).collect();
        s.dedup();
        s
    }

    pub fn get(&self, id: usize) -> Option<&dyn Criterion> {
        self.items.iter().find(|c| c.id() == id).map(|c| c.as_ref())
    }

    /// `all`, a suite name, or a comma-separated list of ids.
    pub fn select(&self, what: &str) -> Result<Vec<&dyn Criterion>> {
        if what == "all" {
            return Ok(self.items.iter().map(|c| c.as_ref()).collect());
        }
        let by_suite: Vec<_> = self.items.iter().filter(|c| c.suite() == what).map(|c| c.as_ref()).collect();
        if !by_suite.is_empty() {
            return Ok(by_suite);
        }
        what.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .and_then(|id| self.get(id))
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown suite or criterion '{s}' (suites: all, {})",
                            self.suites().join(", ")
                        ))
                    })
            })
            .collect()
    }

    /// Run one criterion; errors and overruns count as failures.
    pub fn run(c: &dyn Criterion, tol: &Tolerances) -> CriterionReport {
        let start = Instant::now();
        let outcome = c.check(tol);
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match outcome {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed > c.budget() {
            pass = false;
            detail.push_str("; over time budget");
        }
        CriterionReport {
            id: c.id(),
            title: c.title().into(),
            suite: c.suite().into(),
            pass,
            detail,
            seconds: elapsed.as_secs_f64(),
            budget_seconds: c.budget().as_secs_f64(),
        }
    }
}

/// Smooth bump supported in `[0.4, 0.8]`, peak about `50 e^{-4}`.
pub fn bump(x: f64) -> f64 {
    if x <= 0.4 || x >= 0.8 {
        return 0.0;
    }
    let s = (x - 0.4) / 0.4;
    50.0 * (-1.0 / (s * (1.0 - s))).exp()
}

struct PoleFormula;

impl Criterion for PoleFormula {
    fn id(&self) -> usize {
        1
    }
    fn title(&self) -> &'static str {
        "pole formula"
    }
    fn suite(&self) -> &'static str {
        "symbols"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(1)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let eps = tol.get(1, "abs", 1e-12);
        // (cross-section, γ, closed-form eigenvalue of group g)
        let cases: Vec<(Box<dyn CrossSectionModel>, f64, Box<dyn Fn(usize) -> f64>)> = vec![
            (Box::new(Circle { circumference: 2.0 * PI }), -0.5, Box::new(|g| -((g * g) as f64))),
            (Box::new(Circle { circumference: PI }), -0.5, Box::new(|g| -((4 * g * g) as f64))),
            (Box::new(Circle { circumference: 4.0 * PI }), -0.75, Box::new(|g| -((g * g) as f64) / 4.0)),
            (Box::new(Sphere { n: 2 }), 0.0, Box::new(|g| -((g * (g + 1)) as f64))),
        ];
        let mut worst = 0.0f64;
        let mut failures = Vec::new();
        let mut log_ok = false;
        for (cs, gamma, eig) in &cases {
            let n = cs.dim();
            let spec = laplacian(n, &eigen_data(cs.as_ref(), 5)?);
            let ps = pole_set(&spec, *gamma, None)?;
            let mut csv = Vec::new();
            io::write_poles(&mut csv, &ps)?;
            let rows = parse_pole_rows(&csv)?;
            let right = (n as f64 + 1.0) / 2.0 - gamma;
            let left = right - 2.0;
            for g in 0..spec.modes.len() {
                let a = (n as f64 - 1.0) / 2.0;
                let nu = (a * a - eig(g)).sqrt();
                let mut expect: Vec<(f64, usize)> = if nu == 0.0 { vec![(a, 1)] } else { vec![(a - nu, 0), (a + nu, 0)] };
                expect.retain(|&(r, _)| left <= r && r < right);
                let got: Vec<(f64, usize)> = rows
                    .iter()
                    .filter(|r| r.0 == g && r.4)
                    .map(|r| (r.2, r.3))
                    .collect();
                if got.len() != expect.len() {
                    failures.push(format!("{} group {g}: {} poles, expected {}", cs.kind(), got.len(), expect.len()));
                    continue;
                }
                for ((r, m), (er, em)) in got.iter().zip(&expect) {
                    worst = worst.max((r - er).abs());
                    if m != em {
                        failures.push(format!("{} group {g}: log power {m}, expected {em}", cs.kind()));
                    }
                    if n == 1 && g == 0 && *m == 1 {
                        log_ok = true;
                    }
                }
            }
        }
        let pass = failures.is_empty() && worst <= eps && log_ok;
        let mut detail = format!("max |ρ - closed form| = {worst:.2e} (tol {eps:.0e}); double root at λ=0 admits log: {log_ok}");
        if !failures.is_empty() {
            let _ = write!(detail, "; {}", failures.join("; "));
        }
        Ok(Outcome::new(pass, detail))
    }
}

/// `(group, label, Re ρ, max log power, in strip)` rows of a poles CSV;
/// asserts the imaginary parts vanish.
fn parse_pole_rows(csv_bytes: &[u8]) -> Result<Vec<(usize, String, f64, usize, bool)>> {
    let mut rd = csv::Reader::from_reader(csv_bytes);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        let f = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| f(i).parse::<f64>().map_err(|e| Error::Data(e.to_string()));
        if num(3)? != 0.0 {
            return Err(Error::Data(format!("complex pole {} in a real case", num(3)?)));
        }
        out.push((
            f(0).parse().map_err(|_| Error::Data("mode".into()))?,
            f(1),
            num(2)?,
            f(4).parse().map_err(|_| Error::Data("max_log_power".into()))?,
            f(5) == "true",
        ));
    }
    Ok(out)
}

struct WeightWindowValues;

impl Criterion for WeightWindowValues {
    fn id(&self) -> usize {
        2
    }
    fn title(&self) -> &'static str {
        "weight window"
    }
    fn suite(&self) -> &'static str {
        "symbols"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(1)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let eps = tol.get(2, "abs", 1e-12);
        let s2 = weight_window(&Sphere { n: 2 })?;
        let s1 = weight_window(&Circle { circumference: 2.0 * PI })?;
        let err = [(s2.lo, -0.5), (s2.hi, 0.5), (s1.lo, -1.0), (s1.hi, 0.0)]
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(Outcome::new(
            err <= eps,
            format!(
                "S^2: ({}, {}), unit circle: ({}, {}); max error {err:.1e}",
                s2.lo, s2.hi, s1.lo, s1.hi
            ),
        ))
    }
}

struct IndicialAnnihilation;

impl Criterion for IndicialAnnihilation {
    fn id(&self) -> usize {
        3
    }
    fn title(&self) -> &'static str {
        "indicial annihilation"
    }
    fn suite(&self) -> &'static str {
        "symbols"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(5)
    }
    fn check(&self, _tol: &Tolerances) -> Result<Outcome> {
        let cases: Vec<(Box<dyn CrossSectionModel>, f64)> = vec![
            (Box::new(Circle { circumference: 2.0 * PI }), -0.5),
            (Box::new(Sphere { n: 2 }), 0.0),
        ];
        let mut checked = 0;
        let mut failures = Vec::new();
        for (cs, gamma) in &cases {
            let spec = laplacian(cs.dim(), &eigen_data(cs.as_ref(), 5)?);
            for k in [1usize, 2] {
                let ps = pole_set_power(&spec, *gamma, k, None)?;
                for b in enumerate_asymptotics(&ps).terms {
                    let Some(t) = b.exact_term() else {
                        failures.push(format!("{} {}: exponent {} not exact", cs.kind(), b.mode, b.rho));
                        continue;
                    };
                    let mut image = apply_operator_symbolic(&spec, &t)?;
                    for _ in 1..k {
                        image = apply_expansion(&spec, &image)?;
                    }
                    checked += 1;
                    if !image.is_empty() {
                        failures.push(format!(
                            "{} {}: A^{k} x^-({}) log^{} x leaves {} terms",
                            cs.kind(),
                            b.mode,
                            b.rho,
                            b.m,
                            image.len()
                        ));
                    }
                }
            }
        }
        let pass = failures.is_empty() && checked > 0;
        let mut detail = format!("{checked} basis terms annihilated exactly");
        if !failures.is_empty() {
            let _ = write!(detail, "; {}", failures.join("; "));
        }
        Ok(Outcome::new(pass, detail))
    }
}

/// Relative `L^2` error of the mode-0 Dirichlet solver against the Bessel
/// series for `J_0(j_1 x) + J_0(j_2 x)/2` at `t`.
pub fn bessel_solver_error(grid: LogGrid, dt: f64, t: f64) -> Result<f64> {
    let modes = mode_table(&Circle { circumference: 2.0 * PI }.groups(1));
    let ks = radial_wavenumbers(1, 0.0, OuterBc::Dirichlet, 2, 50.0)?;
    let u0 = RadialField::from_fn(grid, 1, 2.0 * PI, modes, |_, x| {
        c(bessel_j(0.0, ks[0] * x) + 0.5 * bessel_j(0.0, ks[1] * x))
    });
    let traj = solve_heat(&u0, &NoForcing, &HeatConfig::new(grid, t, dt, OuterBc::Dirichlet))?;
    let mut exact = u0.clone();
    exact.values[0] = bessel_series_solution(&[c(1.0), c(0.5)], 1, 0.0, t, &grid.xs(), OuterBc::Dirichlet)?;
    Ok(l2_norm(&traj.last().axpby(c(1.0), &exact, c(-1.0))) / l2_norm(&exact))
}

struct SolverOracle;

impl Criterion for SolverOracle {
    fn id(&self) -> usize {
        4
    }
    fn title(&self) -> &'static str {
        "solver-oracle agreement"
    }
    fn suite(&self) -> &'static str {
        "heat"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(60)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let rel = tol.get(4, "rel_l2", 1e-4);
        let (lo, hi) = (tol.get(4, "order_min", 1.7), tol.get(4, "order_max", 2.3));
        let tau_min = tol.get(4, "tau_min", -8.0);
        let errs = [128usize, 256, 512]
            .iter()
            .map(|&j| bessel_solver_error(LogGrid::new(tau_min, j)?, 1e-4, 0.1))
            .collect::<Result<Vec<f64>>>()?;
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let pass = errs[2] <= rel && orders.iter().all(|o| (lo..=hi).contains(o));
        Ok(Outcome::new(
            pass,
            format!(
                "rel L2 error at J=512: {:.2e} (tol {rel:.0e}); orders {:.3}, {:.3}",
                errs[2], orders[0], orders[1]
            ),
        ))
    }
}

struct ConstantPreservation;

impl Criterion for ConstantPreservation {
    fn id(&self) -> usize {
        5
    }
    fn title(&self) -> &'static str {
        "steady constant preservation"
    }
    fn suite(&self) -> &'static str {
        "heat"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(10)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let eps = tol.get(5, "abs", 1e-10);
        let cs = Circle { circumference: 2.0 * PI };
        let modes = mode_table(&cs.groups(3));
        let grid = LogGrid::new(-10.0, 1024)?;
        let u0 = RadialField::from_fn(grid, 1, cs.volume(), modes, |m, _| c(if m == 0 { 1.0 } else { 0.0 }));
        let mut cfg = HeatConfig::new(grid, 1.0, 1e-3, OuterBc::Neumann);
        cfg.output_times = (1..=10).map(|i| 0.1 * i as f64).collect();
        let traj = solve_heat(&u0, &NoForcing, &cfg)?;
        let dev = traj
            .snapshots
            .iter()
            .map(|u| u.max_abs_diff(&u0))
            .fold(0.0, f64::max);
        Ok(Outcome::new(
            dev <= eps,
            format!("{} snapshots, max |u - 1| = {dev:.2e} (tol {eps:.0e})", traj.snapshots.len()),
        ))
    }
}

struct TipExponents;

impl Criterion for TipExponents {
    fn id(&self) -> usize {
        6
    }
    fn title(&self) -> &'static str {
        "tip exponents"
    }
    fn suite(&self) -> &'static str {
        "tip"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(120)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let rel = tol.get(6, "rel_exponent", 0.01);
        let gain = tol.get(6, "min_gain", 1.5);
        let l = PI;
        let cs = Circle { circumference: l };
        let groups = cs.groups(2);
        let spec = laplacian(1, &groups);
        let grid = LogGrid::new(-10.0, 4096)?;
        let u0 = RadialField::from_fn(grid, 1, l, mode_table(&groups), |_, x| c(bump(x)));
        let t = 0.05;
        let traj = solve_heat(&u0, &NoForcing, &HeatConfig::new(grid, t, 1e-4, OuterBc::Dirichlet))?;
        let u = traj.last();
        let b1 = enumerate_asymptotics(&pole_set(&spec, 0.0, None)?);
        let f1 = fit_tip_expansion(u, &b1, &FitOptions::default(), t)?;
        let b2 = enumerate_asymptotics(&pole_set_power(&spec, 0.0, 2, None)?);
        let opts = FitOptions {
            window: Some((0.005, 0.125)),
            tail: tail_terms(&spec, &b2, 2)?,
            ..FitOptions::default()
        };
        let f2 = fit_tip_expansion(u, &b2, &opts, t)?;
        let expected = 2.0 * PI / l;
        let mut pass = true;
        let mut detail = Vec::new();
        for mode in ["k=+1", "k=-1"] {
            let e1 = f1.residual(mode).map_or(f64::NAN, |r| r.decay_exponent);
            let e2 = f2.residual(mode).map_or(f64::NAN, |r| r.decay_exponent);
            pass &= ((e1 - expected) / expected).abs() <= rel && e2 - e1 >= gain;
            detail.push(format!("{mode}: exponent {e1:.5} (expect {expected}), with Q(Δ²) {e2:.3}"));
        }
        Ok(Outcome::new(pass, detail.join("; ")))
    }
}

struct DecompositionPreservation;

impl Criterion for DecompositionPreservation {
    fn id(&self) -> usize {
        7
    }
    fn title(&self) -> &'static str {
        "decomposition preservation"
    }
    fn suite(&self) -> &'static str {
        "tip"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(60)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let eps_path = tol.get(7, "path", 1e-3);
        let eps_jump = tol.get(7, "jump", 1e-3);
        let cs = Circle { circumference: 2.0 * PI };
        let groups = cs.groups(1);
        let spec = laplacian(1, &groups);
        let k = radial_wavenumbers(1, 0.0, OuterBc::Neumann, 2, 50.0)?[1];
        let grid = LogGrid::new(-10.0, 2048)?;
        let u0 = RadialField::from_fn(grid, 1, cs.volume(), mode_table(&groups), |_, x| c(1.0 + bessel_j(0.0, k * x)));
        let mut cfg = HeatConfig::new(grid, 0.2, 1e-4, OuterBc::Neumann);
        cfg.output_times = (1..=10).map(|i| 0.02 * i as f64).collect();
        let traj = solve_heat(&u0, &NoForcing, &cfg)?;
        let basis = enumerate_asymptotics(&pole_set(&spec, 0.0, None)?);
        let opts = FitOptions {
            tail: tail_terms(&spec, &basis, 2)?,
            ..FitOptions::default()
        };
        let track = decomposition_track(&traj, &basis, &opts, 0.0)?;
        // the constant coefficient is the tip value 1 + e^{-k^2 t} J_0(0)
        let oracle: Vec<f64> = traj.times.iter().map(|t| 1.0 + (-k * k * t).exp()).collect();
        let path: Vec<f64> = track.path("k=0", 0.0, 0).iter().map(|z| z.re).collect();
        if path.len() != oracle.len() {
            return Ok(Outcome::new(false, format!("tracked {} of {} samples", path.len(), oracle.len())));
        }
        let path_err = path.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let jump_err = path
            .windows(2)
            .zip(oracle.windows(2))
            .map(|(p, o)| ((p[1] - p[0]) - (o[1] - o[0])).abs())
            .fold(0.0, f64::max);
        let pass = path_err <= eps_path && jump_err <= eps_jump && track.warnings.is_empty();
        Ok(Outcome::new(
            pass,
            format!(
                "{} samples, max |c - oracle| = {path_err:.2e}, max jump deviation {jump_err:.2e}, {} warnings",
                path.len(),
                track.warnings.len()
            ),
        ))
    }
}

/// `A^z` through the eigendecomposition of a Hermitian matrix.
pub fn hermitian_power(a: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    let eig = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(l).powc(z)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `B B^H / n + I/2` with entries of `B` uniform in the unit square.
pub fn random_hermitian_positive(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let b = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&b * b.adjoint()) / c(n as f64) + DMatrix::identity(n, n) * c(0.5)
}

fn rel_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / b.norm()
}

struct ComplexPowers;

impl Criterion for ComplexPowers {
    fn id(&self) -> usize {
        8
    }
    fn title(&self) -> &'static str {
        "complex powers"
    }
    fn suite(&self) -> &'static str {
        "powers"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(10)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let eps = tol.get(8, "rel", 1e-7);
        let eps_scalar = tol.get(8, "scalar", 1e-8);
        let seed = tol.get(8, "seed", 8.0) as u64;
        let spec = ContourSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zs = [c(-0.5), C64::new(-0.3, 0.4), c(-0.9)];
        let (mut oracle_err, mut semi_err) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let a = random_hermitian_positive(&mut rng, 8);
            let m = OperatorMatrix::dense(a.clone())?;
            for &z in &zs {
                let (p, _) = dunford_power(&m, z, &spec)?;
                oracle_err = oracle_err.max(rel_diff(&p.to_dense(), &hermitian_power(&a, z)));
            }
            let p1 = dunford_power(&m, c(-0.3), &spec)?.0.to_dense();
            let p2 = dunford_power(&m, c(-0.4), &spec)?.0.to_dense();
            let p12 = dunford_power(&m, c(-0.7), &spec)?.0.to_dense();
            semi_err = semi_err.max(rel_diff(&(p1 * p2), &p12));
        }
        let s = dunford_power(&OperatorMatrix::diagonal(&[2.0]), c(-0.5), &spec)?.0.to_dense()[(0, 0)];
        let scalar_err = (s - c(std::f64::consts::FRAC_1_SQRT_2)).norm();
        let pass = oracle_err <= eps && semi_err <= eps && scalar_err <= eps_scalar;
        Ok(Outcome::new(
            pass,
            format!(
                "20 matrices: max rel error vs eigendecomposition {oracle_err:.2e}, semigroup {semi_err:.2e}; [2]^-1/2 = {:.12} (error {scalar_err:.1e})",
                s.re
            ),
        ))
    }
}

struct PowerDomainMembership;

impl Criterion for PowerDomainMembership {
    fn id(&self) -> usize {
        9
    }
    fn title(&self) -> &'static str {
        "power-domain membership"
    }
    fn suite(&self) -> &'static str {
        "powers"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(60)
    }
    fn check(&self, _tol: &Tolerances) -> Result<Outcome> {
        let gamma = -0.5;
        let omega = Cutoff::Smooth;
        let constant = move |x: f64| c(omega.omega(x));
        let inverse = move |x: f64| c(omega.omega(x) / x);
        let smooth = |x: f64| c(bump(x));
        let mut pass = true;
        let mut detail = Vec::new();
        for (tm, j) in [(-4.0, 64usize), (-3.0, 64)] {
            let base = LogGrid::new(tm, j)?;
            let mut verdicts = Vec::new();
            let mut run = |name: &str,
                           profile: &(dyn Fn(f64) -> C64 + Sync),
                           mode: &str,
                           eig: f64,
                           z: f64,
                           want: ProbeVerdict|
             -> Result<()> {
                let cfg = PowerProbeConfig {
                    z: c(z),
                    ..PowerProbeConfig::default()
                };
                let r = power_domain_probe(profile, mode, 1, eig, gamma, &base, &cfg)?;
                pass &= r.verdict == want;
                let ratios: Vec<String> = r.ratios.iter().map(|q| format!("{q:.3}")).collect();
                verdicts.push(format!("{name} z={z}: {:?} [{}]", r.verdict, ratios.join(", ")));
                Ok(())
            };
            for z in [0.25, 0.5, 0.9] {
                run("1", &constant, "k=0", 0.0, z, ProbeVerdict::Member)?;
            }
            run("x^-1 (k=+1)", &inverse, "k=+1", -1.0, 0.9, ProbeVerdict::NonMember)?;
            run("bump", &smooth, "k=0", 0.0, 0.9, ProbeVerdict::Member)?;
            detail.push(format!("ladder from ({tm}, {j}): {}", verdicts.join("; ")));
        }
        Ok(Outcome::new(pass, detail.join(" | ")))
    }
}

struct SectorialBound;

impl Criterion for SectorialBound {
    fn id(&self) -> usize {
        10
    }
    fn title(&self) -> &'static str {
        "sectoriality probe"
    }
    fn suite(&self) -> &'static str {
        "powers"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(30)
    }
    fn check(&self, tol: &Tolerances) -> Result<Outcome> {
        let stability = tol.get(10, "stability", 0.10);
        let gamma = -0.5;
        let theta = 3.0 * PI / 4.0;
        let samples = sector_samples(theta, 200, 1e-3, 1e6);
        let ladder = ShiftLadder::default();
        let mut results = Vec::new();
        for j in [64usize, 128] {
            let grid = LogGrid::new(-4.0, j)?;
            let r = find_shift(
                |s| mode_operator_matrix("k=0", 1, 0.0, gamma, &grid, OuterBc::Neumann, s),
                theta,
                &samples,
                &ladder,
            )?;
            results.push((j, r.shift, r.report.k));
        }
        let (k0, k1) = (results[0].2, results[1].2);
        let same_shift = results[0].1 == results[1].1;
        let change = (k1 - k0).abs() / k0;
        let pass = same_shift && change <= stability && k0.is_finite();
        let rows: Vec<String> = results
            .iter()
            .map(|(j, s, k)| format!("J={j}: shift {s}, K = {k:.4}"))
            .collect();
        Ok(Outcome::new(
            pass,
            format!("{}; change under halving {:.2}% (tol {:.0}%)", rows.join(", "), 100.0 * change, 100.0 * stability),
        ))
    }
}
