//! Cone operators in collar form `x^{-μ} Σ a_k(x) (-x∂_x)^k`, acting diagonally
//! on cross-section eigenspaces, together with their conormal, Taylor and
//! recursive symbol families and the pole sets they induce.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;
use serde_json::Value;

use crate::algebra::poly::{rat, rat_to_f64, CRat, Poly, Rat};
use crate::algebra::rational::RationalFamily;
use crate::algebra::roots::{roots_exact, Root};
use crate::error::{Error, Result};
use crate::geometry::{exact_real, EigenGroup};

/// The operator restricted to one eigenvalue group.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub label: String,
    pub eigenvalue: Rat,
    pub components: Vec<String>,
    /// `a_0 .. a_μ` as polynomials in `x` (Taylor data at the tip).
    pub coeffs: Vec<Poly<CRat>>,
}

#[derive(Clone, Debug)]
pub struct ConeOperatorSpec {
    pub preset: String,
    pub mu: usize,
    pub n: usize,
    /// Highest Taylor order carried by the coefficient polynomials.
    pub n_taylor: usize,
    pub modes: Vec<ModeOperator>,
}

impl ConeOperatorSpec {
    /// Index of the group that `label` names, either as a group or as one
    /// of its components.
    pub fn group_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label || m.components.iter().any(|c| c == label))
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// True when no coefficient depends on `x`.
    pub fn is_straight(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.coeffs.iter().all(|c| c.is_constant()))
    }

    fn mode(&self, g: usize) -> Result<&ModeOperator> {
        self.modes
            .get(g)
            .ok_or_else(|| Error::UnknownMode(format!("group #{g}")))
    }
}

/// Named operator constructions.
pub trait OperatorPreset: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, n: usize, groups: &[EigenGroup], params: &Value) -> Result<ConeOperatorSpec>;
}

fn c_int(v: i64) -> CRat {
    CRat::new(rat(v, 1), Rat::zero())
}

fn c_real(r: Rat) -> CRat {
    CRat::new(r, Rat::zero())
}

fn laplacian_coeffs(n: usize, eigenvalue: &Rat, warp: Option<&Rat>) -> Vec<Poly<CRat>> {
    let a0 = match warp {
        None => Poly::constant(c_real(eigenvalue.clone())),
        Some(eps) => Poly::new(vec![c_real(eigenvalue.clone()), c_real(eigenvalue * eps)]),
    };
    vec![
        a0,
        Poly::constant(c_int(-(n as i64 - 1))),
        Poly::constant(c_int(1)),
    ]
}

/// Straight-cone Laplacian: `a_2 = 1, a_1 = -(n-1), a_0 = λ_mode`.
pub struct LaplacianPreset;

impl OperatorPreset for LaplacianPreset {
    fn name(&self) -> &'static str {
        "laplacian"
    }
    fn build(&self, n: usize, groups: &[EigenGroup], _params: &Value) -> Result<ConeOperatorSpec> {
        Ok(ConeOperatorSpec {
            preset: self.name().into(),
            mu: 2,
            n,
            n_taylor: 1,
            modes: groups
                .iter()
                .map(|g| ModeOperator {
                    label: g.label.clone(),
                    eigenvalue: g.exact.clone(),
                    components: g.components.clone(),
                    coeffs: laplacian_coeffs(n, &g.exact, None),
                })
                .collect(),
        })
    }
}

/// Laplacian with a warped cross-section term `a_0(x) = λ_mode (1 + ε x)`.
pub struct WarpedPreset;

impl OperatorPreset for WarpedPreset {
    fn name(&self) -> &'static str {
        "warped"
    }
    fn build(&self, n: usize, groups: &[EigenGroup], params: &Value) -> Result<ConeOperatorSpec> {
        let eps = params.get("eps").and_then(Value::as_f64).unwrap_or(1.0);
        let eps = exact_real(eps).0;
        Ok(ConeOperatorSpec {
            preset: self.name().into(),
            mu: 2,
            n,
            n_taylor: 1,
            modes: groups
                .iter()
                .map(|g| ModeOperator {
                    label: g.label.clone(),
                    eigenvalue: g.exact.clone(),
                    components: g.components.clone(),
                    coeffs: laplacian_coeffs(n, &g.exact, Some(&eps)),
                })
                .collect(),
        })
    }
}

/// Coefficients given in the config:
/// `{"mu": μ, "coeffs": [[a_0 Taylor], ..., [a_μ Taylor]], "eigen_slot": k}`.
/// Entries are numbers or `[re, im]`; the mode eigenvalue is added to the
/// constant term of `a_k` when `eigen_slot` is present.
pub struct ExplicitPreset;

fn parse_complex(v: &Value) -> Result<CRat> {
    if let Some(x) = v.as_f64() {
        return Ok(c_real(exact_real(x).0));
    }
    if let Some([re, im]) = v.as_array().map(Vec::as_slice) {
        if let (Some(re), Some(im)) = (re.as_f64(), im.as_f64()) {
            return Ok(CRat::new(exact_real(re).0, exact_real(im).0));
        }
    }
    Err(Error::Config(format!("coefficient {v} is not a number or [re, im]")))
}

impl OperatorPreset for ExplicitPreset {
    fn name(&self) -> &'static str {
        "explicit"
    }
    fn build(&self, n: usize, groups: &[EigenGroup], params: &Value) -> Result<ConeOperatorSpec> {
        let table = params
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("operator.coeffs missing".into()))?;
        let mu = params
            .get("mu")
            .and_then(Value::as_u64)
            .map(|m| m as usize)
            .unwrap_or(table.len().saturating_sub(1));
        if mu == 0 || table.len() != mu + 1 {
            return Err(Error::Config(format!(
                "operator.coeffs must list a_0..a_mu ({} entries for mu = {mu})",
                mu + 1
            )));
        }
        let mut base = Vec::with_capacity(mu + 1);
        let mut n_taylor = 0;
        for row in table {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Config("operator.coeffs rows must be arrays".into()))?;
            n_taylor = n_taylor.max(row.len().saturating_sub(1));
            base.push(Poly::new(row.iter().map(parse_complex).collect::<Result<_>>()?));
        }
        let slot = params.get("eigen_slot").and_then(Value::as_u64).map(|s| s as usize);
        if slot.is_some_and(|s| s > mu) {
            return Err(Error::Config("operator.eigen_slot exceeds mu".into()));
        }
        let n_taylor = params
            .get("n_taylor")
            .and_then(Value::as_u64)
            .map(|t| t as usize)
            .unwrap_or(n_taylor);
        Ok(ConeOperatorSpec {
            preset: self.name().into(),
            mu,
            n,
            n_taylor,
            modes: groups
                .iter()
                .map(|g| {
                    let mut coeffs = base.clone();
                    if let Some(s) = slot {
                        coeffs[s] = &coeffs[s] + &Poly::constant(c_real(g.exact.clone()));
                    }
                    ModeOperator {
                        label: g.label.clone(),
                        eigenvalue: g.exact.clone(),
                        components: g.components.clone(),
                        coeffs,
                    }
                })
                .collect(),
        })
    }
}

pub struct PresetRegistry {
    presets: BTreeMap<&'static str, Box<dyn OperatorPreset>>,
}

impl Default for PresetRegistry {
    fn default() -> Self {
        let mut r = PresetRegistry {
            presets: BTreeMap::new(),
        };
        r.register(Box::new(LaplacianPreset));
        r.register(Box::new(WarpedPreset));
        r.register(Box::new(ExplicitPreset));
        r
    }
}

impl PresetRegistry {
    pub fn register(&mut self, p: Box<dyn OperatorPreset>) {
        self.presets.insert(p.name(), p);
    }

    pub fn names(&self) -> impl Iterator<Item = &&'static str> {
        self.presets.keys()
    }

    pub fn get(&self, name: &str) -> Result<&dyn OperatorPreset> {
        self.presets
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Config(format!("unknown operator preset '{name}'")))
    }
}

/// Convenience: the Laplacian on the given groups.
pub fn laplacian(n: usize, groups: &[EigenGroup]) -> ConeOperatorSpec {
    LaplacianPreset.build(n, groups, &Value::Null).unwrap()
}

/// `σ_M(A)(λ) = Σ a_k(0) λ^k` on the group `mode`.
pub fn conormal_symbol(spec: &ConeOperatorSpec, mode: usize) -> Result<Poly<CRat>> {
    Ok(taylor_symbol(spec.mode(mode)?, 0))
}

fn taylor_symbol(m: &ModeOperator, nu: usize) -> Poly<CRat> {
    Poly::new(m.coeffs.iter().map(|a| a.coeff(nu)).collect())
}

/// `f_0 .. f_{μ-1}`, where `f_ν` collects the `x^ν` Taylor coefficients.
pub fn taylor_symbols(spec: &ConeOperatorSpec, mode: usize) -> Result<Vec<Poly<CRat>>> {
    let m = spec.mode(mode)?;
    if spec.n_taylor + 1 < spec.mu {
        return Err(Error::InsufficientTaylorData {
            needed: spec.mu - 1,
            available: spec.n_taylor,
        });
    }
    Ok((0..spec.mu).map(|nu| taylor_symbol(m, nu)).collect())
}

/// `g_0 = 1/f_0`, `g_k = -(T^{-k} f_0^{-1}) Σ_{i<k} (T^{-i} f_{k-i}) g_i`.
pub fn recursive_symbols(spec: &ConeOperatorSpec, mode: usize) -> Result<Vec<RationalFamily<CRat>>> {
    let f = taylor_symbols(spec, mode)?;
    if f[0].is_zero() {
        return Err(Error::DegenerateConormalSymbol(spec.modes[mode].label.clone()));
    }
    let f0_inv = RationalFamily::from_poly(f[0].clone()).recip()?;
    let mut g = vec![f0_inv.clone()];
    for k in 1..spec.mu {
        let mut sum = RationalFamily::zero();
        for (i, gi) in g.iter().enumerate() {
            let shifted = RationalFamily::from_poly(f[k - i].shift(&c_int(-(i as i64))));
            sum = &sum + &(&shifted * gi);
        }
        let lead = f0_inv.shift(&c_int(-(k as i64)));
        g.push(-&(&lead * &sum));
    }
    Ok(g)
}

/// The half-open strip `left <= Re ρ < right`.
#[derive(Clone, Debug, Serialize)]
pub struct Strip {
    pub left: f64,
    pub right: f64,
    #[serde(skip)]
    pub left_exact: Rat,
    #[serde(skip)]
    pub right_exact: Rat,
}

/// Where a real part sits relative to a strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StripPosition {
    Below,
    LeftEdge,
    Inside,
    Above,
}

impl Strip {
    /// `[(n+1)/2 - γ - order, (n+1)/2 - γ)`.
    pub fn new(n: usize, gamma: f64, order: usize) -> Self {
        let g = exact_real(gamma).0;
        let right_exact = rat(n as i64 + 1, 2) - g;
        let left_exact = &right_exact - rat(order as i64, 1);
        Strip {
            left: rat_to_f64(&left_exact),
            right: rat_to_f64(&right_exact),
            left_exact,
            right_exact,
        }
    }

    pub fn position_exact(&self, re: &Rat) -> StripPosition {
        if re < &self.left_exact {
            StripPosition::Below
        } else if re == &self.left_exact {
            StripPosition::LeftEdge
        } else if re < &self.right_exact {
            StripPosition::Inside
        } else {
            StripPosition::Above
        }
    }

    pub fn position_f64(&self, re: f64) -> StripPosition {
        if re < self.left {
            StripPosition::Below
        } else if re == self.left {
            StripPosition::LeftEdge
        } else if re < self.right {
            StripPosition::Inside
        } else {
            StripPosition::Above
        }
    }

    pub fn position(&self, r: &Root) -> StripPosition {
        match &r.exact {
            Some(e) => self.position_exact(&e.re),
            None => self.position_f64(r.value.re),
        }
    }

    pub fn contains(&self, r: &Root) -> bool {
        matches!(self.position(r), StripPosition::LeftEdge | StripPosition::Inside)
    }
}

/// A pole of one eigenvalue group.
#[derive(Clone, Debug, Serialize)]
pub struct PoleEntry {
    pub rho: Complex64,
    #[serde(skip)]
    pub rho_exact: Option<CRat>,
    /// Admitted log powers are `0..=max_log`.
    pub max_log: usize,
    pub group: usize,
    pub group_label: String,
    pub modes: Vec<String>,
}

impl PoleEntry {
    pub fn root(&self) -> Root {
        Root {
            value: self.rho,
            exact: self.rho_exact.clone(),
            multiplicity: self.max_log + 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleSet {
    pub entries: Vec<PoleEntry>,
    /// Poles outside the strip, kept for reporting.
    pub excluded: Vec<PoleEntry>,
    pub strip: Strip,
    pub gamma: f64,
    pub n: usize,
    /// Order of the operator whose domain the set describes (`k μ`).
    pub mu: usize,
    pub power: usize,
    /// Set for x-dependent operators, whose shift convention is unsettled.
    pub convention_pending: bool,
}

impl PoleSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for group `g` at `rho`, if present.
    pub fn find(&self, g: usize, rho: &Root) -> Option<&PoleEntry> {
        self.entries
            .iter()
            .find(|e| e.group == g && e.root().same_point(rho, crate::algebra::TOL_POLE))
    }
}

fn selected_groups(spec: &ConeOperatorSpec, modes: Option<&[usize]>) -> Result<Vec<usize>> {
    match modes {
        None => Ok((0..spec.modes.len()).collect()),
        Some(list) => {
            if list.is_empty() {
                return Err(Error::InvalidInput("mode list is empty".into()));
            }
            for &g in list {
                spec.mode(g)?;
            }
            Ok(list.to_vec())
        }
    }
}

/// Merge roots into pole entries with the largest order seen at each point.
fn merge_roots(acc: &mut Vec<Root>, roots: Vec<Root>) {
    for r in roots {
        match acc.iter_mut().find(|a| a.same_point(&r, crate::algebra::TOL_POLE)) {
            Some(a) => a.multiplicity = a.multiplicity.max(r.multiplicity),
            None => acc.push(r),
        }
    }
}

fn assemble(
    spec: &ConeOperatorSpec,
    per_group: Vec<(usize, Vec<Root>)>,
    gamma: f64,
    power: usize,
) -> PoleSet {
    let strip = Strip::new(spec.n, gamma, power * spec.mu);
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for (g, mut roots) in per_group {
        roots.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
        let m = &spec.modes[g];
        for r in roots {
            let e = PoleEntry {
                rho: r.value,
                rho_exact: r.exact.clone(),
                max_log: r.multiplicity - 1,
                group: g,
                group_label: m.label.clone(),
                modes: m.components.clone(),
            };
            if strip.contains(&r) {
                entries.push(e);
            } else {
                excluded.push(e);
            }
        }
    }
    PoleSet {
        entries,
        excluded,
        strip,
        gamma,
        n: spec.n,
        mu: power * spec.mu,
        power,
        convention_pending: !spec.is_straight(),
    }
}

/// `Q_{A,γ}`: poles of `g_0 .. g_{μ-1}` per group inside the weight strip.
pub fn pole_set(spec: &ConeOperatorSpec, gamma: f64, modes: Option<&[usize]>) -> Result<PoleSet> {
    let groups = selected_groups(spec, modes)?;
    let mut per_group = Vec::new();
    for g in groups {
        let mut acc = Vec::new();
        for gk in recursive_symbols(spec, g)? {
            merge_roots(&mut acc, gk.poles()?);
        }
        per_group.push((g, acc));
    }
    Ok(assemble(spec, per_group, gamma, 1))
}

/// Indicial polynomial of the `k`-fold composition:
/// `Π_{j<k} σ(λ + jμ)`, whose roots are the exponents ρ with `A^k x^{-ρ} = 0`.
pub fn power_symbol(spec: &ConeOperatorSpec, mode: usize, k: usize) -> Result<Poly<CRat>> {
    let f0 = conormal_symbol(spec, mode)?;
    let mut p = Poly::one();
    for j in 0..k {
        p = &p * &f0.shift(&c_int((j * spec.mu) as i64));
    }
    Ok(p)
}

/// `Q_{A^k,γ}` for straight operators, on the strip of width `kμ`.
pub fn pole_set_power(
    spec: &ConeOperatorSpec,
    gamma: f64,
    k: usize,
    modes: Option<&[usize]>,
) -> Result<PoleSet> {
    if k == 0 {
        return Err(Error::InvalidInput("power k must be at least 1".into()));
    }
    if k == 1 {
        return pole_set(spec, gamma, modes);
    }
    if !spec.is_straight() {
        return Err(Error::Unsupported(
            "powers of x-dependent operators are unsupported in v1".into(),
        ));
    }
    let groups = selected_groups(spec, modes)?;
    let mut per_group = Vec::new();
    for g in groups {
        let p = power_symbol(spec, g, k)?;
        if p.is_zero() {
            return Err(Error::DegenerateConormalSymbol(spec.modes[g].label.clone()));
        }
        let roots = if p.is_constant() { Vec::new() } else { roots_exact(&p)? };
        per_group.push((g, roots));
    }
    Ok(assemble(spec, per_group, gamma, k))
}

/// Warning-level check of the principal coefficient per group.
pub fn ellipticity_warnings(spec: &ConeOperatorSpec) -> Vec<String> {
    spec.modes
        .iter()
        .filter(|m| m.coeffs.last().is_none_or(|a| a.coeff(0).is_zero()))
        .map(|m| format!("group {}: leading coefficient a_mu(0) vanishes", m.label))
        .collect()
}

/// Closed-form Laplacian poles `(n-1)/2 ± ν` for a group.
pub fn laplacian_pole_formula(n: usize, eigenvalue: f64) -> [f64; 2] {
    let a = (n as f64 - 1.0) / 2.0;
    let nu = crate::geometry::bessel_order(n, eigenvalue);
    [a - nu, a + nu]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::crat;
    use crate::geometry::{eigen_data, Circle, CrossSectionModel, Sphere};
    use std::f64::consts::PI;

    fn circle_lap(l: f64, modes: usize) -> ConeOperatorSpec {
        let c = Circle { circumference: l };
        laplacian(1, &eigen_data(&c, modes).unwrap())
    }

    fn q(c: &[i64]) -> Poly<CRat> {
        Poly::new(c.iter().map(|&v| crat(v, 1)).collect())
    }

    #[test]
    fn laplacian_conormal_symbols() {
        let s = circle_lap(2.0 * PI, 3);
        assert_eq!(conormal_symbol(&s, 2).unwrap(), q(&[-4, 0, 1]));
        let sp = Sphere { n: 2 };
        let s2 = laplacian(2, &eigen_data(&sp, 2).unwrap());
        assert_eq!(conormal_symbol(&s2, 0).unwrap(), q(&[0, -1, 1]));
        assert!(conormal_symbol(&s2, 7).is_err());
    }

    #[test]
    fn identity_coefficient() {
        let c = Circle { circumference: 2.0 * PI };
        let g = eigen_data(&c, 1).unwrap();
        let spec = ExplicitPreset
            .build(1, &g, &serde_json::json!({"mu": 1, "coeffs": [[1], [0]]}))
            .unwrap();
        assert_eq!(conormal_symbol(&spec, 0).unwrap(), q(&[1]));
        let ps = pole_set(&spec, 0.0, None).unwrap();
        assert!(ps.is_empty() && ps.excluded.is_empty());
    }

    #[test]
    fn straight_laplacian_recursion_vanishes() {
        let s = circle_lap(2.0 * PI, 2);
        let f = taylor_symbols(&s, 1).unwrap();
        assert!(f[1].is_zero());
        let g = recursive_symbols(&s, 1).unwrap();
        assert!(g[1].is_zero());
        assert_eq!(g[0].denominator(), &q(&[-1, 0, 1]));
    }

    #[test]
    fn reciprocal_of_lambda() {
        let c = Circle { circumference: 2.0 * PI };
        let g = eigen_data(&c, 1).unwrap();
        let spec = ExplicitPreset
            .build(1, &g, &serde_json::json!({"coeffs": [[0], [1]]}))
            .unwrap();
        let gs = recursive_symbols(&spec, 0).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].numerator(), &q(&[1]));
        assert_eq!(gs[0].denominator(), &q(&[0, 1]));
    }

    #[test]
    fn degenerate_symbol_rejected() {
        let c = Circle { circumference: 2.0 * PI };
        let g = eigen_data(&c, 1).unwrap();
        let spec = ExplicitPreset
            .build(1, &g, &serde_json::json!({"coeffs": [[0, 1], [0, 2]], "n_taylor": 1}))
            .unwrap();
        assert!(matches!(
            recursive_symbols(&spec, 0),
            Err(Error::DegenerateConormalSymbol(_))
        ));
    }

    #[test]
    fn insufficient_taylor_data() {
        let c = Circle { circumference: 2.0 * PI };
        let g = eigen_data(&c, 1).unwrap();
        let spec = ExplicitPreset
            .build(1, &g, &serde_json::json!({"coeffs": [[1], [0], [1]]}))
            .unwrap();
        assert!(matches!(
            taylor_symbols(&spec, 0),
            Err(Error::InsufficientTaylorData { needed: 1, available: 0 })
        ));
    }

    #[test]
    fn circle_pole_set() {
        let s = circle_lap(2.0 * PI, 3);
        let ps = pole_set(&s, -0.5, None).unwrap();
        let got: Vec<_> = ps
            .entries
            .iter()
            .map(|e| (e.group, e.rho.re, e.max_log))
            .collect();
        assert_eq!(got, vec![(0, 0.0, 1), (1, 1.0, 0)]);
        assert_eq!(ps.entries[1].modes, vec!["k=+1", "k=-1"]);
        assert!((ps.strip.left + 0.5).abs() < 1e-15 && (ps.strip.right - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_pole_set() {
        let sp = Sphere { n: 2 };
        let s = laplacian(2, &eigen_data(&sp, 3).unwrap());
        let ps = pole_set(&s, 0.0, None).unwrap();
        let got: Vec<_> = ps.entries.iter().map(|e| (e.group, e.rho.re)).collect();
        assert_eq!(got, vec![(0, 0.0), (0, 1.0)]);
    }

    #[test]
    fn circle_power_two() {
        let s = circle_lap(2.0 * PI, 4);
        let ps = pole_set_power(&s, -0.5, 2, None).unwrap();
        let got: Vec<_> = ps
            .entries
            .iter()
            .map(|e| (e.group, e.rho.re as i64, e.max_log))
            .collect();
        assert_eq!(
            got,
            vec![(0, -2, 1), (0, 0, 1), (1, -1, 1), (1, 1, 0), (2, -2, 0), (2, 0, 0), (3, 1, 0)]
        );
    }

    #[test]
    fn sphere_power_two() {
        let sp = Sphere { n: 2 };
        let s = laplacian(2, &eigen_data(&sp, 1).unwrap());
        let ps = pole_set_power(&s, 0.0, 2, None).unwrap();
        let got: Vec<_> = ps.entries.iter().map(|e| e.rho.re as i64).collect();
        assert_eq!(got, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn power_one_is_pole_set() {
        let s = circle_lap(PI, 4);
        let a = pole_set(&s, -0.3, None).unwrap();
        let b = pole_set_power(&s, -0.3, 1, None).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.rho_exact, y.rho_exact);
            assert_eq!(x.max_log, y.max_log);
        }
    }

    #[test]
    fn warped_recursion() {
        let c = Circle { circumference: 2.0 * PI };
        let g = eigen_data(&c, 2).unwrap();
        let spec = WarpedPreset.build(1, &g, &Value::Null).unwrap();
        let f = taylor_symbols(&spec, 1).unwrap();
        assert_eq!(f[1], q(&[-1]));
        let gs = recursive_symbols(&spec, 1).unwrap();
        // 1 / ((λ^2 - 2λ)(λ^2 - 1))
        assert_eq!(gs[1].numerator(), &q(&[1]));
        assert_eq!(gs[1].denominator(), &q(&[0, 2, -1, -2, 1]));
        assert!(pole_set_power(&spec, -0.5, 2, None).is_err());
        assert!(pole_set(&spec, -0.5, None).unwrap().convention_pending);
    }

    #[test]
    fn irrational_circle_uses_numeric_roots() {
        let c = Circle { circumference: 3.0 };
        let s = laplacian(1, &c.groups(3));
        let ps = pole_set(&s, -0.5, None).unwrap();
        let want = 2.0 * PI / 3.0;
        let all: Vec<_> = ps.entries.iter().chain(&ps.excluded).collect();
        assert!(all.iter().any(|e| (e.rho.re - want).abs() < 1e-12));
    }
}
