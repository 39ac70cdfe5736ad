//! Model cross-sections of the cone, their Laplacian spectra, Bessel orders
//! and the admissible weight window.
//!
//! A cross-section is known only through its spectrum: each distinct
//! eigenvalue forms a group whose multiplicity copies are the individual
//! modes (components) carried by fields.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::poly::{exact_sqrt, rat, rat_from_f64, rat_to_f64, rationalize, Rat};
use crate::error::{Error, Result};

/// Largest denominator accepted when recognising a float as a rational.
/// Kept small so that generic floats are not snapped to a nearby fraction.
const MAX_DEN: i64 = 10_000;

/// Exact rational for `v` when it is a simple fraction, otherwise its exact
/// binary value. The flag reports whether the simple form was found.
pub fn exact_real(v: f64) -> (Rat, bool) {
    match rationalize(v, MAX_DEN, 1e-12 * (1.0 + v.abs())) {
        Some(r) => (r, true),
        None => (rat_from_f64(v).unwrap_or_else(Rat::zero), false),
    }
}

/// One distinct eigenvalue of the cross-section Laplacian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenGroup {
    pub eigenvalue: f64,
    #[serde(skip)]
    pub exact: Rat,
    /// True when `exact` is the true eigenvalue rather than a float image.
    pub is_exact: bool,
    pub multiplicity: usize,
    pub label: String,
    /// One label per eigenfunction in the group.
    pub components: Vec<String>,
}

impl EigenGroup {
    fn new(exact: Rat, is_exact: bool, multiplicity: usize, label: String, components: Vec<String>) -> Self {
        EigenGroup {
            eigenvalue: rat_to_f64(&exact),
            exact,
            is_exact,
            multiplicity,
            label,
            components,
        }
    }
}

/// A single mode carried by a field: one eigenfunction of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub group: usize,
    pub eigenvalue: f64,
}

/// Flatten groups into the per-eigenfunction mode table.
pub fn mode_table(groups: &[EigenGroup]) -> Vec<Mode> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(g, eg)| {
            eg.components.iter().map(move |c| Mode {
                label: c.clone(),
                group: g,
                eigenvalue: eg.eigenvalue,
            })
        })
        .collect()
}

/// A model cross-section, described by its spectrum only.
pub trait CrossSectionModel: fmt::Debug + Send + Sync {
    fn kind(&self) -> &'static str;
    /// Dimension of the cross-section; the cone has dimension `n + 1`.
    fn dim(&self) -> usize;
    /// Riemannian volume, used to turn per-mode integrals into norms.
    fn volume(&self) -> f64;
    /// Up to `count` distinct eigenvalue groups in decreasing order.
    fn groups(&self, count: usize) -> Vec<EigenGroup>;
    /// Whether the zero eigenvalue is simple.
    fn connected(&self) -> bool {
        true
    }
    /// Config echo.
    fn to_json(&self) -> Value;
}

/// Circle of circumference `L`: eigenvalues `-(2πk/L)^2`.
#[derive(Clone, Debug)]
pub struct Circle {
    pub circumference: f64,
}

impl CrossSectionModel for Circle {
    fn kind(&self) -> &'static str {
        "circle"
    }
    fn dim(&self) -> usize {
        1
    }
    fn volume(&self) -> f64 {
        self.circumference
    }
    fn groups(&self, count: usize) -> Vec<EigenGroup> {
        let freq = 2.0 * PI / self.circumference;
        // (2π/L)^2 is rational exactly when L/(2π) is
        let ratio = rationalize(self.circumference / (2.0 * PI), MAX_DEN, 1e-13);
        (0..count)
            .map(|k| {
                let (exact, is_exact) = match &ratio {
                    Some(r) => {
                        let f = rat(k as i64, 1) / r;
                        (-(&f * &f), true)
                    }
                    None => {
                        let v = -(freq * k as f64).powi(2);
                        (rat_from_f64(v).unwrap(), k == 0)
                    }
                };
                if k == 0 {
                    EigenGroup::new(exact, true, 1, "k=0".into(), vec!["k=0".into()])
                } else {
                    EigenGroup::new(
                        exact,
                        is_exact,
                        2,
                        format!("k={k}"),
                        vec![format!("k=+{k}"), format!("k=-{k}")],
                    )
                }
            })
            .collect()
    }
    fn to_json(&self) -> Value {
        serde_json::json!({"kind": "circle", "L": self.circumference})
    }
}

/// Unit round sphere `S^n`, `n >= 2`: eigenvalues `-l(l+n-1)`.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub n: usize,
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-`l` spherical harmonics on `S^n`.
pub fn spherical_harmonic_dim(n: usize, l: usize) -> usize {
    let (n, l) = (n as u64, l as u64);
    let lower = if l >= 2 { binomial(n + l - 2, n) } else { 0 };
    (binomial(n + l, n) - lower) as usize
}

impl CrossSectionModel for Sphere {
    fn kind(&self) -> &'static str {
        "sphere"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn volume(&self) -> f64 {
        let a = (self.n + 1) as f64 / 2.0;
        2.0 * PI.powf(a) / statrs::function::gamma::gamma(a)
    }
    fn groups(&self, count: usize) -> Vec<EigenGroup> {
        (0..count)
            .map(|l| {
                let ev = -((l * (l + self.n - 1)) as i64);
                let mult = spherical_harmonic_dim(self.n, l);
                let comps = (0..mult).map(|m| format!("l={l},m={m}")).collect();
                EigenGroup::new(rat(ev, 1), true, mult, format!("l={l}"), comps)
            })
            .collect()
    }
    fn to_json(&self) -> Value {
        serde_json::json!({"kind": "sphere", "n": self.n})
    }
}

/// A cross-section given directly by `(eigenvalue, multiplicity)` pairs.
#[derive(Clone, Debug)]
pub struct Explicit {
    pub n: usize,
    pub eigs: Vec<(f64, usize)>,
    pub volume: f64,
}

impl Explicit {
    pub fn new(n: usize, mut eigs: Vec<(f64, usize)>, volume: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCrossSection("dimension n must be at least 1".into()));
        }
        if eigs.is_empty() {
            return Err(Error::InvalidCrossSection("empty eigenvalue list".into()));
        }
        for &(ev, m) in &eigs {
            if !ev.is_finite() || ev > 0.0 {
                return Err(Error::InvalidCrossSection(format!(
                    "eigenvalue {ev} is positive; the Laplacian must be non-positive"
                )));
            }
            if m == 0 {
                return Err(Error::InvalidCrossSection(format!(
                    "eigenvalue {ev} has multiplicity 0"
                )));
            }
        }
        if !(volume > 0.0) {
            return Err(Error::InvalidCrossSection("volume must be positive".into()));
        }
        eigs.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(Explicit { n, eigs, volume })
    }
}

impl CrossSectionModel for Explicit {
    fn kind(&self) -> &'static str {
        "explicit"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn volume(&self) -> f64 {
        self.volume
    }
    fn connected(&self) -> bool {
        !(self.eigs[0].0 == 0.0 && self.eigs[0].1 > 1)
    }
    fn groups(&self, count: usize) -> Vec<EigenGroup> {
        self.eigs
            .iter()
            .take(count)
            .enumerate()
            .map(|(g, &(ev, m))| {
                let (exact, is_exact) = exact_real(ev);
                let comps = (0..m).map(|c| format!("g{g}.{c}")).collect();
                EigenGroup::new(exact, is_exact, m, format!("g{g}"), comps)
            })
            .collect()
    }
    fn to_json(&self) -> Value {
        serde_json::json!({"kind": "explicit", "n": self.n, "eigs": self.eigs, "volume": self.volume})
    }
}

type Builder = fn(&Value) -> Result<Box<dyn CrossSectionModel>>;

/// Cross-section models by `kind` name.
pub struct CrossSectionRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

fn num_field(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("cross_section.{key} missing or not a number")))
}

fn build_circle(v: &Value) -> Result<Box<dyn CrossSectionModel>> {
    let l = num_field(v, "L")?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidCrossSection(format!("circumference {l} must be positive")));
    }
    Ok(Box::new(Circle { circumference: l }))
}

fn build_sphere(v: &Value) -> Result<Box<dyn CrossSectionModel>> {
    let n = num_field(v, "n")?;
    if n < 2.0 || n.fract() != 0.0 {
        return Err(Error::InvalidCrossSection(format!("sphere dimension {n} must be an integer >= 2")));
    }
    Ok(Box::new(Sphere { n: n as usize }))
}

fn build_explicit(v: &Value) -> Result<Box<dyn CrossSectionModel>> {
    let n = v.get("n").and_then(Value::as_u64).unwrap_or(1) as usize;
    let volume = v.get("volume").and_then(Value::as_f64).unwrap_or(1.0);
    let raw = v
        .get("eigs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("cross_section.eigs missing".into()))?;
    let mut eigs = Vec::with_capacity(raw.len());
    for e in raw {
        let pair = e.as_array().filter(|a| a.len() == 2);
        let parsed = pair.and_then(|a| Some((a[0].as_f64()?, a[1].as_u64()? as usize)));
        eigs.push(parsed.ok_or_else(|| {
            Error::Config(format!("cross_section.eigs entry {e} is not [eigenvalue, multiplicity]"))
        })?);
    }
    Ok(Box::new(Explicit::new(n, eigs, volume)?))
}

impl Default for CrossSectionRegistry {
    fn default() -> Self {
        let mut r = CrossSectionRegistry {
            builders: BTreeMap::new(),
        };
        r.register("circle", build_circle);
        r.register("sphere", build_sphere);
        r.register("explicit", build_explicit);
        r
    }
}

impl CrossSectionRegistry {
    pub fn register(&mut self, kind: &'static str, b: Builder) {
        self.builders.insert(kind, b);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &&'static str> {
        self.builders.keys()
    }

    pub fn build(&self, v: &Value) -> Result<Box<dyn CrossSectionModel>> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("cross_section.kind missing".into()))?;
        let b = self
            .builders
            .get(kind)
            .ok_or_else(|| Error::Config(format!("unknown cross-section kind '{kind}'")))?;
        b(v)
    }
}

/// Distinct eigenvalue groups, at most `max_modes`, in decreasing order.
pub fn eigen_data(cs: &dyn CrossSectionModel, max_modes: usize) -> Result<Vec<EigenGroup>> {
    if max_modes == 0 {
        return Err(Error::InvalidInput("max_modes must be at least 1".into()));
    }
    Ok(cs.groups(max_modes))
}

/// Open interval of admissible weights γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub lo: f64,
    pub hi: f64,
}

impl WeightWindow {
    pub fn contains(&self, gamma: f64) -> bool {
        self.lo < gamma && gamma < self.hi
    }
}

pub fn weight_window(cs: &dyn CrossSectionModel) -> Result<WeightWindow> {
    if !cs.connected() {
        return Err(Error::InvalidCrossSection(
            "zero eigenvalue is not simple; only connected cross-sections are supported".into(),
        ));
    }
    let n = cs.dim() as f64;
    let groups = cs.groups(usize::MAX.min(64));
    let lambda1 = groups
        .iter()
        .map(|g| g.eigenvalue)
        .find(|&e| e != 0.0)
        .ok_or_else(|| Error::InvalidCrossSection("no non-zero eigenvalue".into()))?;
    let lo = (n - 3.0) / 2.0;
    let a = (n - 1.0) / 2.0;
    let hi = (-1.0 + (a * a - lambda1).sqrt()).min((n + 1.0) / 2.0);
    if lo >= hi {
        return Err(Error::NoAdmissibleWeight { lo, hi });
    }
    Ok(WeightWindow { lo, hi })
}

/// `ν = sqrt(((n-1)/2)^2 - λ)`.
pub fn bessel_order(n: usize, eigenvalue: f64) -> f64 {
    let a = (n as f64 - 1.0) / 2.0;
    (a * a - eigenvalue).sqrt()
}

/// Exact Bessel order when the radicand is a perfect rational square.
pub fn bessel_order_exact(n: usize, eigenvalue: &Rat) -> Option<Rat> {
    let a = rat(n as i64 - 1, 2);
    let radicand = &a * &a - eigenvalue;
    if radicand.is_negative() {
        return None;
    }
    exact_sqrt(&radicand)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evs(cs: &dyn CrossSectionModel, k: usize) -> Vec<(f64, usize)> {
        eigen_data(cs, k)
            .unwrap()
            .iter()
            .map(|g| (g.eigenvalue, g.multiplicity))
            .collect()
    }

    #[test]
    fn unit_circle_spectrum() {
        let c = Circle { circumference: 2.0 * PI };
        assert_eq!(evs(&c, 3), vec![(0.0, 1), (-1.0, 2), (-4.0, 2)]);
        assert!(c.groups(3).iter().all(|g| g.is_exact));
    }

    #[test]
    fn half_circle_is_exact() {
        let c = Circle { circumference: PI };
        let g = c.groups(3);
        assert_eq!(g[2].exact, rat(-16, 1));
    }

    #[test]
    fn sphere_spectrum() {
        assert_eq!(evs(&Sphere { n: 2 }, 2), vec![(0.0, 1), (-2.0, 3)]);
    }

    #[test]
    fn explicit_echoed() {
        let e = Explicit::new(1, vec![(0.0, 1), (-3.0, 4)], 1.0).unwrap();
        assert_eq!(evs(&e, 5), vec![(0.0, 1), (-3.0, 4)]);
    }

    #[test]
    fn explicit_positive_rejected() {
        assert!(matches!(
            Explicit::new(1, vec![(0.0, 1), (2.0, 1)], 1.0),
            Err(Error::InvalidCrossSection(_))
        ));
    }

    #[test]
    fn windows() {
        let w = weight_window(&Sphere { n: 2 }).unwrap();
        assert!((w.lo + 0.5).abs() < 1e-12 && (w.hi - 0.5).abs() < 1e-12);
        let w = weight_window(&Circle { circumference: 2.0 * PI }).unwrap();
        assert!((w.lo + 1.0).abs() < 1e-12 && w.hi.abs() < 1e-12);
        let w = weight_window(&Circle { circumference: 4.0 * PI }).unwrap();
        assert!((w.lo + 1.0).abs() < 1e-12 && (w.hi + 0.5).abs() < 1e-12);
    }

    #[test]
    fn window_needs_a_nonzero_eigenvalue() {
        // tiny λ1 still leaves a nonempty window since sqrt(a^2 - λ1) > a
        let e = Explicit::new(1, vec![(0.0, 1), (-1e-6, 1)], 1.0).unwrap();
        assert!(weight_window(&e).is_ok());
        let e = Explicit::new(1, vec![(0.0, 1)], 1.0).unwrap();
        assert!(weight_window(&e).is_err());
    }

    #[test]
    fn bessel_orders() {
        assert_eq!(bessel_order(1, -4.0), 2.0);
        assert_eq!(bessel_order(2, -2.0), 1.5);
        assert_eq!(bessel_order(1, 0.0), 0.0);
        assert_eq!(bessel_order_exact(2, &rat(-2, 1)), Some(rat(3, 2)));
        assert_eq!(bessel_order_exact(1, &rat(-2, 1)), None);
    }

    #[test]
    fn harmonic_dimensions() {
        for l in 0..=10 {
            assert_eq!(spherical_harmonic_dim(2, l), 2 * l + 1);
            // S^3: (l+1)^2
            assert_eq!(spherical_harmonic_dim(3, l), (l + 1) * (l + 1));
        }
    }

    #[test]
    fn registry_builds_by_kind() {
        let r = CrossSectionRegistry::default();
        let cs = r.build(&serde_json::json!({"kind": "sphere", "n": 2})).unwrap();
        assert_eq!(cs.kind(), "sphere");
        assert!(r.build(&serde_json::json!({"kind": "torus"})).is_err());
    }

    #[test]
    fn sphere_volume() {
        assert!((Sphere { n: 2 }.volume() - 4.0 * PI).abs() < 1e-12);
    }
}
