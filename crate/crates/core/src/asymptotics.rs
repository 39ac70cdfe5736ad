//! Asymptotics bases, an exact power-log calculus for cone operators and
//! symbolic domain membership.
//!
//! A term is `c · x^{-ρ} log^m(x)` on one cross-section mode. With
//! `D = -x∂_x` we have `D(x^{-ρ} log^m x) = ρ x^{-ρ} log^m x - m x^{-ρ} log^{m-1} x`,
//! so on the span of `x^{-ρ} log^j x` the operator `D` acts as `ρ - d/dL`
//! on polynomials in `L = log x`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::poly::{CRat, Coeff};
use crate::algebra::roots::{Root, TOL_POLE};
use crate::error::{Error, Result};
use crate::symbols::{pole_set, pole_set_power, ConeOperatorSpec, PoleSet, Strip, StripPosition};

/// `c · x^{-ρ} log^m(x)` on the mode `mode` of group `group`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T: Coeff> {
    pub rho: T,
    pub m: usize,
    pub group: usize,
    pub mode: String,
    pub c: T,
}

impl<T: Coeff> Term<T> {
    pub fn rho_root(&self) -> Root {
        Root {
            value: self.rho.to_c64(),
            exact: self.rho.to_crat(),
            multiplicity: 1,
        }
    }

    fn same_slot(&self, other: &Term<T>) -> bool {
        self.m == other.m
            && self.group == other.group
            && self.mode == other.mode
            && same_value(&self.rho, &other.rho)
    }

    /// Value at `x > 0`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let rho = self.rho.to_c64();
        let l = x.ln();
        self.c.to_c64() * (-rho * l).exp() * l.powi(self.m as i32)
    }
}

fn same_value<T: Coeff>(a: &T, b: &T) -> bool {
    if T::EXACT {
        a == b
    } else {
        let (a, b) = (a.to_c64(), b.to_c64());
        (a - b).norm() <= TOL_POLE * (1.0 + a.norm())
    }
}

pub type ExactTerm = Term<CRat>;

/// Sum equal `(ρ, m, mode)` slots and drop zero coefficients.
pub fn merge_terms<T: Coeff>(terms: Vec<Term<T>>) -> Vec<Term<T>> {
    let scale = terms.iter().map(|t| t.c.to_c64().norm()).fold(0.0, f64::max);
    let mut out: Vec<Term<T>> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|o| o.same_slot(&t)) {
            Some(o) => o.c = o.c.clone() + t.c,
            None => out.push(t),
        }
    }
    out.retain(|t| !t.c.negligible(scale));
    out
}

/// `A (c x^{-ρ} log^m x)`. Every `x^ν` coefficient term yields exponent
/// `ρ + μ - ν`.
pub fn apply_operator_symbolic<T: Coeff>(spec: &ConeOperatorSpec, term: &Term<T>) -> Result<Vec<Term<T>>> {
    let op = spec
        .modes
        .get(term.group)
        .ok_or_else(|| Error::UnknownMode(term.mode.clone()))?;
    let rho = term.rho.clone();
    // D^k applied to c·L^m, as coefficient vectors in L
    let mut powers: Vec<Vec<T>> = Vec::with_capacity(spec.mu + 1);
    let mut cur = vec![T::zero(); term.m + 1];
    cur[term.m] = term.c.clone();
    powers.push(cur.clone());
    for _ in 0..spec.mu {
        let next: Vec<T> = (0..cur.len())
            .map(|j| {
                let up = if j + 1 < cur.len() {
                    cur[j + 1].clone() * T::from_i64(j as i64 + 1)
                } else {
                    T::zero()
                };
                rho.clone() * cur[j].clone() - up
            })
            .collect();
        powers.push(next.clone());
        cur = next;
    }
    let max_nu = op.coeffs.iter().filter_map(|a| a.degree()).max().unwrap_or(0);
    let mut out = Vec::new();
    for nu in 0..=max_nu {
        let mut acc = vec![T::zero(); term.m + 1];
        for (k, a) in op.coeffs.iter().enumerate() {
            let coef = a.coeff(nu);
            if coef.is_zero() {
                continue;
            }
            let coef = T::from_crat(&coef);
            for (j, v) in powers[k].iter().enumerate() {
                acc[j] = acc[j].clone() + coef.clone() * v.clone();
            }
        }
        let new_rho = rho.clone() + T::from_i64(spec.mu as i64) - T::from_i64(nu as i64);
        for (j, c) in acc.into_iter().enumerate() {
            out.push(Term {
                rho: new_rho.clone(),
                m: j,
                group: term.group,
                mode: term.mode.clone(),
                c,
            });
        }
    }
    Ok(merge_terms(out))
}

/// Apply the operator to a sum of terms.
pub fn apply_expansion<T: Coeff>(spec: &ConeOperatorSpec, terms: &[Term<T>]) -> Result<Vec<Term<T>>> {
    let mut out = Vec::new();
    for t in terms {
        out.extend(apply_operator_symbolic(spec, t)?);
    }
    Ok(merge_terms(out))
}

/// `A^k` applied to a sum of terms.
pub fn apply_power<T: Coeff>(spec: &ConeOperatorSpec, terms: &[Term<T>], k: usize) -> Result<Vec<Term<T>>> {
    let mut cur = merge_terms(terms.to_vec());
    for _ in 0..k {
        cur = apply_expansion(spec, &cur)?;
    }
    Ok(cur)
}

/// One basis element `x^{-ρ} log^m x` on a single mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisTerm {
    pub rho: Complex64,
    #[serde(skip)]
    pub rho_exact: Option<CRat>,
    pub m: usize,
    pub group: usize,
    pub mode: String,
}

impl BasisTerm {
    pub fn rho_root(&self) -> Root {
        Root {
            value: self.rho,
            exact: self.rho_exact.clone(),
            multiplicity: 1,
        }
    }

    /// The basis element as an exact term with coefficient 1, when ρ is exact.
    pub fn exact_term(&self) -> Option<ExactTerm> {
        Some(Term {
            rho: self.rho_exact.clone()?,
            m: self.m,
            group: self.group,
            mode: self.mode.clone(),
            c: CRat::one(),
        })
    }

    pub fn float_term(&self) -> Term<Complex64> {
        Term {
            rho: self.rho,
            m: self.m,
            group: self.group,
            mode: self.mode.clone(),
            c: Complex64::new(1.0, 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let l = x.ln();
        (-self.rho * l).exp() * l.powi(self.m as i32)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsBasis {
    pub terms: Vec<BasisTerm>,
    pub strip: Strip,
    pub gamma: f64,
    pub n: usize,
    pub mu: usize,
    pub power: usize,
}

impl AsymptoticsBasis {
    pub fn for_mode<'a>(&'a self, mode: &'a str) -> impl Iterator<Item = &'a BasisTerm> + 'a {
        self.terms.iter().filter(move |t| t.mode == mode)
    }

    pub fn contains(&self, group: usize, mode: &str, rho: &Root, m: usize) -> bool {
        self.terms.iter().any(|t| {
            t.group == group && t.mode == mode && t.m == m && t.rho_root().same_point(rho, TOL_POLE)
        })
    }
}

/// One triple per `(ρ, m, mode)` with `m <= M_ρ`, over every contributing mode.
pub fn enumerate_asymptotics(ps: &PoleSet) -> AsymptoticsBasis {
    let mut terms = Vec::new();
    for e in &ps.entries {
        for mode in &e.modes {
            for m in 0..=e.max_log {
                terms.push(BasisTerm {
                    rho: e.rho,
                    rho_exact: e.rho_exact.clone(),
                    m,
                    group: e.group,
                    mode: mode.clone(),
                });
            }
        }
    }
    AsymptoticsBasis {
        terms,
        strip: ps.strip.clone(),
        gamma: ps.gamma,
        n: ps.n,
        mu: ps.mu,
        power: ps.power,
    }
}

/// Closed extensions whose domains are decided symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "k")]
pub enum Realization {
    Min,
    /// Minimal domain plus constants.
    Dd,
    Max,
    /// Maximal domain of `A^k`.
    Power(usize),
    /// Domain of the `k`-th power of the constants-extended realization.
    DdPower(usize),
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Realization::Min => write!(f, "min"),
            Realization::Dd => write!(f, "dd"),
            Realization::Max => write!(f, "max"),
            Realization::Power(k) => write!(f, "power:{k}"),
            Realization::DdPower(k) => write!(f, "dd-power:{k}"),
        }
    }
}

impl std::str::FromStr for Realization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown realization '{s}'"));
        match s {
            "min" => Ok(Realization::Min),
            "dd" => Ok(Realization::Dd),
            "max" => Ok(Realization::Max),
            _ => {
                let (head, k) = s.split_once(':').ok_or_else(bad)?;
                let k: usize = k.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                match head {
                    "power" => Ok(Realization::Power(k)),
                    "dd-power" => Ok(Realization::DdPower(k)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Member,
    NonMember,
    /// Exponent on the strip edge; not classified.
    Boundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub verdict: Verdict,
    pub explanation: String,
}

impl Membership {
    fn new(verdict: Verdict, explanation: impl Into<String>) -> Self {
        Membership {
            verdict,
            explanation: explanation.into(),
        }
    }

    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

fn is_constant<T: Coeff>(spec: &ConeOperatorSpec, t: &Term<T>) -> bool {
    t.m == 0
        && t.rho.is_zero()
        && spec
            .modes
            .get(t.group)
            .is_some_and(|m| m.eigenvalue.is_zero())
}

/// Decide whether a single term lies in the domain of a realization in
/// `H^{s,γ}` (terms are understood as multiplied by a cut-off).
pub fn domain_membership<T: Coeff>(
    term: &Term<T>,
    realization: Realization,
    gamma: f64,
    spec: &ConeOperatorSpec,
) -> Result<Membership> {
    use StripPosition::*;
    let root = term.rho_root();
    let strip1 = Strip::new(spec.n, gamma, spec.mu);
    match realization {
        Realization::Min => Ok(match strip1.position(&root) {
            Below => Membership::new(Verdict::Member, "minimal-domain regularity"),
            LeftEdge => Membership::new(Verdict::Boundary, "exponent on the left strip edge"),
            _ => Membership::new(Verdict::NonMember, "exponent inside or above the strip"),
        }),
        Realization::Dd => Ok(match strip1.position(&root) {
            Below => Membership::new(Verdict::Member, "minimal-domain regularity"),
            Above => Membership::new(Verdict::NonMember, "not in H^{s,γ}"),
            _ if is_constant(spec, term) => Membership::new(Verdict::Member, "constant term"),
            LeftEdge => Membership::new(Verdict::Boundary, "exponent on the left strip edge"),
            Inside => Membership::new(Verdict::NonMember, "only constants are added to the minimal domain"),
        }),
        Realization::Max | Realization::Power(_) => {
            let k = match realization {
                Realization::Power(k) => k,
                _ => 1,
            };
            let ps = if k == 1 {
                pole_set(spec, gamma, Some(&[term.group]))?
            } else {
                pole_set_power(spec, gamma, k, Some(&[term.group]))?
            };
            let basis = enumerate_asymptotics(&ps);
            Ok(match ps.strip.position(&root) {
                Below => Membership::new(Verdict::Member, "minimal-domain regularity"),
                Above => Membership::new(Verdict::NonMember, "not in H^{s,γ}"),
                pos => {
                    if basis.contains(term.group, &term.mode, &root, term.m) {
                        Membership::new(Verdict::Member, "in the asymptotics basis")
                    } else if pos == LeftEdge {
                        Membership::new(Verdict::Boundary, "exponent on the left strip edge")
                    } else {
                        Membership::new(Verdict::NonMember, "not an admitted pole or log power")
                    }
                }
            })
        }
        Realization::DdPower(1) => domain_membership(term, Realization::Dd, gamma, spec),
        Realization::DdPower(k) => {
            let first = domain_membership(term, Realization::Dd, gamma, spec)?;
            if !first.is_member() {
                return Ok(first);
            }
            let image = apply_operator_symbolic(spec, term)?;
            let mut worst = Membership::new(Verdict::Member, format!("image lies in dd-power:{}", k - 1));
            for t in &image {
                let v = domain_membership(t, Realization::DdPower(k - 1), gamma, spec)?;
                match v.verdict {
                    Verdict::NonMember => {
                        return Ok(Membership::new(
                            Verdict::NonMember,
                            format!("image term x^-({}) log^{} x: {}", t.rho.to_c64(), t.m, v.explanation),
                        ))
                    }
                    Verdict::Boundary => worst = v,
                    Verdict::Member => {}
                }
            }
            Ok(worst)
        }
    }
}
