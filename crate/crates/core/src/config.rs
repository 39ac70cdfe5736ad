//! Run configuration: one JSON document with a block per module.
//!
//! Every numerical tolerance is a key with the module default, so runs can
//! be repeated with altered tolerances without recompiling.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::asymptotics::Realization;
use crate::error::{Error, Result};
use crate::geometry::{eigen_data, mode_table, weight_window, CrossSectionModel, CrossSectionRegistry, EigenGroup, Mode};
use crate::heat::HeatConfig;
use crate::mellin::{Cutoff, LogGrid};
use crate::powers::{ContourSpec, PowerProbeConfig, ShiftLadder};
use crate::special::OuterBc;
use crate::symbols::{ConeOperatorSpec, PresetRegistry};
use crate::tip::FitOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub tau_min: f64,
    pub intervals: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            tau_min: -10.0,
            intervals: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatBlock {
    pub t_final: f64,
    pub dt: f64,
    pub outer_bc: OuterBc,
    pub theta: f64,
    pub output_times: Vec<f64>,
    pub rannacher_steps: usize,
    /// Realization the run is meant to discretize; `dd` requires γ inside
    /// the weight window.
    pub realization: Option<String>,
}

impl Default for HeatBlock {
    fn default() -> Self {
        HeatBlock {
            t_final: 0.1,
            dt: 1e-3,
            outer_bc: OuterBc::Dirichlet,
            theta: 0.5,
            output_times: Vec::new(),
            rannacher_steps: 2,
            realization: Some("dd".into()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitBlock {
    pub window: Option<(f64, f64)>,
    pub max_cond: f64,
    pub regression_points: usize,
    /// Higher power levels whose new terms are fitted as tail columns.
    pub tail_levels: usize,
    /// Power `k` of the basis `Q_{A^k}` used when no basis file is given.
    pub basis_power: usize,
    /// `‖f‖` used in the jump threshold of decomposition tracks.
    pub forcing_scale: f64,
}

impl Default for FitBlock {
    fn default() -> Self {
        let o = FitOptions::default();
        FitBlock {
            window: o.window,
            max_cond: o.max_cond,
            regression_points: o.regression_points,
            tail_levels: 0,
            basis_power: 1,
            forcing_scale: 0.0,
        }
    }
}

impl FitBlock {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            window: self.window,
            tail: Vec::new(),
            max_cond: self.max_cond,
            regression_points: self.regression_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsBlock {
    pub power: usize,
    pub realizations: Vec<String>,
}

impl Default for AsymptoticsBlock {
    fn default() -> Self {
        AsymptoticsBlock {
            power: 1,
            realizations: vec!["min".into(), "dd".into(), "max".into()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormBlock {
    pub s: usize,
    pub p: f64,
    pub cutoff: Cutoff,
}

impl Default for NormBlock {
    fn default() -> Self {
        NormBlock {
            s: 0,
            p: 2.0,
            cutoff: Cutoff::Smooth,
        }
    }
}

/// A single term `x^{-ρ} log^m x` on one mode, cut off near `x = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermBlock {
    pub rho: Complex64,
    #[serde(default)]
    pub m: usize,
    pub mode: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowersBlock {
    /// Mode whose radial operator is discretized.
    pub mode: String,
    pub theta: f64,
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub outer_bc: OuterBc,
    /// Fixed shift; the doubling ladder is used when absent.
    pub shift: Option<f64>,
    pub ladder: ShiftLadder,
    /// Terms in the R-bound estimate; 0 skips it.
    pub r_terms: usize,
    pub r_trials: usize,
    pub probe: PowerProbeConfig,
    /// Profile for the `powers` subcommand.
    pub term: Option<TermBlock>,
}

impl Default for PowersBlock {
    fn default() -> Self {
        PowersBlock {
            mode: "k=0".into(),
            theta: 3.0 * PI / 4.0,
            samples: 200,
            r_min: 1e-3,
            r_max: 1e6,
            outer_bc: OuterBc::Neumann,
            shift: None,
            ladder: ShiftLadder::default(),
            r_terms: 0,
            r_trials: 0,
            probe: PowerProbeConfig {
                contour: ContourSpec::default(),
                ..PowerProbeConfig::default()
            },
            term: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBlock {
    /// Overrides of acceptance tolerances, keyed `c<id>.<name>`.
    pub tolerances: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cross_section: Value,
    #[serde(default = "default_operator")]
    pub operator: Value,
    pub gamma: f64,
    /// Number of distinct cross-section eigenvalues carried.
    #[serde(default = "default_max_modes")]
    pub max_modes: usize,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub heat: HeatBlock,
    #[serde(default)]
    pub fit: FitBlock,
    #[serde(default)]
    pub asymptotics: AsymptoticsBlock,
    #[serde(default)]
    pub norm: NormBlock,
    #[serde(default)]
    pub powers: PowersBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,
}

fn default_operator() -> Value {
    serde_json::json!({"preset": "laplacian"})
}

fn default_max_modes() -> usize {
    3
}

fn default_output_dir() -> String {
    "out".into()
}

/// Everything derived from a config that the subcommands share.
#[derive(Debug)]
pub struct Resolved {
    pub cross_section: Box<dyn CrossSectionModel>,
    pub groups: Vec<EigenGroup>,
    pub modes: Vec<Mode>,
    pub spec: ConeOperatorSpec,
    pub grid: LogGrid,
}

impl Resolved {
    pub fn n(&self) -> usize {
        self.cross_section.dim()
    }

    pub fn mode(&self, label: &str) -> Result<&Mode> {
        self.modes
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }
}

impl RunConfig {
    /// The circle of circumference 2π with the Laplacian at γ = -1/2.
    pub fn preset() -> Self {
        RunConfig {
            cross_section: serde_json::json!({"kind": "circle", "L": 2.0 * PI}),
            operator: default_operator(),
            gamma: -0.5,
            max_modes: default_max_modes(),
            grid: GridBlock::default(),
            heat: HeatBlock::default(),
            fit: FitBlock::default(),
            asymptotics: AsymptoticsBlock::default(),
            norm: NormBlock::default(),
            powers: PowersBlock::default(),
            verify: VerifyBlock::default(),
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn heat_config(&self, grid: LogGrid) -> HeatConfig {
        HeatConfig {
            grid,
            t_final: self.heat.t_final,
            dt: self.heat.dt,
            outer_bc: self.heat.outer_bc,
            theta: self.heat.theta,
            output_times: self.heat.output_times.clone(),
            rannacher_steps: self.heat.rannacher_steps,
        }
    }

    /// Build the cross-section, operator and grid, checking the
    /// cross-references between blocks.
    pub fn resolve(&self) -> Result<Resolved> {
        let cs = CrossSectionRegistry::default().build(&self.cross_section)?;
        let groups = eigen_data(cs.as_ref(), self.max_modes)?;
        let preset = self
            .operator
            .get("preset")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("operator.preset missing".into()))?;
        let spec = PresetRegistry::default()
            .get(preset)?
            .build(cs.dim(), &groups, &self.operator)?;
        let grid = LogGrid::new(self.grid.tau_min, self.grid.intervals)?;
        if let Some(r) = &self.heat.realization {
            let r: Realization = r.parse()?;
            if r == Realization::Dd {
                let w = weight_window(cs.as_ref())?;
                if !w.contains(self.gamma) {
                    return Err(Error::Config(format!(
                        "gamma = {} lies outside the weight window ({}, {}) required by realization dd",
                        self.gamma, w.lo, w.hi
                    )));
                }
            }
        }
        self.heat_config(grid).validate()?;
        if !self.gamma.is_finite() {
            return Err(Error::Config("gamma must be finite".into()));
        }
        let modes = mode_table(&groups);
        Ok(Resolved {
            cross_section: cs,
            groups,
            modes,
            spec,
            grid,
        })
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}
