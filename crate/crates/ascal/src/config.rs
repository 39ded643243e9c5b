//! Run configuration: a flat, sectioned key-value (TOML) schema with strict
//! unknown-key rejection, whole-config semantic validation that reports every
//! error at once, dotted-path overrides, and lossless re-emission.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::BaseRun;
use crate::laws::{SymbolLaw, TableLaw};
use crate::norms::GevreyParams;
use crate::solver::{
    DtMode, InitialRecipe, ModeSpec, NormsPlan, SimulationState, SolverError, StepPolicy,
    DEFAULT_RESOLUTION_GUARD,
};
use crate::spectral::Lattice;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config invalid:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("override `{key}`: {reason}")]
    BadOverride { key: String, reason: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias_cut: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    /// mg | ipmb | sipm | table
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// table entries; an empty list is the zero law
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub k: [i64; 3],
    pub m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// gevrey | modes | zero
    pub recipe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeEntry>,
}

impl FieldSection {
    pub fn zero() -> Self {
        FieldSection {
            recipe: "zero".into(),
            tau0: None,
            s: None,
            seed: None,
            amplitude: None,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub k: [i64; 3],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub kappa: f64,
    pub t_end: f64,
    #[serde(default = "default_outputs")]
    pub outputs: usize,
    /// cfl | fixed
    #[serde(default = "default_dt_mode")]
    pub dt_mode: String,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_guard")]
    pub resolution_guard: f64,
    /// none | final | nodes
    #[serde(default = "default_checkpoints")]
    pub checkpoints: String,
}

fn default_outputs() -> usize {
    32
}
fn default_dt_mode() -> String {
    "cfl".into()
}
fn default_cfl() -> f64 {
    0.5
}
fn default_guard() -> f64 {
    DEFAULT_RESOLUTION_GUARD
}
fn default_checkpoints() -> String {
    "final".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    #[serde(default)]
    pub lp: Vec<f64>,
    #[serde(default)]
    pub sobolev: Vec<f64>,
    #[serde(default)]
    pub gevrey: Vec<GevreyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyEntry {
    pub s: f64,
    pub r: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nu_list: Vec<f64>,
    /// sobolev | gevrey
    #[serde(default = "default_sweep_norm")]
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gevrey_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gevrey_s: Option<f64>,
    #[serde(default = "default_tau_factor")]
    pub gevrey_tau_factor: f64,
    /// calibrate the horizon from the ν = 0 run's ResolutionLost time
    #[serde(default)]
    pub auto_t_end: bool,
}

fn default_sweep_norm() -> String {
    "sobolev".into()
}
fn default_tau_factor() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusExpSection {
    /// decay | floor
    #[serde(default = "default_radius_mode")]
    pub mode: String,
}

fn default_radius_mode() -> String {
    "decay".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_picard_t_init")]
    pub t_init: f64,
    #[serde(default = "default_picard_nodes")]
    pub nodes: usize,
}

fn default_picard_t_init() -> f64 {
    0.5
}
fn default_picard_nodes() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

/// Whole run configuration. Unknown keys anywhere are fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub law: LawSection,
    pub initial: FieldSection,
    #[serde(default = "FieldSection::zero")]
    pub forcing: FieldSection,
    pub sim: SimSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_exp: Option<RadiusExpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardSection>,
}

impl RunConfig {
    /// Parse, apply dotted-path overrides, and validate. Semantic problems
    /// are collected into one error listing all of them.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let config: RunConfig = RunConfig::deserialize(value)
            .map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let errors = config.validate();
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// Serialize back to the same schema; `parse(emit(c))` reproduces `c`.
    pub fn emit(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// All semantic errors, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if !(2..=3).contains(&self.lattice.d) {
            errors.push(format!("lattice.d must be 2 or 3, got {}", self.lattice.d));
        }
        if self.lattice.n < 8 || self.lattice.n % 2 != 0 {
            errors.push(format!("lattice.n must be even and >= 8, got {}", self.lattice.n));
        }
        if let Some(cut) = self.lattice.dealias_cut {
            if cut > self.lattice.n / 2 {
                errors.push(format!("lattice.dealias_cut {cut} exceeds n/2"));
            }
        }
        match self.law.family.as_str() {
            "mg" => {
                if self.lattice.d != 3 {
                    errors.push("law.family = mg requires lattice.d = 3".into());
                }
                if !(self.law.nu.unwrap_or(0.0) >= 0.0) {
                    errors.push("law.nu must be >= 0".into());
                }
            }
            "ipmb" => {
                if self.lattice.d != 2 {
                    errors.push("law.family = ipmb requires lattice.d = 2".into());
                }
                if !(self.law.nu.unwrap_or(0.0) >= 0.0) {
                    errors.push("law.nu must be >= 0".into());
                }
            }
            "sipm" => {
                if self.lattice.d != 2 {
                    errors.push("law.family = sipm requires lattice.d = 2".into());
                }
                let beta = self.law.beta.unwrap_or(f64::NAN);
                if !(beta > 0.0 && beta <= 1.0) {
                    errors.push("law.beta must lie in (0, 1]".into());
                }
            }
            "table" => {}
            other => errors.push(format!(
                "law.family must be one of mg|ipmb|sipm|table, got `{other}`"
            )),
        }
        for (name, section) in [("initial", &self.initial), ("forcing", &self.forcing)] {
            match section.recipe.as_str() {
                "zero" => {}
                "gevrey" => {
                    if !(section.tau0.unwrap_or(-1.0) >= 0.0) {
                        errors.push(format!("{name}.tau0 must be >= 0 for the gevrey recipe"));
                    }
                    if !(section.s.unwrap_or(0.0) >= 1.0) {
                        errors.push(format!("{name}.s must be >= 1 for the gevrey recipe"));
                    }
                    if section.seed.is_none() {
                        errors.push(format!("{name}.seed is required for the gevrey recipe"));
                    }
                }
                "modes" => {
                    if section.modes.is_empty() {
                        errors.push(format!("{name}.modes must be nonempty for the modes recipe"));
                    }
                }
                other => errors.push(format!(
                    "{name}.recipe must be one of zero|gevrey|modes, got `{other}`"
                )),
            }
        }
        if !(self.sim.kappa >= 0.0) {
            errors.push("sim.kappa must be >= 0".into());
        }
        if !(self.sim.t_end > 0.0) {
            errors.push("sim.t_end must be > 0".into());
        }
        match self.sim.dt_mode.as_str() {
            "cfl" => {
                if !(self.sim.cfl > 0.0 && self.sim.cfl <= 1.0) {
                    errors.push("sim.cfl must lie in (0, 1]".into());
                }
            }
            "fixed" => {
                if !(self.sim.dt.unwrap_or(0.0) > 0.0) {
                    errors.push("sim.dt must be > 0 for dt_mode = fixed".into());
                }
            }
            other => errors.push(format!("sim.dt_mode must be cfl|fixed, got `{other}`")),
        }
        if !matches!(self.sim.checkpoints.as_str(), "none" | "final" | "nodes") {
            errors.push(format!(
                "sim.checkpoints must be none|final|nodes, got `{}`",
                self.sim.checkpoints
            ));
        }
        for g in &self.norms.gevrey {
            if GevreyParams::new(g.s, g.r, g.tau).is_err() {
                errors.push(format!(
                    "norms.gevrey entry (s={}, r={}, tau={}) out of range",
                    g.s, g.r, g.tau
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.nu_list.is_empty() {
                errors.push("sweep.nu_list must be nonempty".into());
            }
            match sweep.norm.as_str() {
                "sobolev" | "gevrey" => {}
                other => errors.push(format!("sweep.norm must be sobolev|gevrey, got `{other}`")),
            }
        }
        if let Some(r) = &self.radius_exp {
            if !matches!(r.mode.as_str(), "decay" | "floor") {
                errors.push(format!("radius_exp.mode must be decay|floor, got `{}`", r.mode));
            }
        }
        errors
    }

    pub fn lattice(&self) -> Result<Lattice, ConfigError> {
        let lat = match self.lattice.dealias_cut {
            Some(cut) => Lattice::with_dealias_cut(self.lattice.d, self.lattice.n, cut),
            None => Lattice::new(self.lattice.d, self.lattice.n),
        };
        lat.map_err(|e| ConfigError::Invalid(vec![e.to_string()]))
    }

    pub fn law(&self) -> Result<SymbolLaw, ConfigError> {
        let law = match self.law.family.as_str() {
            "mg" => SymbolLaw::mg(self.law.nu.unwrap_or(0.0)),
            "ipmb" => SymbolLaw::ipmb(self.law.nu.unwrap_or(0.0)),
            "sipm" => SymbolLaw::sipm(self.law.beta.unwrap_or(f64::NAN)),
            "table" => {
                let mut table = TableLaw { d: self.lattice.d, entries: Default::default() };
                for e in &self.law.entries {
                    table.entries.insert(e.k, e.m);
                }
                Ok(SymbolLaw::Table(table))
            }
            other => {
                return Err(ConfigError::Invalid(vec![format!("unknown family `{other}`")]))
            }
        };
        law.map_err(|e| ConfigError::Invalid(vec![e.to_string()]))
    }

    fn recipe(section: &FieldSection) -> InitialRecipe {
        match section.recipe.as_str() {
            "zero" => InitialRecipe::Zero,
            "gevrey" => InitialRecipe::Gevrey {
                tau0: section.tau0.unwrap_or(0.0),
                s: section.s.unwrap_or(1.0),
                seed: section.seed.unwrap_or(0),
                amplitude: section.amplitude.unwrap_or(1.0),
            },
            "modes" => InitialRecipe::Modes(
                section
                    .modes
                    .iter()
                    .map(|m| ModeSpec { k: m.k, re: m.re, im: m.im })
                    .collect(),
            ),
            other => unreachable!("validated recipe `{other}`"),
        }
    }

    pub fn initial_recipe(&self) -> InitialRecipe {
        Self::recipe(&self.initial)
    }

    pub fn forcing_recipe(&self) -> InitialRecipe {
        Self::recipe(&self.forcing)
    }

    pub fn step_policy(&self) -> StepPolicy {
        let dt_mode = match self.sim.dt_mode.as_str() {
            "fixed" => DtMode::Fixed(self.sim.dt.unwrap_or(0.0)),
            _ => DtMode::Cfl(self.sim.cfl),
        };
        StepPolicy {
            dt_mode,
            t_end: self.sim.t_end,
            outputs: self.sim.outputs,
            resolution_guard: self.sim.resolution_guard,
        }
    }

    pub fn norms_plan(&self) -> NormsPlan {
        NormsPlan {
            lp: self.norms.lp.clone(),
            sobolev: self.norms.sobolev.clone(),
            gevrey: self
                .norms
                .gevrey
                .iter()
                .map(|g| GevreyParams { s: g.s, r: g.r, tau: g.tau })
                .collect(),
            radius_s: self.norms.radius_s.unwrap_or(1.0),
            radius_floor: self.norms.radius_floor.unwrap_or(crate::norms::RADIUS_FLOOR_REL),
        }
    }

    /// Assemble the full base run: lattice, fields, law, policy, norms plan.
    pub fn build(&self) -> Result<BaseRun, ConfigError> {
        let lattice = self.lattice()?;
        let law = self.law()?;
        let theta = self.initial_recipe().build(lattice)?;
        let forcing = self.forcing_recipe().build(lattice)?;
        let state = SimulationState::new(theta, law, forcing, self.sim.kappa)?;
        Ok(BaseRun {
            state,
            policy: self.step_policy(),
            plan: self.norms_plan(),
        })
    }
}

/// Set a dotted-path key in the raw TOML tree. The value text is parsed as a
/// TOML literal (so `--set law.nu=0.05`, `--set sweep.nu_list=[0.1,0.05]`,
/// `--set law.family="mg"` and bare strings all work).
fn apply_override(root: &mut toml::Value, key: &str, raw: &str) -> Result<(), ConfigError> {
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|t| t.get("v").cloned())
        .or_else(|| {
            // bare strings without quotes
            toml::from_str::<toml::Table>(&format!("v = \"{raw}\""))
                .ok()
                .and_then(|t| t.get("v").cloned())
        })
        .ok_or_else(|| ConfigError::BadOverride {
            key: key.into(),
            reason: format!("cannot parse value `{raw}`"),
        })?;
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| ConfigError::BadOverride {
            key: key.into(),
            reason: format!("`{}` is not a table", parts[..i].join(".")),
        })?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    unreachable!("loop returns on the last path segment")
}
