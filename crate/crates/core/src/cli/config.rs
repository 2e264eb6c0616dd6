//! Run configuration: a TOML document with `[model]`, `[budget]`,
//! `[solver]` and optional `[sweep]` tables plus a top-level `observable`.

use serde::{Deserialize, Serialize};

use crate::constraints::Permutation;
use crate::lindblad::{LindbladModel, ModelError};
use crate::models::{
    chain_between_baths, chain_heat_current, heat_current_observable, ladder_2xl, ladder_heat_current,
    ladder_symmetries, magnetization, periodic_tfi_decay, ring_symmetries, two_qubit_bath, ChainParams, LadderParams,
    TwoQubitParams,
};
use crate::pauli::PauliPolynomial;
use crate::relax::{AssembleOptions, MomentMatrixOption, ReducedOption};
use crate::solver::SolverSettings;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line in the source document, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    /// `magnetization`, `heat_current` or a Pauli polynomial such as `0.5*Z1 Z2 - X3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    TwoQubit {
        #[serde(flatten)]
        bath: BathConfig,
    },
    ChainBetweenBaths {
        n: usize,
        #[serde(flatten)]
        bath: BathConfig,
    },
    PeriodicTfi {
        n: usize,
        #[serde(default = "half")]
        j: f64,
        #[serde(default = "half")]
        eta: f64,
        #[serde(default = "one")]
        gamma: f64,
    },
    Ladder {
        rungs: usize,
        #[serde(default = "one")]
        eps: f64,
        #[serde(default = "tenth")]
        g: f64,
        #[serde(default = "tenth")]
        gamma_h: f64,
        #[serde(default = "tenth")]
        gamma_c: f64,
        #[serde(default = "two")]
        t_h: f64,
        #[serde(default = "one")]
        t_c: f64,
    },
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(default = "one")]
    pub eps_h: f64,
    #[serde(default = "one")]
    pub eps_c: f64,
    #[serde(default = "tenth")]
    pub g: f64,
    #[serde(default = "tenth")]
    pub gamma_h: f64,
    #[serde(default = "tenth")]
    pub gamma_c: f64,
    #[serde(default = "two")]
    pub t_h: f64,
    #[serde(default = "one")]
    pub t_c: f64,
}

impl From<BathConfig> for TwoQubitParams {
    fn from(b: BathConfig) -> Self {
        TwoQubitParams {
            eps_h: b.eps_h,
            eps_c: b.eps_c,
            g: b.g,
            gamma_h: b.gamma_h,
            gamma_c: b.gamma_c,
            t_h: b.t_h,
            t_c: b.t_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMode {
    #[default]
    Contiguous,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Generated linear constraints (0 disables generation).
    #[serde(default = "default_linear")]
    pub linear: usize,
    /// Size of the automatic moment matrix (0: none).
    #[serde(default)]
    pub moment_matrix: usize,
    /// Moment matrix over all strings up to this order; overrides `moment_matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_level: Option<usize>,
    /// Sites per reduced density matrix (0: none).
    #[serde(default)]
    pub reduced: usize,
    #[serde(default)]
    pub subsets: SubsetMode,
    #[serde(default)]
    pub symmetry: bool,
    #[serde(default = "yes")]
    pub safety_net: bool,
}

fn default_linear() -> usize {
    1000
}
fn yes() -> bool {
    true
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            linear: default_linear(),
            moment_matrix: 0,
            moment_level: None,
            reduced: 0,
            subsets: SubsetMode::Contiguous,
            symmetry: false,
            safety_net: true,
        }
    }
}

/// Fixed budget tiers: linear constraints and moment-matrix size, all with symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetPreset {
    Set1,
    Set2,
    Set3,
}

impl BudgetPreset {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "set1" => Some(BudgetPreset::Set1),
            "set2" => Some(BudgetPreset::Set2),
            "set3" => Some(BudgetPreset::Set3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BudgetPreset::Set1 => "set1",
            BudgetPreset::Set2 => "set2",
            BudgetPreset::Set3 => "set3",
        }
    }

    /// `(linear constraints, moment-matrix size)`.
    pub fn sizes(self) -> (usize, usize) {
        match self {
            BudgetPreset::Set1 => (10_000, 40),
            BudgetPreset::Set2 => (30_000, 100),
            BudgetPreset::Set3 => (70_000, 250),
        }
    }

    pub fn apply(self, budget: &mut BudgetConfig) {
        let (linear, mm) = self.sizes();
        budget.linear = linear;
        budget.moment_matrix = mm;
        budget.moment_level = None;
        budget.symmetry = true;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_near_tol")]
    pub near_tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iterations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    /// Eliminate one- and two-term equalities before solving.
    #[serde(default = "default_presolve")]
    pub presolve: bool,
}

fn default_presolve() -> bool {
    true
}
fn default_backend() -> String {
    "clarabel".into()
}
fn default_tol() -> f64 {
    1e-8
}
fn default_near_tol() -> f64 {
    1e-5
}
fn default_max_iter() -> u32 {
    100_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: default_backend(),
            tolerance: default_tol(),
            near_tolerance: default_near_tol(),
            max_iterations: default_max_iter(),
            time_limit: None,
            presolve: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    J,
    Eta,
    Budget,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::N => "n",
            SweepAxis::J => "j",
            SweepAxis::Eta => "eta",
            SweepAxis::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Number(x) => write!(f, "{x}"),
            SweepValue::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
    /// Concurrent points (0: one per available core).
    #[serde(default)]
    pub workers: usize,
}

/// 1-based line of the first `key =` assignment, searching from `table`'s header.
fn line_of(source: &str, table: &str, key: &str) -> Option<usize> {
    let header = format!("[{table}]");
    let mut in_table = table.is_empty();
    let mut fallback = None;
    for (k, raw) in source.lines().enumerate() {
        let t = raw.trim();
        if t.starts_with('[') {
            in_table = t == header;
            continue;
        }
        let is_key = t.split_once('=').is_some_and(|(lhs, _)| lhs.trim() == key);
        if is_key {
            if in_table {
                return Some(k + 1);
            }
            fallback.get_or_insert(k + 1);
        }
    }
    fallback
}

/// Line of the key or value quoted in a deserializer message, if any.
fn named_token_line(source: &str, message: &str) -> Option<usize> {
    let quoted = |prefix: &str| {
        let rest = message.strip_prefix(prefix)?;
        let (token, _) = rest.split_once('`')?;
        Some(token.to_string())
    };
    if let Some(key) = quoted("unknown field `") {
        return line_of(source, "", &key);
    }
    let value = quoted("unknown variant `")?;
    let needle = format!("\"{value}\"");
    source.lines().position(|l| l.contains(&needle)).map(|k| k + 1)
}

impl Config {
    pub fn parse(source: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(source).map_err(|e| {
            let message = e.message().to_string();
            let spanned = e.span().map(|s| source[..s.start].matches('\n').count() + 1);
            ConfigError {
                // Tagged tables lose precise spans; find the offending token instead.
                line: named_token_line(source, &message).or(spanned),
                message,
            }
        })?;
        cfg.validate(source)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self, source: &str) -> Result<(), ConfigError> {
        let at = |table: &str, key: &str, message: String| ConfigError {
            line: line_of(source, table, key),
            message,
        };
        self.build_model().map_err(|e| {
            let key = match &self.model {
                ModelConfig::PeriodicTfi { n, .. } if *n < 3 => "n",
                ModelConfig::ChainBetweenBaths { n, .. } if *n < 2 => "n",
                ModelConfig::Ladder { rungs, .. } if *rungs < 2 => "rungs",
                _ => "kind",
            };
            at("model", key, e.to_string())
        })?;
        self.build_observable().map_err(|m| at("", "observable", m))?;
        let s = &self.solver;
        if s.backend != "clarabel" {
            return Err(at("solver", "backend", format!("unknown backend `{}`", s.backend)));
        }
        if !(s.tolerance > 0.0 && s.tolerance.is_finite()) {
            return Err(at("solver", "tolerance", "tolerance must be positive".into()));
        }
        if !(s.near_tolerance >= s.tolerance && s.near_tolerance.is_finite()) {
            return Err(at(
                "solver",
                "near_tolerance",
                "near_tolerance must be at least tolerance".into(),
            ));
        }
        if self.budget.symmetry && self.symmetries().is_empty() {
            return Err(at(
                "budget",
                "symmetry",
                "this model declares no site symmetries".into(),
            ));
        }
        if self.budget.reduced > 6 {
            return Err(at("budget", "reduced", "reduced blocks are limited to 6 sites".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(at("sweep", "values", "sweep axis has no values".into()));
            }
            for v in &sweep.values {
                let mut point = self.clone();
                point.sweep = None;
                point
                    .apply_axis(sweep.axis, v)
                    .and_then(|()| point.build_model().map(|_| ()).map_err(|e| e.to_string()))
                    .map_err(|m| at("sweep", "values", m))?;
            }
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        match &self.model {
            ModelConfig::TwoQubit { .. } => 2,
            ModelConfig::ChainBetweenBaths { n, .. } | ModelConfig::PeriodicTfi { n, .. } => *n,
            ModelConfig::Ladder { rungs, .. } => 2 * rungs,
        }
    }

    pub fn model_name(&self) -> &'static str {
        match &self.model {
            ModelConfig::TwoQubit { .. } => "two_qubit",
            ModelConfig::ChainBetweenBaths { .. } => "chain_between_baths",
            ModelConfig::PeriodicTfi { .. } => "periodic_tfi",
            ModelConfig::Ladder { .. } => "ladder",
        }
    }

    fn ladder_params(&self) -> Option<LadderParams> {
        match self.model {
            ModelConfig::Ladder {
                rungs,
                eps,
                g,
                gamma_h,
                gamma_c,
                t_h,
                t_c,
            } => Some(LadderParams {
                rungs,
                eps,
                g,
                gamma_h,
                gamma_c,
                t_h,
                t_c,
            }),
            _ => None,
        }
    }

    pub fn build_model(&self) -> Result<LindbladModel, ModelError> {
        match &self.model {
            ModelConfig::TwoQubit { bath } => two_qubit_bath(&(*bath).into()),
            ModelConfig::ChainBetweenBaths { n, bath } => chain_between_baths(*n, &(*bath).into()),
            ModelConfig::PeriodicTfi { n, j, eta, gamma } => periodic_tfi_decay(&ChainParams {
                n: *n,
                j: *j,
                eta: *eta,
                gamma: *gamma,
            }),
            ModelConfig::Ladder { .. } => ladder_2xl(&self.ladder_params().expect("ladder")),
        }
    }

    /// Name of the observable, defaulting per model.
    pub fn observable_text(&self) -> String {
        self.observable.clone().unwrap_or_else(|| {
            match self.model {
                ModelConfig::TwoQubit { .. } | ModelConfig::ChainBetweenBaths { .. } => "heat_current",
                ModelConfig::PeriodicTfi { .. } | ModelConfig::Ladder { .. } => "magnetization",
            }
            .to_string()
        })
    }

    pub fn build_observable(&self) -> Result<PauliPolynomial, String> {
        let n = self.num_sites();
        let text = self.observable_text();
        match (text.trim(), &self.model) {
            ("magnetization", _) => Ok(magnetization(n)),
            ("heat_current", ModelConfig::TwoQubit { bath }) => Ok(heat_current_observable(&(*bath).into())),
            ("heat_current", ModelConfig::ChainBetweenBaths { n, bath }) => Ok(chain_heat_current(*n, &(*bath).into())),
            ("heat_current", ModelConfig::Ladder { .. }) => {
                Ok(ladder_heat_current(&self.ladder_params().expect("ladder")))
            }
            ("heat_current", _) => Err("heat_current is not defined for this model".into()),
            (t, _) => {
                let p = PauliPolynomial::parse(t, n).map_err(|e| format!("observable: {e}"))?;
                if !p.is_hermitian() {
                    return Err("observable is not Hermitian".into());
                }
                Ok(p)
            }
        }
    }

    pub fn symmetries(&self) -> Vec<Permutation> {
        match &self.model {
            ModelConfig::PeriodicTfi { n, .. } => ring_symmetries(*n),
            ModelConfig::Ladder { rungs, .. } => ladder_symmetries(*rungs),
            _ => Vec::new(),
        }
    }

    pub fn assemble_options(&self) -> AssembleOptions {
        let b = &self.budget;
        let moment_matrix = match (b.moment_level, b.moment_matrix) {
            (Some(k), _) => MomentMatrixOption::Level(k),
            (None, 0) => MomentMatrixOption::None,
            (None, size) => MomentMatrixOption::Auto(size),
        };
        let reduced = match (b.reduced, b.subsets) {
            (0, _) => ReducedOption::None,
            (m, SubsetMode::Contiguous) => ReducedOption::Contiguous(m),
            (m, SubsetMode::All) => ReducedOption::AllSubsets(m),
        };
        AssembleOptions {
            linear_budget: b.linear,
            moment_matrix,
            reduced,
            symmetries: if b.symmetry { self.symmetries() } else { Vec::new() },
            safety_net: b.safety_net,
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tolerance: self.solver.tolerance,
            near_tolerance: self.solver.near_tolerance,
            max_iterations: self.solver.max_iterations,
            time_limit: self.solver.time_limit,
            presolve: self.solver.presolve,
            verbose: false,
        }
    }

    /// Set one sweep coordinate.
    pub fn apply_axis(&mut self, axis: SweepAxis, value: &SweepValue) -> Result<(), String> {
        let number = || match value {
            SweepValue::Number(x) if x.is_finite() => Ok(*x),
            _ => Err(format!("sweep value `{value}` is not a finite number")),
        };
        match axis {
            SweepAxis::N => {
                let x = number()?;
                if x.fract() != 0.0 || x < 0.0 {
                    return Err(format!("n must be a non-negative integer, got {x}"));
                }
                match &mut self.model {
                    ModelConfig::ChainBetweenBaths { n, .. } | ModelConfig::PeriodicTfi { n, .. } => *n = x as usize,
                    ModelConfig::Ladder { rungs, .. } => {
                        if !(x as usize).is_multiple_of(2) {
                            return Err(format!("ladder size must be even, got {x}"));
                        }
                        *rungs = x as usize / 2;
                    }
                    ModelConfig::TwoQubit { .. } => return Err("the two-qubit model has fixed size".into()),
                }
            }
            SweepAxis::J | SweepAxis::Eta => {
                let x = number()?;
                match &mut self.model {
                    ModelConfig::PeriodicTfi { j, eta, .. } => {
                        *(if axis == SweepAxis::J { j } else { eta }) = x;
                    }
                    _ => return Err(format!("axis `{}` needs the periodic_tfi model", axis.name())),
                }
            }
            SweepAxis::Budget => {
                let SweepValue::Name(name) = value else {
                    return Err(format!("budget sweep values are preset names, got `{value}`"));
                };
                BudgetPreset::parse(name)
                    .ok_or_else(|| format!("unknown budget preset `{name}`"))?
                    .apply(&mut self.budget);
            }
        }
        Ok(())
    }
}
