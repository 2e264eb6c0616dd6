use serde::{Deserialize, Serialize};

use super::config::Config;
use crate::solver::{BoundResult, Interval};

/// Outcome of one directional solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub value: Option<f64>,
    pub status: String,
    pub iterations: u32,
    pub wall_time_s: f64,
    pub diagnostics: String,
}

impl From<&BoundResult> for BoundSummary {
    fn from(r: &BoundResult) -> Self {
        BoundSummary {
            value: r.value.is_finite().then_some(r.value),
            status: r.status.to_string(),
            iterations: r.iterations,
            wall_time_s: r.wall_time.as_secs_f64(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub linear: usize,
    pub generated_constraints: usize,
    pub cycle_closed: bool,
    pub moment_matrix_size: usize,
    pub reduced_subset_size: usize,
    pub reduced_blocks: usize,
    pub symmetry: bool,
    pub symmetry_constraints: usize,
    pub safety_net: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub lb: BoundSummary,
    pub ub: BoundSummary,
    pub width: Option<f64>,
    /// Width over the trivial range.
    pub relative_width: Option<f64>,
    pub trivial: (f64, f64),
    pub budgets: Budgets,
    pub num_variables: usize,
    pub num_equalities: usize,
    pub num_psd_blocks: usize,
    pub assembly_time_s: f64,
    pub fingerprint: String,
    /// `negative` when `ub < 0`, `positive` when `lb > 0`.
    pub sign: Option<String>,
}

impl IntervalRecord {
    pub fn new(problem: &crate::relax::RelaxationProblem, interval: &Interval, config: &Config) -> Self {
        let solved = interval.is_solved();
        let s = &problem.stats;
        let sign = if !solved {
            None
        } else if interval.ub.value < 0.0 {
            Some("negative".to_string())
        } else if interval.lb.value > 0.0 {
            Some("positive".to_string())
        } else {
            None
        };
        IntervalRecord {
            lb: (&interval.lb).into(),
            ub: (&interval.ub).into(),
            width: solved.then(|| interval.width()),
            relative_width: solved.then(|| interval.relative_width()),
            trivial: interval.trivial,
            budgets: Budgets {
                linear: config.budget.linear,
                generated_constraints: s.generated_constraints,
                cycle_closed: s.cycle_closed,
                moment_matrix_size: s.moment_matrix_size,
                reduced_subset_size: config.budget.reduced,
                reduced_blocks: s.reduced_blocks,
                symmetry: config.budget.symmetry,
                symmetry_constraints: s.symmetry_constraints,
                safety_net: config.budget.safety_net,
            },
            num_variables: problem.num_variables(),
            num_equalities: problem.equalities.len(),
            num_psd_blocks: problem.psd_blocks.len(),
            assembly_time_s: interval.assembly_time.as_secs_f64(),
            fingerprint: interval.lb.fingerprint.clone(),
            sign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRecord {
    pub min: f64,
    pub max: f64,
    pub degeneracy: usize,
    pub residual: f64,
}

/// Everything needed to reproduce and audit one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub command: String,
    pub model: String,
    pub num_sites: usize,
    pub observable: String,
    /// Effective configuration after command-line overrides.
    pub config_toml: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<IntervalRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn new(command: &str, config: &Config) -> Self {
        RunRecord {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model: config.model_name().to_string(),
            num_sites: config.num_sites(),
            observable: config.observable_text(),
            config_toml: config.to_toml(),
            interval: None,
            exact: None,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// Column order of sweep CSV output.
pub const SWEEP_COLUMNS: [&str; 16] = [
    "axis",
    "value",
    "model",
    "n",
    "lb",
    "ub",
    "width",
    "relative_width",
    "lb_scaled",
    "ub_scaled",
    "lb_status",
    "ub_status",
    "wall_time_s",
    "sign",
    "fingerprint",
    "error",
];

/// One CSV row; `lb_scaled`/`ub_scaled` map the trivial range onto `[-1, 1]`.
pub fn sweep_row(axis: &str, value: &str, record: &RunRecord, wall_time: f64) -> Vec<String> {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.9}")).unwrap_or_default();
    let mut row = vec![
        axis.to_string(),
        value.to_string(),
        record.model.clone(),
        record.num_sites.to_string(),
    ];
    match &record.interval {
        Some(iv) => {
            let (t0, t1) = iv.trivial;
            let scale = |v: Option<f64>| v.map(|v| 2.0 * (v - t0) / (t1 - t0) - 1.0);
            row.extend([
                f(iv.lb.value),
                f(iv.ub.value),
                f(iv.width),
                f(iv.relative_width),
                f(scale(iv.lb.value)),
                f(scale(iv.ub.value)),
                iv.lb.status.clone(),
                iv.ub.status.clone(),
                format!("{wall_time:.3}"),
                iv.sign.clone().unwrap_or_default(),
                iv.fingerprint.clone(),
            ]);
        }
        None => row.extend(std::iter::repeat_n(String::new(), 11)),
    }
    row.push(record.error.clone().unwrap_or_default());
    row
}
