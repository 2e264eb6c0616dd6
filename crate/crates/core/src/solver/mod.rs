//! Directional solves of an assembled relaxation and certified intervals.

mod clarabel_backend;
mod conic;
mod presolve;

pub use clarabel_backend::ClarabelBackend;
pub use conic::{svec_index, Cone, ConicProblem};
pub use presolve::{Affine, Reduction};

use std::fmt;
use std::time::{Duration, Instant};

use crate::lindblad::LindbladModel;
use crate::pauli::PauliPolynomial;
use crate::relax::{assemble, AssembleOptions, RelaxError, RelaxationProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Min => "min",
            Direction::Max => "max",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Feasibility and duality-gap tolerance for `optimal`.
    pub tolerance: f64,
    /// Looser tolerance accepted as `near-optimal`.
    pub near_tolerance: f64,
    pub max_iterations: u32,
    /// Seconds; `None` for no limit.
    pub time_limit: Option<f64>,
    /// Substitute out one- and two-term equalities first.
    pub presolve: bool,
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-8,
            near_tolerance: 1e-5,
            max_iterations: 100_000,
            time_limit: None,
            presolve: true,
            verbose: false,
        }
    }
}

/// Raw outcome of one conic solve of `min cᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicOutcome {
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub x: Vec<f64>,
    /// Dual vector for `b − Ax ∈ K`; empty when unavailable.
    pub z: Vec<f64>,
    pub iterations: u32,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// A conic solver able to minimize a [`ConicProblem`].
pub trait ConicBackend: Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> ConicOutcome;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub direction: Direction,
    /// Finite exactly when the status is `optimal` or `near-optimal`.
    pub value: f64,
    pub status: SolveStatus,
    pub iterations: u32,
    pub wall_time: Duration,
    pub fingerprint: String,
    /// Residuals and objectives reported by the backend.
    pub diagnostics: String,
}

/// Bound `⟨O⟩` in one direction with the default backend.
pub fn bound(problem: &RelaxationProblem, direction: Direction, settings: &SolverSettings) -> BoundResult {
    bound_with(&ClarabelBackend, problem, direction, settings)
}

/// Largest relative primal/certified gap at which a stalled solve still counts.
const RECOVERY_GAP: f64 = 1e-4;

/// Whether a stalled solve's certified bound is within `RECOVERY_GAP` of a
/// near-feasible primal objective.
pub(crate) fn certificate_is_tight(
    conic: &ConicProblem,
    out: &ConicOutcome,
    certified: f64,
    settings: &SolverSettings,
) -> bool {
    let primal = conic.offset + out.primal_objective;
    certified.is_finite()
        && primal.is_finite()
        && primal - certified <= RECOVERY_GAP * (1.0 + primal.abs())
        && out.primal_residual <= settings.near_tolerance
}

/// Bound `⟨O⟩` in one direction with an explicit backend.
pub fn bound_with(
    backend: &dyn ConicBackend,
    problem: &RelaxationProblem,
    direction: Direction,
    settings: &SolverSettings,
) -> BoundResult {
    let start = Instant::now();
    let reduction = if settings.presolve {
        Reduction::new(problem)
    } else {
        Reduction::identity(problem)
    };
    let conic = ConicProblem::from_reduction(problem, &reduction, direction);
    let out = backend.solve(&conic, settings);
    // The reported value is the dual bound after projecting z onto the dual
    // cone; the residual is charged against |x_k| ≤ 1.
    let certified = conic.certified_bound(&out.z);
    let status = match out.status {
        s if s.is_solved() && !certified.is_finite() => SolveStatus::NumericalFailure,
        SolveStatus::NumericalFailure if certificate_is_tight(&conic, &out, certified, settings) => {
            SolveStatus::NearOptimal
        }
        s => s,
    };
    let value = if status.is_solved() {
        match direction {
            Direction::Min => problem.objective_constant + certified,
            Direction::Max => problem.objective_constant - certified,
        }
    } else {
        f64::NAN
    };
    BoundResult {
        direction,
        value,
        status,
        iterations: out.iterations,
        wall_time: start.elapsed(),
        fingerprint: problem.fingerprint(),
        diagnostics: format!(
            "backend={} columns={}/{} rows={} pcost={:e} dcost={:e} certified={:e} pres={:e} dres={:e}",
            backend.name(),
            conic.cost.len(),
            problem.num_variables(),
            conic.rows,
            out.primal_objective,
            out.dual_objective,
            certified,
            out.primal_residual,
            out.dual_residual
        ),
    }
}

/// Lower and upper bounds of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lb: BoundResult,
    pub ub: BoundResult,
    pub assembly_time: Duration,
    pub trivial: (f64, f64),
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.ub.value - self.lb.value
    }

    /// Width as a fraction of the trivial range.
    pub fn relative_width(&self) -> f64 {
        self.width() / (self.trivial.1 - self.trivial.0)
    }

    pub fn is_solved(&self) -> bool {
        self.lb.status.is_solved() && self.ub.status.is_solved()
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.lb.value - tol <= value && value <= self.ub.value + tol
    }
}

/// Solve both directions of one problem on separate workers.
pub fn solve_interval(problem: &RelaxationProblem, settings: &SolverSettings) -> (BoundResult, BoundResult) {
    std::thread::scope(|scope| {
        let lo = scope.spawn(|| bound(problem, Direction::Min, settings));
        let hi = bound(problem, Direction::Max, settings);
        (lo.join().expect("min solve panicked"), hi)
    })
}

/// Assemble once, then bound `⟨observable⟩` from below and above.
pub fn certify_interval(
    model: &LindbladModel,
    observable: &PauliPolynomial,
    options: &AssembleOptions,
    settings: &SolverSettings,
) -> Result<(RelaxationProblem, Interval), RelaxError> {
    let start = Instant::now();
    let problem = assemble(model, observable, options)?;
    let assembly_time = start.elapsed();
    let (lb, ub) = solve_interval(&problem, settings);
    let trivial = problem.trivial_bounds();
    Ok((
        problem,
        Interval {
            lb,
            ub,
            assembly_time,
            trivial,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::relax::{AssemblyStats, RealBlock, SparseRow};

    fn one_var(box_bounds: bool) -> RelaxationProblem {
        RelaxationProblem {
            num_sites: 1,
            variables: vec![PauliString::parse("Z1", 1).unwrap()],
            objective: vec![(0, 1.0)],
            objective_constant: 0.0,
            equalities: vec![],
            psd_blocks: vec![],
            box_bounds,
            stats: AssemblyStats::default(),
        }
    }

    #[test]
    fn box_only_gives_trivial_bounds() {
        let p = one_var(true);
        let (lo, hi) = solve_interval(&p, &SolverSettings::default());
        assert_eq!(lo.status, SolveStatus::Optimal);
        assert!((lo.value + 1.0).abs() < 1e-7, "{lo:?}");
        assert!((hi.value - 1.0).abs() < 1e-7, "{hi:?}");
        assert_eq!(lo.fingerprint, hi.fingerprint);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let mut p = one_var(true);
        p.equalities.push(SparseRow {
            terms: vec![(0, 1.0)],
            constant: 0.0,
        });
        p.equalities.push(SparseRow {
            terms: vec![(0, 1.0)],
            constant: -1.0,
        });
        let r = bound(&p, Direction::Min, &SolverSettings::default());
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.value.is_nan());
    }

    #[test]
    fn missing_safety_net_is_unbounded() {
        let r = bound(&one_var(false), Direction::Max, &SolverSettings::default());
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn qubit_block_bounds_bloch_ball() {
        // [[1+z, x], [x, 1−z]] ⪰ 0 with objective x + z: optimum ±√2.
        let mut p = one_var(false);
        p.variables = vec![
            PauliString::parse("X1", 1).unwrap(),
            PauliString::parse("Z1", 1).unwrap(),
        ];
        p.objective = vec![(0, 1.0), (1, 1.0)];
        p.psd_blocks.push(RealBlock {
            dim: 2,
            constant: vec![(0, 0, 1.0), (1, 1, 1.0)],
            terms: vec![(0, 0, 1, 1.0), (1, 0, 0, 1.0), (1, 1, 1, -1.0)],
        });
        let (lo, hi) = solve_interval(&p, &SolverSettings::default());
        let r2 = 2f64.sqrt();
        assert!((lo.value + r2).abs() < 1e-6, "{lo:?}");
        assert!((hi.value - r2).abs() < 1e-6, "{hi:?}");
    }
}
