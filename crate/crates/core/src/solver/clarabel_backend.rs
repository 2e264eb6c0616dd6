use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{certificate_is_tight, Cone, ConicBackend, ConicOutcome, ConicProblem, SolveStatus, SolverSettings};

/// Interior-point backend; one solver instance per call.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelBackend;

fn failure(iterations: u32) -> ConicOutcome {
    ConicOutcome {
        status: SolveStatus::NumericalFailure,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        x: Vec::new(),
        z: Vec::new(),
        iterations,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> ConicOutcome {
        let n = problem.cost.len();
        if problem.rows == 0 {
            // Nothing constrains x: bounded only for a zero cost.
            let zero = problem.cost.iter().all(|&c| c == 0.0);
            return ConicOutcome {
                status: if zero {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Unbounded
                },
                primal_objective: if zero { 0.0 } else { f64::NAN },
                dual_objective: if zero { 0.0 } else { f64::NAN },
                x: vec![0.0; n],
                z: Vec::new(),
                iterations: 0,
                primal_residual: 0.0,
                dual_residual: 0.0,
            };
        }
        let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        for &(r, c, v) in &problem.a {
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let a = CscMatrix::new_from_triplets(problem.rows, n, rows, cols, vals);
        let p = CscMatrix::<f64>::zeros((n, n));
        let cones: Vec<SupportedConeT<f64>> = problem
            .cones
            .iter()
            .map(|c| match *c {
                Cone::Zero(m) => SupportedConeT::ZeroConeT(m),
                Cone::Nonnegative(m) => SupportedConeT::NonnegativeConeT(m),
                Cone::PsdTriangle(d) => SupportedConeT::PSDTriangleConeT(d),
            })
            .collect();
        let mut iterations = 0;
        let mut best: Option<(f64, ConicOutcome)> = None;
        for attempt in ATTEMPTS {
            let Some(mut solver) = build(problem, settings, &p, &a, &cones, attempt) else {
                return failure(iterations);
            };
            solver.solve();
            let sol = &solver.solution;
            iterations += sol.iterations;
            let status = match sol.status {
                SolverStatus::Solved => SolveStatus::Optimal,
                SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
                SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
                SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
                _ => SolveStatus::NumericalFailure,
            };
            let out = ConicOutcome {
                status,
                primal_objective: sol.obj_val,
                dual_objective: sol.obj_val_dual,
                x: sol.x.clone(),
                z: sol.z.clone(),
                iterations,
                primal_residual: sol.r_prim,
                dual_residual: sol.r_dual,
            };
            let certified = problem.certified_bound(&out.z);
            // Time limits, iteration caps and certificates are not retried.
            let retry = match sol.status {
                SolverStatus::NumericalError | SolverStatus::InsufficientProgress => {
                    !certificate_is_tight(problem, &out, certified, settings)
                }
                SolverStatus::AlmostSolved => !certificate_is_tight(problem, &out, certified, settings),
                _ => false,
            };
            if !retry {
                return out;
            }
            let score = if certified.is_finite() {
                certified
            } else {
                f64::NEG_INFINITY
            };
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, out));
            }
        }
        let (_, mut out) = best.unwrap_or_else(|| (f64::NAN, failure(iterations)));
        out.iterations = iterations;
        out
    }
}

/// Settings varied between attempts; later entries run only when the
/// earlier ones stall without a tight certificate.
struct Attempt {
    static_regularization: f64,
    /// `None` keeps the solver default.
    proportional_regularization: Option<f64>,
    max_step_fraction: Option<f64>,
}

const ATTEMPTS: &[Attempt] = &[
    Attempt {
        static_regularization: 1e-8,
        proportional_regularization: None,
        max_step_fraction: None,
    },
    Attempt {
        static_regularization: 1e-8,
        proportional_regularization: None,
        max_step_fraction: Some(0.9),
    },
    Attempt {
        static_regularization: 1e-7,
        proportional_regularization: None,
        max_step_fraction: None,
    },
    Attempt {
        static_regularization: 1e-7,
        proportional_regularization: Some(1e-12),
        max_step_fraction: Some(0.9),
    },
];

fn build(
    problem: &ConicProblem,
    settings: &SolverSettings,
    p: &CscMatrix<f64>,
    a: &CscMatrix<f64>,
    cones: &[SupportedConeT<f64>],
    attempt: &Attempt,
) -> Option<DefaultSolver<f64>> {
    let tol = settings.tolerance;
    let near = settings.near_tolerance.max(tol);
    let mut builder = DefaultSettingsBuilder::default();
    if let Some(eps) = attempt.proportional_regularization {
        builder.static_regularization_proportional(eps);
    }
    if let Some(f) = attempt.max_step_fraction {
        builder.max_step_fraction(f);
    }
    let built = builder
        .verbose(settings.verbose)
        .max_iter(settings.max_iterations)
        .time_limit(settings.time_limit.unwrap_or(f64::INFINITY))
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .reduced_tol_gap_abs(near)
        .reduced_tol_gap_rel(near)
        .reduced_tol_feas(near)
        .static_regularization_constant(attempt.static_regularization)
        .direct_solve_method("faer".to_string())
        .max_threads(1)
        .build()
        .ok()?;
    DefaultSolver::new(p, &problem.cost, a, &problem.b, cones, built).ok()
}
