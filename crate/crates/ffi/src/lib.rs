//! C ABI over `ssbound`.
//!
//! Models and problems are opaque handles created by `ssb_*_new`-style
//! functions and released with the matching `_free`. Every fallible call
//! returns an [`SsbStatus`]; on failure `ssb_last_error()` describes the
//! cause until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ssbound::cli::Config;
use ssbound::lindblad::LindbladModel;
use ssbound::oracle::{extrema_over, steady_state_dense};
use ssbound::pauli::PauliPolynomial;
use ssbound::relax::{assemble, export_sdpa, AssembleOptions, MomentMatrixOption, ReducedOption, RelaxationProblem};
use ssbound::solver::{solve_interval, BoundResult, SolveStatus, SolverSettings};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    InvalidArgument = 4,
    AssemblyError = 5,
    SolverFailure = 6,
    IoError = 7,
    Panic = 8,
}

/// Outcome of one directional solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbBound {
    /// NaN unless `status` is 0 (optimal) or 1 (near-optimal).
    pub value: f64,
    /// 0 optimal, 1 near-optimal, 2 infeasible, 3 unbounded, 4 numerical failure.
    pub status: i32,
    pub iterations: u32,
    pub wall_time_s: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbInterval {
    pub lb: SsbBound,
    pub ub: SsbBound,
    pub trivial_lb: f64,
    pub trivial_ub: f64,
}

/// Constraint budgets; zero disables a family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbBudget {
    pub linear: usize,
    pub moment_matrix: usize,
    /// Sites per reduced density matrix.
    pub reduced: usize,
    /// Nonzero: all subsets of `reduced` sites rather than contiguous windows.
    pub all_subsets: i32,
    pub symmetry: i32,
    pub safety_net: i32,
}

/// A Lindblad model with its observable.
pub struct SsbModel {
    config: Config,
    model: LindbladModel,
    observable: PauliPolynomial,
}

/// An assembled relaxation.
pub struct SsbProblem {
    problem: RelaxationProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(text).expect("no interior nul")));
}

fn guard(f: impl FnOnce() -> Result<(), (SsbStatus, String)>) -> SsbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsbStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SsbStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, (SsbStatus, String)> {
    if p.is_null() {
        return Err((SsbStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SsbStatus::InvalidUtf8, "string is not UTF-8".into()))
}

fn null(what: &str) -> (SsbStatus, String) {
    (SsbStatus::NullPointer, format!("null {what}"))
}

/// Message for the last failed call on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn ssb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ssb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a model from a TOML configuration document.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_from_config(config_toml: *const c_char, out: *mut *mut SsbModel) -> SsbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = read_str(config_toml)?;
        let config = Config::parse(text).map_err(|e| (SsbStatus::ConfigError, e.to_string()))?;
        let model = config
            .build_model()
            .map_err(|e| (SsbStatus::ConfigError, e.to_string()))?;
        let observable = config.build_observable().map_err(|e| (SsbStatus::ConfigError, e))?;
        *out = Box::into_raw(Box::new(SsbModel {
            config,
            model,
            observable,
        }));
        Ok(())
    })
}

/// Release a model; NULL is ignored.
///
/// # Safety
/// `model` must come from `ssb_model_from_config` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_free(model: *mut SsbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of sites, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_num_sites(model: *const SsbModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.num_sites())
}

/// Replace the observable with a Pauli polynomial such as `"0.5*Z1 Z2 - X1"`.
///
/// # Safety
/// `model` must be a live handle and `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_set_observable(model: *mut SsbModel, text: *const c_char) -> SsbStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        let text = read_str(text)?;
        let mut config = m.config.clone();
        config.observable = Some(text.to_string());
        let observable = config.build_observable().map_err(|e| (SsbStatus::InvalidArgument, e))?;
        m.config = config;
        m.observable = observable;
        Ok(())
    })
}

/// The budgets stated in the model's configuration.
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_default_budget(model: *const SsbModel, out: *mut SsbBudget) -> SsbStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let b = &m.config.budget;
        *out = SsbBudget {
            linear: b.linear,
            moment_matrix: b.moment_matrix,
            reduced: b.reduced,
            all_subsets: i32::from(b.subsets == ssbound::cli::config::SubsetMode::All),
            symmetry: i32::from(b.symmetry),
            safety_net: i32::from(b.safety_net),
        };
        Ok(())
    })
}

/// Assemble the relaxation of the model's observable under `budget`.
///
/// # Safety
/// `model` must be a live handle; `budget` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_assemble(
    model: *const SsbModel,
    budget: *const SsbBudget,
    out: *mut *mut SsbProblem,
) -> SsbStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let b = budget.as_ref().ok_or_else(|| null("budget"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let options = AssembleOptions {
            linear_budget: b.linear,
            moment_matrix: match b.moment_matrix {
                0 => MomentMatrixOption::None,
                k => MomentMatrixOption::Auto(k),
            },
            reduced: match (b.reduced, b.all_subsets != 0) {
                (0, _) => ReducedOption::None,
                (k, true) => ReducedOption::AllSubsets(k),
                (k, false) => ReducedOption::Contiguous(k),
            },
            symmetries: if b.symmetry != 0 {
                m.config.symmetries()
            } else {
                Vec::new()
            },
            safety_net: b.safety_net != 0,
        };
        let problem =
            assemble(&m.model, &m.observable, &options).map_err(|e| (SsbStatus::AssemblyError, e.to_string()))?;
        *out = Box::into_raw(Box::new(SsbProblem { problem }));
        Ok(())
    })
}

/// Release a problem; NULL is ignored.
///
/// # Safety
/// `problem` must come from `ssb_problem_assemble` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_free(problem: *mut SsbProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of moment variables, or 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_num_variables(problem: *const SsbProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.num_variables())
}

/// Number of equality constraints, or 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_num_equalities(problem: *const SsbProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.equalities.len())
}

/// Write sparse SDPA to `path` and the variable map next to it.
///
/// # Safety
/// `problem` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_export_sdpa(problem: *const SsbProblem, path: *const c_char) -> SsbStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let path = read_str(path)?;
        export_sdpa(&p.problem, Path::new(path)).map_err(|e| (SsbStatus::IoError, e.to_string()))?;
        Ok(())
    })
}

fn bound_to_c(r: &BoundResult) -> SsbBound {
    SsbBound {
        value: r.value,
        status: match r.status {
            SolveStatus::Optimal => 0,
            SolveStatus::NearOptimal => 1,
            SolveStatus::Infeasible => 2,
            SolveStatus::Unbounded => 3,
            SolveStatus::NumericalFailure => 4,
        },
        iterations: r.iterations,
        wall_time_s: r.wall_time.as_secs_f64(),
    }
}

/// Solve both directions. Returns `SolverFailure` (with `out` filled) when
/// either direction is not optimal or near-optimal. A non-positive
/// `tolerance` selects the default.
///
/// # Safety
/// `problem` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ssb_problem_certify(
    problem: *const SsbProblem,
    tolerance: f64,
    out: *mut SsbInterval,
) -> SsbStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let mut settings = SolverSettings::default();
        if tolerance > 0.0 && tolerance.is_finite() {
            settings.tolerance = tolerance;
            settings.near_tolerance = settings.near_tolerance.max(tolerance);
        }
        let (lb, ub) = solve_interval(&p.problem, &settings);
        let (t0, t1) = p.problem.trivial_bounds();
        *out = SsbInterval {
            lb: bound_to_c(&lb),
            ub: bound_to_c(&ub),
            trivial_lb: t0,
            trivial_ub: t1,
        };
        if lb.status.is_solved() && ub.status.is_solved() {
            Ok(())
        } else {
            Err((SsbStatus::SolverFailure, format!("lb {}, ub {}", lb.status, ub.status)))
        }
    })
}

/// Exact extrema of the observable over the dense steady-state set.
///
/// # Safety
/// `model` must be a live handle; the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn ssb_model_exact(
    model: *const SsbModel,
    out_min: *mut f64,
    out_max: *mut f64,
    out_dimension: *mut usize,
) -> SsbStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out_min.is_null() || out_max.is_null() || out_dimension.is_null() {
            return Err(null("output pointer"));
        }
        let ss = steady_state_dense(&m.model).map_err(|e| (SsbStatus::InvalidArgument, e.to_string()))?;
        let (lo, hi) = extrema_over(&ss, &m.observable).map_err(|e| (SsbStatus::SolverFailure, e.to_string()))?;
        *out_min = lo;
        *out_max = hi;
        *out_dimension = ss.dimension();
        Ok(())
    })
}
