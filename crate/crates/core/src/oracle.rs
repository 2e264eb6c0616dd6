//! Dense ground truth for small systems.
//!
//! Density matrices are `2ⁿ × 2ⁿ` with site 1 as the most significant bit.
//! The superoperator acts on the row-major vectorization `vec(ρ)[a·D + b] = ρ_ab`:
//!
//! ```text
//!   L = −i(H⊗I − I⊗Hᵀ) + Σ γ (J⊗J̄ − ½(K⊗I + I⊗Kᵀ)),   K = J†J
//! ```
//!
//! Steady states are found in the real coordinates of Hermitian matrices,
//! `ρ_aa`, `√2 Re ρ_ab` and `√2 Im ρ_ab` (`a < b`), which are orthonormal for
//! the Frobenius product; the real superoperator is then an ordinary real
//! matrix whose nullspace is read off a singular value decomposition.

use faer::{c64, Mat};
use thiserror::Error;

use crate::dense::{polynomial_matrix, string_expectation};
use crate::lindblad::LindbladModel;
use crate::pauli::{PauliPolynomial, PauliString};
use crate::solver::{ClarabelBackend, Cone, ConicBackend, ConicProblem, SolverSettings};

/// Largest system the dense routines accept by default.
pub const N_MAX_DENSE: usize = 6;
/// Relative singular-value threshold for the numerical nullspace.
pub const NULLSPACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{n} sites exceeds the dense limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("Liouvillian has an empty numerical nullspace")]
    EmptyNullspace,
    #[error("observable acts on {got} sites, state has {expected}")]
    SiteMismatch { expected: usize, got: usize },
    #[error("expectation has imaginary part {0:e}")]
    NonHermitianObservable(f64),
    #[error("steady-state SDP failed: {0}")]
    Sdp(String),
}

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub matrix: Mat<c64>,
}

impl DenseState {
    pub fn moment(&self, s: &PauliString) -> f64 {
        string_expectation(s, &self.matrix).re
    }

    pub fn trace(&self) -> c64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("Hermitian eigenvalues")
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Nullspace of the Liouvillian and one physical steady state.
#[derive(Debug, Clone)]
pub struct SteadyStates {
    /// Hermitian matrices spanning `{ρ : L(ρ) = 0}`, orthonormal in Frobenius norm.
    pub basis: Vec<Mat<c64>>,
    pub state: DenseState,
    /// `‖L(ρ_ss)‖_F`.
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

impl SteadyStates {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

fn check_size(model: &LindbladModel, max: usize) -> Result<usize, OracleError> {
    let n = model.num_sites();
    if n > max {
        return Err(OracleError::TooLarge { n, max });
    }
    Ok(n)
}

struct DenseGenerator {
    d: usize,
    h: Mat<c64>,
    jumps: Vec<(f64, Mat<c64>, Mat<c64>)>,
}

impl DenseGenerator {
    fn new(model: &LindbladModel) -> Self {
        let h = polynomial_matrix(model.hamiltonian());
        let jumps = model
            .dissipators()
            .iter()
            .map(|diss| {
                let j = polynomial_matrix(&diss.jump);
                let k = j.adjoint() * &j;
                (diss.rate, j, k)
            })
            .collect();
        DenseGenerator { d: h.nrows(), h, jumps }
    }

    /// Superoperator entry `L[(a,b),(c,e)]`.
    fn entry(&self, a: usize, b: usize, c: usize, e: usize) -> c64 {
        let zero = c64::new(0.0, 0.0);
        let mi = c64::new(0.0, -1.0);
        let mut v = zero;
        if b == e {
            v += mi * self.h[(a, c)];
        }
        if a == c {
            v -= mi * self.h[(e, b)];
        }
        for (g, j, k) in &self.jumps {
            let mut t = j[(a, c)] * j[(b, e)].conj();
            if b == e {
                t -= k[(a, c)] * 0.5;
            }
            if a == c {
                t -= k[(e, b)] * 0.5;
            }
            v += t * *g;
        }
        v
    }

    /// Hermitian basis element `k` as at most two `(row, col, coefficient)` entries.
    fn basis_entries(&self, k: usize) -> [(usize, usize, c64); 2] {
        let (a, b) = (k / self.d, k % self.d);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        if a == b {
            [(a, a, c64::new(1.0, 0.0)), (a, a, c64::new(0.0, 0.0))]
        } else if a < b {
            [(a, b, c64::new(s, 0.0)), (b, a, c64::new(s, 0.0))]
        } else {
            [(b, a, c64::new(0.0, s)), (a, b, c64::new(0.0, -s))]
        }
    }

    fn real_matrix(&self) -> Mat<f64> {
        let nn = self.d * self.d;
        let basis: Vec<_> = (0..nn).map(|k| self.basis_entries(k)).collect();
        Mat::from_fn(nn, nn, |row, col| {
            let mut v = c64::new(0.0, 0.0);
            for &(a, b, alpha) in &basis[row] {
                if alpha.re == 0.0 && alpha.im == 0.0 {
                    continue;
                }
                for &(c, e, beta) in &basis[col] {
                    if beta.re == 0.0 && beta.im == 0.0 {
                        continue;
                    }
                    v += alpha.conj() * beta * self.entry(a, b, c, e);
                }
            }
            v.re
        })
    }

    fn to_matrix(&self, coords: impl Fn(usize) -> f64) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.d, self.d);
        for k in 0..self.d * self.d {
            let x = coords(k);
            if x == 0.0 {
                continue;
            }
            for (a, b, alpha) in self.basis_entries(k) {
                m[(a, b)] += alpha * x;
            }
        }
        m
    }
}

/// Dense superoperator of `model` in row-major vectorization.
pub fn liouvillian_dense(model: &LindbladModel) -> Result<Mat<c64>, OracleError> {
    check_size(model, N_MAX_DENSE)?;
    let g = DenseGenerator::new(model);
    let nn = g.d * g.d;
    Ok(Mat::from_fn(nn, nn, |r, c| g.entry(r / g.d, r % g.d, c / g.d, c % g.d)))
}

/// Apply the dense superoperator to `rho`.
pub fn apply_liouvillian(model: &LindbladModel, rho: &Mat<c64>) -> Mat<c64> {
    let g = DenseGenerator::new(model);
    let mi = c64::new(0.0, -1.0);
    let mut out = (&g.h * rho - rho * &g.h) * faer::Scale(mi);
    for (rate, j, k) in &g.jumps {
        let term = j * rho * j.adjoint() - (k * rho + rho * k) * faer::Scale(c64::new(0.5, 0.0));
        out += term * faer::Scale(c64::new(*rate, 0.0));
    }
    out
}

fn frobenius(m: &Mat<c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn trace(m: &Mat<c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Nullspace and a steady state, for up to [`N_MAX_DENSE`] sites.
pub fn steady_state_dense(model: &LindbladModel) -> Result<SteadyStates, OracleError> {
    steady_state_dense_limited(model, N_MAX_DENSE)
}

/// As [`steady_state_dense`] with an explicit size limit.
pub fn steady_state_dense_limited(model: &LindbladModel, max_sites: usize) -> Result<SteadyStates, OracleError> {
    let n = check_size(model, max_sites)?;
    let g = DenseGenerator::new(model);
    let real = g.real_matrix();
    let svd = real.thin_svd().map_err(|e| OracleError::Sdp(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..s.nrows()).map(|k| s[k]).collect();
    let sigma_max = singular_values.iter().cloned().fold(0.0, f64::max);
    let v = svd.V();
    let basis: Vec<Mat<c64>> = (0..singular_values.len())
        .filter(|&k| singular_values[k] <= NULLSPACE_TOLERANCE * sigma_max)
        .map(|k| {
            let m = g.to_matrix(|r| v[(r, k)]);
            hermitize(&m)
        })
        .collect();
    if basis.is_empty() {
        return Err(OracleError::EmptyNullspace);
    }

    let rho = if basis.len() == 1 {
        let t = trace(&basis[0]);
        &basis[0] * faer::Scale(t.inv())
    } else {
        extremal_state(&basis, None)?.1
    };
    let rho = hermitize(&rho);
    let residual = frobenius(&apply_liouvillian(model, &rho));
    Ok(SteadyStates {
        basis,
        state: DenseState { n, matrix: rho },
        residual,
        singular_values,
    })
}

fn hermitize(m: &Mat<c64>) -> Mat<c64> {
    let h = m + m.adjoint();
    h * faer::Scale(c64::new(0.5, 0.0))
}

/// `tr(ρ O)`; fails when the imaginary part is not negligible.
pub fn expectation(state: &DenseState, observable: &PauliPolynomial) -> Result<f64, OracleError> {
    if observable.num_sites() != state.n {
        return Err(OracleError::SiteMismatch {
            expected: state.n,
            got: observable.num_sites(),
        });
    }
    let o = polynomial_matrix(observable);
    let v = trace(&(&o * &state.matrix));
    let scale: f64 = 1.0 + observable.terms().map(|(_, c)| c.norm()).sum::<f64>();
    if v.im.abs() > 1e-12 * scale {
        return Err(OracleError::NonHermitianObservable(v.im));
    }
    Ok(v.re)
}

/// Optimize `tr(ρ O)` (or find any state when `observable` is `None`) over
/// `ρ = Σ c_k B_k ⪰ 0` with unit trace; returns the value and the state.
fn extremal_state(basis: &[Mat<c64>], objective: Option<(&Mat<c64>, bool)>) -> Result<(f64, Mat<c64>), OracleError> {
    let r = basis.len();
    let d = basis[0].nrows();
    let cost: Vec<f64> = match objective {
        None => vec![0.0; r],
        Some((o, maximize)) => basis
            .iter()
            .map(|b| {
                let v = trace(&(o * b)).re;
                if maximize {
                    -v
                } else {
                    v
                }
            })
            .collect(),
    };
    // Row 0: Σ c_k tr(B_k) = 1. Then the embedded block of Σ c_k B_k.
    let mut a = Vec::new();
    let mut b = vec![1.0];
    for (k, bk) in basis.iter().enumerate() {
        a.push((0, k, trace(bk).re));
    }
    let dim = 2 * d;
    let rows = dim * (dim + 1) / 2;
    b.extend(std::iter::repeat_n(0.0, rows));
    let sq = std::f64::consts::SQRT_2;
    for (k, bk) in basis.iter().enumerate() {
        for q in 0..dim {
            for p in 0..=q {
                let val = embedded(bk, p, q);
                if val != 0.0 {
                    let w = if p == q { 1.0 } else { sq };
                    a.push((1 + crate::solver::svec_index(p, q), k, -w * val));
                }
            }
        }
    }
    a.sort_by_key(|x| (x.1, x.0));
    let problem = ConicProblem {
        cost,
        rows: 1 + rows,
        a,
        b,
        cones: vec![Cone::Zero(1), Cone::PsdTriangle(dim)],
        offset: 0.0,
    };
    let settings = SolverSettings {
        tolerance: 1e-10,
        near_tolerance: 1e-7,
        ..Default::default()
    };
    let out = ClarabelBackend.solve(&problem, &settings);
    if !out.status.is_solved() {
        return Err(OracleError::Sdp(out.status.to_string()));
    }
    let mut rho = Mat::<c64>::zeros(d, d);
    for (k, bk) in basis.iter().enumerate() {
        rho += bk * faer::Scale(c64::new(out.x[k], 0.0));
    }
    let value = match objective {
        None => 0.0,
        Some((o, _)) => trace(&(o * &rho)).re,
    };
    Ok((value, rho))
}

fn embedded(m: &Mat<c64>, p: usize, q: usize) -> f64 {
    let d = m.nrows();
    let v = m[(p % d, q % d)];
    match (p < d, q < d) {
        (true, true) | (false, false) => v.re,
        (true, false) => -v.im,
        (false, true) => v.im,
    }
}

/// `(min, max)` of `tr(ρ O)` over all steady states.
pub fn exact_extrema(model: &LindbladModel, observable: &PauliPolynomial) -> Result<(f64, f64), OracleError> {
    let ss = steady_state_dense(model)?;
    extrema_over(&ss, observable)
}

/// `(min, max)` of `tr(ρ O)` over the steady states spanned by `ss.basis`.
pub fn extrema_over(ss: &SteadyStates, observable: &PauliPolynomial) -> Result<(f64, f64), OracleError> {
    if ss.dimension() == 1 {
        let v = expectation(&ss.state, observable)?;
        return Ok((v, v));
    }
    expectation(&ss.state, observable)?;
    let o = polynomial_matrix(observable);
    let lo = extremal_state(&ss.basis, Some((&o, false)))?.0;
    let hi = extremal_state(&ss.basis, Some((&o, true)))?.0;
    Ok((lo, hi))
}
