//! Assembly of the moment relaxation over real variables `⟨P⟩`.
//!
//! A [`RelaxationProblem`] is
//!
//! ```text
//!   min/max  c0 + Σ c_k x_k
//!   s.t.     Σ a_rk x_k + a_r0 = 0          (equalities)
//!            B_0 + Σ x_k B_k ⪰ 0             (real symmetric blocks)
//!            −1 ≤ x_k ≤ 1                    (optional box)
//! ```
//!
//! where `x_k = ⟨P_k⟩` for the non-identity strings in `variables` and
//! `⟨I⟩ = 1` has been substituted everywhere.

mod embed;
mod sdpa;

pub use embed::{embed_complex_block, embed_hermitian_matrix};
pub use sdpa::{export_sdpa, import_sdpa, read_sdpa, sidecar_path, write_sdpa, SdpaError};

use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constraints::{
    all_subsets, auto_generate, contiguous_windows, level_basis, moment_matrix, reduced_density_blocks,
    symmetry_constraints, ConstraintError, GenerationReport, LinearConstraint, Permutation, PsdBlock,
};
use crate::lindblad::LindbladModel;
use crate::pauli::{PauliPolynomial, PauliString};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("observable is not Hermitian")]
    NonHermitianObservable,
    #[error("observable acts on {got} sites, model has {expected}")]
    SiteMismatch { expected: usize, got: usize },
    #[error("problem has no variables")]
    Empty,
    #[error("block `{0}` is not Hermitian")]
    NonHermitianBlock(String),
    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
}

/// Which moment-matrix block to add.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MomentMatrixOption {
    #[default]
    None,
    /// Identity plus all strings up to the given order.
    Level(usize),
    /// Identity plus the first `size - 1` generated strings in canonical order.
    Auto(usize),
}

/// Which reduced-density blocks to add.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ReducedOption {
    #[default]
    None,
    /// Contiguous windows of `m` sites for the model's geometry.
    Contiguous(usize),
    /// All `C(n, m)` subsets of `m` sites.
    AllSubsets(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembleOptions {
    /// Maximum number of generated `⟨L†(P)⟩ = 0` constraints (0 disables generation).
    pub linear_budget: usize,
    pub moment_matrix: MomentMatrixOption,
    pub reduced: ReducedOption,
    /// Declared site symmetries (empty: none).
    pub symmetries: Vec<Permutation>,
    /// Add `−1 ≤ ⟨P⟩ ≤ 1` for every variable.
    pub safety_net: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            linear_budget: 1000,
            moment_matrix: MomentMatrixOption::None,
            reduced: ReducedOption::None,
            symmetries: Vec::new(),
            safety_net: true,
        }
    }
}

/// `Σ terms + constant = 0` over variable indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

/// Real symmetric block `constant + Σ x_k coefficient_k`, upper triangle only.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBlock {
    pub dim: usize,
    /// `(i, j, value)` with `i <= j`, sorted.
    pub constant: Vec<(usize, usize, f64)>,
    /// `(variable, i, j, value)` with `i <= j`, sorted.
    pub terms: Vec<(usize, usize, usize, f64)>,
}

impl RealBlock {
    /// Dense symmetric matrix at `x`.
    pub fn evaluate(&self, x: &[f64]) -> faer::Mat<f64> {
        let mut m = faer::Mat::<f64>::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.constant {
            m[(i, j)] += v;
        }
        for &(k, i, j, v) in &self.terms {
            m[(i, j)] += v * x[k];
        }
        for i in 0..self.dim {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        m
    }
}

/// Counts describing how a problem was built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssemblyStats {
    pub generated_constraints: usize,
    pub cycle_closed: bool,
    pub symmetry_constraints: usize,
    pub moment_matrix_size: usize,
    pub reduced_blocks: usize,
    pub reduced_block_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationProblem {
    pub num_sites: usize,
    /// Canonically sorted, identity excluded.
    pub variables: Vec<PauliString>,
    /// Sorted by variable index.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub equalities: Vec<SparseRow>,
    pub psd_blocks: Vec<RealBlock>,
    pub box_bounds: bool,
    pub stats: AssemblyStats,
}

impl RelaxationProblem {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, s: &PauliString) -> Option<usize> {
        self.variables.binary_search(s).ok()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(k, c)| c * x[k]).sum::<f64>()
    }

    /// Bounds implied by the box alone: `c0 ± Σ |c_k|`.
    pub fn trivial_bounds(&self) -> (f64, f64) {
        let spread: f64 = self.objective.iter().map(|(_, c)| c.abs()).sum();
        (self.objective_constant - spread, self.objective_constant + spread)
    }

    /// Largest equality residual at `x`.
    pub fn max_equality_residual(&self, x: &[f64]) -> f64 {
        self.equalities
            .iter()
            .map(|r| (r.constant + r.terms.iter().map(|&(k, a)| a * x[k]).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all blocks at `x` (`+inf` without blocks).
    pub fn min_block_eigenvalue(&self, x: &[f64]) -> f64 {
        self.psd_blocks
            .iter()
            .map(|b| {
                let m = b.evaluate(x);
                m.self_adjoint_eigenvalues(faer::Side::Upper)
                    .expect("symmetric eigenvalues")
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Variable vector from a moment function.
    pub fn point<F: Fn(&PauliString) -> f64>(&self, moment: F) -> Vec<f64> {
        self.variables.iter().map(moment).collect()
    }

    /// SHA-256 over the exact problem data, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |bytes: &[u8]| h.update(bytes);
        put(&(self.num_sites as u64).to_le_bytes());
        put(&(self.variables.len() as u64).to_le_bytes());
        for v in &self.variables {
            put(v.to_string().as_bytes());
            put(b"\0");
        }
        put(&self.objective_constant.to_bits().to_le_bytes());
        for &(k, c) in &self.objective {
            put(&(k as u64).to_le_bytes());
            put(&c.to_bits().to_le_bytes());
        }
        put(b"eq");
        for r in &self.equalities {
            put(&(r.terms.len() as u64).to_le_bytes());
            put(&r.constant.to_bits().to_le_bytes());
            for &(k, a) in &r.terms {
                put(&(k as u64).to_le_bytes());
                put(&a.to_bits().to_le_bytes());
            }
        }
        put(b"psd");
        for b in &self.psd_blocks {
            put(&(b.dim as u64).to_le_bytes());
            for &(i, j, v) in &b.constant {
                put(&[i as u64, j as u64, v.to_bits()].map(u64::to_le_bytes).concat());
            }
            put(b"|");
            for &(k, i, j, v) in &b.terms {
                put(&[k as u64, i as u64, j as u64, v.to_bits()]
                    .map(u64::to_le_bytes)
                    .concat());
            }
        }
        put(&[self.box_bounds as u8]);
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// A copy with extra equalities appended (for nesting experiments).
    pub fn with_extra_equalities(&self, rows: Vec<SparseRow>) -> RelaxationProblem {
        let mut p = self.clone();
        p.equalities.extend(rows);
        p
    }

    fn check_finite(&self) -> Result<(), RelaxError> {
        let ok = self.objective_constant.is_finite() && self.objective.iter().all(|(_, c)| c.is_finite());
        if !ok {
            return Err(RelaxError::NonFinite("objective"));
        }
        if !self
            .equalities
            .iter()
            .all(|r| r.constant.is_finite() && r.terms.iter().all(|(_, a)| a.is_finite()))
        {
            return Err(RelaxError::NonFinite("equalities"));
        }
        if !self
            .psd_blocks
            .iter()
            .all(|b| b.constant.iter().all(|t| t.2.is_finite()) && b.terms.iter().all(|t| t.3.is_finite()))
        {
            return Err(RelaxError::NonFinite("blocks"));
        }
        Ok(())
    }
}

/// Intermediate symbolic pieces of an assembly, kept for inspection.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub problem: RelaxationProblem,
    pub generation: Option<GenerationReport>,
    pub blocks: Vec<PsdBlock>,
    pub symmetry: Vec<LinearConstraint>,
}

/// Build the relaxation for bounding `⟨observable⟩` in the steady states of `model`.
pub fn assemble(
    model: &LindbladModel,
    observable: &PauliPolynomial,
    options: &AssembleOptions,
) -> Result<RelaxationProblem, RelaxError> {
    assemble_detailed(model, observable, options).map(|a| a.problem)
}

pub fn assemble_detailed(
    model: &LindbladModel,
    observable: &PauliPolynomial,
    options: &AssembleOptions,
) -> Result<Assembly, RelaxError> {
    let n = model.num_sites();
    if observable.num_sites() != n {
        return Err(RelaxError::SiteMismatch {
            expected: n,
            got: observable.num_sites(),
        });
    }
    if !observable.is_hermitian() {
        return Err(RelaxError::NonHermitianObservable);
    }
    let seeds: Vec<PauliString> = observable.strings().filter(|s| !s.is_identity()).cloned().collect();
    if seeds.is_empty() {
        return Err(RelaxError::Empty);
    }

    let mut universe: BTreeSet<PauliString> = seeds.iter().cloned().collect();
    let generation = if options.linear_budget > 0 {
        let report = auto_generate(model, &seeds, options.linear_budget)?;
        universe.extend(report.strings.iter().cloned());
        Some(report)
    } else {
        None
    };

    let mut blocks = Vec::new();
    let mut stats = AssemblyStats {
        generated_constraints: generation.as_ref().map_or(0, |g| g.constraints.len()),
        cycle_closed: generation.as_ref().is_some_and(|g| g.cycle_closed),
        ..Default::default()
    };
    let basis = match &options.moment_matrix {
        MomentMatrixOption::None => None,
        MomentMatrixOption::Level(k) => Some(level_basis(n, *k)),
        MomentMatrixOption::Auto(size) => {
            let mut basis = vec![PauliString::identity(n)];
            basis.extend(universe.iter().take(size.saturating_sub(1)).cloned());
            Some(basis)
        }
    };
    if let Some(basis) = basis {
        let block = moment_matrix(&basis)?;
        stats.moment_matrix_size = block.dim();
        blocks.push(block);
    }
    let subsets = match &options.reduced {
        ReducedOption::None => Vec::new(),
        ReducedOption::Contiguous(m) => contiguous_windows(model.geometry(), n, *m),
        ReducedOption::AllSubsets(m) => all_subsets(n, *m),
    };
    if !subsets.is_empty() {
        let reduced = reduced_density_blocks(n, &subsets)?;
        stats.reduced_blocks = reduced.len();
        stats.reduced_block_size = reduced[0].dim();
        blocks.extend(reduced);
    }
    for b in &blocks {
        universe.extend(b.strings());
    }
    universe.remove(&PauliString::identity(n));
    let variables: Vec<PauliString> = universe.into_iter().collect();

    let symmetry = symmetry_constraints(model, &options.symmetries, &variables)?;
    stats.symmetry_constraints = symmetry.len();

    let index: HashMap<&PauliString, usize> = variables.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let to_row = |c: &LinearConstraint| {
        let mut row = SparseRow {
            terms: Vec::with_capacity(c.terms().len()),
            constant: 0.0,
        };
        for (s, a) in c.terms() {
            if s.is_identity() {
                row.constant += a;
            } else {
                row.terms.push((index[s], *a));
            }
        }
        row.terms.sort_by_key(|t| t.0);
        row
    };
    let mut equalities: Vec<SparseRow> = generation
        .as_ref()
        .map(|g| g.constraints.iter().map(to_row).collect())
        .unwrap_or_default();
    equalities.extend(symmetry.iter().map(to_row));

    let mut psd_blocks = Vec::with_capacity(blocks.len());
    for b in &blocks {
        psd_blocks.push(embed::lower_block(b, &index, false)?);
    }

    let mut objective: Vec<(usize, f64)> = observable
        .terms()
        .filter(|(s, _)| !s.is_identity())
        .map(|(s, c)| (index[s], c.re))
        .filter(|t| t.1 != 0.0)
        .collect();
    objective.sort_by_key(|t| t.0);

    let problem = RelaxationProblem {
        num_sites: n,
        variables,
        objective,
        objective_constant: observable.identity_coefficient().re,
        equalities,
        psd_blocks,
        box_bounds: options.safety_net,
        stats,
    };
    problem.check_finite()?;
    Ok(Assembly {
        problem,
        generation,
        blocks,
        symmetry,
    })
}
