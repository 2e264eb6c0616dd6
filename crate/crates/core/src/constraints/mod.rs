//! Constraint families for the steady-state relaxation.
//!
//! * linear equalities `⟨L†(P)⟩ = 0` harvested by [`auto_generate`],
//! * moment-matrix blocks ([`moment_matrix`], [`level_basis`]),
//! * reduced-density blocks ([`reduced_density_blocks`]),
//! * orbit equalities from declared site symmetries ([`symmetry_constraints`]).
//!
//! Moments are the real numbers `⟨P⟩ = tr(P ρ)`; `⟨I⟩ = 1` is implicit
//! everywhere, so an identity term in a constraint acts as its constant.

mod blocks;
mod closed;
mod generate;
mod symmetry;

pub use blocks::{
    all_subsets, contiguous_windows, level_basis, moment_matrix, reduced_density_blocks, AffineForm, PsdBlock,
};
pub use closed::{solve_closed_system, ClosedSolution};
pub use generate::{auto_generate, GenerationReport};
pub use symmetry::{symmetry_constraints, Permutation};

use std::fmt;

use thiserror::Error;

use crate::lindblad::ModelError;
use crate::pauli::{PauliError, PauliString};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("basis is empty")]
    EmptyBasis,
    #[error("generation did not close; the linear system cannot be solved exactly")]
    NotClosed,
    #[error("linear system is underdetermined (rank {rank} for {unknowns} unknowns)")]
    Underdetermined { rank: usize, unknowns: usize },
    #[error("closed linear system is inconsistent (residual {0:e})")]
    Inconsistent(f64),
    #[error("subset {subset:?}: {reason}")]
    BadSubset { subset: Vec<usize>, reason: String },
    #[error("permutation {0:?} is not a bijection of the sites")]
    BadPermutation(Vec<usize>),
    #[error("permutation {perm:?} is not a symmetry of the model (counterexample: {counterexample})")]
    NotSymmetric { perm: Vec<usize>, counterexample: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// `Σ_α c_α ⟨P_α⟩ = 0`, with the identity term (if any) as the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    terms: Vec<(PauliString, f64)>,
}

impl LinearConstraint {
    /// Merges duplicates, drops exact zeros and sorts canonically.
    pub fn new(mut terms: Vec<(PauliString, f64)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PauliString, f64)> = Vec::with_capacity(terms.len());
        for (s, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += c,
                _ => merged.push((s, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        LinearConstraint { terms: merged }
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate `Σ c_α ⟨P_α⟩` with `⟨I⟩ = 1`.
    pub fn residual<F: Fn(&PauliString) -> f64>(&self, moment: F) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| if s.is_identity() { *c } else { c * moment(s) })
            .sum()
    }

    /// One line of the text format: `coef string ; coef string ; ...`.
    pub fn to_line(&self) -> String {
        self.terms
            .iter()
            .map(|(s, c)| format!("{c:e} {s}"))
            .collect::<Vec<_>>()
            .join(" ; ")
    }

    pub fn parse_line(line: &str, n: usize) -> Result<Self, PauliError> {
        let mut terms = Vec::new();
        for part in line.split(';') {
            let part = part.trim();
            let (coef, string) = part.split_once(char::is_whitespace).unwrap_or((part, ""));
            let c: f64 = coef
                .parse()
                .map_err(|_| PauliError::Malformed(format!("bad coefficient `{coef}`")))?;
            terms.push((PauliString::parse(string.trim(), n)?, c));
        }
        Ok(LinearConstraint::new(terms))
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Write constraints one per line.
pub fn write_constraints(constraints: &[LinearConstraint]) -> String {
    let mut out = String::new();
    for c in constraints {
        out.push_str(&c.to_line());
        out.push('\n');
    }
    out
}

/// Inverse of [`write_constraints`]; blank lines and `#` comments are skipped.
pub fn read_constraints(text: &str, n: usize) -> Result<Vec<LinearConstraint>, ConstraintError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(
            LinearConstraint::parse_line(line, n).map_err(|e| ConstraintError::Parse {
                line: k + 1,
                reason: e.to_string(),
            })?,
        );
    }
    Ok(out)
}
