use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use super::{ConstraintError, GenerationReport};
use crate::pauli::PauliString;

/// Relative pivot threshold for the rank decision.
const RANK_TOLERANCE: f64 = 1e-10;
/// Condition estimate above which a solution is flagged as ill-conditioned.
const CONDITION_LIMIT: f64 = 1e12;

/// Unique moments of a closed, full-rank constraint system.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSolution {
    /// `(string, ⟨string⟩)` in the report's discovery order.
    pub moments: Vec<(PauliString, f64)>,
    pub rank: usize,
    /// Ratio of the largest to smallest retained pivot of the pivoted QR.
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
    pub max_residual: f64,
}

impl ClosedSolution {
    pub fn moment(&self, s: &PauliString) -> Option<f64> {
        if s.is_identity() {
            return Some(1.0);
        }
        self.moments.iter().find(|(p, _)| p == s).map(|(_, v)| *v)
    }
}

/// Solve the linear system of a closed generation with `⟨I⟩ = 1`.
///
/// Rank is read off a column-pivoted QR factorization: pivots below
/// `1e-10 * |R_00|` count as zero.
pub fn solve_closed_system(report: &GenerationReport) -> Result<ClosedSolution, ConstraintError> {
    if !report.cycle_closed {
        return Err(ConstraintError::NotClosed);
    }
    let unknowns = report.strings.len();
    let rows = report.constraints.len();
    let mut a = Mat::<f64>::zeros(rows.max(unknowns), unknowns);
    let mut rhs = Mat::<f64>::zeros(rows.max(unknowns), 1);
    for (r, c) in report.constraints.iter().enumerate() {
        for (s, coef) in c.terms() {
            if s.is_identity() {
                rhs[(r, 0)] -= coef;
            } else {
                let col = report.position(s).expect("constraint strings are registered");
                a[(r, col)] += coef;
            }
        }
    }
    // Padding rows (when fewer equations than unknowns) are zero and can
    // only lower the rank.
    let qr = a.col_piv_qr();
    let r = qr.R();
    let lead = if unknowns > 0 { r[(0, 0)].abs() } else { 0.0 };
    let rank = (0..unknowns)
        .take_while(|&k| r[(k, k)].abs() > RANK_TOLERANCE * lead)
        .count();
    if rank < unknowns {
        return Err(ConstraintError::Underdetermined { rank, unknowns });
    }
    let condition_estimate = if unknowns == 0 {
        1.0
    } else {
        lead / r[(unknowns - 1, unknowns - 1)].abs()
    };
    let x = qr.solve_lstsq(&rhs);
    let mut max_residual = 0.0f64;
    for c in &report.constraints {
        let res = c.residual(|s| x[(report.position(s).unwrap(), 0)]);
        max_residual = max_residual.max(res.abs());
    }
    if max_residual > 1e-8 {
        return Err(ConstraintError::Inconsistent(max_residual));
    }
    let moments = report
        .strings
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), x[(k, 0)]))
        .collect();
    Ok(ClosedSolution {
        moments,
        rank,
        condition_estimate,
        ill_conditioned: condition_estimate > CONDITION_LIMIT,
        max_residual,
    })
}
