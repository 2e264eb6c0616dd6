use faer::{Mat, Side};

use crate::relax::RelaxationProblem;

use super::presolve::{merge, Reduction};
use super::Direction;

/// Cone of a contiguous run of slack rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `s = 0`.
    Zero(usize),
    /// `s ≥ 0`.
    Nonnegative(usize),
    /// Scaled upper triangle of a `d × d` PSD matrix, `d(d+1)/2` rows.
    PsdTriangle(usize),
}

impl Cone {
    pub fn rows(&self) -> usize {
        match *self {
            Cone::Zero(m) | Cone::Nonnegative(m) => m,
            Cone::PsdTriangle(d) => d * (d + 1) / 2,
        }
    }
}

/// `minimize cᵀx  s.t.  b − Ax ∈ K`, `A` as sorted triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub cost: Vec<f64>,
    pub rows: usize,
    /// `(row, column, value)`.
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
    /// Constant added to `cᵀx` to recover the objective.
    pub offset: f64,
}

/// Row of entry `(i, j)`, `i ≤ j`, in a column-wise upper-triangle vector.
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

impl ConicProblem {
    /// Conic form of one direction after presolve: `max` negates the cost.
    pub fn from_relaxation(problem: &RelaxationProblem, direction: Direction) -> Self {
        Self::from_reduction(problem, &Reduction::new(problem), direction)
    }

    /// Conic form over the surviving columns of `reduction`.
    pub fn from_reduction(problem: &RelaxationProblem, reduction: &Reduction, direction: Direction) -> Self {
        let n = reduction.kept.len();
        let sign = match direction {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        };
        let mut cost = vec![0.0; n];
        let mut offset = 0.0;
        for &(k, c) in &problem.objective {
            let a = reduction.column_of(k);
            offset += sign * c * a.shift;
            if let Some(col) = a.root {
                cost[col] += sign * c * a.scale;
            }
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();

        if !reduction.remaining.is_empty() {
            for &r in &reduction.remaining {
                let (terms, constant) = reduction.reduce_row(&problem.equalities[r]);
                let row = b.len();
                a.extend(terms.into_iter().map(|(k, v)| (row, k, v)));
                b.push(-constant);
            }
            cones.push(Cone::Zero(reduction.remaining.len()));
        }
        if problem.box_bounds {
            let rows = reduction.box_rows();
            if !rows.is_empty() {
                for t in &rows {
                    // 1 − x ≥ 0 and 1 + x ≥ 0 with x = scale·y + shift.
                    let r = b.len();
                    if let Some(col) = t.root {
                        a.push((r, col, t.scale));
                        a.push((r + 1, col, -t.scale));
                    }
                    b.extend([1.0 - t.shift, 1.0 + t.shift]);
                }
                cones.push(Cone::Nonnegative(2 * rows.len()));
            }
        }
        let scale = std::f64::consts::SQRT_2;
        for blk in &problem.psd_blocks {
            let base = b.len();
            let mut local = vec![0.0; blk.dim * (blk.dim + 1) / 2];
            let w = |i: usize, j: usize| if i == j { 1.0 } else { scale };
            for &(i, j, v) in &blk.constant {
                local[svec_index(i, j)] += w(i, j) * v;
            }
            let mut entries = Vec::with_capacity(blk.terms.len());
            for &(k, i, j, v) in &blk.terms {
                let t = reduction.column_of(k);
                local[svec_index(i, j)] += w(i, j) * v * t.shift;
                if let Some(col) = t.root {
                    entries.push(((col, base + svec_index(i, j)), -w(i, j) * v * t.scale));
                }
            }
            b.extend(local);
            a.extend(merge(entries).into_iter().map(|((col, row), v)| (row, col, v)));
            cones.push(Cone::PsdTriangle(blk.dim));
        }
        a.sort_by_key(|x| (x.1, x.0));
        ConicProblem {
            cost,
            rows: b.len(),
            a,
            b,
            cones,
            offset,
        }
    }

    /// Lower bound on `cᵀx + offset` over every feasible `x` with `|x_k| ≤ 1`,
    /// from an arbitrary dual vector `z`.
    ///
    /// `z` is projected onto the dual cone; with `ẑ` the projection and
    /// `r = c + Aᵀẑ`, weak duality gives `cᵀx ≥ −bᵀẑ − ‖r‖₁`. Every column is
    /// a Pauli moment, so the box holds for any state whether or not its rows
    /// are part of the problem. NaN when `z` has the wrong length or is not finite.
    pub fn certified_bound(&self, z: &[f64]) -> f64 {
        if z.len() != self.rows || z.iter().any(|v| !v.is_finite()) {
            return f64::NAN;
        }
        let mut y = z.to_vec();
        let mut at = 0;
        for cone in &self.cones {
            let rows = cone.rows();
            let part = &mut y[at..at + rows];
            match *cone {
                Cone::Zero(_) => {}
                Cone::Nonnegative(_) => part.iter_mut().for_each(|v| *v = v.max(0.0)),
                Cone::PsdTriangle(d) => project_psd(part, d),
            }
            at += rows;
        }
        let mut r = self.cost.clone();
        for &(row, col, v) in &self.a {
            r[col] += v * y[row];
        }
        let by: f64 = self.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let slack: f64 = r.iter().map(|v| v.abs()).sum();
        self.offset - by - slack
    }
}

/// Nearest PSD matrix, in place on a scaled column-wise upper triangle.
fn project_psd(svec: &mut [f64], d: usize) {
    let scale = std::f64::consts::SQRT_2;
    let m = Mat::<f64>::from_fn(d, d, |i, j| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let v = svec[svec_index(i, j)];
        if i == j {
            v
        } else {
            v / scale
        }
    });
    let Ok(eig) = m.self_adjoint_eigen(Side::Lower) else {
        svec.iter_mut().for_each(|v| *v = f64::NAN);
        return;
    };
    let (u, s) = (eig.U(), eig.S().column_vector());
    if (0..d).all(|k| s[k] >= 0.0) {
        return;
    }
    for j in 0..d {
        for i in 0..=j {
            let v: f64 = (0..d)
                .filter(|&k| s[k] > 0.0)
                .map(|k| s[k] * u[(i, k)] * u[(j, k)])
                .sum();
            svec[svec_index(i, j)] = if i == j { v } else { v * scale };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// min x subject to [[1, x], [x, 1]] ⪰ 0; optimum −1.
    fn psd_problem() -> ConicProblem {
        ConicProblem {
            cost: vec![1.0],
            rows: 3,
            a: vec![(1, 0, -std::f64::consts::SQRT_2)],
            b: vec![1.0, 0.0, 1.0],
            cones: vec![Cone::PsdTriangle(2)],
            offset: 0.0,
        }
    }

    #[test]
    fn certified_bound_is_tight_at_the_dual_optimum() {
        let box_only = ConicProblem {
            cost: vec![1.0],
            rows: 2,
            a: vec![(0, 0, -1.0), (1, 0, 1.0)],
            b: vec![1.0, 1.0],
            cones: vec![Cone::Nonnegative(2)],
            offset: 0.5,
        };
        assert!((box_only.certified_bound(&[1.0, 0.0]) + 0.5).abs() < 1e-15);
        assert!((box_only.certified_bound(&[0.9, -0.1]) + 0.5).abs() < 1e-15);
        let z = [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5];
        assert!((psd_problem().certified_bound(&z) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn certified_bound_never_exceeds_the_optimum() {
        let problem = psd_problem();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let z: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let bound = problem.certified_bound(&z);
            assert!(bound.is_finite() && bound <= -1.0 + 1e-12, "{z:?} {bound}");
        }
    }

    #[test]
    fn certified_bound_rejects_bad_input() {
        let problem = psd_problem();
        assert!(problem.certified_bound(&[]).is_nan());
        assert!(problem.certified_bound(&[0.5, f64::NAN, 0.5]).is_nan());
    }
}
