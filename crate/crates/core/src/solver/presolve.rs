//! Exact elimination of one- and two-term equalities before the conic solve.

use std::collections::HashSet;

use crate::relax::{RelaxationProblem, SparseRow};

/// Coefficients below this fraction of a row's largest entry count as zero.
const CANCELLATION: f64 = 1e-13;
/// Largest coefficient ratio allowed when substituting one variable for another.
const MAX_RATIO: f64 = 1e4;

/// `x = scale · x_root + shift`; `root` is `None` for a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub root: Option<usize>,
    pub scale: f64,
    pub shift: f64,
}

/// Variable substitution derived from short equality rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    map: Vec<Affine>,
    /// Original index of each surviving variable, ascending.
    pub kept: Vec<usize>,
    column: Vec<usize>,
    /// Equality rows not absorbed into the substitution.
    pub remaining: Vec<usize>,
}

impl Reduction {
    /// Identity substitution keeping every row.
    pub fn identity(problem: &RelaxationProblem) -> Self {
        let n = problem.num_variables();
        Reduction {
            map: (0..n)
                .map(|k| Affine {
                    root: Some(k),
                    scale: 1.0,
                    shift: 0.0,
                })
                .collect(),
            kept: (0..n).collect(),
            column: (0..n).collect(),
            remaining: (0..problem.equalities.len()).collect(),
        }
    }

    pub fn new(problem: &RelaxationProblem) -> Self {
        let n = problem.num_variables();
        let mut map: Vec<Affine> = (0..n)
            .map(|k| Affine {
                root: Some(k),
                scale: 1.0,
                shift: 0.0,
            })
            .collect();
        let mut open: Vec<usize> = (0..problem.equalities.len()).collect();
        let mut scratch = Vec::new();
        loop {
            let before = open.len();
            open.retain(|&r| {
                let row = &problem.equalities[r];
                let constant = substitute(&mut map, row, &mut scratch);
                let big = row.terms.iter().map(|t| t.1.abs()).fold(constant.abs(), f64::max);
                let tiny = CANCELLATION * big.max(f64::MIN_POSITIVE);
                scratch.retain(|t| t.1.abs() > tiny);
                match scratch.as_slice() {
                    [] => constant.abs() > tiny,
                    &[(k, a)] => {
                        map[k] = Affine {
                            root: None,
                            scale: 0.0,
                            shift: -constant / a,
                        };
                        false
                    }
                    &[(k1, a1), (k2, a2)] if (a1 / a2).abs().max((a2 / a1).abs()) <= MAX_RATIO => {
                        // k1 < k2: the later variable goes.
                        map[k2] = Affine {
                            root: Some(k1),
                            scale: -a1 / a2,
                            shift: -constant / a2,
                        };
                        false
                    }
                    _ => true,
                }
            });
            if open.len() == before {
                break;
            }
        }
        for k in 0..n {
            resolve(&mut map, k);
        }
        let kept: Vec<usize> = (0..n).filter(|&k| map[k].root == Some(k)).collect();
        let mut column = vec![usize::MAX; n];
        for (c, &k) in kept.iter().enumerate() {
            column[k] = c;
        }
        let mut red = Reduction {
            map,
            kept,
            column,
            remaining: open,
        };
        red.drop_repeated_rows(problem);
        red
    }

    /// Removes rows equal, up to scaling and rounding, to an earlier one.
    fn drop_repeated_rows(&mut self, problem: &RelaxationProblem) {
        let mut seen = HashSet::new();
        let rows = std::mem::take(&mut self.remaining);
        for r in rows {
            let (terms, constant) = self.reduce_row(&problem.equalities[r]);
            let Some(&(_, lead)) = terms.first() else {
                self.remaining.push(r);
                continue;
            };
            let q = |v: f64| (v / lead * 1e11).round() as i64;
            let key: Vec<(usize, i64)> = terms
                .iter()
                .map(|&(k, v)| (k, q(v)))
                .chain(std::iter::once((usize::MAX, q(constant))))
                .collect();
            if seen.insert(key) {
                self.remaining.push(r);
            }
        }
    }

    pub fn num_original(&self) -> usize {
        self.map.len()
    }

    /// Substitution of original variable `k` in terms of reduced columns.
    pub fn column_of(&self, k: usize) -> Affine {
        let a = self.map[k];
        Affine {
            root: a.root.map(|r| self.column[r]),
            ..a
        }
    }

    /// Original variables from reduced ones.
    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        (0..self.map.len())
            .map(|k| {
                let a = self.column_of(k);
                a.shift + a.root.map_or(0.0, |c| a.scale * y[c])
            })
            .collect()
    }

    /// Row `r` in reduced columns as merged `(column, value)` terms plus constant.
    pub fn reduce_row(&self, row: &SparseRow) -> (Vec<(usize, f64)>, f64) {
        let mut terms = Vec::with_capacity(row.terms.len());
        let mut constant = row.constant;
        for &(k, v) in &row.terms {
            let a = self.column_of(k);
            constant += v * a.shift;
            if let Some(c) = a.root {
                terms.push((c, v * a.scale));
            }
        }
        (merge(terms), constant)
    }

    /// Box rows `1 ∓ x_k ≥ 0` needed after substitution, as `(column, scale, shift)`.
    pub fn box_rows(&self) -> Vec<Affine> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for k in 0..self.map.len() {
            let mut a = self.column_of(k);
            match a.root {
                None if a.shift.abs() <= 1.0 => continue,
                None => {}
                Some(c) => {
                    if a.scale < 0.0 {
                        a.scale = -a.scale;
                        a.shift = -a.shift;
                    }
                    if !seen.insert((c, a.scale.to_bits(), a.shift.to_bits())) {
                        continue;
                    }
                }
            }
            out.push(a);
        }
        out
    }
}

/// Sorted terms with repeated keys summed and exact zeros dropped.
pub(crate) fn merge<K: Ord + Copy>(mut terms: Vec<(K, f64)>) -> Vec<(K, f64)> {
    terms.sort_by_key(|a| a.0);
    let mut out: Vec<(K, f64)> = Vec::with_capacity(terms.len());
    for (k, v) in terms {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += v,
            _ => out.push((k, v)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

/// Writes `row` over current roots into `out`; returns the constant.
fn substitute(map: &mut [Affine], row: &SparseRow, out: &mut Vec<(usize, f64)>) -> f64 {
    out.clear();
    let mut constant = row.constant;
    for &(k, v) in &row.terms {
        let a = resolve(map, k);
        constant += v * a.shift;
        if let Some(r) = a.root {
            out.push((r, v * a.scale));
        }
    }
    let merged = merge(std::mem::take(out));
    *out = merged;
    constant
}

/// Root form of `k`, compressing the path.
fn resolve(map: &mut [Affine], k: usize) -> Affine {
    let mut path = Vec::new();
    let mut cur = k;
    while let Some(r) = map[cur].root {
        if r == cur {
            break;
        }
        path.push(cur);
        cur = r;
    }
    let mut acc = map[cur];
    if acc.root == Some(cur) {
        acc = Affine {
            root: Some(cur),
            scale: 1.0,
            shift: 0.0,
        };
    }
    for &p in path.iter().rev() {
        let a = map[p];
        let composed = Affine {
            root: acc.root,
            scale: a.scale * acc.scale,
            shift: a.scale * acc.shift + a.shift,
        };
        map[p] = composed;
        acc = composed;
    }
    if path.is_empty() {
        map[k]
    } else {
        acc
    }
}
