use faer::c64;

use super::ConstraintError;
use crate::dense::string_entries;
use crate::lindblad::Geometry;
use crate::pauli::{Letter, PauliString};

/// `constant + Σ_α c_α ⟨P_α⟩` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineForm {
    pub constant: c64,
    /// Sorted canonically, no duplicates, identity excluded.
    pub terms: Vec<(PauliString, c64)>,
}

impl AffineForm {
    pub fn constant(c: c64) -> Self {
        AffineForm {
            constant: c,
            terms: Vec::new(),
        }
    }

    fn from_parts(constant: c64, mut terms: Vec<(PauliString, c64)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PauliString, c64)> = Vec::with_capacity(terms.len());
        for (s, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += c,
                _ => merged.push((s, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() != 0.0);
        AffineForm {
            constant,
            terms: merged,
        }
    }

    pub fn conj(&self) -> AffineForm {
        AffineForm {
            constant: self.constant.conj(),
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    pub fn evaluate<F: Fn(&PauliString) -> f64>(&self, moment: F) -> c64 {
        self.terms.iter().fold(self.constant, |acc, (s, c)| acc + c * moment(s))
    }

    pub fn is_real(&self) -> bool {
        self.constant.im == 0.0 && self.terms.iter().all(|(_, c)| c.im == 0.0)
    }
}

/// Square block of affine forms; rows are stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    dim: usize,
    entries: Vec<AffineForm>,
    pub label: String,
}

impl PsdBlock {
    pub fn from_entries(dim: usize, entries: Vec<AffineForm>, label: impl Into<String>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        PsdBlock {
            dim,
            entries,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &AffineForm {
        &self.entries[i * self.dim + j]
    }

    /// `entry(j, i) == conj(entry(i, j))` for every pair.
    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| *self.entry(j, i) == self.entry(i, j).conj()))
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(AffineForm::is_real)
    }

    /// Strings referenced by any entry, canonical and deduplicated.
    pub fn strings(&self) -> Vec<PauliString> {
        let mut out: Vec<PauliString> = self
            .entries
            .iter()
            .flat_map(|e| e.terms.iter().map(|(s, _)| s.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Numeric matrix at the given moments (row-major).
    pub fn evaluate<F: Fn(&PauliString) -> f64>(&self, moment: F) -> faer::Mat<c64> {
        faer::Mat::from_fn(self.dim, self.dim, |i, j| self.entry(i, j).evaluate(&moment))
    }
}

/// Moment matrix `M_ij = ⟨θ_i θ_j⟩` over a basis of Pauli strings.
pub fn moment_matrix(basis: &[PauliString]) -> Result<PsdBlock, ConstraintError> {
    let Some(first) = basis.first() else {
        return Err(ConstraintError::EmptyBasis);
    };
    let n = first.num_sites();
    let d = basis.len();
    let mut entries = Vec::with_capacity(d * d);
    for a in basis {
        for b in basis {
            if b.num_sites() != n {
                return Err(crate::pauli::PauliError::SiteMismatch(n, b.num_sites()).into());
            }
            let (phase, s) = a.mul_unchecked(b);
            let c = phase.to_complex();
            entries.push(if s.is_identity() {
                AffineForm::constant(c)
            } else {
                AffineForm {
                    constant: c64::new(0.0, 0.0),
                    terms: vec![(s, c)],
                }
            });
        }
    }
    Ok(PsdBlock::from_entries(d, entries, format!("moment matrix {d}x{d}")))
}

/// Identity plus every string of order `1..=k`, canonically ordered.
pub fn level_basis(n: usize, k: usize) -> Vec<PauliString> {
    let mut out = vec![PauliString::identity(n)];
    for order in 1..=k.min(n) {
        for sites in combinations(n, order) {
            for_each_assignment(n, &sites, |s| out.push(s));
        }
    }
    out.sort();
    out
}

fn for_each_assignment<F: FnMut(PauliString)>(n: usize, sites: &[usize], mut f: F) {
    const LETTERS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];
    let count = 3usize.pow(sites.len() as u32);
    for mut code in 0..count {
        let mut s = PauliString::identity(n);
        for &site in sites {
            s.set(site, LETTERS[code % 3]);
            code /= 3;
        }
        f(s);
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let mut i = k;
        while i > 0 && current[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
    out
}

/// Every `m`-site subset of `n` sites.
pub fn all_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    combinations(n, m)
}

/// Contiguous `m`-site windows for the given geometry (0-based sites).
///
/// Rings wrap around; ladders use blocks of `m/2` consecutive rungs when
/// `m` is even and fall back to line windows otherwise.
pub fn contiguous_windows(geometry: &Geometry, n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return Vec::new();
    }
    if m >= n {
        return vec![(0..n).collect()];
    }
    let line = || (0..=n - m).map(|i| (i..i + m).collect()).collect();
    match geometry {
        Geometry::Ring => (0..n)
            .map(|i| {
                let mut w: Vec<usize> = (0..m).map(|k| (i + k) % n).collect();
                w.sort_unstable();
                w
            })
            .collect(),
        Geometry::Ladder { rungs } if m.is_multiple_of(2) && 2 * rungs == n => {
            let span = m / 2;
            (0..=rungs - span).map(|r| (2 * r..2 * (r + span)).collect()).collect()
        }
        _ => line(),
    }
}

/// Reduced density matrices `ρ_S = 2^-m Σ_P ⟨P⟩ P` for each site subset `S`.
pub fn reduced_density_blocks(n: usize, subsets: &[Vec<usize>]) -> Result<Vec<PsdBlock>, ConstraintError> {
    const MAX_SUBSET: usize = 6;
    let mut out = Vec::with_capacity(subsets.len());
    for subset in subsets {
        let bad = |reason: &str| ConstraintError::BadSubset {
            subset: subset.iter().map(|s| s + 1).collect(),
            reason: reason.to_string(),
        };
        if subset.is_empty() {
            return Err(bad("empty subset"));
        }
        if subset.len() > MAX_SUBSET {
            return Err(bad("subset too large for a dense block"));
        }
        if subset.iter().any(|&s| s >= n) {
            return Err(bad("site out of range"));
        }
        let mut sorted = subset.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != subset.len() {
            return Err(bad("duplicate site"));
        }
        out.push(reduced_block(n, &sorted));
    }
    Ok(out)
}

fn reduced_block(n: usize, sites: &[usize]) -> PsdBlock {
    let m = sites.len();
    let dim = 1usize << m;
    let scale = 1.0 / dim as f64;
    let mut constants = vec![c64::new(0.0, 0.0); dim * dim];
    let mut terms: Vec<Vec<(PauliString, c64)>> = vec![Vec::new(); dim * dim];
    let local_sites: Vec<usize> = (0..m).collect();
    let mut locals = vec![PauliString::identity(m)];
    for order in 1..=m {
        for chosen in combinations(m, order) {
            for_each_assignment(m, &chosen, |s| locals.push(s));
        }
    }
    debug_assert_eq!(locals.len(), 1 << (2 * m));
    for local in &locals {
        let mut global = PauliString::identity(n);
        for &k in &local_sites {
            global.set(sites[k], local.letter(k));
        }
        for (i, j, v) in string_entries(local) {
            let value = v * scale;
            if global.is_identity() {
                constants[i * dim + j] += value;
            } else {
                terms[i * dim + j].push((global.clone(), value));
            }
        }
    }
    let entries = constants
        .into_iter()
        .zip(terms)
        .map(|(c, t)| AffineForm::from_parts(c, t))
        .collect();
    let label = format!(
        "reduced density on sites {}",
        sites.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
    );
    PsdBlock::from_entries(dim, entries, label)
}
