//! Dense matrix forms of Pauli operators (for the oracle and small local blocks).
//!
//! Basis states are indexed so that site 1 is the most significant bit, and
//! `|0⟩` is the `+1` eigenstate of `Z`.

use faer::{c64, Mat};

use crate::pauli::{Letter, PauliPolynomial, PauliString};

/// Largest site count for which dense operators are materialized.
pub const MAX_DENSE_SITES: usize = 14;

/// `(flip, sign, ys)`: column `j` maps to row `j ^ flip` with value
/// `i^ys * (-1)^popcount(j & sign)`.
pub(crate) fn string_masks(s: &PauliString) -> (usize, usize, u32) {
    let n = s.num_sites();
    let (mut flip, mut sign, mut ys) = (0usize, 0usize, 0u32);
    for site in s.support() {
        let bit = 1usize << (n - 1 - site);
        match s.letter(site) {
            Letter::X => flip |= bit,
            Letter::Y => {
                flip |= bit;
                sign |= bit;
                ys += 1;
            }
            Letter::Z => sign |= bit,
            Letter::I => {}
        }
    }
    (flip, sign, ys)
}

fn i_power(k: u32) -> c64 {
    match k % 4 {
        0 => c64::new(1.0, 0.0),
        1 => c64::new(0.0, 1.0),
        2 => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, -1.0),
    }
}

/// Nonzero entries `(row, col, value)` of a Pauli string's matrix.
pub fn string_entries(s: &PauliString) -> impl Iterator<Item = (usize, usize, c64)> {
    let dim = 1usize << s.num_sites();
    let (flip, sign, ys) = string_masks(s);
    let base = i_power(ys);
    (0..dim).map(move |j| {
        let v = if (j & sign).count_ones() % 2 == 1 { -base } else { base };
        (j ^ flip, j, v)
    })
}

pub fn string_matrix(s: &PauliString) -> Mat<c64> {
    let dim = 1usize << s.num_sites();
    let mut m = Mat::<c64>::zeros(dim, dim);
    for (i, j, v) in string_entries(s) {
        m[(i, j)] = v;
    }
    m
}

pub fn polynomial_matrix(p: &PauliPolynomial) -> Mat<c64> {
    assert!(p.num_sites() <= MAX_DENSE_SITES, "too many sites for a dense matrix");
    let dim = 1usize << p.num_sites();
    let mut m = Mat::<c64>::zeros(dim, dim);
    for (s, c) in p.terms() {
        for (i, j, v) in string_entries(s) {
            m[(i, j)] += v * c;
        }
    }
    m
}

/// `tr(P ρ)` for a dense `ρ`.
pub fn string_expectation(s: &PauliString, rho: &Mat<c64>) -> c64 {
    // tr(Pρ) = Σ_j Σ_i P[j,i] ρ[i,j]; P[j,i] nonzero only at j = i ^ flip.
    let mut acc = c64::new(0.0, 0.0);
    for (row, col, v) in string_entries(s) {
        acc += v * rho[(col, row)];
    }
    acc
}
