use std::collections::{HashMap, HashSet, VecDeque};

use super::{ConstraintError, LinearConstraint};
use crate::lindblad::LindbladModel;
use crate::pauli::{Letter, PauliPolynomial, PauliString};

/// Site relabelling: site `i` (0-based) moves to `image[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, ConstraintError> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(ConstraintError::BadPermutation(image));
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    /// `i -> i + shift (mod n)`.
    pub fn translation(n: usize, shift: usize) -> Self {
        Permutation {
            image: (0..n).map(|i| (i + shift) % n).collect(),
        }
    }

    /// `i -> n - 1 - i`.
    pub fn reflection(n: usize) -> Self {
        Permutation {
            image: (0..n).rev().collect(),
        }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, s: &PauliString) -> PauliString {
        s.permuted(&self.image)
    }
}

/// Strings used to test a declared symmetry: all single-site strings, all
/// two-site strings on neighbouring indices, and the first strings of the
/// caller's universe.
fn probe_strings(n: usize, universe: &[PauliString]) -> Vec<PauliString> {
    const LETTERS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];
    let mut out = Vec::new();
    for site in 0..n {
        for l in LETTERS {
            out.push(PauliString::single(n, site, l));
        }
    }
    for site in 0..n {
        let next = (site + 1) % n;
        if next == site {
            continue;
        }
        for a in LETTERS {
            for b in LETTERS {
                let mut s = PauliString::single(n, site, a);
                s.set(next, b);
                out.push(s);
            }
        }
    }
    out.extend(universe.iter().filter(|s| !s.is_identity()).take(64).cloned());
    out
}

fn permute_poly(p: &PauliPolynomial, g: &Permutation) -> PauliPolynomial {
    PauliPolynomial::from_terms(p.num_sites(), p.terms().map(|(s, c)| (g.apply(s), *c)))
        .expect("permutation preserves site count")
}

fn validate(model: &LindbladModel, g: &Permutation, universe: &[PauliString]) -> Result<(), ConstraintError> {
    let n = model.num_sites();
    if g.image.len() != n {
        return Err(ConstraintError::BadPermutation(g.image.clone()));
    }
    for p in probe_strings(n, universe) {
        let direct = model.adjoint_apply(&PauliPolynomial::from_string(g.apply(&p)))?;
        let moved = permute_poly(&model.adjoint_apply(&PauliPolynomial::from_string(p.clone()))?, g);
        let diff = &direct - &moved;
        if diff.terms().any(|(_, c)| c.norm() > 1e-10) {
            return Err(ConstraintError::NotSymmetric {
                perm: g.image.iter().map(|i| i + 1).collect(),
                counterexample: p.to_string(),
            });
        }
    }
    Ok(())
}

/// Orbit equalities `⟨P⟩ − ⟨g(P)⟩ = 0` over `universe`.
///
/// Each generator is first checked against the model: the adjoint generator
/// must commute with the relabelling on a probe set of strings. Orbits are
/// taken under the group generated by `generators`; within each orbit every
/// member present in `universe` is tied to the orbit's canonical-first
/// member, so each orbit of size `k` yields `k - 1` constraints.
pub fn symmetry_constraints(
    model: &LindbladModel,
    generators: &[Permutation],
    universe: &[PauliString],
) -> Result<Vec<LinearConstraint>, ConstraintError> {
    for g in generators {
        validate(model, g, universe)?;
    }
    if generators.is_empty() {
        return Ok(Vec::new());
    }
    let present: HashMap<&PauliString, usize> = universe.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let mut done = vec![false; universe.len()];
    let mut out = Vec::new();
    for (k, start) in universe.iter().enumerate() {
        if done[k] || start.is_identity() {
            continue;
        }
        let mut seen: HashSet<PauliString> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        let mut members = Vec::new();
        while let Some(p) = queue.pop_front() {
            if let Some(&idx) = present.get(&p) {
                done[idx] = true;
                members.push(p.clone());
            }
            for g in generators {
                let q = g.apply(&p);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        members.sort();
        if let Some((rep, rest)) = members.split_first() {
            for m in rest {
                out.push(LinearConstraint::new(vec![(rep.clone(), 1.0), (m.clone(), -1.0)]));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::Dissipator;
    use num_complex::Complex64;

    fn ring(n: usize) -> LindbladModel {
        let mut h = PauliPolynomial::zero(n);
        for i in 0..n {
            let mut zz = PauliString::single(n, i, Letter::Z);
            zz.set((i + 1) % n, Letter::Z);
            h.add_term(zz, Complex64::new(0.5, 0.0));
            h.add_term(PauliString::single(n, i, Letter::X), Complex64::new(0.5, 0.0));
        }
        let diss = (0..n)
            .map(|i| Dissipator {
                jump: PauliPolynomial::sigma_minus(n, i),
                rate: 1.0,
            })
            .collect();
        LindbladModel::new(h, diss).unwrap()
    }

    #[test]
    fn translation_orbit_of_z() {
        let n = 5;
        let model = ring(n);
        let universe: Vec<_> = (0..n).map(|i| PauliString::single(n, i, Letter::Z)).collect();
        let cons = symmetry_constraints(&model, &[Permutation::translation(n, 1)], &universe).unwrap();
        assert_eq!(cons.len(), n - 1);
        // Canonical order puts Z5 (`IIIIZ`) first.
        for c in &cons {
            assert!(c.terms().iter().any(|(s, _)| *s == universe[n - 1]));
        }
    }

    #[test]
    fn fixed_string_emits_nothing() {
        let n = 4;
        let model = ring(n);
        let all_z = PauliString::from_letters(&[Letter::Z; 4]);
        let cons = symmetry_constraints(&model, &[Permutation::translation(n, 1)], &[all_z]).unwrap();
        assert!(cons.is_empty());
    }

    #[test]
    fn broken_symmetry_rejected() {
        let n = 3;
        let h = PauliPolynomial::single(n, 0, Letter::X, Complex64::new(1.0, 0.0));
        let model = LindbladModel::new(h, vec![]).unwrap();
        let err = symmetry_constraints(&model, &[Permutation::translation(n, 1)], &[]).unwrap_err();
        assert!(matches!(err, ConstraintError::NotSymmetric { .. }));
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
    }
}
