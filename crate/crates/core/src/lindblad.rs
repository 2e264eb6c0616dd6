//! Lindblad models and the adjoint (Heisenberg-picture) generator.

use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{PauliError, PauliPolynomial, PauliString, ZERO_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("hamiltonian is not Hermitian (term {0} has a complex coefficient)")]
    NonHermitianHamiltonian(String),
    #[error("dissipator {index} has negative or non-finite rate {rate}")]
    BadRate { index: usize, rate: f64 },
    #[error("{what} acts on {got} sites, model has {expected}")]
    SiteMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Lattice layout used to pick contiguous site windows for reduced-density blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geometry {
    /// Sites `1..n` on an open line.
    Line,
    /// Sites `1..n` on a ring (site `n` neighbours site 1).
    Ring,
    /// Two-leg ladder; site `2r` and `2r+1` (0-based) form rung `r`.
    Ladder { rungs: usize },
    /// No spatial structure.
    Unstructured,
}

/// One dissipation channel `rate * D[jump]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub jump: PauliPolynomial,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    n: usize,
    hamiltonian: PauliPolynomial,
    dissipators: Vec<Dissipator>,
    geometry: Geometry,
    // Cached L_i^† and L_i^† L_i per dissipator.
    adjoints: Vec<PauliPolynomial>,
    decay: Vec<PauliPolynomial>,
}

impl LindbladModel {
    pub fn new(hamiltonian: PauliPolynomial, dissipators: Vec<Dissipator>) -> Result<Self, ModelError> {
        let n = hamiltonian.num_sites();
        if n == 0 {
            return Err(PauliError::EmptySystem.into());
        }
        for (s, c) in hamiltonian.terms() {
            if c.im.abs() >= ZERO_THRESHOLD {
                return Err(ModelError::NonHermitianHamiltonian(s.to_string()));
            }
        }
        let hamiltonian = hamiltonian.simplified();
        for (index, d) in dissipators.iter().enumerate() {
            if !(d.rate >= 0.0 && d.rate.is_finite()) {
                return Err(ModelError::BadRate { index, rate: d.rate });
            }
            if d.jump.num_sites() != n {
                return Err(ModelError::SiteMismatch {
                    what: "jump operator",
                    expected: n,
                    got: d.jump.num_sites(),
                });
            }
        }
        let dissipators: Vec<Dissipator> = dissipators
            .into_iter()
            .filter(|d| d.rate > 0.0 && !d.jump.is_empty())
            .collect();
        let adjoints: Vec<_> = dissipators.iter().map(|d| d.jump.adjoint()).collect();
        let decay = dissipators.iter().zip(&adjoints).map(|(d, a)| a * &d.jump).collect();
        Ok(LindbladModel {
            n,
            hamiltonian,
            dissipators,
            geometry: Geometry::Unstructured,
            adjoints,
            decay,
        })
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &PauliPolynomial {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// `L†(G) = i[H,G] + Σ γ (L† G L − ½{L†L, G})`, simplified.
    pub fn adjoint_apply(&self, g: &PauliPolynomial) -> Result<PauliPolynomial, ModelError> {
        if g.num_sites() != self.n {
            return Err(ModelError::SiteMismatch {
                what: "operator",
                expected: self.n,
                got: g.num_sites(),
            });
        }
        let i = Complex64::new(0.0, 1.0);
        let mut out = PauliPolynomial::zero(self.n);
        self.hamiltonian.accumulate_product(g, i, &mut out);
        g.accumulate_product(&self.hamiltonian, -i, &mut out);
        for ((d, adj), decay) in self.dissipators.iter().zip(&self.adjoints).zip(&self.decay) {
            let rate = Complex64::new(d.rate, 0.0);
            let half = Complex64::new(-0.5 * d.rate, 0.0);
            let left = adj * g;
            left.accumulate_product(&d.jump, rate, &mut out);
            decay.accumulate_product(g, half, &mut out);
            g.accumulate_product(decay, half, &mut out);
        }
        Ok(out.simplified())
    }

    /// Adjoint generator applied to a single string, with real coefficients.
    ///
    /// The map preserves Hermiticity, so for a Pauli string the output has
    /// real coefficients up to rounding; imaginary residue is discarded.
    pub fn adjoint_apply_string(&self, p: &PauliString) -> Result<Vec<(PauliString, f64)>, ModelError> {
        let out = self.adjoint_apply(&PauliPolynomial::from_string(p.clone()))?;
        Ok(out
            .terms()
            .filter(|(_, c)| c.re.abs() >= ZERO_THRESHOLD)
            .map(|(s, c)| (s.clone(), c.re))
            .collect())
    }

    /// The model with sites relabelled by `perm` (site `i` moves to `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> LindbladModel {
        let map = |p: &PauliPolynomial| {
            PauliPolynomial::from_terms(self.n, p.terms().map(|(s, c)| (s.permuted(perm), *c)))
                .expect("permutation preserves site count")
        };
        LindbladModel::new(
            map(&self.hamiltonian),
            self.dissipators
                .iter()
                .map(|d| Dissipator {
                    jump: map(&d.jump),
                    rate: d.rate,
                })
                .collect(),
        )
        .expect("permuted model stays valid")
        .with_geometry(self.geometry.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;

    fn s(text: &str, n: usize) -> PauliString {
        PauliString::parse(text, n).unwrap()
    }

    #[test]
    fn identity_maps_to_zero() {
        let h = PauliPolynomial::parse("0.3*Z1 Z2 + 0.7*X1", 2).unwrap();
        let model = LindbladModel::new(
            h,
            vec![Dissipator {
                jump: PauliPolynomial::sigma_minus(2, 0),
                rate: 0.4,
            }],
        )
        .unwrap();
        assert!(model.adjoint_apply(&PauliPolynomial::identity(2)).unwrap().is_empty());
    }

    #[test]
    fn closed_precession() {
        let h = PauliPolynomial::single(1, 0, Letter::Z, Complex64::new(1.0, 0.0));
        let model = LindbladModel::new(h, vec![]).unwrap();
        let out = model.adjoint_apply(&PauliPolynomial::from_string(s("X1", 1))).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.coefficient(&s("Y1", 1)), Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn decay_of_z() {
        // D†[σ−](Z) = −(I + Z) for σ− = (X − iY)/2.
        let model = LindbladModel::new(
            PauliPolynomial::zero(1),
            vec![Dissipator {
                jump: PauliPolynomial::sigma_minus(1, 0),
                rate: 1.0,
            }],
        )
        .unwrap();
        let out = model.adjoint_apply_string(&s("Z1", 1)).unwrap();
        assert_eq!(out, vec![(s("", 1), -1.0), (s("Z1", 1), -1.0)]);
    }

    #[test]
    fn invariants_enforced() {
        let h = PauliPolynomial::single(1, 0, Letter::Z, Complex64::new(0.0, 1.0));
        assert!(matches!(
            LindbladModel::new(h, vec![]),
            Err(ModelError::NonHermitianHamiltonian(_))
        ));
        let bad_rate = LindbladModel::new(
            PauliPolynomial::zero(1),
            vec![Dissipator {
                jump: PauliPolynomial::sigma_minus(1, 0),
                rate: -1.0,
            }],
        );
        assert!(matches!(bad_rate, Err(ModelError::BadRate { .. })));
        let wrong_n = LindbladModel::new(
            PauliPolynomial::zero(1),
            vec![Dissipator {
                jump: PauliPolynomial::sigma_minus(2, 0),
                rate: 1.0,
            }],
        );
        assert!(matches!(wrong_n, Err(ModelError::SiteMismatch { .. })));
        let model = LindbladModel::new(PauliPolynomial::zero(1), vec![]).unwrap();
        assert!(model.adjoint_apply(&PauliPolynomial::identity(2)).is_err());
    }
}
