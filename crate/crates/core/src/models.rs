//! Built-in benchmark models and their observables.
//!
//! Spin convention: `|0⟩` is the `+1` eigenstate of `Z`,
//! `σ+ = (X + iY)/2 = |0⟩⟨1|` and `σ− = (X − iY)/2 = |1⟩⟨0|`. With
//! `H_S = ε σ+σ− = ε (I + Z)/2` the excited level is `|0⟩`, so emission
//! (`σ−`) and pure decay drive `⟨Z⟩` towards `−1`.

use num_complex::Complex64;

use crate::constraints::Permutation;
use crate::lindblad::{Dissipator, Geometry, LindbladModel, ModelError};
use crate::pauli::{Letter, PauliPolynomial, PauliString};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Bose factor `1 / (e^{ε/T} − 1)`.
pub fn bose_factor(gap: f64, temperature: f64) -> f64 {
    1.0 / (gap / temperature).exp_m1()
}

/// Thermal contact of one site: absorption rate `γ n_B`, emission rate `γ (1 + n_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bath {
    pub coupling: f64,
    pub temperature: f64,
}

impl Bath {
    fn check(&self, what: &str) -> Result<(), ModelError> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "{what} temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "{what} coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    /// `(γ+, γ−)` for a site with energy gap `gap`.
    pub fn rates(&self, gap: f64) -> (f64, f64) {
        let nb = bose_factor(gap, self.temperature);
        (self.coupling * nb, self.coupling * (1.0 + nb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitParams {
    pub eps_h: f64,
    pub eps_c: f64,
    pub g: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub t_h: f64,
    pub t_c: f64,
}

impl Default for TwoQubitParams {
    fn default() -> Self {
        TwoQubitParams {
            eps_h: 1.0,
            eps_c: 1.0,
            g: 0.1,
            gamma_h: 0.1,
            gamma_c: 0.1,
            t_h: 2.0,
            t_c: 1.0,
        }
    }
}

impl TwoQubitParams {
    fn hot(&self) -> Bath {
        Bath {
            coupling: self.gamma_h,
            temperature: self.t_h,
        }
    }

    fn cold(&self) -> Bath {
        Bath {
            coupling: self.gamma_c,
            temperature: self.t_c,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        self.hot().check("hot bath")?;
        self.cold().check("cold bath")?;
        for (name, v) in [("eps_h", self.eps_h), ("eps_c", self.eps_c), ("g", self.g)] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// `ε σ+σ−` on `site`.
fn occupation(n: usize, site: usize, gap: f64) -> PauliPolynomial {
    let mut p = PauliPolynomial::constant(n, real(gap / 2.0));
    p.add_term(PauliString::single(n, site, Letter::Z), real(gap / 2.0));
    p
}

/// `g (σ+_i σ−_j + σ−_i σ+_j) = (g/2)(X_i X_j + Y_i Y_j)`.
fn hopping(n: usize, i: usize, j: usize, g: f64) -> PauliPolynomial {
    let mut p = PauliPolynomial::zero(n);
    for l in [Letter::X, Letter::Y] {
        let mut s = PauliString::single(n, i, l);
        s.set(j, l);
        p.add_term(s, real(g / 2.0));
    }
    p
}

fn thermal_dissipators(n: usize, site: usize, gap: f64, bath: &Bath) -> [Dissipator; 2] {
    let (up, down) = bath.rates(gap);
    [
        Dissipator {
            jump: PauliPolynomial::sigma_plus(n, site),
            rate: up,
        },
        Dissipator {
            jump: PauliPolynomial::sigma_minus(n, site),
            rate: down,
        },
    ]
}

fn sum(n: usize, parts: impl IntoIterator<Item = PauliPolynomial>) -> PauliPolynomial {
    parts.into_iter().fold(PauliPolynomial::zero(n), |acc, p| &acc + &p)
}

/// Heat flowing in from `bath` at `site`: `tr[H_S D_bath(ρ)]` expanded in moments,
/// `(ε/2)(γ+ − γ−) − (ε/2)(γ+ + γ−) ⟨Z_site⟩`.
fn bath_heat(n: usize, site: usize, gap: f64, bath: &Bath) -> PauliPolynomial {
    let (up, down) = bath.rates(gap);
    let mut p = PauliPolynomial::constant(n, real(gap / 2.0 * (up - down)));
    p.add_term(PauliString::single(n, site, Letter::Z), real(-gap / 2.0 * (up + down)));
    p.simplified()
}

/// Hot qubit (site 1) and cold qubit (site 2) with local thermal baths.
pub fn two_qubit_bath(params: &TwoQubitParams) -> Result<LindbladModel, ModelError> {
    chain_between_baths(2, params)
}

/// `J = Q_h − Q_c` for the two-qubit machine.
pub fn heat_current_observable(params: &TwoQubitParams) -> PauliPolynomial {
    chain_heat_current(2, params)
}

/// `n` sites on a line with hopping `g`; site 1 touches the hot bath and
/// site `n` the cold bath. Interior sites carry gap `eps_c`.
pub fn chain_between_baths(n: usize, params: &TwoQubitParams) -> Result<LindbladModel, ModelError> {
    if n < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "chain needs at least 2 sites, got {n}"
        )));
    }
    params.validate()?;
    let gaps = chain_gaps(n, params);
    let h = sum(
        n,
        gaps.iter()
            .enumerate()
            .map(|(i, &e)| occupation(n, i, e))
            .chain((0..n - 1).map(|i| hopping(n, i, i + 1, params.g))),
    );
    let mut diss = Vec::new();
    diss.extend(thermal_dissipators(n, 0, params.eps_h, &params.hot()));
    diss.extend(thermal_dissipators(n, n - 1, params.eps_c, &params.cold()));
    Ok(LindbladModel::new(h, diss)?.with_geometry(Geometry::Line))
}

fn chain_gaps(n: usize, params: &TwoQubitParams) -> Vec<f64> {
    let mut gaps = vec![params.eps_c; n];
    gaps[0] = params.eps_h;
    gaps
}

/// Heat current `Q_h − Q_c` through a chain between baths.
pub fn chain_heat_current(n: usize, params: &TwoQubitParams) -> PauliPolynomial {
    let hot = bath_heat(n, 0, params.eps_h, &params.hot());
    let cold = bath_heat(n, n - 1, params.eps_c, &params.cold());
    &hot - &cold
}

/// System Hamiltonian `H_S = Σ ε_i σ+σ−` of a chain between baths.
pub fn chain_system_hamiltonian(n: usize, params: &TwoQubitParams) -> PauliPolynomial {
    sum(
        n,
        chain_gaps(n, params)
            .iter()
            .enumerate()
            .map(|(i, &e)| occupation(n, i, e)),
    )
}

/// Periodic transverse-field Ising ring with spin decay on every site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub j: f64,
    pub eta: f64,
    pub gamma: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            n: 12,
            j: 0.5,
            eta: 0.5,
            gamma: 1.0,
        }
    }
}

/// Nearest-neighbour pairs `(i, i+1 mod n)` of a ring.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

/// `H = J Σ Z_i Z_{i+1} + η Σ X_i` on a ring, jump `Γ_k = (√γ/2)(X_k − iY_k)`.
pub fn periodic_tfi_decay(params: &ChainParams) -> Result<LindbladModel, ModelError> {
    let n = params.n;
    if n < 3 {
        return Err(ModelError::InvalidParameter(format!(
            "ring needs at least 3 sites, got {n}"
        )));
    }
    if !(params.gamma >= 0.0 && params.gamma.is_finite()) {
        return Err(ModelError::InvalidParameter(format!(
            "gamma must be non-negative, got {}",
            params.gamma
        )));
    }
    let mut h = PauliPolynomial::zero(n);
    for (a, b) in ring_edges(n) {
        let mut zz = PauliString::single(n, a, Letter::Z);
        zz.set(b, Letter::Z);
        h.add_term(zz, real(params.j));
    }
    for i in 0..n {
        h.add_term(PauliString::single(n, i, Letter::X), real(params.eta));
    }
    let amp = params.gamma.sqrt() / 2.0;
    let diss = (0..n)
        .map(|k| {
            let mut jump = PauliPolynomial::single(n, k, Letter::X, real(amp));
            jump.add_term(PauliString::single(n, k, Letter::Y), Complex64::new(0.0, -amp));
            Dissipator { jump, rate: 1.0 }
        })
        .collect();
    Ok(LindbladModel::new(h.simplified(), diss)?.with_geometry(Geometry::Ring))
}

/// `(1/n) Σ Z_i`.
pub fn magnetization(n: usize) -> PauliPolynomial {
    let mut p = PauliPolynomial::zero(n);
    for i in 0..n {
        p.add_term(PauliString::single(n, i, Letter::Z), real(1.0 / n as f64));
    }
    p
}

/// Translation by one site and the mirror `i -> n-1-i` of a ring.
pub fn ring_symmetries(n: usize) -> Vec<Permutation> {
    vec![Permutation::translation(n, 1), Permutation::reflection(n)]
}

/// Two coupled rails of `rungs` sites; rung `r` holds sites `2r` and `2r+1`.
/// The hot bath touches both sites of rung 0, the cold bath both sites of
/// the last rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderParams {
    pub rungs: usize,
    pub eps: f64,
    pub g: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub t_h: f64,
    pub t_c: f64,
}

impl Default for LadderParams {
    fn default() -> Self {
        LadderParams {
            rungs: 5,
            eps: 1.0,
            g: 0.1,
            gamma_h: 0.1,
            gamma_c: 0.1,
            t_h: 2.0,
            t_c: 1.0,
        }
    }
}

impl LadderParams {
    fn hot(&self) -> Bath {
        Bath {
            coupling: self.gamma_h,
            temperature: self.t_h,
        }
    }

    fn cold(&self) -> Bath {
        Bath {
            coupling: self.gamma_c,
            temperature: self.t_c,
        }
    }

    pub fn num_sites(&self) -> usize {
        2 * self.rungs
    }

    pub fn hot_sites(&self) -> [usize; 2] {
        [0, 1]
    }

    pub fn cold_sites(&self) -> [usize; 2] {
        let n = self.num_sites();
        [n - 2, n - 1]
    }
}

/// Exchange of the two rails, `2r <-> 2r+1`.
pub fn ladder_symmetries(rungs: usize) -> Vec<Permutation> {
    let image = (0..2 * rungs).map(|i| i ^ 1).collect();
    vec![Permutation::new(image).expect("rail swap is a permutation")]
}

/// Rail and rung edges of a two-leg ladder.
pub fn ladder_edges(rungs: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..rungs {
        edges.push((2 * r, 2 * r + 1));
        if r + 1 < rungs {
            edges.push((2 * r, 2 * r + 2));
            edges.push((2 * r + 1, 2 * r + 3));
        }
    }
    edges.sort_unstable();
    edges
}

pub fn ladder_2xl(params: &LadderParams) -> Result<LindbladModel, ModelError> {
    if params.rungs < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "ladder needs at least 2 rungs, got {}",
            params.rungs
        )));
    }
    params.hot().check("hot bath")?;
    params.cold().check("cold bath")?;
    let n = params.num_sites();
    let h = sum(
        n,
        (0..n).map(|i| occupation(n, i, params.eps)).chain(
            ladder_edges(params.rungs)
                .into_iter()
                .map(|(a, b)| hopping(n, a, b, params.g)),
        ),
    );
    let mut diss = Vec::new();
    for site in params.hot_sites() {
        diss.extend(thermal_dissipators(n, site, params.eps, &params.hot()));
    }
    for site in params.cold_sites() {
        diss.extend(thermal_dissipators(n, site, params.eps, &params.cold()));
    }
    Ok(LindbladModel::new(h, diss)?.with_geometry(Geometry::Ladder { rungs: params.rungs }))
}

/// Net heat current from the hot end to the cold end of the ladder.
pub fn ladder_heat_current(params: &LadderParams) -> PauliPolynomial {
    let n = params.num_sites();
    let hot = sum(
        n,
        params.hot_sites().map(|s| bath_heat(n, s, params.eps, &params.hot())),
    );
    let cold = sum(
        n,
        params.cold_sites().map(|s| bath_heat(n, s, params.eps, &params.cold())),
    );
    &hot - &cold
}
