//! Pauli strings and complex-weighted Pauli polynomials.
//!
//! A [`PauliString`] stores one letter per site in two packed bit planes
//! (`x` and `z`), so `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`. Strings never
//! carry a phase; products return the phase separately and polynomials fold
//! it into their complex coefficients.
//!
//! Sites are numbered from 1 in text and from 0 in the API.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

/// Coefficients with magnitude below this are dropped by [`PauliPolynomial::simplify`].
pub const ZERO_THRESHOLD: f64 = 1e-12;

type Words = SmallVec<[u64; 4]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("site count mismatch: {0} vs {1}")]
    SiteMismatch(usize, usize),
    #[error("site index {index} out of range 1..={n}")]
    SiteOutOfRange { index: usize, n: usize },
    #[error("site {0} appears more than once")]
    DuplicateSite(usize),
    #[error("unknown Pauli token `{0}`")]
    UnknownToken(String),
    #[error("malformed polynomial: {0}")]
    Malformed(String),
    #[error("site count must be positive")]
    EmptySystem,
}

/// Single-site Pauli letter. The derived order `I < X < Y < Z` is the
/// per-site order used by canonical string ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Element of the cyclic group `{1, i, -1, -i}`, stored as the exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-site Pauli letters on `n` sites.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Words,
    z: Words,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        PauliString {
            n,
            x: SmallVec::from_elem(0, w),
            z: SmallVec::from_elem(0, w),
        }
    }

    /// String with `letter` on site `site` (0-based) and identity elsewhere.
    pub fn single(n: usize, site: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(site, letter);
        p
    }

    /// Build from `(site, letter)` pairs (0-based sites).
    pub fn from_sites(n: usize, sites: &[(usize, Letter)]) -> Result<Self, PauliError> {
        let mut p = Self::identity(n);
        for &(site, letter) in sites {
            if site >= n {
                return Err(PauliError::SiteOutOfRange { index: site + 1, n });
            }
            if p.letter(site) != Letter::I {
                return Err(PauliError::DuplicateSite(site + 1));
            }
            p.set(site, letter);
        }
        Ok(p)
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (site, &l) in letters.iter().enumerate() {
            p.set(site, l);
        }
        p
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn letter(&self, site: usize) -> Letter {
        let (w, b) = (site / 64, site % 64);
        Letter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, site: usize, letter: Letter) {
        assert!(site < self.n, "site {site} out of range for {} sites", self.n);
        let (w, b) = (site / 64, site % 64);
        let (x, z) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n).map(|s| self.letter(s))
    }

    /// Number of non-identity letters.
    pub fn order(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Sites (0-based, ascending) carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        let mut sites = Vec::with_capacity(self.order());
        for (w, (x, z)) in self.x.iter().zip(&self.z).enumerate() {
            let mut bits = x | z;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                sites.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        sites
    }

    /// Bit mask of sites carrying X or Y, as used by dense matrix builders
    /// (only meaningful for `n <= 64`).
    pub fn x_mask(&self) -> u64 {
        self.x[0]
    }

    pub fn z_mask(&self) -> u64 {
        self.z[0]
    }

    fn check_sites(&self, other: &PauliString) -> Result<(), PauliError> {
        if self.n != other.n {
            Err(PauliError::SiteMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    /// Product `self * other` as `(phase, string)`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString), PauliError> {
        self.check_sites(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut exponent = 0u32;
        let mut x = Words::with_capacity(self.x.len());
        let mut z = Words::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (ax, az, bx, bz) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            // XY = iZ, YZ = iX, ZX = iY and the reversed pairs give -i.
            let cyclic = (ax & !az & bx & bz) | (ax & az & !bx & bz) | (!ax & az & bx & !bz);
            let anti = (ax & az & bx & !bz) | (!ax & az & bx & bz) | (ax & !az & !bx & bz);
            exponent += cyclic.count_ones() + 3 * anti.count_ones();
            x.push(ax ^ bx);
            z.push(az ^ bz);
        }
        (Phase::from_exponent(exponent), PauliString { n: self.n, x, z })
    }

    /// True when the strings commute (they anticommute on an even number of sites).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity += ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        parity.is_multiple_of(2)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &PauliString) -> Result<PauliPolynomial, PauliError> {
        self.check_sites(other)?;
        let mut out = PauliPolynomial::zero(self.n);
        if !self.commutes_with(other) {
            let (phase, s) = self.mul_unchecked(other);
            out.add_term(s, phase.to_complex() * 2.0);
        }
        Ok(out)
    }

    /// Relabel sites: the letter on site `i` moves to site `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> PauliString {
        let mut out = PauliString::identity(self.n);
        for site in self.support() {
            out.set(perm[site], self.letter(site));
        }
        out
    }

    /// Parse the textual form, e.g. `"Z1 X2"`; empty text or `I` is the identity.
    pub fn parse(text: &str, n: usize) -> Result<Self, PauliError> {
        if n == 0 {
            return Err(PauliError::EmptySystem);
        }
        let mut p = PauliString::identity(n);
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens == ["I"] {
            return Ok(p);
        }
        for token in tokens {
            let mut chars = token.chars();
            let letter = match chars.next() {
                Some('X') => Letter::X,
                Some('Y') => Letter::Y,
                Some('Z') => Letter::Z,
                _ => return Err(PauliError::UnknownToken(token.to_string())),
            };
            let index: usize = chars
                .as_str()
                .parse()
                .map_err(|_| PauliError::UnknownToken(token.to_string()))?;
            if index == 0 || index > n {
                return Err(PauliError::SiteOutOfRange { index, n });
            }
            if p.letter(index - 1) != Letter::I {
                return Err(PauliError::DuplicateSite(index));
            }
            p.set(index - 1, letter);
        }
        Ok(p)
    }
}

impl Ord for PauliString {
    /// Canonical order: by site count, then by order, then letterwise from
    /// site 1 with `I < X < Y < Z`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.order().cmp(&other.order()))
            .then_with(|| {
                for w in 0..self.x.len() {
                    let diff = (self.x[w] ^ other.x[w]) | (self.z[w] ^ other.z[w]);
                    if diff != 0 {
                        let site = w * 64 + diff.trailing_zeros() as usize;
                        return self.letter(site).cmp(&other.letter(site));
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for site in self.support() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}{}", self.letter(site).symbol(), site + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// Complex linear combination of Pauli strings on a fixed number of sites.
#[derive(Clone, PartialEq)]
pub struct PauliPolynomial {
    n: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliPolynomial {
    pub fn zero(n: usize) -> Self {
        PauliPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(n, Complex64::new(1.0, 0.0))
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(PauliString::identity(n), c);
        p
    }

    pub fn from_string(s: PauliString) -> Self {
        let mut p = Self::zero(s.num_sites());
        p.add_term(s, Complex64::new(1.0, 0.0));
        p
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut p = Self::zero(n);
        for (s, c) in terms {
            if s.num_sites() != n {
                return Err(PauliError::SiteMismatch(n, s.num_sites()));
            }
            p.add_term(s, c);
        }
        p.simplify();
        Ok(p)
    }

    /// `c * letter_site` on a single site.
    pub fn single(n: usize, site: usize, letter: Letter, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(PauliString::single(n, site, letter), c);
        p
    }

    /// `(X + iY)/2` on `site`.
    pub fn sigma_plus(n: usize, site: usize) -> Self {
        let mut p = Self::single(n, site, Letter::X, Complex64::new(0.5, 0.0));
        p.add_term(PauliString::single(n, site, Letter::Y), Complex64::new(0.0, 0.5));
        p
    }

    /// `(X - iY)/2` on `site`.
    pub fn sigma_minus(n: usize, site: usize) -> Self {
        let mut p = Self::single(n, site, Letter::X, Complex64::new(0.5, 0.0));
        p.add_term(PauliString::single(n, site, Letter::Y), Complex64::new(0.0, -0.5));
        p
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical string order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Accumulate without simplifying.
    pub fn add_term(&mut self, s: PauliString, c: Complex64) {
        debug_assert_eq!(s.num_sites(), self.n);
        *self.terms.entry(s).or_default() += c;
    }

    /// Drop coefficients with magnitude below [`ZERO_THRESHOLD`].
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() >= ZERO_THRESHOLD);
    }

    pub fn simplified(mut self) -> Self {
        self.simplify();
        self
    }

    fn check_sites(&self, other: &PauliPolynomial) -> Result<(), PauliError> {
        if self.n != other.n {
            Err(PauliError::SiteMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &PauliPolynomial) -> Result<Self, PauliError> {
        self.check_sites(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), *c);
        }
        Ok(out.simplified())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.simplified()
    }

    pub fn try_mul(&self, other: &PauliPolynomial) -> Result<Self, PauliError> {
        self.check_sites(other)?;
        let mut out = PauliPolynomial::zero(self.n);
        self.accumulate_product(other, Complex64::new(1.0, 0.0), &mut out);
        Ok(out.simplified())
    }

    /// `out += weight * self * other` without simplification.
    pub(crate) fn accumulate_product(&self, other: &PauliPolynomial, weight: Complex64, out: &mut PauliPolynomial) {
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = a.mul_unchecked(b);
                out.add_term(s, weight * phase.to_complex() * ca * cb);
            }
        }
    }

    /// Hermitian conjugate: strings are self-adjoint, so only coefficients change.
    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() < ZERO_THRESHOLD)
    }

    /// Coefficient of the identity string.
    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n))
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.keys()
    }

    /// Parse text like `"0.5*Z1 Z2 - X1 + 2"`; coefficients are real.
    ///
    /// Terms are separated by `+`/`-` at the top level; each term is an
    /// optional number, an optional `*`, and an optional Pauli string.
    pub fn parse(text: &str, n: usize) -> Result<Self, PauliError> {
        let mut out = PauliPolynomial::zero(n);
        let mut rest = text.trim();
        if rest.is_empty() {
            return Err(PauliError::Malformed("empty polynomial".into()));
        }
        let mut sign = 1.0;
        loop {
            rest = rest.trim_start();
            if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r;
                continue;
            }
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
                continue;
            }
            // A term runs to the next '+' or '-' that is not part of an exponent.
            let bytes = rest.as_bytes();
            let mut end = bytes.len();
            for i in 0..bytes.len() {
                if (bytes[i] == b'+' || bytes[i] == b'-') && !(i > 0 && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E'))
                {
                    end = i;
                    break;
                }
            }
            let term = rest[..end].trim();
            if term.is_empty() {
                return Err(PauliError::Malformed(format!("dangling sign in `{text}`")));
            }
            let (coef, string) = split_term(term)?;
            let s = PauliString::parse(string, n)?;
            out.add_term(s, Complex64::new(sign * coef, 0.0));
            sign = 1.0;
            rest = &rest[end..];
            if rest.is_empty() {
                break;
            }
        }
        Ok(out.simplified())
    }
}

fn split_term(term: &str) -> Result<(f64, &str), PauliError> {
    let numeric_end = term
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-'))
        .unwrap_or(term.len());
    // `e` can only belong to the number if digits precede it.
    let (num, tail) = term.split_at(numeric_end);
    if num.is_empty() {
        return Ok((1.0, term));
    }
    let coef: f64 = num
        .parse()
        .map_err(|_| PauliError::Malformed(format!("bad coefficient in `{term}`")))?;
    let tail = tail.trim_start();
    let tail = tail.strip_prefix('*').unwrap_or(tail).trim();
    Ok((coef, tail))
}

impl fmt::Display for PauliPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (s, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*{}", c.re, s)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, s)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PauliPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliPolynomial[{}]({self})", self.n)
    }
}

impl Add for &PauliPolynomial {
    type Output = PauliPolynomial;
    fn add(self, rhs: &PauliPolynomial) -> PauliPolynomial {
        self.try_add(rhs).expect("site counts must match")
    }
}

impl Sub for &PauliPolynomial {
    type Output = PauliPolynomial;
    fn sub(self, rhs: &PauliPolynomial) -> PauliPolynomial {
        self.try_add(&-rhs).expect("site counts must match")
    }
}

impl Neg for &PauliPolynomial {
    type Output = PauliPolynomial;
    fn neg(self) -> PauliPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &PauliPolynomial {
    type Output = PauliPolynomial;
    fn mul(self, rhs: &PauliPolynomial) -> PauliPolynomial {
        self.try_mul(rhs).expect("site counts must match")
    }
}
