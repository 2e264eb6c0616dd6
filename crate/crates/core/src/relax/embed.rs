use std::collections::HashMap;

use faer::{c64, Mat};

use super::{RealBlock, RelaxError};
use crate::constraints::PsdBlock;
use crate::pauli::PauliString;

/// `[[Re H, −Im H], [Im H, Re H]]`; PSD exactly when `H` is, with every
/// eigenvalue of `H` appearing twice.
pub fn embed_hermitian_matrix(h: &Mat<c64>) -> Mat<f64> {
    let d = h.nrows();
    Mat::from_fn(2 * d, 2 * d, |p, q| {
        let (i, j) = (p % d, q % d);
        let v = h[(i, j)];
        match (p < d, q < d) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Real `2d × 2d` embedding of a Hermitian block of affine forms, with
/// variables numbered by their position in `variables`.
pub fn embed_complex_block(block: &PsdBlock, variables: &[PauliString]) -> Result<RealBlock, RelaxError> {
    let index: HashMap<&PauliString, usize> = variables.iter().enumerate().map(|(k, s)| (s, k)).collect();
    lower_block(block, &index, true)
}

/// Real blocks pass through at their own size; complex blocks are embedded.
pub(crate) fn lower_block(
    block: &PsdBlock,
    index: &HashMap<&PauliString, usize>,
    force_embed: bool,
) -> Result<RealBlock, RelaxError> {
    if !block.is_hermitian() {
        return Err(RelaxError::NonHermitianBlock(block.label.clone()));
    }
    let d = block.dim();
    let real_only = !force_embed && block.is_real();
    let mut constant = Vec::new();
    let mut terms = Vec::new();
    let mut push = |i: usize, j: usize, re: f64, im: f64, var: Option<usize>| {
        let mut emit = |p: usize, q: usize, v: f64| {
            if v != 0.0 {
                match var {
                    None => constant.push((p, q, v)),
                    Some(k) => terms.push((k, p, q, v)),
                }
            }
        };
        if real_only {
            emit(i, j, re);
        } else {
            // [[Re, −Im], [Im, Re]], upper triangle of the 2d block.
            emit(i, j, re);
            emit(i + d, j + d, re);
            emit(i, j + d, -im);
            if i != j {
                emit(j, i + d, im);
            }
        }
    };
    for i in 0..d {
        for j in i..d {
            let e = block.entry(i, j);
            push(i, j, e.constant.re, e.constant.im, None);
            for (s, c) in &e.terms {
                push(i, j, c.re, c.im, Some(index[s]));
            }
        }
    }
    constant.sort_by_key(|a| (a.0, a.1));
    terms.sort_by_key(|a| (a.0, a.1, a.2));
    Ok(RealBlock {
        dim: if real_only { d } else { 2 * d },
        constant,
        terms,
    })
}
