//! Sparse SDPA (`.dat-s`) export and import.
//!
//! The file states the primal
//!
//! ```text
//!   minimize  Σ c_k x_k   s.t.  Σ x_k F_k − F_0 ⪰ 0
//! ```
//!
//! with blocks in this order: one diagonal block of paired inequalities
//! for the equalities (omitted when there are none), one diagonal block for
//! the box (omitted without a box), then every PSD block. Lines starting
//! with `*` carry the metadata needed for an exact round trip. Numbers are
//! written in shortest round-trip exponent form. Variables are 1-based; the
//! sidecar map holds one `index<TAB>pauli-string` line per variable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{AssemblyStats, RealBlock, RelaxationProblem, SparseRow};
use crate::pauli::PauliString;

#[derive(Debug, Error)]
pub enum SdpaError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("problem has no constraint blocks to export")]
    NoBlocks,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn parse_err(line: usize, reason: impl Into<String>) -> SdpaError {
    SdpaError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Sidecar path next to an export destination.
pub fn sidecar_path(destination: &Path) -> PathBuf {
    destination.with_extension("vars")
}

/// Render the `.dat-s` text and the sidecar variable map.
pub fn write_sdpa(problem: &RelaxationProblem) -> Result<(String, String), SdpaError> {
    let has_eq = !problem.equalities.is_empty();
    let nvar = problem.num_variables();
    let mut struct_line = Vec::new();
    if has_eq {
        struct_line.push(format!("-{}", 2 * problem.equalities.len()));
    }
    if problem.box_bounds && nvar > 0 {
        struct_line.push(format!("-{}", 2 * nvar));
    }
    for b in &problem.psd_blocks {
        struct_line.push(b.dim.to_string());
    }
    if struct_line.is_empty() {
        return Err(SdpaError::NoBlocks);
    }

    let s = &problem.stats;
    let mut out = String::new();
    let _ = writeln!(out, "* ssbound sparse SDPA export");
    let _ = writeln!(out, "* objective_constant {:e}", problem.objective_constant);
    let _ = writeln!(out, "* num_sites {}", problem.num_sites);
    let _ = writeln!(out, "* box {}", problem.box_bounds);
    let _ = writeln!(out, "* equalities {}", problem.equalities.len());
    let _ = writeln!(out, "* psd_blocks {}", problem.psd_blocks.len());
    let _ = writeln!(
        out,
        "* stats {} {} {} {} {} {}",
        s.generated_constraints,
        s.cycle_closed,
        s.symmetry_constraints,
        s.moment_matrix_size,
        s.reduced_blocks,
        s.reduced_block_size
    );
    let _ = writeln!(out, "{nvar}");
    let _ = writeln!(out, "{}", struct_line.len());
    let _ = writeln!(out, "{}", struct_line.join(" "));
    let mut cost = vec![0.0f64; nvar];
    for &(k, c) in &problem.objective {
        cost[k] = c;
    }
    let cost: Vec<String> = cost.iter().map(|c| format!("{c:e}")).collect();
    let _ = writeln!(out, "{}", cost.join(" "));

    let mut entry = |mat: usize, blk: usize, i: usize, j: usize, v: f64| {
        let _ = writeln!(out, "{mat} {blk} {} {} {v:e}", i + 1, j + 1);
    };
    let mut blk = 0;
    if has_eq {
        blk += 1;
        for (r, row) in problem.equalities.iter().enumerate() {
            if row.constant != 0.0 {
                entry(0, blk, 2 * r, 2 * r, -row.constant);
                entry(0, blk, 2 * r + 1, 2 * r + 1, row.constant);
            }
            for &(k, a) in &row.terms {
                entry(k + 1, blk, 2 * r, 2 * r, a);
                entry(k + 1, blk, 2 * r + 1, 2 * r + 1, -a);
            }
        }
    }
    if problem.box_bounds && nvar > 0 {
        blk += 1;
        for k in 0..nvar {
            entry(0, blk, 2 * k, 2 * k, -1.0);
            entry(0, blk, 2 * k + 1, 2 * k + 1, -1.0);
            entry(k + 1, blk, 2 * k, 2 * k, 1.0);
            entry(k + 1, blk, 2 * k + 1, 2 * k + 1, -1.0);
        }
    }
    for b in &problem.psd_blocks {
        blk += 1;
        for &(i, j, v) in &b.constant {
            entry(0, blk, i, j, -v);
        }
        for &(k, i, j, v) in &b.terms {
            entry(k + 1, blk, i, j, v);
        }
    }

    let mut vars = String::new();
    for (k, v) in problem.variables.iter().enumerate() {
        let _ = writeln!(vars, "{}\t{}", k + 1, v);
    }
    Ok((out, vars))
}

/// Write `destination` and its sidecar; returns the sidecar path.
pub fn export_sdpa(problem: &RelaxationProblem, destination: &Path) -> Result<PathBuf, SdpaError> {
    let (dat, vars) = write_sdpa(problem)?;
    let side = sidecar_path(destination);
    for (path, text) in [(destination, &dat), (side.as_path(), &vars)] {
        fs::write(path, text).map_err(|source| SdpaError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(side)
}

/// Read a file written by [`export_sdpa`] together with its sidecar.
pub fn import_sdpa(source: &Path) -> Result<RelaxationProblem, SdpaError> {
    let read = |path: &Path| {
        fs::read_to_string(path).map_err(|source| SdpaError::Read {
            path: path.to_path_buf(),
            source,
        })
    };
    let dat = read(source)?;
    let vars = read(&sidecar_path(source))?;
    read_sdpa(&dat, &vars)
}

#[derive(Default)]
struct Header {
    objective_constant: Option<f64>,
    num_sites: Option<usize>,
    box_bounds: Option<bool>,
    equalities: Option<usize>,
    psd_blocks: Option<usize>,
    stats: AssemblyStats,
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, SdpaError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

fn parse_header(line: usize, text: &str, h: &mut Header) -> Result<(), SdpaError> {
    let mut tok = text.split_whitespace();
    match tok.next() {
        Some("objective_constant") => h.objective_constant = Some(parse_num(tok.next(), line, "constant")?),
        Some("num_sites") => h.num_sites = Some(parse_num(tok.next(), line, "site count")?),
        Some("box") => h.box_bounds = Some(parse_num(tok.next(), line, "box flag")?),
        Some("equalities") => h.equalities = Some(parse_num(tok.next(), line, "equality count")?),
        Some("psd_blocks") => h.psd_blocks = Some(parse_num(tok.next(), line, "block count")?),
        Some("stats") => {
            h.stats = AssemblyStats {
                generated_constraints: parse_num(tok.next(), line, "stat")?,
                cycle_closed: parse_num(tok.next(), line, "stat")?,
                symmetry_constraints: parse_num(tok.next(), line, "stat")?,
                moment_matrix_size: parse_num(tok.next(), line, "stat")?,
                reduced_blocks: parse_num(tok.next(), line, "stat")?,
                reduced_block_size: parse_num(tok.next(), line, "stat")?,
            }
        }
        _ => {}
    }
    Ok(())
}

/// Parse `.dat-s` text plus sidecar text back into a problem.
pub fn read_sdpa(dat: &str, vars: &str) -> Result<RelaxationProblem, SdpaError> {
    let mut header = Header::default();
    let mut body = Vec::new();
    for (k, raw) in dat.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix('*') {
            parse_header(line, rest, &mut header)?;
        } else if !t.is_empty() {
            body.push((line, t));
        }
    }
    let missing = |what: &str| parse_err(0, format!("header lacks `{what}`"));
    let num_sites = header.num_sites.ok_or_else(|| missing("num_sites"))?;
    let box_bounds = header.box_bounds.ok_or_else(|| missing("box"))?;
    let n_eq = header.equalities.ok_or_else(|| missing("equalities"))?;
    let n_psd = header.psd_blocks.ok_or_else(|| missing("psd_blocks"))?;
    let objective_constant = header.objective_constant.ok_or_else(|| missing("objective_constant"))?;

    let mut it = body.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| parse_err(0, format!("missing {what}")));
    let (l, t) = next("variable count")?;
    let nvar: usize = parse_num(Some(t), l, "variable count")?;
    let (l, t) = next("block count")?;
    let nblk: usize = parse_num(Some(t), l, "block count")?;
    let (l, t) = next("block structure")?;
    let sizes: Vec<i64> = t
        .split_whitespace()
        .map(|s| parse_num(Some(s), l, "block size"))
        .collect::<Result<_, _>>()?;
    if sizes.len() != nblk {
        return Err(parse_err(l, "block structure length differs from block count"));
    }
    let expect = usize::from(n_eq > 0) + usize::from(box_bounds && nvar > 0) + n_psd;
    if nblk != expect {
        return Err(parse_err(l, "block count disagrees with header"));
    }
    let (l, t) = next("cost vector")?;
    let cost: Vec<f64> = t
        .split_whitespace()
        .map(|s| parse_num(Some(s), l, "cost"))
        .collect::<Result<_, _>>()?;
    if cost.len() != nvar {
        return Err(parse_err(l, "cost vector length differs from variable count"));
    }
    let objective = cost
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, *c))
        .collect();

    let eq_block = (n_eq > 0).then_some(1usize);
    let box_block = (box_bounds && nvar > 0).then_some(1 + usize::from(n_eq > 0));
    let psd_base = 1 + usize::from(n_eq > 0) + usize::from(box_bounds && nvar > 0);
    let mut equalities = vec![
        SparseRow {
            terms: Vec::new(),
            constant: 0.0
        };
        n_eq
    ];
    let mut psd_blocks: Vec<RealBlock> = sizes[psd_base - 1..]
        .iter()
        .map(|&d| RealBlock {
            dim: d.unsigned_abs() as usize,
            constant: Vec::new(),
            terms: Vec::new(),
        })
        .collect();
    for (l, t) in it {
        let mut tok = t.split_whitespace();
        let mat: usize = parse_num(tok.next(), l, "matrix number")?;
        let blk: usize = parse_num(tok.next(), l, "block number")?;
        let i: usize = parse_num(tok.next(), l, "row")?;
        let j: usize = parse_num(tok.next(), l, "column")?;
        let v: f64 = parse_num(tok.next(), l, "value")?;
        if mat > nvar || blk == 0 || blk > nblk || i == 0 || j == 0 {
            return Err(parse_err(l, "index out of range"));
        }
        let (i, j) = (i - 1, j - 1);
        if Some(blk) == eq_block {
            // Only the first row of each pair carries the original sign.
            if i % 2 == 1 {
                continue;
            }
            let row = equalities
                .get_mut(i / 2)
                .ok_or_else(|| parse_err(l, "equality row out of range"))?;
            if mat == 0 {
                row.constant = -v;
            } else {
                row.terms.push((mat - 1, v));
            }
        } else if Some(blk) == box_block {
            continue;
        } else {
            let b = &mut psd_blocks[blk - psd_base];
            if i >= b.dim || j >= b.dim {
                return Err(parse_err(l, "entry outside block"));
            }
            if mat == 0 {
                b.constant.push((i, j, -v));
            } else {
                b.terms.push((mat - 1, i, j, v));
            }
        }
    }
    for row in &mut equalities {
        row.terms.sort_by_key(|t| t.0);
    }
    for b in &mut psd_blocks {
        b.constant.sort_by_key(|a| (a.0, a.1));
        b.terms.sort_by_key(|a| (a.0, a.1, a.2));
    }

    let mut variables = Vec::with_capacity(nvar);
    for (k, raw) in vars.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let (idx, text) = raw
            .split_once('\t')
            .ok_or_else(|| parse_err(k + 1, "sidecar line lacks a tab"))?;
        let idx: usize = parse_num(Some(idx.trim()), k + 1, "sidecar index")?;
        if idx != variables.len() + 1 {
            return Err(parse_err(k + 1, "sidecar indices must be consecutive from 1"));
        }
        let s = PauliString::parse(text, num_sites).map_err(|e| parse_err(k + 1, e.to_string()))?;
        variables.push(s);
    }
    if variables.len() != nvar {
        return Err(parse_err(0, "sidecar variable count differs from file"));
    }

    Ok(RelaxationProblem {
        num_sites,
        variables,
        objective,
        objective_constant,
        equalities,
        psd_blocks,
        box_bounds,
        stats: header.stats,
    })
}
