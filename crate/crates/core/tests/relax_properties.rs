use std::collections::BTreeMap;

use faer::{c64, Mat, Side};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssbound::constraints::{reduced_density_blocks, PsdBlock};
use ssbound::models::{magnetization, periodic_tfi_decay, two_qubit_bath, ChainParams, TwoQubitParams};
use ssbound::pauli::PauliString;
use ssbound::relax::{
    assemble, embed_complex_block, embed_hermitian_matrix, export_sdpa, import_sdpa, read_sdpa, write_sdpa,
    AssembleOptions, AssemblyStats, RealBlock, ReducedOption, RelaxationProblem, SparseRow,
};
use ssbound::solver::{
    bound, bound_with, solve_interval, ClarabelBackend, ConicProblem, Direction, Reduction, SolverSettings,
};

fn sorted_eigenvalues_real(m: &Mat<f64>) -> Vec<f64> {
    let mut v = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
    v.sort_by(f64::total_cmp);
    v
}

fn sorted_eigenvalues_complex(m: &Mat<c64>) -> Vec<f64> {
    let mut v = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
    v.sort_by(f64::total_cmp);
    v
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Mat<c64> {
    let mut h = Mat::<c64>::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = c64::new(rng.random_range(-2.0..2.0), 0.0);
        for j in 0..i {
            let z = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

#[test]
fn embedding_doubles_every_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..200 {
        let dim = 1 + trial % 12;
        let h = random_hermitian(&mut rng, dim);
        let spectrum = sorted_eigenvalues_complex(&h);
        let embedded = sorted_eigenvalues_real(&embed_hermitian_matrix(&h));
        assert_eq!(embedded.len(), 2 * dim);
        for (k, &lambda) in spectrum.iter().enumerate() {
            for e in &embedded[2 * k..2 * k + 2] {
                assert!((e - lambda).abs() < 1e-10, "trial {trial}: {e} vs {lambda}");
            }
        }
    }
}

#[test]
fn embedded_reduced_block_matches_numeric_embedding() {
    // A two-site reduced density matrix evaluated at random moments.
    let n = 3;
    let block: PsdBlock = reduced_density_blocks(n, &[vec![0, 2]]).unwrap().remove(0);
    let mut variables = block.strings();
    variables.retain(|s| !s.is_identity());
    variables.sort();
    let real = embed_complex_block(&block, &variables).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let x: Vec<f64> = variables.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let values: BTreeMap<&PauliString, f64> = variables.iter().zip(x.iter().copied()).collect();
        let numeric = embed_hermitian_matrix(&block.evaluate(|s| if s.is_identity() { 1.0 } else { values[s] }));
        let symbolic = real.evaluate(&x);
        for i in 0..numeric.nrows() {
            for j in 0..numeric.ncols() {
                assert!((numeric[(i, j)] - symbolic[(i, j)]).abs() < 1e-14);
            }
        }
    }
}

fn pauli_variables(n: usize, count: usize) -> Vec<PauliString> {
    let mut all = ssbound::constraints::level_basis(n, n);
    all.retain(|s| !s.is_identity());
    all.truncate(count);
    all
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        Just(0.1 + 0.2),
        Just(1.0 / 3.0),
        Just(-f64::MIN_POSITIVE),
        Just(5e-324),
        Just(1.7976931348623157e308),
        Just(-2.0f64.sqrt()),
    ]
    .prop_filter("nonzero", |v| *v != 0.0)
}

/// Canonical random problems: sorted, deduplicated and free of explicit zeros.
fn problem() -> impl Strategy<Value = RelaxationProblem> {
    (1..=3usize, 1..=10usize).prop_flat_map(|(n, nvar)| {
        let nvar = nvar.min((1 << (2 * n)) - 1);
        let idx = 0..nvar;
        (
            prop::collection::btree_map(idx.clone(), nonzero(), 0..=nvar),
            nonzero(),
            prop::collection::vec(
                (prop::collection::btree_map(idx.clone(), nonzero(), 1..=nvar), nonzero()),
                0..5,
            ),
            prop::collection::vec(
                (1..=4usize).prop_flat_map(move |dim| {
                    let pos = (0..dim, 0..dim);
                    (
                        Just(dim),
                        prop::collection::btree_map(pos.clone(), nonzero(), 0..=3),
                        prop::collection::btree_map((0..nvar, pos), nonzero(), 0..=6),
                    )
                }),
                0..3,
            ),
            any::<bool>(),
            (0..50usize, any::<bool>(), 0..5usize),
        )
            .prop_map(move |(objective, c0, eqs, blocks, box_bounds, (gen, closed, sym))| {
                let up = |(i, j): (usize, usize)| (i.min(j), i.max(j));
                let psd_blocks = blocks
                    .into_iter()
                    .map(|(dim, constant, terms)| {
                        let constant: BTreeMap<(usize, usize), f64> =
                            constant.into_iter().map(|(p, v)| (up(p), v)).collect();
                        let terms: BTreeMap<(usize, (usize, usize)), f64> =
                            terms.into_iter().map(|((k, p), v)| ((k, up(p)), v)).collect();
                        RealBlock {
                            dim,
                            constant: constant.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
                            terms: terms.into_iter().map(|((k, (i, j)), v)| (k, i, j, v)).collect(),
                        }
                    })
                    .collect::<Vec<_>>();
                // At least one block keeps the problem exportable.
                let box_bounds = box_bounds || (eqs.is_empty() && psd_blocks.is_empty());
                RelaxationProblem {
                    num_sites: n,
                    variables: pauli_variables(n, nvar),
                    objective: objective.into_iter().collect(),
                    objective_constant: c0,
                    equalities: eqs
                        .into_iter()
                        .map(|(terms, constant)| SparseRow {
                            terms: terms.into_iter().collect(),
                            constant,
                        })
                        .collect(),
                    psd_blocks,
                    box_bounds,
                    stats: AssemblyStats {
                        generated_constraints: gen,
                        cycle_closed: closed,
                        symmetry_constraints: sym,
                        moment_matrix_size: 0,
                        reduced_blocks: 0,
                        reduced_block_size: 0,
                    },
                }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sdpa_text_round_trip_is_bit_exact(p in problem()) {
        let (dat, vars) = write_sdpa(&p).unwrap();
        let back = read_sdpa(&dat, &vars).unwrap();
        prop_assert_eq!(back.fingerprint(), p.fingerprint());
        prop_assert_eq!(&back, &p);
        let (dat2, vars2) = write_sdpa(&back).unwrap();
        prop_assert_eq!(dat2, dat);
        prop_assert_eq!(vars2, vars);
    }
}

fn tfi(n: usize) -> (ssbound::lindblad::LindbladModel, ssbound::pauli::PauliPolynomial) {
    (
        periodic_tfi_decay(&ChainParams {
            n,
            ..Default::default()
        })
        .unwrap(),
        magnetization(n),
    )
}

#[test]
fn sdpa_file_round_trip_of_assembled_problem() {
    let (model, obs) = tfi(6);
    let options = AssembleOptions {
        linear_budget: 300,
        reduced: ReducedOption::Contiguous(3),
        symmetries: ssbound::models::ring_symmetries(6),
        ..Default::default()
    };
    let p = assemble(&model, &obs, &options).unwrap();
    let dir = std::env::temp_dir().join(format!("ssbound-relax-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tfi6.dat-s");
    let sidecar = export_sdpa(&p, &path).unwrap();
    assert!(sidecar.exists());
    let back = import_sdpa(&path).unwrap();
    assert_eq!(back, p);
    assert_eq!(back.fingerprint(), p.fingerprint());
    std::fs::remove_dir_all(&dir).unwrap();
}

fn assert_nested(outer: (f64, f64), inner: (f64, f64), what: &str) {
    assert!(
        inner.0 >= outer.0 - 1e-6,
        "{what}: lb {} fell below {}",
        inner.0,
        outer.0
    );
    assert!(
        inner.1 <= outer.1 + 1e-6,
        "{what}: ub {} rose above {}",
        inner.1,
        outer.1
    );
}

fn interval_of(p: &RelaxationProblem) -> (f64, f64) {
    let (lo, hi) = solve_interval(p, &SolverSettings::default());
    assert!(lo.status.is_solved() && hi.status.is_solved(), "{lo:?} {hi:?}");
    (lo.value, hi.value)
}

#[test]
fn larger_linear_budgets_nest() {
    let (model, obs) = tfi(6);
    let mut previous = (f64::NEG_INFINITY, f64::INFINITY);
    for budget in [10, 40, 160, 640] {
        let options = AssembleOptions {
            linear_budget: budget,
            reduced: ReducedOption::Contiguous(2),
            ..Default::default()
        };
        let iv = interval_of(&assemble(&model, &obs, &options).unwrap());
        assert_nested(previous, iv, &format!("budget {budget}"));
        previous = iv;
    }
}

#[test]
fn adding_blocks_nests() {
    let (model, obs) = tfi(5);
    let mut previous = (f64::NEG_INFINITY, f64::INFINITY);
    for reduced in [
        ReducedOption::None,
        ReducedOption::Contiguous(2),
        ReducedOption::Contiguous(3),
    ] {
        let options = AssembleOptions {
            linear_budget: 200,
            reduced: reduced.clone(),
            ..Default::default()
        };
        let iv = interval_of(&assemble(&model, &obs, &options).unwrap());
        assert_nested(previous, iv, &format!("{reduced:?}"));
        previous = iv;
    }
}

#[test]
fn extra_equalities_nest() {
    let params = TwoQubitParams::default();
    let model = two_qubit_bath(&params).unwrap();
    let obs = ssbound::models::heat_current_observable(&params);
    let options = AssembleOptions {
        linear_budget: 2,
        ..Default::default()
    };
    let base = assemble(&model, &obs, &options).unwrap();
    let full = assemble(
        &model,
        &obs,
        &AssembleOptions {
            linear_budget: 6,
            ..Default::default()
        },
    )
    .unwrap();
    // Re-express the remaining generated rows over the base variables where possible.
    let mut rows = Vec::new();
    for r in &full.equalities {
        let mapped: Option<Vec<(usize, f64)>> = r
            .terms
            .iter()
            .map(|&(k, a)| base.index_of(&full.variables[k]).map(|j| (j, a)))
            .collect();
        if let Some(terms) = mapped {
            rows.push(SparseRow {
                terms,
                constant: r.constant,
            });
        }
    }
    let outer = interval_of(&base);
    let tightened = base.with_extra_equalities(rows);
    let inner = interval_of(&tightened);
    assert_nested(outer, inner, "extra equalities");
}

#[test]
fn presolve_preserves_bounds() {
    let (model, obs) = tfi(6);
    let options = AssembleOptions {
        linear_budget: 400,
        reduced: ReducedOption::Contiguous(3),
        symmetries: ssbound::models::ring_symmetries(6),
        ..Default::default()
    };
    let p = assemble(&model, &obs, &options).unwrap();
    let reduction = Reduction::new(&p);
    assert!(reduction.kept.len() < p.num_variables());
    let plain = SolverSettings {
        presolve: false,
        ..Default::default()
    };
    for direction in [Direction::Min, Direction::Max] {
        let with = bound(&p, direction, &SolverSettings::default());
        let without = bound_with(&ClarabelBackend, &p, direction, &plain);
        assert!(with.status.is_solved() && without.status.is_solved());
        assert!((with.value - without.value).abs() < 1e-6, "{with:?} vs {without:?}");
        let conic = ConicProblem::from_reduction(&p, &reduction, direction);
        assert_eq!(conic.cost.len(), reduction.kept.len());
    }
}

#[test]
fn presolve_keeps_steady_state_feasible() {
    // The exact steady state expands from its reduced coordinates.
    let (model, obs) = tfi(4);
    let options = AssembleOptions {
        linear_budget: 200,
        symmetries: ssbound::models::ring_symmetries(4),
        ..Default::default()
    };
    let p = assemble(&model, &obs, &options).unwrap();
    let ss = ssbound::oracle::steady_state_dense(&model).unwrap();
    let state = &ss.state;
    let x = p.point(|s| state.moment(s));
    let reduction = Reduction::new(&p);
    let y: Vec<f64> = reduction.kept.iter().map(|&k| x[k]).collect();
    let expanded = reduction.expand(&y);
    for (a, b) in expanded.iter().zip(&x) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
