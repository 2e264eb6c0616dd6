//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run all with `cargo test -p ssbound --test acceptance`; pass criterion
//! numbers (`-- 1 3`) to run a subset. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssbound::cli::{BudgetPreset, Config, SweepAxis, SweepValue};
use ssbound::constraints::{auto_generate, solve_closed_system};
use ssbound::lindblad::LindbladModel;
use ssbound::models::{
    chain_between_baths, chain_heat_current, heat_current_observable, magnetization, periodic_tfi_decay,
    two_qubit_bath, ChainParams, TwoQubitParams,
};
use ssbound::oracle::{exact_extrema, steady_state_dense};
use ssbound::pauli::{PauliPolynomial, PauliString};
use ssbound::relax::{
    assemble, embed_hermitian_matrix, export_sdpa, import_sdpa, read_sdpa, write_sdpa, AssembleOptions,
    MomentMatrixOption, ReducedOption, RelaxationProblem,
};
use ssbound::solver::{certify_interval, solve_interval, Interval, SolverSettings};

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Interval and wall time of one configuration.
struct Run {
    interval: Interval,
    time: Duration,
}

impl Run {
    fn describe(&self) -> String {
        format!(
            "[{:.6}, {:.6}] width {:.6} ({:.2}%) in {:.1} s",
            self.interval.lb.value,
            self.interval.ub.value,
            self.interval.width(),
            100.0 * self.interval.relative_width(),
            self.time.as_secs_f64()
        )
    }
}

fn config_file(name: &str) -> Config {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Config::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run_config(cfg: &Config) -> Run {
    let start = Instant::now();
    let model = cfg.build_model().unwrap();
    let obs = cfg.build_observable().unwrap();
    let (_, interval) = certify_interval(&model, &obs, &cfg.assemble_options(), &cfg.solver_settings()).unwrap();
    Run {
        interval,
        time: start.elapsed(),
    }
}

fn seeds(obs: &PauliPolynomial) -> Vec<PauliString> {
    obs.terms()
        .map(|(s, _)| s.clone())
        .filter(|s| !s.is_identity())
        .collect()
}

/// Criterion 3 and row 3 of criterion 4 share one run.
#[derive(Default)]
struct Shared {
    chain12_reduced: Option<Run>,
}

impl Shared {
    fn chain12_reduced(&mut self) -> &Run {
        self.chain12_reduced
            .get_or_insert_with(|| run_config(&config_file("chain12_reduced.toml")))
    }
}

fn random_bath(rng: &mut ChaCha8Rng) -> TwoQubitParams {
    let t_c = rng.random_range(0.3..2.0);
    TwoQubitParams {
        eps_h: rng.random_range(0.5..2.0),
        eps_c: rng.random_range(0.5..2.0),
        g: rng.random_range(0.01..0.5),
        gamma_h: rng.random_range(0.01..0.5),
        gamma_c: rng.random_range(0.01..0.5),
        t_h: t_c + rng.random_range(0.1..3.0),
        t_c,
    }
}

fn two_qubit_exactness(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let (mut worst_err, mut worst_time) = (0.0f64, Duration::ZERO);
    for trial in 0..20 {
        let p = random_bath(&mut rng);
        let start = Instant::now();
        let model = two_qubit_bath(&p).unwrap();
        let obs = heat_current_observable(&p);
        let report = auto_generate(&model, &seeds(&obs), 1000).unwrap();
        let closed = solve_closed_system(&report);
        let (_, interval) =
            certify_interval(&model, &obs, &AssembleOptions::default(), &SolverSettings::default()).unwrap();
        let time = start.elapsed();
        let (lo, hi) = exact_extrema(&model, &obs).unwrap();
        let err = (interval.lb.value - lo)
            .abs()
            .max((interval.ub.value - hi).abs())
            .max(hi - lo);
        let full_rank = closed.as_ref().is_ok_and(|c| c.rank == report.strings.len());
        worst_err = worst_err.max(err);
        worst_time = worst_time.max(time);
        if !(report.cycle_closed && report.constraints.len() == 6 && full_rank && interval.is_solved() && err <= 1e-6)
            || time >= Duration::from_secs(1)
        {
            failures.push(format!(
                "trial {trial}: closed={} constraints={} full_rank={full_rank} err={err:.2e} time={:.3}s",
                report.cycle_closed,
                report.constraints.len(),
                time.as_secs_f64()
            ));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "20 instances, max |bound - oracle| {worst_err:.2e}, slowest {:.3} s{}",
            worst_time.as_secs_f64(),
            failure_suffix(&failures)
        ),
    )
}

fn failure_suffix(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; {}", failures.join("; "))
    }
}

fn cycle_law(_: &mut Shared) -> Outcome {
    let p = TwoQubitParams {
        eps_c: 0.8,
        gamma_c: 0.2,
        ..Default::default()
    };
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    let mut worst_err = 0.0f64;
    let mut elapsed = Duration::ZERO;
    for n in 2..=8 {
        let start = Instant::now();
        let model = chain_between_baths(n, &p).unwrap();
        let report = auto_generate(&model, &seeds(&chain_heat_current(n, &p)), 1_000_000).unwrap();
        let closed = solve_closed_system(&report);
        elapsed += start.elapsed();
        counts.push(report.constraints.len());
        if !report.cycle_closed || report.constraints.len() != 2 * n * n - n {
            failures.push(format!(
                "n={n}: {} constraints, closed={}",
                report.constraints.len(),
                report.cycle_closed
            ));
        }
        if n <= 6 {
            let Ok(closed) = closed else {
                failures.push(format!("n={n}: closed solve failed"));
                continue;
            };
            let ss = steady_state_dense(&model).unwrap();
            let err = closed
                .moments
                .iter()
                .map(|(s, v)| (ss.state.moment(s) - v).abs())
                .fold(0.0, f64::max);
            worst_err = worst_err.max(err);
            if err > 1e-8 {
                failures.push(format!("n={n}: moment error {err:.2e}"));
            }
        }
    }
    if elapsed >= Duration::from_secs(10) {
        failures.push(format!(
            "generation and closed solves took {:.2} s",
            elapsed.as_secs_f64()
        ));
    }
    verdict(
        failures.is_empty(),
        format!(
            "constraints {counts:?}, max moment error {worst_err:.2e} (n <= 6), {:.2} s excluding oracle{}",
            elapsed.as_secs_f64(),
            failure_suffix(&failures)
        ),
    )
}

fn twelve_site_benchmark(shared: &mut Shared) -> Outcome {
    let run = shared.chain12_reduced();
    let iv = &run.interval;
    let overlaps = iv.lb.value <= -0.8017 && iv.ub.value >= -0.8212;
    verdict(
        iv.is_solved() && iv.width() <= 0.025 && overlaps,
        format!("{}, overlaps reference: {overlaps}", run.describe()),
    )
}

fn budget_monotonicity(shared: &mut Shared) -> Outcome {
    let first = run_config(&config_file("chain12_linear1000.toml"));
    let second = run_config(&config_file("chain12_linear10000.toml"));
    let fourth = run_config(&config_file("chain12_symmetric.toml"));
    let third = shared.chain12_reduced();
    let rows = [&first, &second, third, &fourth];
    let widths: Vec<f64> = rows.iter().map(|r| r.interval.width()).collect();
    let solved = rows.iter().all(|r| r.interval.is_solved());
    let decreasing = widths.windows(2).all(|w| w[0] - w[1] > 1e-6);
    let detail = rows
        .iter()
        .map(|r| format!("{:.2}%", 100.0 * r.interval.relative_width()))
        .collect::<Vec<_>>()
        .join(" -> ");
    verdict(solved && decreasing, detail)
}

/// One random configuration of a built-in model with at most six sites.
fn random_config(rng: &mut ChaCha8Rng) -> String {
    let bath = |rng: &mut ChaCha8Rng| {
        let p = random_bath(rng);
        format!(
            "eps_h = {}\neps_c = {}\ng = {}\ngamma_h = {}\ngamma_c = {}\nt_h = {}\nt_c = {}\n",
            p.eps_h, p.eps_c, p.g, p.gamma_h, p.gamma_c, p.t_h, p.t_c
        )
    };
    let (model, sites, symmetric) = match rng.random_range(0..4) {
        0 => (format!("kind = \"two_qubit\"\n{}", bath(rng)), 2, false),
        1 => {
            let n = rng.random_range(3..=6);
            (
                format!("kind = \"chain_between_baths\"\nn = {n}\n{}", bath(rng)),
                n,
                false,
            )
        }
        2 => {
            let n = rng.random_range(3..=6);
            let (j, eta, gamma) = (
                rng.random_range(0.1..1.5),
                rng.random_range(0.1..1.5),
                rng.random_range(0.2..2.0),
            );
            (
                format!("kind = \"periodic_tfi\"\nn = {n}\nj = {j}\neta = {eta}\ngamma = {gamma}\n"),
                n,
                true,
            )
        }
        _ => {
            let rungs = rng.random_range(2..=3);
            let t_c = rng.random_range(0.5..2.0);
            (
                format!(
                    "kind = \"ladder\"\nrungs = {rungs}\neps = {}\ng = {}\ngamma_h = {}\ngamma_c = {}\nt_h = {}\nt_c = {t_c}\n",
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.01..0.5),
                    rng.random_range(0.01..0.5),
                    rng.random_range(0.01..0.5),
                    t_c + rng.random_range(0.1..2.0),
                ),
                2 * rungs,
                true,
            )
        }
    };
    let observable = if rng.random_bool(0.3) {
        let a = rng.random_range(1..=sites);
        let b = (a % sites) + 1;
        let letters = ["X", "Y", "Z"];
        format!(
            "observable = \"{:.3}*{}{a} {}{b} - {}{a}\"\n",
            rng.random_range(0.2..1.5),
            letters[rng.random_range(0..3)],
            letters[rng.random_range(0..3)],
            letters[rng.random_range(0..3)],
        )
    } else {
        String::new()
    };
    let linear = [30, 200, 1000][rng.random_range(0..3)];
    let blocks = match rng.random_range(0..5) {
        0 => String::new(),
        1 => "reduced = 2\n".to_string(),
        2 => format!("reduced = {}\n", 3.min(sites)),
        3 => "moment_matrix = 12\n".to_string(),
        _ => "moment_level = 1\n".to_string(),
    };
    let symmetry = if symmetric && rng.random_bool(0.5) {
        "symmetry = true\n"
    } else {
        ""
    };
    format!("{observable}\n[model]\n{model}\n[budget]\nlinear = {linear}\n{blocks}{symmetry}")
}

fn soundness_sweep(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut kinds: BTreeMap<&'static str, usize> = BTreeMap::new();
    for trial in 0..50 {
        let text = random_config(&mut rng);
        let cfg = Config::parse(&text).unwrap_or_else(|e| panic!("{text}\n{e}"));
        *kinds.entry(cfg.model_name()).or_default() += 1;
        let model = cfg.build_model().unwrap();
        let obs = cfg.build_observable().unwrap();
        let (lo, hi) = exact_extrema(&model, &obs).unwrap();
        let run = run_config(&cfg);
        let iv = &run.interval;
        if !iv.is_solved() {
            failures.push(format!(
                "trial {trial} ({}) not solved: {:?}/{:?}",
                cfg.model_name(),
                iv.lb.status,
                iv.ub.status
            ));
            continue;
        }
        let violation = (iv.lb.value - lo).max(hi - iv.ub.value);
        worst = worst.max(violation);
        if violation > 1e-6 {
            failures.push(format!(
                "trial {trial}: oracle [{lo:.8}, {hi:.8}] outside [{:.8}, {:.8}]",
                iv.lb.value, iv.ub.value
            ));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "50 configs {kinds:?}, largest violation {worst:.2e}{}",
            failure_suffix(&failures)
        ),
    )
}

fn scaling(_: &mut Shared) -> Outcome {
    let mut points = Vec::new();
    for n in [12, 24, 48, 96] {
        let mut cfg = Config::parse(&format!(
            "observable = \"magnetization\"\n[model]\nkind = \"periodic_tfi\"\nn = {n}\n"
        ))
        .unwrap();
        BudgetPreset::Set1.apply(&mut cfg.budget);
        points.push((n, run_config(&cfg)));
    }
    let times: Vec<f64> = points.iter().map(|(_, r)| r.time.as_secs_f64()).collect();
    let ratio = times.iter().cloned().fold(0.0, f64::max) / times.iter().cloned().fold(f64::INFINITY, f64::min);
    let signed = points
        .iter()
        .all(|(_, r)| r.interval.is_solved() && r.interval.ub.value < 0.0);
    let detail = points
        .iter()
        .map(|(n, r)| format!("n={n} ub {:.4} {:.1}s", r.interval.ub.value, r.time.as_secs_f64()))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(signed && ratio < 3.0, format!("{detail}; time ratio {ratio:.2}"))
}

fn ladder(_: &mut Shared) -> Outcome {
    let big = run_config(&config_file("ladder2x5.toml"));
    let big_ok = big.interval.is_solved() && big.interval.relative_width() <= 0.5;

    let mut small_cfg = config_file("ladder2x5.toml");
    small_cfg.apply_axis(SweepAxis::N, &SweepValue::Number(4.0)).unwrap();
    let small = run_config(&small_cfg);
    let model = small_cfg.build_model().unwrap();
    let (lo, hi) = exact_extrema(&model, &small_cfg.build_observable().unwrap()).unwrap();
    let small_ok = small.interval.is_solved() && small.interval.contains(lo, 1e-6) && small.interval.contains(hi, 1e-6);
    verdict(
        big_ok && small_ok,
        format!(
            "2x5 {}; 2x2 {} with oracle [{lo:.6}, {hi:.6}]",
            big.describe(),
            small.describe()
        ),
    )
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

fn embedding_error(rng: &mut ChaCha8Rng, dim: usize) -> f64 {
    let h = random_hermitian(rng, dim);
    let mut complex = h.self_adjoint_eigenvalues(Side::Lower).unwrap();
    let mut real = embed_hermitian_matrix(&h)
        .self_adjoint_eigenvalues(Side::Lower)
        .unwrap();
    complex.sort_by(f64::total_cmp);
    real.sort_by(f64::total_cmp);
    complex
        .iter()
        .enumerate()
        .flat_map(|(k, l)| [(real[2 * k] - l).abs(), (real[2 * k + 1] - l).abs()])
        .fold(0.0, f64::max)
}

fn tfi_problem(n: usize, options: &AssembleOptions) -> RelaxationProblem {
    let model: LindbladModel = periodic_tfi_decay(&ChainParams {
        n,
        ..Default::default()
    })
    .unwrap();
    assemble(&model, &magnetization(n), options).unwrap()
}

fn relaxation_properties(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let embed = (0..200)
        .map(|t| embedding_error(&mut rng, 1 + t % 16))
        .fold(0.0, f64::max);
    let embed_ok = embed < 1e-10;

    let dir = std::env::temp_dir().join(format!("ssbound-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut round_trip_ok = true;
    let variants = [
        AssembleOptions {
            linear_budget: 300,
            reduced: ReducedOption::Contiguous(3),
            symmetries: ssbound::models::ring_symmetries(6),
            ..Default::default()
        },
        AssembleOptions {
            linear_budget: 500,
            moment_matrix: MomentMatrixOption::Auto(20),
            ..Default::default()
        },
        AssembleOptions {
            linear_budget: 100,
            moment_matrix: MomentMatrixOption::Level(1),
            reduced: ReducedOption::AllSubsets(2),
            ..Default::default()
        },
    ];
    for (k, options) in variants.iter().enumerate() {
        let p = tfi_problem(6, options);
        let (dat, vars) = write_sdpa(&p).unwrap();
        let back = read_sdpa(&dat, &vars).unwrap();
        let again = write_sdpa(&back).unwrap();
        let path = dir.join(format!("p{k}.dat-s"));
        export_sdpa(&p, &path).unwrap();
        let file = import_sdpa(&path).unwrap();
        round_trip_ok &= back == p && file == p && again == (dat, vars) && file.fingerprint() == p.fingerprint();
    }
    std::fs::remove_dir_all(&dir).unwrap();

    let settings = SolverSettings::default();
    let mut nested_ok = true;
    let mut previous = (f64::NEG_INFINITY, f64::INFINITY);
    let mut widths = Vec::new();
    let ladder = [
        (20, ReducedOption::None),
        (80, ReducedOption::None),
        (80, ReducedOption::Contiguous(2)),
        (320, ReducedOption::Contiguous(2)),
        (320, ReducedOption::Contiguous(3)),
    ];
    for (linear, reduced) in ladder {
        let p = tfi_problem(
            6,
            &AssembleOptions {
                linear_budget: linear,
                reduced,
                ..Default::default()
            },
        );
        let (lo, hi) = solve_interval(&p, &settings);
        nested_ok &= lo.status.is_solved() && hi.status.is_solved();
        nested_ok &= lo.value >= previous.0 - 1e-6 && hi.value <= previous.1 + 1e-6;
        previous = (lo.value, hi.value);
        widths.push(format!("{:.4}", hi.value - lo.value));
    }
    verdict(
        embed_ok && round_trip_ok && nested_ok,
        format!(
            "embedding max error {embed:.1e} over 200 matrices, SDPA round trip exact: {round_trip_ok}, nested widths {}",
            widths.join(" >= ")
        ),
    )
}

type Criterion = (&'static str, fn(&mut Shared) -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("two-qubit exactness", two_qubit_exactness),
        ("cycle law", cycle_law),
        ("12-site benchmark", twelve_site_benchmark),
        ("budget monotonicity", budget_monotonicity),
        ("soundness sweep", soundness_sweep),
        ("scaling", scaling),
        ("ladder", ladder),
        ("relaxation properties", relaxation_properties),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut shared = Shared::default();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut shared))).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!(
            "{tag} {id} {name}: {} [{:.1} s]",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
