//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use msplit::analysis::{eigenvalues, extrapolation_interval, hat_spectral_radius, iteration_matrix, asymptotic_rate};
use msplit::generators::{self, EllipticCase, EllipticParams};
use msplit::solver::{solve_multisplitting, Execution, SolveOptions, StopRule, Termination};
use msplit::splitting::{gaor_multisplitting, multisplit_from_index_sets};
use msplit::tables::{self, Table, T53_CELLS};
use msplit::{BlockVector, Multisplitting};

const RHO_TOL: f64 = 1e-3;
const LEMMA_REL_TOL: f64 = 1e-8;
const RATE_TOL: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_example_51() -> Outcome {
    let t0 = Instant::now();
    let (_, ms) = generators::example_5_1();
    let rho = iteration_matrix(&ms).spectral_radius().unwrap();
    let secs = t0.elapsed().as_secs_f64();
    outcome((rho - 0.8987).abs() <= RHO_TOL && secs < 1.0, format!("rho(T) = {rho:.6} (expected 0.8987), {secs:.3} s"))
}

fn table_outcome(table: Table, budget: Option<f64>) -> Outcome {
    let t0 = Instant::now();
    let rep = tables::reproduce(table, RHO_TOL, Execution::Parallel).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let cells: Vec<String> = rep.cells.iter().map(|c| format!("{}={}", c.id, fmt_cell(c.computed))).collect();
    let failed: Vec<String> = rep.failures().map(|c| format!("{} computed {} vs {}", c.id, fmt_cell(c.computed), c.paper)).collect();
    let time_ok = budget.is_none_or(|b| secs < b);
    let mut detail = format!("{} ({secs:.2} s)", cells.join(" "));
    if !failed.is_empty() {
        detail.push_str(&format!("; failing: {}", failed.join(", ")));
    }
    outcome(rep.passes() && time_ok, detail)
}

fn fmt_cell(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x}")
    } else {
        format!("{x:.4}")
    }
}

fn c4_bgaor_table() -> Outcome {
    let base = table_outcome(Table::T53, None);
    let radii: Vec<f64> = T53_CELLS.iter().map(|&((g, w), _)| tables::bgaor_radius(g, w).unwrap()).collect();
    let argmin = radii.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
    let at_unit = T53_CELLS[argmin].0 == (1.0, 1.0);
    outcome(base.pass && at_unit, format!("{}; argmin at {:?}", base.detail, T53_CELLS[argmin].0))
}

fn random_lemma_case(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = rng.random_range(1..=4);
        let k = rng.random_range(1..=2);
        let r = rng.random_range(1..=3);
        let complex = rng.random_bool(0.5);
        let a = generators::random_block_hermitian(&mut rng, m, k, 0.3, 1.5, complex);
        let Ok(ms) = generators::random_index_multisplitting(&mut rng, &a, r) else { continue };
        return (iteration_matrix(&ms).spectral_radius().unwrap(), hat_spectral_radius(&ms).unwrap());
    }
}

fn c5_lemma() -> Outcome {
    let t0 = Instant::now();
    let results: Vec<(f64, f64)> = (0..100u64).into_par_iter().map(|i| random_lemma_case(0x5eed_0000 + i)).collect();
    let secs = t0.elapsed().as_secs_f64();
    let worst = results
        .iter()
        .map(|&(t, h)| (t - h).abs() / t.max(1.0))
        .fold(0.0, f64::max);
    outcome(worst <= LEMMA_REL_TOL && secs < 30.0, format!("100 cases, worst |rho(T) - rho(hat)| / max(1, rho) = {worst:.2e}, {secs:.2} s"))
}

struct HCase {
    rho_multi: f64,
    rho_bgaor: f64,
    solves_converged: bool,
}

fn converges(ms: &Multisplitting) -> bool {
    let a = ms.a();
    let b = a.matvec(&BlockVector::ones(a.m(), a.k())).unwrap();
    let stop = StopRule::rel_diff(1e-10).with_max_iters(100_000).unwrap();
    let rep = solve_multisplitting(ms, &b, &BlockVector::zeros(a.m(), a.k()), &SolveOptions::new(stop).serial()).unwrap();
    rep.terminated == Termination::Converged && rep.final_x.dist2(&BlockVector::ones(a.m(), a.k())) < 1e-6 * (a.dim() as f64).sqrt()
}

fn random_h_case(seed: u64) -> HCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=5);
    let k = rng.random_range(1..=3);
    let r = rng.random_range(1..=4);
    let (a, _) = generators::random_h_matrix(&mut rng, m, k);
    let qs = generators::random_index_sets(&mut rng, m, r);
    let ws = generators::random_weights(&mut rng, m, r);
    let multi = multisplit_from_index_sets(&a, &qs, &ws).unwrap();
    let triples = generators::random_triples(&mut rng, m, r, 0.1);
    let ws = generators::random_weights(&mut rng, m, r);
    let bgaor = gaor_multisplitting(&a, &triples, &ws).unwrap();
    HCase {
        rho_multi: iteration_matrix(&multi).spectral_radius().unwrap(),
        rho_bgaor: iteration_matrix(&bgaor).spectral_radius().unwrap(),
        solves_converged: converges(&multi) && converges(&bgaor),
    }
}

fn c6_h_matrices() -> Outcome {
    let cases: Vec<HCase> = (0..50u64).into_par_iter().map(|i| random_h_case(0x4a11_0000 + i)).collect();
    let max_multi = cases.iter().map(|c| c.rho_multi).fold(0.0, f64::max);
    let max_bgaor = cases.iter().map(|c| c.rho_bgaor).fold(0.0, f64::max);
    let all_conv = cases.iter().all(|c| c.solves_converged);
    outcome(
        max_multi < 1.0 && max_bgaor < 1.0 && all_conv,
        format!("50 certified H-matrices: max rho(T) = {max_multi:.4}, max rho(L) = {max_bgaor:.4}, all solves converged: {all_conv}"),
    )
}

fn c7_extrapolation() -> Outcome {
    let (_, ms) = generators::example_5_1();
    let t = iteration_matrix(&ms);
    let rho = t.spectral_radius().unwrap();
    let iv = extrapolation_interval(rho).unwrap();
    let radius = |tau: f64| eigenvalues(&t.extrapolated(tau).t).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let inside: Vec<(f64, f64)> = [0.1, 0.5, 1.0].iter().map(|&tau| (tau, radius(tau))).collect();
    let outside_tau = iv.hi + 0.2;
    let outside = radius(outside_tau);
    let pass = inside.iter().all(|&(tau, r)| iv.contains(tau) && r < 1.0) && outside >= 1.0;
    let listed: Vec<String> = inside.iter().map(|(tau, r)| format!("rho(T({tau})) = {r:.4}")).collect();
    outcome(pass, format!("{}, rho(T({outside_tau:.4})) = {outside:.4}", listed.join(", ")))
}

fn c8_determinism() -> Outcome {
    let r = 6;
    let (m, b, _) = generators::example_5_2();
    let ms = generators::example_5_2_multisplitting(r, generators::table_5_1_weights(r)).unwrap();
    let x0 = BlockVector::ones(m.m(), m.k());
    let opts = SolveOptions::new(tables::table_stop_rule()).recording();
    let serial = solve_multisplitting(&ms, &b, &x0, &opts.clone().serial()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(r).build().unwrap();
    let parallel = pool.install(|| solve_multisplitting(&ms, &b, &x0, &opts)).unwrap();
    let bits = |rep: &msplit::SolveReport| -> Vec<u64> {
        rep.iterates.iter().flat_map(|x| x.as_dense().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()])).collect()
    };
    let same = serial.iterations == parallel.iterations && !serial.iterates.is_empty() && bits(&serial) == bits(&parallel);
    outcome(same, format!("{} iterates compared bitwise across serial and {r}-worker runs", serial.iterates.len()))
}

struct EllipticRow {
    label: String,
    converged: bool,
    count_unit: usize,
    count_half: usize,
    rate: f64,
    rho: f64,
}

fn elliptic_row(n: usize, case: EllipticCase) -> EllipticRow {
    let params = EllipticParams::case(n, n, case).unwrap();
    let a = generators::elliptic_matrix(&params).unwrap();
    let b = a.matvec(&BlockVector::ones(a.m(), a.k())).unwrap();
    let x0 = BlockVector::zeros(a.m(), a.k());
    let opts = SolveOptions::new(StopRule::rel_diff(1e-6));
    let run = |g: f64, w: f64| {
        let ms = generators::elliptic_multisplitting(&params, g, w).unwrap();
        (solve_multisplitting(&ms, &b, &x0, &opts).unwrap(), ms)
    };
    let (main, ms) = run(0.7, 1.0);
    let (unit, _) = run(1.0, 1.0);
    let (half, _) = run(0.5, 1.0);
    EllipticRow {
        label: format!("n={n} {case:?}"),
        converged: main.terminated == Termination::Converged,
        count_unit: unit.iterations,
        count_half: half.iterations,
        rate: asymptotic_rate(&main).unwrap(),
        rho: iteration_matrix(&ms).spectral_radius().unwrap(),
    }
}

fn c9_elliptic() -> Outcome {
    let rows: Vec<EllipticRow> = [5, 7, 11]
        .into_iter()
        .flat_map(|n| [EllipticCase::Quarter, EllipticCase::Sixth].map(|c| (n, c)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n, c)| elliptic_row(n, c))
        .collect();
    let pass = rows.iter().all(|r| r.converged && r.count_unit <= r.count_half && (r.rate - r.rho).abs() <= RATE_TOL);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("{}: iters(1,1)={} iters(0.5,1)={} rate={:.4} rho={:.4}", r.label, r.count_unit, r.count_half, r.rate, r.rho))
        .collect();
    outcome(pass, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 example 5.1 spectral radius", c1_example_51),
        ("2 table 5.1 radii and counts", || table_outcome(Table::T51, Some(10.0))),
        ("3 table 5.2 radii and counts", || table_outcome(Table::T52, None)),
        ("4 table 5.3 BGAOR radii and argmin", c4_bgaor_table),
        ("5 hat splitting radius equality", c5_lemma),
        ("6 H-matrix convergence suite", c6_h_matrices),
        ("7 extrapolation interval boundary", c7_extrapolation),
        ("8 serial/parallel determinism", c8_determinism),
        ("9 elliptic family properties", c9_elliptic),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!("criterion {name}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
