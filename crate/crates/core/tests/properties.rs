use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use msplit::analysis::{hat_spectral_radius, iteration_matrix};
use msplit::blockcore::{comparison_matrix, find_m_certificate, hermitian_abs, hermitian_eigenvalues, verify_m_certificate, CertificateStrategy};
use msplit::generators;
use msplit::solver::{solve_bgaor, solve_extrapolated, solve_multisplitting, step_multisplitting, step_multisplitting_with, Execution};
use msplit::splitting::{gaor_multisplitting, multisplit_from_index_sets, IndexSetSplit, Multisplitting};
use msplit::{BlockMatrix, BlockVector, BlockWeights, Dense, SolveOptions, StopRule, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_hermitian(seed: u64, k: usize) -> Dense {
    let mut r = rng(seed);
    let x = Dense::from_fn(k, k, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    (&x + x.adjoint()) * C64::new(0.5, 0.0)
}

fn max_abs(d: &Dense) -> f64 {
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_permutation(r: &mut ChaCha8Rng, m: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        p.swap(i, r.random_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_abs_squares_to_square(seed in any::<u64>(), k in 1usize..5) {
        let h = random_hermitian(seed, k);
        let a = hermitian_abs(&h).unwrap();
        prop_assert!(max_abs(&(&a - a.adjoint())) < 1e-12);
        prop_assert!(max_abs(&(&a * &a - &h * &h)) < 1e-10);
        let ev = hermitian_eigenvalues(&a).unwrap();
        prop_assert!(ev[0] > -1e-12);
        let mut abs_h: Vec<f64> = hermitian_eigenvalues(&h).unwrap().iter().map(|l| l.abs()).collect();
        abs_h.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&abs_h) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_abs_is_homogeneous(seed in any::<u64>(), k in 1usize..4, c in -5.0f64..5.0) {
        let h = random_hermitian(seed, k);
        let lhs = hermitian_abs(&(&h * C64::new(c, 0.0))).unwrap();
        let rhs = hermitian_abs(&h).unwrap() * C64::new(c.abs(), 0.0);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-10 * (1.0 + c.abs()));
    }

    #[test]
    fn comparison_matrix_is_idempotent(seed in any::<u64>(), m in 1usize..5, k in 1usize..4) {
        let a = generators::random_block_hermitian(&mut rng(seed), m, k, 0.5, 1.5, true);
        let mu = comparison_matrix(&a).unwrap();
        let mu2 = comparison_matrix(&mu).unwrap();
        prop_assert!(max_abs(&(mu.as_dense() - mu2.as_dense())) < 1e-10 * (1.0 + max_abs(mu.as_dense())));
    }

    #[test]
    fn certificates_are_scale_and_permutation_invariant(seed in any::<u64>(), m in 2usize..5, k in 1usize..3, c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let (a, report) = generators::random_h_matrix(&mut r, m, k);
        let mu = comparison_matrix(&a).unwrap();
        let u = report.h_certificate.unwrap();
        let scaled: Vec<f64> = u.iter().map(|x| x * c).collect();
        prop_assert!(verify_m_certificate(&mu, &scaled).unwrap());
        let perm = random_permutation(&mut r, m);
        let mut pu = vec![0.0; m];
        for (i, &x) in u.iter().enumerate() {
            pu[perm[i]] = x;
        }
        prop_assert!(verify_m_certificate(&mu.permute_blocks(&perm), &pu).unwrap());
    }

    #[test]
    fn block_diagonally_dominant_blocks_certify(seed in any::<u64>(), m in 1usize..5, k in 1usize..3) {
        let a = generators::random_block_hermitian(&mut rng(seed), m, k, 1.05, 2.0, true);
        let mu = comparison_matrix(&a).unwrap();
        prop_assert!(find_m_certificate(&mu, CertificateStrategy::Auto).is_some());
    }

    #[test]
    fn radius_is_permutation_invariant(seed in any::<u64>(), m in 2usize..5, k in 1usize..3, r_count in 1usize..4) {
        let mut r = rng(seed);
        let a = generators::random_block_hermitian(&mut r, m, k, 0.8, 1.5, false);
        let qs = generators::random_index_sets(&mut r, m, r_count);
        let ws = generators::random_weights(&mut r, m, r_count);
        let perm = random_permutation(&mut r, m);
        let Ok(ms) = multisplit_from_index_sets(&a, &qs, &ws) else { return Ok(()) };
        let pq: Vec<IndexSetSplit> = qs.iter().map(|q| q.permuted(&perm)).collect();
        let pw: Vec<BlockWeights> = ws.iter().map(|w| w.permuted(&perm)).collect();
        let pms = multisplit_from_index_sets(&a.permute_blocks(&perm), &pq, &pw).unwrap();
        let rho = iteration_matrix(&ms).spectral_radius().unwrap();
        let prho = iteration_matrix(&pms).spectral_radius().unwrap();
        prop_assume!(rho > 1e-2);
        prop_assert!((rho - prho).abs() < 1e-8 * rho.max(1.0), "{} vs {}", rho, prho);
    }

    #[test]
    fn exact_solution_is_a_fixed_point(seed in any::<u64>(), m in 1usize..5, k in 1usize..3, r_count in 1usize..4) {
        let mut r = rng(seed);
        let a = generators::random_block_hermitian(&mut r, m, k, 0.8, 1.5, true);
        let Ok(ms) = generators::random_index_multisplitting(&mut r, &a, r_count) else { return Ok(()) };
        let x = BlockVector::from_real(&(0..m * k).map(|i| (i as f64).sin() + 2.0).collect::<Vec<_>>(), m, k).unwrap();
        let b = a.matvec(&x).unwrap();
        let y = step_multisplitting(&ms, &b, &x).unwrap();
        prop_assert!(y.dist2(&x) < 1e-9 * x.norm2());
    }

    #[test]
    fn hat_pair_shares_radius(seed in any::<u64>(), m in 1usize..5, k in 1usize..3, r_count in 1usize..4) {
        let mut r = rng(seed);
        let a = generators::random_block_hermitian(&mut r, m, k, 0.3, 1.5, true);
        let Ok(ms) = generators::random_index_multisplitting(&mut r, &a, r_count) else { return Ok(()) };
        let rho = iteration_matrix(&ms).spectral_radius().unwrap();
        // near-nilpotent T: the defective zero eigenvalue is smeared to ~eps^(1/p), up to 2e-3 here
        prop_assume!(rho > 1e-2);
        let hat = hat_spectral_radius(&ms).unwrap();
        prop_assert!((rho - hat).abs() <= 1e-8 * rho.max(1.0), "{} vs {}", rho, hat);
    }

    #[test]
    fn bgaor_matches_explicit_splitting(seed in any::<u64>(), m in 2usize..5, k in 1usize..3, r_count in 1usize..4) {
        let mut r = rng(seed);
        let (a, _) = generators::random_h_matrix(&mut r, m, k);
        let triples = generators::random_triples(&mut r, m, r_count, 0.1);
        let ws = generators::random_weights(&mut r, m, r_count);
        let ms = gaor_multisplitting(&a, &triples, &ws).unwrap();
        let explicit: Vec<(BlockMatrix, BlockWeights)> = triples
            .iter()
            .zip(&ws)
            .map(|(t, w)| {
                let (d, l, _) = t.parts(&a);
                (d.sub(&l.scale(t.gamma)).unwrap().scale(1.0 / t.omega), w.clone())
            })
            .collect();
        let reference = Multisplitting::from_m(&a, explicit).unwrap();
        let t1 = iteration_matrix(&ms).t;
        let t2 = iteration_matrix(&reference).t;
        prop_assert!(max_abs(&(t1 - t2)) < 1e-10);

        let b = a.matvec(&BlockVector::ones(m, k)).unwrap();
        let opts = SolveOptions::new(StopRule::rel_diff(1e-8));
        let x0 = BlockVector::zeros(m, k);
        let direct = solve_bgaor(&a, &b, &triples, &ws, &x0, &opts).unwrap();
        let via_ms = solve_multisplitting(&ms, &b, &x0, &opts).unwrap();
        prop_assert_eq!(direct.final_x, via_ms.final_x);
    }

    #[test]
    fn unit_bgaor_with_empty_r_is_triangular(seed in any::<u64>(), m in 2usize..5, k in 1usize..3) {
        // γ = ω = 1 with S strictly lower gives the block lower triangle as M
        let (a, _) = generators::random_h_matrix(&mut rng(seed), m, k);
        let t = msplit::TripleSplit::standard(m, 1.0, 1.0).unwrap();
        let ms = gaor_multisplitting(&a, &[t], &[BlockWeights::uniform(m, 1.0)]).unwrap();
        prop_assert_eq!(&ms.part(0).m, &a.masked(|i, j| i >= j));
    }

    #[test]
    fn serial_and_parallel_steps_agree(seed in any::<u64>(), m in 1usize..5, k in 1usize..3, r_count in 1usize..5) {
        let mut r = rng(seed);
        let a = generators::random_block_hermitian(&mut r, m, k, 0.8, 1.5, true);
        let Ok(ms) = generators::random_index_multisplitting(&mut r, &a, r_count) else { return Ok(()) };
        let b = BlockVector::ones(m, k);
        let x = BlockVector::from_real(&(0..m * k).map(|i| i as f64 * 0.3).collect::<Vec<_>>(), m, k).unwrap();
        let s = step_multisplitting_with(&ms, &b, &x, Execution::Serial).unwrap();
        let p = step_multisplitting_with(&ms, &b, &x, Execution::Parallel).unwrap();
        prop_assert_eq!(s, p);
    }

    #[test]
    fn unit_extrapolation_is_plain_iteration(seed in any::<u64>(), m in 1usize..4, k in 1usize..3) {
        let mut r = rng(seed);
        let (a, _) = generators::random_h_matrix(&mut r, m.max(2), k);
        let ms = generators::random_index_multisplitting(&mut r, &a, 2).unwrap();
        let b = a.matvec(&BlockVector::ones(a.m(), k)).unwrap();
        let x0 = BlockVector::zeros(a.m(), k);
        let opts = SolveOptions::new(StopRule::rel_diff(1e-8));
        let plain = solve_multisplitting(&ms, &b, &x0, &opts).unwrap();
        let ext = solve_extrapolated(&ms, &b, &x0, 1.0, &opts).unwrap();
        prop_assert_eq!(plain.final_x, ext.final_x);
        prop_assert_eq!(plain.norms, ext.norms);
    }

    #[test]
    fn refined_weights_sum_to_one(seed in any::<u64>(), m in 1usize..6, r_count in 1usize..5, factor in 1usize..4) {
        let ws = generators::random_weights(&mut rng(seed), m, r_count);
        for i in 0..m * factor {
            let s: f64 = ws.iter().map(|w| w.refine(factor).as_slice()[i]).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}
