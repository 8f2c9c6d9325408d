mod common;

use common::*;
use proptest::prelude::*;
use tucker_als::parallel::with_threads;
use tucker_als::synth::{gen_tucker, TuckerSpec};
use tucker_als::{als_init, als_low_rank, als_sweep, AlsConfig, AlsStatus, Matrix};

/// `m × n` matrix (`m ≤ n`) with the first `r` singular values 1 and the
/// rest `gap`, plus its exact dominant left subspace and the complement.
fn gapped(seed: u64, m: usize, n: usize, r: usize, gap: f64) -> (Matrix, Matrix, Matrix) {
    let mut g = rng(seed);
    let u = random_orthonormal(&mut g, m, m);
    let v = random_orthonormal(&mut g, n, m);
    let s: Vec<f64> = (0..m).map(|i| if i < r { 1.0 } else { gap }).collect();
    let complement = Matrix::from_fn(m, m - r, |i, j| u.get(i, r + j));
    (with_spectrum(&u, &s, &v), u.leading_cols(r), complement)
}

fn complement_sine(dominant: &Matrix, l: &Matrix) -> f64 {
    subspace_sine(dominant, &gram_schmidt(l))
}

#[test]
fn init_spans_exact_range() {
    let mut g = rng(10);
    let a = naive_matmul(
        &gaussian_matrix(&mut g, 12, 3),
        &gaussian_matrix(&mut g, 3, 15),
    );
    let t = matrix_tensor(&a);
    let basis = gram_schmidt(&a.leading_cols(3));
    for seed in [1, 2, 3] {
        let q = als_init(&t, 1, 3, seed).unwrap();
        assert!(q.orthonormality_defect() <= 1e-12 * 3.0);
        assert!(subspace_sine(&basis, &q) <= 1e-8);
    }
}

#[test]
fn exact_rank_converges_quickly() {
    let s = gen_tucker(&TuckerSpec::new(vec![9, 10, 11], vec![3, 2, 4], 0.0, 3)).unwrap();
    let t = s.noisy;
    for (mode, r) in [(1, 3), (2, 2), (3, 4)] {
        let (pair, rep) = als_low_rank(&t, mode, r, &AlsConfig::default()).unwrap();
        assert_eq!(rep.status, AlsStatus::Converged);
        assert!(
            rep.iterations <= 3,
            "mode {mode}: {} sweeps",
            rep.iterations
        );
        let approx = naive_matmul(&pair.l, &naive_transpose(&pair.r));
        let resid = fro(&Matrix::from_fn(approx.rows(), approx.cols(), |i, j| {
            naive_matricize(&t, mode).get(i, j) - approx.get(i, j)
        }));
        assert!(resid <= 1e-8 * t.frobenius_norm());
    }
}

#[test]
fn subspace_error_contracts_at_predicted_rate() {
    for gap in [0.5, 0.8] {
        let (a, u1, u2) = gapped(11, 200, 300, 10, gap);
        let t = matrix_tensor(&a);
        let mut l = als_init(&t, 1, 10, 5).unwrap();
        let mut errs = vec![subspace_tangent(&u1, &u2, &l)];
        for _ in 0..10 {
            let (pair, _) = als_sweep(&t, 1, &l).unwrap();
            l = pair.l;
            errs.push(subspace_tangent(&u1, &u2, &l));
        }
        let rate = (errs[10] / errs[3]).powf(1.0 / 7.0);
        let predicted = gap * gap;
        assert!(
            (rate / predicted - 1.0).abs() <= 0.2,
            "gap {gap}: rate {rate}, predicted {predicted}"
        );
        if gap == 0.5 {
            let per_sweep: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
            assert!(
                per_sweep.iter().all(|&q| (0.20..=0.30).contains(&q)),
                "{per_sweep:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tight_tolerance_finds_dominant_subspace(
        seed in any::<u64>(),
        r in 1usize..=6,
        gap in 0.001f64..=0.05,
    ) {
        let (a, u1, _) = gapped(seed, 40, 60, r, gap);
        let t = matrix_tensor(&a);
        let cfg = AlsConfig::default().with_eta(1e-8).with_seed(seed);
        let (pair, rep) = als_low_rank(&t, 1, r, &cfg).unwrap();
        prop_assert_eq!(rep.status, AlsStatus::Converged);
        let angle = complement_sine(&u1, &pair.l).min(1.0).asin();
        prop_assert!(angle <= 1e-6, "angle {}", angle);
    }
}

#[test]
fn iteration_cap_is_reported() {
    let (a, _, _) = gapped(13, 30, 40, 3, 0.99);
    let t = matrix_tensor(&a);
    let cfg = AlsConfig::default().with_eta(1e-14).with_max_iters(4);
    let (_, rep) = als_low_rank(&t, 1, 3, &cfg).unwrap();
    assert_eq!(rep.status, AlsStatus::MaxItersReached);
    assert_eq!(rep.iterations, 4);
    assert_eq!(rep.residual_history.len(), 4);
}

#[test]
fn bitwise_identical_across_thread_counts() {
    let s = gen_tucker(&TuckerSpec::new(vec![40, 50, 60], vec![4, 5, 3], 0.05, 1)).unwrap();
    let t = s.noisy;
    let run = |threads| {
        with_threads(threads, || {
            (1..=3)
                .map(|mode| {
                    als_low_rank(&t, mode, 3, &AlsConfig::default().with_seed(8))
                        .unwrap()
                        .0
                })
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    for threads in [2, 4, 8] {
        assert_eq!(run(threads), one);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_history_is_nonincreasing(
        dims in prop::collection::vec(2usize..=7, 2..=4),
        seed in any::<u64>(),
        mode_pick in any::<prop::sample::Index>(),
    ) {
        let t = gaussian_tensor(&mut rng(seed), &dims);
        let mode = mode_pick.index(dims.len()) + 1;
        let cols: usize = dims.iter().product::<usize>() / dims[mode - 1];
        let r = (dims[mode - 1].min(cols) / 2).max(1);
        let cfg = AlsConfig::default().with_eta(1e-10).with_seed(seed);
        let (_, rep) = als_low_rank(&t, mode, r, &cfg).unwrap();
        let slack = 1e-12 * t.frobenius_norm();
        for w in rep.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] + slack, "{:?}", rep.residual_history);
        }
    }
}
