use std::f64::consts::FRAC_PI_4;

use homodyne_u2::estimation::Moments;
use homodyne_u2::linalg;
use homodyne_u2::*;
use proptest::prelude::*;

fn headline() -> OperatingPoint {
    OperatingPoint::tuned(
        NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4),
        &TuningConstants::new(0.5, 0.5, 0.0),
        &ResourceSplit::new(10.0, 0.5).unwrap(),
    )
    .unwrap()
}

/// The score has zero mean and covariance `M F` under the true model.
#[test]
fn score_moments_reproduce_fisher() {
    let p = headline();
    let m = 20;
    let reps = 20_000;
    let mut sum = [0.0; 4];
    let mut outer = [[0.0; 4]; 4];
    for rep in 0..reps {
        let data = simulate(&p, m, 1_000_000 + rep).unwrap();
        let g = score(&p.params, &data, &p.settings, &p.probe).unwrap();
        for i in 0..4 {
            sum[i] += g[i];
            for j in 0..4 {
                outer[i][j] += g[i] * g[j];
            }
        }
    }
    let f = fisher_matrix(&p.params, &p.settings, &p.probe)
        .unwrap()
        .f_total;
    let n = reps as f64;
    for i in 0..4 {
        let sd = (m as f64 * f[i][i]).sqrt();
        assert!((sum[i] / n).abs() < 4.0 * sd / n.sqrt(), "mean score {i}");
        let empirical = outer[i][i] / n / m as f64;
        assert!(
            (empirical / f[i][i] - 1.0).abs() < 0.05,
            "F[{i}][{i}]: {empirical} vs {}",
            f[i][i]
        );
    }
}

#[test]
fn ideal_data_returns_truth() {
    let p = headline();
    let data = SampleSet {
        outcomes: vec![p.stats().mean; 50],
        seed: 0,
        generation: Some(p),
    };
    // Σ is pinned by nothing here, so only φ1's equation is a clean fixed point.
    let phi1 = fit_phi1_only(&data, &p.settings, &p.probe, &p.params).unwrap();
    assert!((phi1 - p.params.phi1).abs() < 1e-12);
    let g = score(&p.params, &data, &p.settings, &p.probe).unwrap();
    assert!(g[1].abs() < 1e-9);
}

#[test]
fn mirror_estimates_are_indistinguishable() {
    let p = headline();
    let data = simulate(&p, 200, 31).unwrap();
    let fit = mle_fit(&data, &p.settings, &p.probe, &p.params).unwrap();
    let twin = mirror_equivalent(&fit.estimate, &p.settings);
    let a = log_likelihood(&fit.estimate, &data, &p.settings, &p.probe).unwrap();
    let b = log_likelihood(&twin, &data, &p.settings, &p.probe).unwrap();
    assert!((a - b).abs() < 1e-9 * a.abs());
    assert!((twin.phi3 - fit.estimate.phi3).abs() > 1e-3);
}

#[test]
fn monte_carlo_is_reproducible_and_thread_independent() {
    let truth = NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4);
    let k = TuningConstants::new(0.5, 0.5, 0.0);
    let split = ResourceSplit::new(10.0, 0.5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo(&truth, &k, &split, 50, 40, 2025).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert_eq!(one.trials, 40);
    assert_eq!(one.converged + one.excluded, 40);
}

#[test]
fn monte_carlo_rejects_bad_input() {
    let truth = NetworkParams::new(0.3, 0.8, 0.5, FRAC_PI_4);
    let k = TuningConstants::new(0.5, 0.5, 0.0);
    let split = ResourceSplit::new(10.0, 0.5).unwrap();
    assert!(monte_carlo(&truth, &k, &split, 0, 10, 1).is_err());
    assert!(monte_carlo(&truth, &k, &split, 10, 1, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn likelihood_ignores_sample_order(seed in 0u64..1000, rot in 0usize..37) {
        let p = headline();
        let mut data = simulate(&p, 37, seed).unwrap();
        let cand = NetworkParams::new(0.31, 0.79, 0.52, 0.77);
        let a = log_likelihood(&cand, &data, &p.settings, &p.probe).unwrap();
        data.outcomes.rotate_left(rot);
        let b = log_likelihood(&cand, &data, &p.settings, &p.probe).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn moments_are_translation_covariant(shift0 in -5.0..5.0f64, shift1 in -5.0..5.0f64) {
        let p = headline();
        let data = simulate(&p, 25, 4).unwrap();
        let moved: Vec<[f64; 2]> = data.outcomes.iter().map(|x| [x[0] + shift0, x[1] + shift1]).collect();
        let (a, b) = (data.moments(), Moments::of(&moved));
        prop_assert!((b.mean[0] - a.mean[0] - shift0).abs() < 1e-12);
        prop_assert!(linalg::max_abs_diff2(&a.scatter, &b.scatter) < 1e-12);
    }
}
