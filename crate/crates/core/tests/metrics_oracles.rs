//! Metric oracles: the sorted 1-D transport against an assignment-LP
//! solver, MMD²/energy against naive compensated double loops, sliced W1
//! against the analytic value for shifted Gaussians, plus the symmetry /
//! permutation / translation invariants as property tests.

use lightsb_ou::{energy_distance, metrics, mmd2, sliced_w1, w1_1d, PointCloud};
use lightsb_ou_testkit as oracle;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn w1_1d_equals_assignment_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57A7);
    for _ in 0..10 {
        let n = 50;
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..6.0)).collect();
        let fast = w1_1d(&a, &b).unwrap();
        let lp = oracle::ot_1d_by_assignment(&a, &b);
        assert!((fast - lp).abs() <= 1e-10, "{fast} vs {lp}");
    }
}

#[test]
fn mmd2_equals_naive_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF00D);
    for _ in 0..5 {
        let n = 30;
        let d = 3;
        let gamma = rng.random_range(0.2..2.0);
        let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = PointCloud::new(d, xs, "x").unwrap();
        let y = PointCloud::new(d, ys, "y").unwrap();

        let fast = mmd2(&x, &y, gamma).unwrap();
        let kernel_mean = |a: &PointCloud, b: &PointCloud| {
            oracle::kahan_sum(a.rows().flat_map(|ra| {
                b.rows().map(move |rb| {
                    let sq: f64 = ra.iter().zip(rb).map(|(p, q)| (p - q) * (p - q)).sum();
                    (-gamma * sq).exp()
                })
            })) / (a.len() as f64 * b.len() as f64)
        };
        let naive = kernel_mean(&x, &x) + kernel_mean(&y, &y) - 2.0 * kernel_mean(&x, &y);
        assert!(
            (fast - naive).abs() <= 1e-12 * naive.abs().max(1.0),
            "{fast} vs {naive}"
        );
    }
}

#[test]
fn energy_equals_naive_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE4E);
    for _ in 0..5 {
        let n = 30;
        let d = 2;
        let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..3.0)).collect();
        let x = PointCloud::new(d, xs, "x").unwrap();
        let y = PointCloud::new(d, ys, "y").unwrap();

        let fast = energy_distance(&x, &y).unwrap();
        let dist_mean = |a: &PointCloud, b: &PointCloud| {
            oracle::kahan_sum(a.rows().flat_map(|ra| {
                b.rows().map(move |rb| {
                    ra.iter()
                        .zip(rb)
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum::<f64>()
                        .sqrt()
                })
            })) / (a.len() as f64 * b.len() as f64)
        };
        let naive = 2.0 * dist_mean(&x, &y) - dist_mean(&x, &x) - dist_mean(&y, &y);
        assert!(
            (fast - naive).abs() <= 1e-12 * naive.abs().max(1.0),
            "{fast} vs {naive}"
        );
    }
}

#[test]
fn sliced_w1_of_shifted_gaussians_matches_mc_oracle() {
    // Unit Gaussians in d = 2 separated by Δ = (2, 0). For any direction θ
    // the projected laws are unit Gaussians shifted by ⟨Δ, θ⟩, whose W1 is
    // |⟨Δ, θ⟩|; the sliced value is its sphere average, estimated here with
    // a 1e7-draw Monte Carlo oracle (analytically 4/π in d = 2).
    //
    // The direction average has standard deviation ≈ 0.62, so 100
    // projections leave ~5% sampling noise; 4000 projections bring the
    // comparison inside the 2% band.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1E);
    let mut mc = 0.0;
    let n_mc = 10_000_000;
    for _ in 0..n_mc {
        let g1: f64 = rng.sample(rand_distr::StandardNormal);
        let g2: f64 = rng.sample(rand_distr::StandardNormal);
        let norm = (g1 * g1 + g2 * g2).sqrt();
        mc += (2.0 * g1 / norm).abs();
    }
    mc /= n_mc as f64;
    assert!(
        (mc - 4.0 / std::f64::consts::PI).abs() < 1e-3,
        "oracle sanity: {mc}"
    );

    let n = 10_000;
    let make = |shift: f64, seed: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n)
            .flat_map(|_| {
                let a: f64 = r.sample(rand_distr::StandardNormal);
                let b: f64 = r.sample(rand_distr::StandardNormal);
                [a + shift, b]
            })
            .collect();
        PointCloud::new(2, data, "gauss").unwrap()
    };
    let x = make(0.0, 1);
    let y = make(2.0, 2);
    let sliced = sliced_w1(&x, &y, 4000, 3).unwrap();
    assert!(
        (sliced - mc).abs() <= 0.02 * mc,
        "sliced {sliced} vs oracle {mc}"
    );
}

fn arb_cloud(n: usize, d: usize) -> impl Strategy<Value = PointCloud> {
    proptest::collection::vec(-50.0..50.0f64, n * d)
        .prop_map(move |data| PointCloud::new(d, data, "prop").unwrap())
}

fn permuted(cloud: &PointCloud, order: &[usize]) -> PointCloud {
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| cloud.row(i).to_vec()).collect();
    PointCloud::from_rows(&rows, "perm").unwrap()
}

fn shifted(cloud: &PointCloud, delta: &[f64]) -> PointCloud {
    let rows: Vec<Vec<f64>> = cloud
        .rows()
        .map(|r| r.iter().zip(delta).map(|(v, s)| v + s).collect())
        .collect();
    PointCloud::from_rows(&rows, "shift").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn metrics_are_symmetric(
        x in arb_cloud(12, 2),
        y in arb_cloud(12, 2),
        seed in 0u64..1000,
    ) {
        prop_assert!((mmd2(&x, &y, 0.5).unwrap() - mmd2(&y, &x, 0.5).unwrap()).abs() < 1e-12);
        prop_assert!(
            (energy_distance(&x, &y).unwrap() - energy_distance(&y, &x).unwrap()).abs() < 1e-12
        );
        // Shared projection seed: per-direction 1-D transport is symmetric.
        prop_assert_eq!(
            sliced_w1(&x, &y, 16, seed).unwrap().to_bits(),
            sliced_w1(&y, &x, 16, seed).unwrap().to_bits()
        );
    }

    #[test]
    fn metrics_are_permutation_invariant(
        x in arb_cloud(10, 2),
        y in arb_cloud(10, 2),
        perm_seed in 0u64..1000,
    ) {
        let mut order: Vec<usize> = (0..10).collect();
        // Fisher-Yates with a deterministic toy generator.
        let mut state = perm_seed.wrapping_add(1);
        for i in (1..10).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let xp = permuted(&x, &order);
        let yp = permuted(&y, &order);
        // Sorting-based paths are bit-exact; pairwise sums to 1e-12.
        prop_assert_eq!(
            sliced_w1(&x, &y, 8, 5).unwrap().to_bits(),
            sliced_w1(&xp, &yp, 8, 5).unwrap().to_bits()
        );
        prop_assert!((mmd2(&x, &y, 0.7).unwrap() - mmd2(&xp, &yp, 0.7).unwrap()).abs() < 1e-12);
        prop_assert!(
            (energy_distance(&x, &y).unwrap() - energy_distance(&xp, &yp).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn shift_invariance_of_sliced_w1_and_energy(
        x in arb_cloud(10, 2),
        y in arb_cloud(10, 2),
        dx in -20.0..20.0f64,
        dy in -20.0..20.0f64,
    ) {
        let delta = [dx, dy];
        let xs = shifted(&x, &delta);
        let ys = shifted(&y, &delta);
        let base = sliced_w1(&x, &y, 16, 9).unwrap();
        let moved = sliced_w1(&xs, &ys, 16, 9).unwrap();
        prop_assert!((base - moved).abs() < 1e-12, "{base} vs {moved}");
        let e_base = energy_distance(&x, &y).unwrap();
        let e_moved = energy_distance(&xs, &ys).unwrap();
        prop_assert!((e_base - e_moved).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_nonnegative_and_zero_on_self(
        x in arb_cloud(10, 2),
        y in arb_cloud(10, 2),
    ) {
        prop_assert!(sliced_w1(&x, &y, 8, 1).unwrap() >= 0.0);
        prop_assert!(mmd2(&x, &y, 0.5).unwrap() >= -1e-12);
        prop_assert!(energy_distance(&x, &y).unwrap() >= -1e-12);
        prop_assert_eq!(sliced_w1(&x, &x, 8, 1).unwrap(), 0.0);
        prop_assert!(mmd2(&x, &x, 0.5).unwrap().abs() < 1e-12);
        prop_assert!(energy_distance(&x, &x).unwrap().abs() < 1e-12);
    }
}

#[test]
fn coverage_equals_mode_count_for_samples_at_all_means() {
    let spec = lightsb_ou::make_25gauss(lightsb_ou::MixtureVariant::Standard, 0);
    let rows: Vec<Vec<f64>> = spec.modes.iter().map(|m| m.mean.clone()).collect();
    let at_means = PointCloud::from_rows(&rows, "means").unwrap();
    assert_eq!(
        metrics::mode_coverage(&at_means, &spec.modes, 0.9).unwrap(),
        25
    );
}
