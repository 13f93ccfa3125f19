//! Trainer-level oracles: recovery of a constructed ground-truth potential
//! from a point-mass source, the excess-risk monitor, and the algebraic
//! properties of the grid sweep.

use lightsb_ou::{
    excess_risk, grid_sweep, run_cell, train, DatasetSource, GaussianMixtureSpec, GaussianMode,
    PointCloud, PotentialModel, SampleProvider, SweepMetric, TrainConfig,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ground-truth setup: with a point-mass source at x0 and a K = 1 potential
/// (r*, S*), the target law is exactly the conditional
/// N(r* + S* m_T(x0)/σ_T², ε S*). Training must recover (r*, S*).
struct Recovery {
    cfg: TrainConfig,
    source: DatasetSource,
    target: GaussianMixtureSpec,
    truth: PotentialModel,
    x0: Vec<f64>,
}

fn recovery_setup(seed: u64) -> Recovery {
    let eps = 0.5;
    let d = 2;
    let cfg = TrainConfig {
        n_steps: 5000,
        batch_size: 256,
        lr: 2e-3,
        seed,
        k: 1,
        eps,
        b: 0.3,
        m_scale: 0.1,
        t_horizon: 1.0,
        d,
        ..TrainConfig::default()
    };
    let ou = cfg.ou_params().unwrap();
    let r_star = vec![1.2, -0.8];
    let s_star = [0.9, 1.4];
    let truth = PotentialModel::new(
        d,
        eps,
        vec![0.0],
        r_star.clone(),
        s_star.iter().map(|s: &f64| s.ln()).collect(),
    )
    .unwrap();

    let x0 = vec![0.5, -0.5];
    let kernel = ou.kernel_at(ou.horizon).unwrap();
    let m_end = ou.mean_t(&kernel, &x0).unwrap();
    let cond_mean: Vec<f64> = (0..d)
        .map(|i| r_star[i] + s_star[i] * m_end[i] / kernel.sigma2_t)
        .collect();
    let cond_cov = vec![eps * s_star[0], 0.0, 0.0, eps * s_star[1]];
    let target = GaussianMixtureSpec {
        modes: vec![GaussianMode {
            mean: cond_mean,
            cov: cond_cov,
            weight: 1.0,
        }],
        seed: 0,
        variant: "ground-truth-conditional".into(),
    };
    let source = DatasetSource::new(PointCloud::new(d, x0.clone(), "point-mass").unwrap());
    Recovery {
        cfg,
        source,
        target,
        truth,
        x0,
    }
}

#[test]
fn k1_ground_truth_potential_is_recovered_within_two_percent() {
    let setup = recovery_setup(2024);
    let report = train(&setup.cfg, &setup.source, &setup.target).unwrap();
    let model = &report.final_model;
    let truth = &setup.truth;
    for i in 0..2 {
        let r_got = model.mean_of(0)[i];
        let r_want = truth.mean_of(0)[i];
        assert!(
            (r_got - r_want).abs() / r_want.abs() < 0.02,
            "mean[{i}]: {r_got} vs {r_want}"
        );
        let s_got = model.log_diag_of(0)[i].exp();
        let s_want = truth.log_diag_of(0)[i].exp();
        assert!(
            (s_got - s_want).abs() / s_want < 0.02,
            "scale[{i}]: {s_got} vs {s_want}"
        );
    }
}

#[test]
fn excess_risk_monitor_shrinks_toward_zero_at_the_truth() {
    let setup = recovery_setup(7);
    let ou = setup.cfg.ou_params().unwrap();

    // Large common evaluation batches.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let zs = PointCloud::new(2, setup.x0.repeat(20_000), "z").unwrap();
    let ys = setup.target.sample(20_000, &mut rng);

    // Untrained model far from the truth.
    let rough =
        PotentialModel::new(2, setup.cfg.eps, vec![0.0], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
    let before = excess_risk(&rough, &setup.truth, &ou, &zs, &ys).unwrap();

    let report = train(&setup.cfg, &setup.source, &setup.target).unwrap();
    let after = excess_risk(&report.final_model, &setup.truth, &ou, &zs, &ys).unwrap();

    assert!(
        before > after,
        "excess risk did not decrease: {before} -> {after}"
    );
    // The dual gap at the optimum is zero up to sampling noise.
    assert!(after.abs() < 0.01, "trained excess risk {after}");
    // The truth against itself is exactly zero.
    assert_eq!(
        excess_risk(&setup.truth, &setup.truth, &ou, &zs, &ys).unwrap(),
        0.0
    );
}

fn tiny_cfg() -> TrainConfig {
    TrainConfig {
        n_steps: 120,
        batch_size: 32,
        lr: 5e-3,
        seed: 5,
        k: 2,
        eps: 0.4,
        d: 2,
        ..TrainConfig::default()
    }
}

fn shifted_target() -> GaussianMixtureSpec {
    GaussianMixtureSpec {
        modes: vec![GaussianMode {
            mean: vec![1.0, -1.0],
            cov: vec![0.3, 0.0, 0.0, 0.3],
            weight: 1.0,
        }],
        seed: 0,
        variant: "shifted".into(),
    }
}

#[test]
fn one_by_one_sweep_equals_direct_cell_run() {
    let base = tiny_cfg();
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let target = shifted_target();
    let table = grid_sweep(
        &base,
        &[0.1],
        &[-0.2],
        SweepMetric::SlicedW1,
        2000,
        &source,
        &target,
        None,
    )
    .unwrap();
    assert_eq!(table.len(), 1);
    let row = &table[0];
    let direct_cfg = TrainConfig {
        b: 0.1,
        m_scale: -0.2,
        seed: row.seed,
        ..base
    };
    let direct = run_cell(
        &direct_cfg,
        SweepMetric::SlicedW1,
        2000,
        &source,
        &target,
        None,
    )
    .unwrap();
    assert_eq!(row.outcome.as_ref().unwrap().to_bits(), direct.to_bits());
}

#[test]
fn sweep_rows_are_invariant_under_grid_permutation() {
    let base = tiny_cfg();
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let target = shifted_target();
    let forward = grid_sweep(
        &base,
        &[0.0, 0.15],
        &[-0.2, 0.2],
        SweepMetric::Energy,
        1500,
        &source,
        &target,
        None,
    )
    .unwrap();
    let reversed = grid_sweep(
        &base,
        &[0.15, 0.0],
        &[0.2, -0.2],
        SweepMetric::Energy,
        1500,
        &source,
        &target,
        None,
    )
    .unwrap();
    assert_eq!(forward.len(), 4);
    for row in &forward {
        let twin = reversed
            .iter()
            .find(|r| r.b == row.b && r.m_scale == row.m_scale)
            .expect("cell present in both orders");
        assert_eq!(row.seed, twin.seed);
        assert_eq!(
            row.outcome.as_ref().unwrap().to_bits(),
            twin.outcome.as_ref().unwrap().to_bits()
        );
    }
}

#[test]
fn sweep_containing_b_zero_reproduces_the_flat_kernel_solver_as_a_cell() {
    // The b = 0 cell of a sweep is plain flat-kernel training: the same
    // cell config run standalone gives the identical value.
    let base = tiny_cfg();
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let target = shifted_target();
    let table = grid_sweep(
        &base,
        &[0.0, 0.2],
        &[0.0],
        SweepMetric::SlicedW1,
        1500,
        &source,
        &target,
        None,
    )
    .unwrap();
    let zero_cell = table.iter().find(|r| r.b == 0.0).unwrap();
    let direct_cfg = TrainConfig {
        b: 0.0,
        m_scale: 0.0,
        seed: zero_cell.seed,
        ..base
    };
    let direct = run_cell(
        &direct_cfg,
        SweepMetric::SlicedW1,
        1500,
        &source,
        &target,
        None,
    )
    .unwrap();
    assert_eq!(
        zero_cell.outcome.as_ref().unwrap().to_bits(),
        direct.to_bits()
    );
}

#[test]
fn sweep_marks_failed_cells_without_aborting() {
    // An absurd learning rate makes the cell diverge; the sweep keeps going
    // and reports the failure in-row.
    let base = TrainConfig {
        lr: 1e18,
        n_steps: 60,
        ..tiny_cfg()
    };
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let target = shifted_target();
    let table = grid_sweep(
        &base,
        &[0.0],
        &[0.0],
        SweepMetric::SlicedW1,
        500,
        &source,
        &target,
        None,
    )
    .unwrap();
    assert_eq!(table.len(), 1);
    assert!(table[0].outcome.is_err(), "expected a marked failure row");
}

#[test]
fn divergence_guard_returns_last_finite_state() {
    let cfg = TrainConfig {
        lr: 1e18,
        n_steps: 60,
        ..tiny_cfg()
    };
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let target = shifted_target();
    match train(&cfg, &source, &target) {
        Err(lightsb_ou::Error::Diverged { step, last_finite }) => {
            assert!(step < 60);
            assert_eq!(last_finite.loss_trace.len(), step);
            assert!(last_finite.loss_trace.iter().all(|l| l.is_finite()));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn smoothed_loss_decreases_on_the_standard_setup() {
    // Standard 25-Gaussian setup at the tuned hyperparameters (batch 128,
    // eps 0.1, lr 2e-3, K = 30): the quarter-window averages of the loss
    // trace must decrease monotonically.
    let spec = lightsb_ou::make_25gauss(lightsb_ou::MixtureVariant::Standard, 1);
    let source = lightsb_ou::StandardNormalSource { d: 2 };
    let cfg = TrainConfig {
        n_steps: 2000,
        seed: 3,
        ..TrainConfig::default()
    };
    assert_eq!((cfg.batch_size, cfg.eps, cfg.lr, cfg.k), (128, 0.1, 2e-3, 30));
    let report = train(&cfg, &source, &spec).unwrap();
    assert_eq!(report.loss_trace.len(), cfg.n_steps);
    let quarter = cfg.n_steps / 4;
    let windows: Vec<f64> = report
        .loss_trace
        .chunks(quarter)
        .map(|w| w.iter().sum::<f64>() / w.len() as f64)
        .collect();
    for pair in windows.windows(2) {
        assert!(
            pair[1] < pair[0],
            "smoothed loss not decreasing: {windows:?}"
        );
    }
}
