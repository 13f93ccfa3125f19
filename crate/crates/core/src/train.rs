//! Minibatch dual training and the (b, m) grid sweep.
//!
//! Each step draws fresh batches from the source and target providers,
//! evaluates the dual loss with its analytic gradient, and applies one
//! optimizer update. Per-step randomness comes from a seed stream indexed
//! by the global step number, so a run resumed from a checkpoint at step s
//! draws exactly the batches a monolithic run would have drawn at steps
//! s, s+1, ….

use std::time::Instant;

use crate::bridge;
use crate::data::{GaussianMixtureSpec, PointCloud, SampleProvider};
use crate::error::{Error, Result};
use crate::metrics;
use crate::ou::OUParams;
use crate::potential::{PotentialGrad, PotentialModel};
use crate::rng::{self, rng_from_seed};

/// Optimizer choice. Adam is the default; plain SGD matches the literal
/// "gradient descent" reading.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, delta: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            delta: 1e-8,
        }
    }
}

impl OptimizerKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(Self::default()),
            "sgd" | "plain-sgd" => Ok(OptimizerKind::Sgd),
            other => Err(Error::Config(format!(
                "unknown optimizer {other:?} (use adam or sgd)"
            ))),
        }
    }
}

/// Optimizer state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, n_params: usize) -> Self {
        Self {
            kind,
            lr,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step_count: 0,
        }
    }

    /// One in-place descent update of `params` along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                delta,
            } => {
                self.step_count += 1;
                let t = self.step_count as i32;
                let bias1 = 1.0 - beta1.powi(t);
                let bias2 = 1.0 - beta2.powi(t);
                for i in 0..params.len() {
                    let g = grad[i];
                    self.first_moment[i] = beta1 * self.first_moment[i] + (1.0 - beta1) * g;
                    self.second_moment[i] = beta2 * self.second_moment[i] + (1.0 - beta2) * g * g;
                    let m_hat = self.first_moment[i] / bias1;
                    let v_hat = self.second_moment[i] / bias2;
                    params[i] -= self.lr * m_hat / (v_hat.sqrt() + delta);
                }
            }
        }
    }
}

/// Training hyperparameters. `m` in config files is the scalar m_scale;
/// the reference level is m_scale · (1, …, 1).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub n_steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Snapshot cadence; 0 disables intermediate snapshots.
    pub checkpoint_every: usize,
    pub k: usize,
    pub eps: f64,
    pub b: f64,
    pub m_scale: f64,
    pub t_horizon: f64,
    pub d: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_steps: 10_000,
            batch_size: 128,
            lr: 2e-3,
            optimizer: OptimizerKind::default(),
            seed: 0,
            checkpoint_every: 0,
            k: 30,
            eps: 0.1,
            b: 0.0,
            m_scale: 0.0,
            t_horizon: 1.0,
            d: 2,
        }
    }
}

/// On-disk config schema with the conventional hyperparameter field names.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    batch_size: Option<usize>,
    eps: Option<f64>,
    lr: Option<f64>,
    #[serde(rename = "K")]
    k: Option<usize>,
    diagonal: Option<bool>,
    b: Option<f64>,
    m: Option<f64>,
    n_steps: Option<usize>,
    seed: Option<u64>,
    #[serde(rename = "T")]
    t_horizon: Option<f64>,
    d: Option<usize>,
    optimizer: Option<String>,
    checkpoint_every: Option<usize>,
}

impl TrainConfig {
    /// Overlay a TOML config file onto this config. Unknown keys are
    /// rejected; `diagonal = false` is unsupported by the model class.
    pub fn apply_toml_str(mut self, text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(diag) = file.diagonal {
            if !diag {
                return Err(Error::Config(
                    "diagonal = false is not supported: components use diagonal covariances".into(),
                ));
            }
        }
        if let Some(v) = file.batch_size {
            self.batch_size = v;
        }
        if let Some(v) = file.eps {
            self.eps = v;
        }
        if let Some(v) = file.lr {
            self.lr = v;
        }
        if let Some(v) = file.k {
            self.k = v;
        }
        if let Some(v) = file.b {
            self.b = v;
        }
        if let Some(v) = file.m {
            self.m_scale = v;
        }
        if let Some(v) = file.n_steps {
            self.n_steps = v;
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.t_horizon {
            self.t_horizon = v;
        }
        if let Some(v) = file.d {
            self.d = v;
        }
        if let Some(v) = file.optimizer {
            self.optimizer = OptimizerKind::parse(&v)?;
        }
        if let Some(v) = file.checkpoint_every {
            self.checkpoint_every = v;
        }
        Ok(self)
    }

    pub fn apply_toml_file(self, path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        self.apply_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.lr <= 0.0 || self.lr.is_nan() {
            return Err(Error::Config(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if self.k == 0 || self.d == 0 {
            return Err(Error::Config("K and d must be at least 1".into()));
        }
        Ok(())
    }

    pub fn ou_params(&self) -> Result<OUParams> {
        OUParams::isotropic(self.b, self.m_scale, self.eps, self.t_horizon, self.d)
    }
}

/// Training outcome: the loss trace (one entry per step), the final model,
/// optional intermediate snapshots, and the echoed config.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub wall_time_secs: f64,
    pub final_model: PotentialModel,
    pub config: TrainConfig,
    /// Global index of the first step executed (0 unless resumed).
    pub start_step: u64,
    /// (global step, model) pairs captured every `checkpoint_every` steps.
    pub snapshots: Vec<(u64, PotentialModel)>,
}

/// Run the training loop from a fresh initialization.
pub fn train(
    cfg: &TrainConfig,
    source: &dyn SampleProvider,
    target: &dyn SampleProvider,
) -> Result<TrainReport> {
    train_from(cfg, None, source, target)
}

/// Run the training loop, optionally resuming from a previous model at a
/// given global step. Optimizer state always starts fresh; the data stream
/// continues from the given step index.
pub fn train_from(
    cfg: &TrainConfig,
    init: Option<(PotentialModel, u64)>,
    source: &dyn SampleProvider,
    target: &dyn SampleProvider,
) -> Result<TrainReport> {
    cfg.validate()?;
    if source.dim() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: source.dim(),
        });
    }
    if target.dim() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: target.dim(),
        });
    }
    let ou = cfg.ou_params()?;
    let started = Instant::now();

    let (mut model, start_step) = match init {
        Some((model, step)) => {
            if model.d() != cfg.d || model.k() != cfg.k {
                return Err(Error::Config(
                    "checkpointed model shape does not match the config".into(),
                ));
            }
            (model, step)
        }
        None => {
            let init_n = cfg.batch_size.max(128);
            let mut init_rng = rng_from_seed(rng::derive_seed(cfg.seed, "init-data"));
            let init_batch = target.sample(init_n, &mut init_rng);
            let model = PotentialModel::init_from_target(
                cfg.k,
                cfg.eps,
                &init_batch,
                rng::derive_seed(cfg.seed, "init-params"),
            )?;
            (model, 0)
        }
    };

    let mut params = vec![0.0; model.param_len()];
    model.write_params(&mut params);
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.lr, params.len());

    let mut loss_trace = Vec::with_capacity(cfg.n_steps);
    let mut snapshots = Vec::new();
    let mut last_finite: Option<PotentialModel> = None;

    for local_step in 0..cfg.n_steps {
        let global_step = start_step + local_step as u64;
        let mut step_rng = rng_from_seed(rng::derive_indexed(cfg.seed, "train-step", global_step));
        let batch_z = source.sample(cfg.batch_size, &mut step_rng);
        let batch_y = target.sample(cfg.batch_size, &mut step_rng);

        let step_result: Result<(f64, PotentialGrad)> =
            model.loss_and_grad(&ou, &batch_z, &batch_y);
        let (loss, grad) = match step_result {
            Ok(pair) if pair.0.is_finite() => pair,
            _ => {
                // Divergence guard: abort with the last state whose loss
                // evaluated finite. The trace already holds only finite
                // values, so it is the matching prefix.
                let final_model = last_finite.unwrap_or_else(|| model.clone());
                return Err(Error::Diverged {
                    step: global_step as usize,
                    last_finite: Box::new(TrainReport {
                        loss_trace,
                        wall_time_secs: started.elapsed().as_secs_f64(),
                        final_model,
                        config: cfg.clone(),
                        start_step,
                        snapshots,
                    }),
                });
            }
        };
        loss_trace.push(loss);
        last_finite = Some(model.clone());
        optimizer.step(&mut params, &grad.flatten());
        model.read_params(&params);

        if cfg.checkpoint_every > 0 && (local_step + 1) % cfg.checkpoint_every == 0 {
            snapshots.push((global_step + 1, model.clone()));
        }
    }

    Ok(TrainReport {
        loss_trace,
        wall_time_secs: started.elapsed().as_secs_f64(),
        final_model: model,
        config: cfg.clone(),
        start_step,
        snapshots,
    })
}

/// Excess dual risk of `model` over a reference potential on common
/// evaluation samples. For a ground-truth reference this estimates the
/// KL divergence between the optimal coupling and the model's coupling.
pub fn excess_risk(
    model: &PotentialModel,
    reference: &PotentialModel,
    ou: &OUParams,
    batch_z: &PointCloud,
    batch_y: &PointCloud,
) -> Result<f64> {
    let model_loss = model.empirical_loss(ou, batch_z, batch_y)?;
    let reference_loss = reference.empirical_loss(ou, batch_z, batch_y)?;
    Ok(model_loss - reference_loss)
}

/// Which metric a sweep optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMetric {
    SlicedW1,
    Mmd2,
    Energy,
    ModeCoverage,
}

impl SweepMetric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sliced_w1" => Ok(Self::SlicedW1),
            "mmd2" => Ok(Self::Mmd2),
            "energy" => Ok(Self::Energy),
            "mode_coverage" => Ok(Self::ModeCoverage),
            other => Err(Error::Config(format!("unknown sweep metric {other:?}"))),
        }
    }

    /// True when larger values are better (mode coverage).
    pub fn higher_is_better(&self) -> bool {
        matches!(self, SweepMetric::ModeCoverage)
    }
}

/// One row of the sweep table. Failed cells carry the error text instead
/// of a value and sort last.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub b: f64,
    pub m_scale: f64,
    pub seed: u64,
    pub outcome: std::result::Result<f64, String>,
}

/// Train one model per (b, m_scale) grid cell and evaluate the chosen
/// metric on `eval_n` pushforward samples against fresh target samples.
///
/// Each cell derives its seed from the base seed and the cell's parameter
/// values (not its grid position), so permuting the grids permutes rows
/// without changing any row's value. Returns the full table sorted
/// best-first.
#[allow(clippy::too_many_arguments)]
pub fn grid_sweep(
    base: &TrainConfig,
    b_values: &[f64],
    m_scales: &[f64],
    metric: SweepMetric,
    eval_n: usize,
    source: &dyn SampleProvider,
    target: &dyn SampleProvider,
    modes: Option<&GaussianMixtureSpec>,
) -> Result<Vec<SweepCell>> {
    if b_values.is_empty() || m_scales.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    if metric == SweepMetric::ModeCoverage && modes.is_none() {
        return Err(Error::Config(
            "mode_coverage sweep needs a mode list".into(),
        ));
    }
    let mut table = Vec::with_capacity(b_values.len() * m_scales.len());
    for &b in b_values {
        for &m_scale in m_scales {
            let seed = rng::mix_words(base.seed, &[b.to_bits(), m_scale.to_bits()]);
            let cfg = TrainConfig {
                b,
                m_scale,
                seed,
                ..base.clone()
            };
            let outcome =
                run_cell(&cfg, metric, eval_n, source, target, modes).map_err(|e| e.to_string());
            table.push(SweepCell {
                b,
                m_scale,
                seed,
                outcome,
            });
        }
    }
    sort_sweep_table(&mut table, metric);
    Ok(table)
}

/// Evaluate one already-chosen config end to end (train + metric).
pub fn run_cell(
    cfg: &TrainConfig,
    metric: SweepMetric,
    eval_n: usize,
    source: &dyn SampleProvider,
    target: &dyn SampleProvider,
    modes: Option<&GaussianMixtureSpec>,
) -> Result<f64> {
    let report = train(cfg, source, target)?;
    let ou = cfg.ou_params()?;
    let eval_seed = rng::derive_seed(cfg.seed, "eval");
    let x_eval = source.sample(
        eval_n,
        &mut rng_from_seed(rng::derive_seed(eval_seed, "source")),
    );
    let (_, y_model) = bridge::sample_pairs(
        &report.final_model,
        &ou,
        &x_eval,
        rng::derive_seed(eval_seed, "push"),
    )?;
    let y_ref = target.sample(
        eval_n,
        &mut rng_from_seed(rng::derive_seed(eval_seed, "target")),
    );
    match metric {
        SweepMetric::SlicedW1 => metrics::sliced_w1(
            &y_model,
            &y_ref,
            100,
            rng::derive_seed(eval_seed, "projections"),
        ),
        SweepMetric::Mmd2 => {
            let gamma = metrics::median_heuristic_gamma(&y_model, &y_ref)?;
            metrics::mmd2(&y_model, &y_ref, gamma)
        }
        SweepMetric::Energy => metrics::energy_distance(&y_model, &y_ref),
        SweepMetric::ModeCoverage => {
            let spec = modes.expect("checked by caller");
            metrics::mode_coverage(&y_model, &spec.modes, 0.9).map(|c| c as f64)
        }
    }
}

fn sort_sweep_table(table: &mut [SweepCell], metric: SweepMetric) {
    table.sort_by(|a, b| match (&a.outcome, &b.outcome) {
        (Ok(x), Ok(y)) => {
            if metric.higher_is_better() {
                y.total_cmp(x)
            } else {
                x.total_cmp(y)
            }
        }
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => std::cmp::Ordering::Equal,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::StandardNormalSource;

    #[test]
    fn adam_single_step_matches_hand_computation() {
        // Quadratic f(p) = ½‖p‖²: gradient is p itself.
        let params0 = [0.6, -1.2];
        let grad = params0;
        let (beta1, beta2, delta) = (0.9, 0.999, 1e-8);
        let lr = 0.05;
        let mut opt = Optimizer::new(
            OptimizerKind::Adam {
                beta1,
                beta2,
                delta,
            },
            lr,
            2,
        );
        let mut params = params0;
        opt.step(&mut params, &grad);
        for i in 0..2 {
            let m = (1.0 - beta1) * grad[i];
            let v = (1.0 - beta2) * grad[i] * grad[i];
            let m_hat = m / (1.0 - beta1);
            let v_hat = v / (1.0 - beta2);
            let want = params0[i] - lr * m_hat / (v_hat.sqrt() + delta);
            assert!((params[i] - want).abs() < 1e-12, "coord {i}");
        }
    }

    #[test]
    fn sgd_step_is_plain_descent() {
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, 2);
        let mut params = [1.0, 2.0];
        opt.step(&mut params, &[0.5, -0.5]);
        assert_eq!(params, [0.95, 2.05]);
    }

    #[test]
    fn config_file_round_trip_with_conventional_names() {
        let text = r#"
            batch_size = 128
            eps = 0.1
            lr = 2e-3
            K = 30
            diagonal = true
            b = -0.099
            m = -0.225
            n_steps = 500
            seed = 7
        "#;
        let cfg = TrainConfig::default().apply_toml_str(text).unwrap();
        assert_eq!(cfg.batch_size, 128);
        assert_eq!(cfg.eps, 0.1);
        assert_eq!(cfg.lr, 2e-3);
        assert_eq!(cfg.k, 30);
        assert_eq!(cfg.b, -0.099);
        assert_eq!(cfg.m_scale, -0.225);
        assert_eq!(cfg.n_steps, 500);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn config_rejects_full_covariance_and_unknown_keys() {
        assert!(TrainConfig::default()
            .apply_toml_str("diagonal = false")
            .is_err());
        assert!(TrainConfig::default()
            .apply_toml_str("no_such_key = 1")
            .is_err());
    }

    #[test]
    fn single_step_run_has_one_loss_value() {
        let cfg = TrainConfig {
            n_steps: 1,
            batch_size: 16,
            k: 2,
            d: 2,
            eps: 0.5,
            ..TrainConfig::default()
        };
        let source = StandardNormalSource { d: 2 };
        let target = StandardNormalSource { d: 2 };
        let report = train(&cfg, &source, &target).unwrap();
        assert_eq!(report.loss_trace.len(), 1);

        let zero_steps = TrainConfig { n_steps: 0, ..cfg };
        assert!(train(&zero_steps, &source, &target).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig {
            n_steps: 40,
            batch_size: 32,
            k: 3,
            d: 2,
            eps: 0.5,
            seed: 123,
            ..TrainConfig::default()
        };
        let source = StandardNormalSource { d: 2 };
        let target = StandardNormalSource { d: 2 };
        let a = train(&cfg, &source, &target).unwrap();
        let b = train(&cfg, &source, &target).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.final_model, b.final_model);
    }

    #[test]
    fn resume_reproduces_the_continued_data_stream() {
        // Two resumed runs from the same snapshot agree bit-for-bit.
        let cfg = TrainConfig {
            n_steps: 30,
            batch_size: 16,
            k: 2,
            d: 2,
            eps: 0.5,
            seed: 9,
            ..TrainConfig::default()
        };
        let source = StandardNormalSource { d: 2 };
        let target = StandardNormalSource { d: 2 };
        let first = train(&cfg, &source, &target).unwrap();
        let resumed_a = train_from(
            &cfg,
            Some((first.final_model.clone(), 30)),
            &source,
            &target,
        )
        .unwrap();
        let resumed_b = train_from(
            &cfg,
            Some((first.final_model.clone(), 30)),
            &source,
            &target,
        )
        .unwrap();
        assert_eq!(resumed_a.loss_trace, resumed_b.loss_trace);
        assert_eq!(resumed_a.final_model, resumed_b.final_model);
        assert_eq!(resumed_a.start_step, 30);
    }

    #[test]
    fn snapshots_follow_checkpoint_cadence() {
        let cfg = TrainConfig {
            n_steps: 10,
            batch_size: 8,
            k: 2,
            d: 1,
            eps: 0.5,
            checkpoint_every: 4,
            ..TrainConfig::default()
        };
        let source = StandardNormalSource { d: 1 };
        let target = StandardNormalSource { d: 1 };
        let report = train(&cfg, &source, &target).unwrap();
        let steps: Vec<u64> = report.snapshots.iter().map(|(s, _)| *s).collect();
        assert_eq!(steps, vec![4, 8]);
    }
}
