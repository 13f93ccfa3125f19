//! Implementations of the CLI subcommands.

use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lightsb_ou::{
    bridge, load_csv, make_25gauss, metrics, rng, train as train_mod, Checkpoint, DatasetSource,
    GaussianMixtureSpec, MetricsConfig, MetricsReport, MetricsSample, MixtureVariant, OUParams,
    PointCloud, PotentialModel, SampleProvider, StandardNormalSource, SweepMetric, TrainConfig,
    TrainMeta,
};

use crate::manifest::ManifestBuilder;
use crate::{
    BenchmarkArgs, EvalArgs, GenDataArgs, SampleArgs, SweepArgs, TrainArgs, TrajectoryArgs,
};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad grid value {tok:?}"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("empty parameter grid");
    }
    Ok(values)
}

fn load_checkpoint(path: &Path) -> Result<(PotentialModel, OUParams, TrainMeta)> {
    let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
    let meta = ckpt.train_meta.clone();
    let (model, ou) = ckpt.into_parts()?;
    Ok((model, ou, meta))
}

/// Resample `n` rows with replacement from a cloud (data-stream seeded), or
/// keep the cloud as is.
fn maybe_resample(cloud: PointCloud, n: Option<usize>, seed: u64) -> PointCloud {
    match n {
        Some(n) => DatasetSource::new(cloud)
            .sample(n, &mut rng::rng_from_seed(rng::derive_seed(seed, "data"))),
        None => cloud,
    }
}

pub fn gen_data(args: GenDataArgs) -> Result<()> {
    let variant = MixtureVariant::parse(&args.variant)?;
    ensure_dir(&args.out)?;
    let spec = make_25gauss(variant, args.seed);
    let data_seed = rng::derive_seed(args.seed, "data");

    let target = spec.sample(
        args.n,
        &mut rng::rng_from_seed(rng::derive_seed(data_seed, "target")),
    );
    let source = StandardNormalSource { d: spec.d() }.sample(
        args.n,
        &mut rng::rng_from_seed(rng::derive_seed(data_seed, "source")),
    );

    let target_path = args.out.join("target.csv");
    let source_path = args.out.join("source.csv");
    let modes_path = args.out.join("modes.json");
    target.save_csv(&target_path, true)?;
    source.save_csv(&source_path, true)?;
    spec.save_json(&modes_path)?;

    ManifestBuilder::new("gen-data", args.seed)
        .config(&serde_json::json!({ "variant": args.variant, "n": args.n }))
        .output(&target_path)
        .output(&source_path)
        .output(&modes_path)
        .write(&args.out)?;
    println!(
        "wrote {} target and {} source samples for the {} layout",
        args.n,
        args.n,
        variant.as_str()
    );
    Ok(())
}

/// Resolution order for training hyperparameters: built-in defaults, then
/// the config file, then explicit flags.
fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    if let Some(path) = &args.config {
        cfg = cfg.apply_toml_file(path)?;
    }
    if let Some(v) = args.n_steps {
        cfg.n_steps = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.lr {
        cfg.lr = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    if let Some(v) = args.b {
        cfg.b = v;
    }
    if let Some(v) = args.m_scale {
        cfg.m_scale = v;
    }
    if let Some(v) = args.t_horizon {
        cfg.t_horizon = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.optimizer {
        cfg.optimizer = train_mod::OptimizerKind::parse(v)?;
    }
    if let Some(v) = args.checkpoint_every {
        cfg.checkpoint_every = v;
    }
    Ok(cfg)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = resolve_train_config(&args)?;
    let source_cloud = load_csv(&args.source, true)?;
    let target_cloud = load_csv(&args.target, true)?;
    cfg.d = source_cloud.dim();
    if target_cloud.dim() != cfg.d {
        bail!(
            "source is {}-dimensional but target is {}-dimensional",
            cfg.d,
            target_cloud.dim()
        );
    }
    let source = DatasetSource::new(source_cloud);
    let target = DatasetSource::new(target_cloud);

    let init = match &args.resume {
        Some(path) => {
            let (model, ou, meta) = load_checkpoint(path)?;
            if ou.eps != cfg.eps || ou.b != cfg.b || ou.horizon != cfg.t_horizon {
                bail!("checkpointed reference process differs from the requested config");
            }
            Some((model, meta.steps))
        }
        None => None,
    };

    let report = train_mod::train_from(&cfg, init, &source, &target)?;
    let total_steps = report.start_step + cfg.n_steps as u64;
    let final_loss = *report.loss_trace.last().expect("n_steps >= 1");

    let ou = cfg.ou_params()?;
    let ckpt = Checkpoint::from_parts(
        &report.final_model,
        &ou,
        TrainMeta {
            steps: total_steps,
            seed: cfg.seed,
            final_loss,
        },
    );
    ckpt.save(&args.out)?;

    let loss_path = args
        .loss_csv
        .clone()
        .unwrap_or_else(|| args.out.with_extension("loss.csv"));
    let mut loss_file = std::io::BufWriter::new(std::fs::File::create(&loss_path)?);
    writeln!(loss_file, "step,loss")?;
    for (i, loss) in report.loss_trace.iter().enumerate() {
        writeln!(loss_file, "{},{loss}", report.start_step + i as u64 + 1)?;
    }
    loss_file.flush()?;

    let manifest_dir = args.out.parent().unwrap_or(Path::new(".")).to_path_buf();
    ensure_dir(&manifest_dir)?;
    let mut builder = ManifestBuilder::new("train", cfg.seed)
        .config(&cfg)
        .input(&args.source)
        .input(&args.target)
        .checkpoint(&args.out)
        .output(&loss_path);
    if let Some(resume) = &args.resume {
        builder = builder.input(resume);
    }
    builder.write(&manifest_dir)?;
    println!(
        "trained {} steps (total {total_steps}), final loss {final_loss}",
        cfg.n_steps
    );
    Ok(())
}

pub fn sample(args: SampleArgs) -> Result<()> {
    let (model, ou, _) = load_checkpoint(&args.checkpoint)?;
    let source = maybe_resample(load_csv(&args.source, true)?, args.n, args.seed);
    let (xs, ys) = bridge::sample_pairs(&model, &ou, &source, rng::derive_seed(args.seed, "push"))?;

    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    let d = xs.dim();
    let header: Vec<String> = (1..=d)
        .map(|i| format!("x_{i}"))
        .chain((1..=d).map(|i| format!("y_{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (x, y) in xs.rows().zip(ys.rows()) {
        let cells: Vec<String> = x.iter().chain(y.iter()).map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;

    let dir = args.out.parent().unwrap_or(Path::new(".")).to_path_buf();
    ManifestBuilder::new("sample", args.seed)
        .input(&args.checkpoint)
        .input(&args.source)
        .output(&args.out)
        .write(&dir)?;
    println!("sampled {} coupled pairs", xs.len());
    Ok(())
}

pub fn trajectory(args: TrajectoryArgs) -> Result<()> {
    let (model, ou, _) = load_checkpoint(&args.checkpoint)?;
    let source = maybe_resample(load_csv(&args.source, true)?, args.n, args.seed);
    let paths = bridge::sample_trajectories(
        &model,
        &ou,
        &source,
        args.knots,
        rng::derive_seed(args.seed, "trajectory"),
    )?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    bridge::write_trajectories_csv(&paths, &mut out)?;
    out.flush()?;

    let dir = args.out.parent().unwrap_or(Path::new(".")).to_path_buf();
    ManifestBuilder::new("trajectory", args.seed)
        .input(&args.checkpoint)
        .input(&args.source)
        .output(&args.out)
        .write(&dir)?;
    println!(
        "wrote {} trajectories with {} knots",
        paths.len(),
        args.knots
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let x = load_csv(&args.x, true)?;
    let y = load_csv(&args.y, true)?;
    let eval_seed = rng::derive_seed(args.seed, "eval");

    let sliced = metrics::sliced_w1(
        &x,
        &y,
        args.n_proj,
        rng::derive_seed(eval_seed, "projections"),
    )?;
    let gamma = match args.gamma {
        Some(g) => g,
        None => metrics::median_heuristic_gamma(&x, &y)?,
    };
    let mmd = metrics::mmd2(&x, &y, gamma)?;
    let energy = metrics::energy_distance(&x, &y)?;
    let coverage = match &args.modes {
        Some(path) => {
            let spec = GaussianMixtureSpec::load_json(path)?;
            Some(metrics::mode_coverage(&x, &spec.modes, args.confidence)? as f64)
        }
        None => None,
    };

    let config = MetricsConfig {
        n_projections: args.n_proj,
        kernel_gamma: gamma,
        confidence: args.confidence,
        n_repeats: 1,
    };

    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    writeln!(out, "metric,mean,std")?;
    let mut rows = vec![("sliced_w1", sliced), ("mmd2", mmd), ("energy", energy)];
    if let Some(c) = coverage {
        rows.push(("covered_modes", c));
    }
    for (name, value) in &rows {
        if !value.is_finite() {
            bail!("metric {name} evaluated to a non-finite value");
        }
        writeln!(out, "{name},{value},0")?;
        println!("{name:>14}  {value}");
    }
    out.flush()?;

    let dir = args.out.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut builder = ManifestBuilder::new("eval", args.seed)
        .config(&config)
        .input(&args.x)
        .input(&args.y)
        .output(&args.out);
    if let Some(modes) = &args.modes {
        builder = builder.input(modes);
    }
    builder.write(&dir)?;
    Ok(())
}

fn write_sweep_csv(path: &Path, table: &[train_mod::SweepCell], metric: SweepMetric) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let metric_name = serde_json::to_value(metric)?
        .as_str()
        .unwrap_or("metric")
        .to_string();
    writeln!(out, "b,m,seed,{metric_name},error")?;
    for cell in table {
        match &cell.outcome {
            Ok(v) => writeln!(out, "{},{},{},{v},", cell.b, cell.m_scale, cell.seed)?,
            Err(e) => writeln!(
                out,
                "{},{},{},,{}",
                cell.b,
                cell.m_scale,
                cell.seed,
                e.replace(',', ";")
            )?,
        }
    }
    out.flush()?;
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let metric = SweepMetric::parse(&args.metric)?;
    let b_grid = parse_grid(&args.b_grid)?;
    let m_grid = parse_grid(&args.m_grid)?;

    let mut base = TrainConfig::default();
    if let Some(path) = &args.config {
        base = base.apply_toml_file(path)?;
    }
    base.n_steps = args.n_steps;
    base.k = args.k;
    base.seed = args.seed;

    // Providers: synthetic variant or CSV-backed clouds.
    let (source, target, modes): (
        Box<dyn SampleProvider>,
        Box<dyn SampleProvider>,
        Option<GaussianMixtureSpec>,
    ) = match (&args.variant, &args.source, &args.target) {
        (Some(v), None, None) => {
            let spec = make_25gauss(MixtureVariant::parse(v)?, args.seed);
            base.d = spec.d();
            (
                Box::new(StandardNormalSource { d: spec.d() }),
                Box::new(spec.clone()),
                Some(spec),
            )
        }
        (None, Some(src), Some(tgt)) => {
            let source_cloud = load_csv(src, true)?;
            let target_cloud = load_csv(tgt, true)?;
            base.d = source_cloud.dim();
            let modes = match &args.modes {
                Some(path) => Some(GaussianMixtureSpec::load_json(path)?),
                None => None,
            };
            (
                Box::new(DatasetSource::new(source_cloud)),
                Box::new(DatasetSource::new(target_cloud)),
                modes,
            )
        }
        _ => bail!("pass either --variant or both --source and --target"),
    };

    let table = train_mod::grid_sweep(
        &base,
        &b_grid,
        &m_grid,
        metric,
        args.eval_n,
        source.as_ref(),
        target.as_ref(),
        modes.as_ref(),
    )?;
    let table_path = args.out.join("sweep.csv");
    write_sweep_csv(&table_path, &table, metric)?;

    ManifestBuilder::new("sweep", args.seed)
        .config(&base)
        .output(&table_path)
        .write(&args.out)?;
    for cell in table.iter().take(5) {
        match &cell.outcome {
            Ok(v) => println!(
                "b={:+.3}  m={:+.3}  {}={v:.5}",
                cell.b, cell.m_scale, args.metric
            ),
            Err(e) => println!("b={:+.3}  m={:+.3}  failed: {e}", cell.b, cell.m_scale),
        }
    }
    Ok(())
}

/// One repeat's sample triple for a trained cell, deterministic in the
/// cell seed and the repeat index.
fn repeat_clouds(
    model: &PotentialModel,
    ou: &OUParams,
    spec: &GaussianMixtureSpec,
    cell_seed: u64,
    repeat: usize,
    n: usize,
) -> Result<(PointCloud, PointCloud, u64)> {
    let eval_seed = rng::derive_seed(cell_seed, "report-eval");
    let seed_r = rng::derive_indexed(eval_seed, "repeat", repeat as u64);
    let src = StandardNormalSource { d: spec.d() }.sample(
        n,
        &mut rng::rng_from_seed(rng::derive_seed(seed_r, "source")),
    );
    let (_, y_model) = bridge::sample_pairs(model, ou, &src, rng::derive_seed(seed_r, "push"))?;
    let y_ref = spec.sample(
        n,
        &mut rng::rng_from_seed(rng::derive_seed(seed_r, "target")),
    );
    Ok((y_model, y_ref, rng::derive_seed(seed_r, "projections")))
}

/// A trained grid cell with its repeat-evaluated sliced W1.
struct BenchCell {
    b: f64,
    m_scale: f64,
    seed: u64,
    outcome: std::result::Result<(PotentialModel, f64, f64), String>,
}

/// Full four-metric report over the repeat protocol for one trained cell.
/// The sliced W1 values reproduce the selection pass bit for bit (same
/// seeds), so the reported value is the one the cell was chosen by.
fn full_report_for_cell(
    model: &PotentialModel,
    ou: &OUParams,
    spec: &GaussianMixtureSpec,
    cell_seed: u64,
    n: usize,
    repeats: usize,
    n_proj: usize,
) -> Result<MetricsReport> {
    let mut samples = Vec::with_capacity(repeats);
    let mut gamma = None;
    for r in 0..repeats {
        let (y_model, y_ref, proj_seed) = repeat_clouds(model, ou, spec, cell_seed, r, n)?;
        let gamma_r = match gamma {
            Some(g) => g,
            None => {
                let g = metrics::median_heuristic_gamma(&y_model, &y_ref)?;
                gamma = Some(g);
                g
            }
        };
        samples.push(MetricsSample {
            sliced_w1: metrics::sliced_w1(&y_model, &y_ref, n_proj, proj_seed)?,
            mmd2: metrics::mmd2(&y_model, &y_ref, gamma_r)?,
            energy: metrics::energy_distance(&y_model, &y_ref)?,
            covered_modes: metrics::mode_coverage(&y_model, &spec.modes, 0.9)? as f64,
        });
    }
    let config = MetricsConfig {
        n_projections: n_proj,
        kernel_gamma: gamma.unwrap_or(f64::NAN),
        confidence: 0.9,
        n_repeats: repeats,
    };
    Ok(MetricsReport::from_samples(&samples, config)?)
}

/// Train every grid cell and score it by the repeat-averaged sliced W1 —
/// the same protocol the final report uses, so cell selection and the
/// reported numbers cannot disagree.
#[allow(clippy::too_many_arguments)]
fn evaluate_grid(
    base: &TrainConfig,
    b_grid: &[f64],
    m_grid: &[f64],
    spec: &GaussianMixtureSpec,
    n: usize,
    repeats: usize,
    n_proj: usize,
) -> Result<Vec<BenchCell>> {
    let source = StandardNormalSource { d: spec.d() };
    let mut cells = Vec::new();
    for &b in b_grid {
        for &m_scale in m_grid {
            let seed = rng::mix_words(base.seed, &[b.to_bits(), m_scale.to_bits()]);
            let cfg = TrainConfig {
                b,
                m_scale,
                seed,
                ..base.clone()
            };
            let outcome = (|| -> Result<(PotentialModel, f64, f64)> {
                let report = train_mod::train(&cfg, &source, spec)?;
                let ou = cfg.ou_params()?;
                let mut w1s = Vec::with_capacity(repeats);
                for r in 0..repeats {
                    let (y_model, y_ref, proj_seed) =
                        repeat_clouds(&report.final_model, &ou, spec, seed, r, n)?;
                    w1s.push(metrics::sliced_w1(&y_model, &y_ref, n_proj, proj_seed)?);
                }
                let mean = w1s.iter().sum::<f64>() / repeats as f64;
                let std = if repeats > 1 {
                    (w1s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / (repeats as f64 - 1.0))
                        .sqrt()
                } else {
                    0.0
                };
                Ok((report.final_model, mean, std))
            })()
            .map_err(|e| e.to_string());
            cells.push(BenchCell {
                b,
                m_scale,
                seed,
                outcome,
            });
        }
    }
    cells.sort_by(|a, c| match (&a.outcome, &c.outcome) {
        (Ok((_, x, _)), Ok((_, y, _))) => x.total_cmp(y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => std::cmp::Ordering::Equal,
    });
    Ok(cells)
}

fn cfg_ou(base: &TrainConfig, b: f64, m_scale: f64) -> Result<OUParams> {
    Ok(TrainConfig {
        b,
        m_scale,
        ..base.clone()
    }
    .ou_params()?)
}

fn write_bench_sweep_csv(path: &Path, cells: &[BenchCell]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "b,m,seed,sliced_w1_mean,sliced_w1_std,error")?;
    for cell in cells {
        match &cell.outcome {
            Ok((_, mean, std)) => writeln!(
                out,
                "{},{},{},{mean},{std},",
                cell.b, cell.m_scale, cell.seed
            )?,
            Err(e) => writeln!(
                out,
                "{},{},{},,,{}",
                cell.b,
                cell.m_scale,
                cell.seed,
                e.replace(',', ";")
            )?,
        }
    }
    out.flush()?;
    Ok(())
}

pub fn benchmark(args: BenchmarkArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let variants: Vec<MixtureVariant> = match args.variant.as_str() {
        "all" => vec![
            MixtureVariant::Standard,
            MixtureVariant::Irregular,
            MixtureVariant::Anisotropic,
        ],
        other => vec![MixtureVariant::parse(other)?],
    };
    let b_grid = parse_grid(&args.b_grid)?;
    let m_grid = parse_grid(&args.m_grid)?;

    let report_path = args.out.join("report.csv");
    let summary_path = args.out.join("report.txt");
    let mut report = std::io::BufWriter::new(std::fs::File::create(&report_path)?);
    writeln!(report, "variant,method,metric,mean,std")?;
    let mut summary = String::new();
    summary.push_str(&format!(
        "25-Gaussian benchmark  (seed {}, K = {}, eps = {}, lr = {}, batch = {}, {} steps)\n",
        args.seed, args.k, args.eps, args.lr, args.batch_size, args.n_steps
    ));
    let mut sweep_paths = Vec::new();

    for variant in &variants {
        let spec = make_25gauss(*variant, args.seed);
        let base = TrainConfig {
            n_steps: args.n_steps,
            batch_size: args.batch_size,
            lr: args.lr,
            k: args.k,
            eps: args.eps,
            d: spec.d(),
            seed: rng::derive_seed(args.seed, &format!("train-{}", variant.as_str())),
            ..TrainConfig::default()
        };

        let cells = evaluate_grid(
            &base,
            &b_grid,
            &m_grid,
            &spec,
            args.n,
            args.repeats,
            args.n_proj,
        )?;
        let sweep_path = args.out.join(format!("sweep_{}.csv", variant.as_str()));
        write_bench_sweep_csv(&sweep_path, &cells)?;
        sweep_paths.push(sweep_path);

        let best = cells
            .iter()
            .find(|c| c.outcome.is_ok())
            .context("all sweep cells failed")?;
        // Baseline: the flat-kernel solver is the (b, m) = (0, 0) cell.
        let baseline = cells
            .iter()
            .find(|c| c.b == 0.0 && c.m_scale == 0.0)
            .context("the sweep grid must contain the b = 0, m = 0 baseline cell")?;
        let (baseline_model, _, _) = baseline
            .outcome
            .as_ref()
            .map_err(|e| anyhow::anyhow!("baseline cell failed: {e}"))?;
        let (best_model, _, _) = best.outcome.as_ref().expect("filtered to Ok above");

        let ou_ref = cfg_ou(&base, baseline.b, baseline.m_scale)?;
        let baseline_report = full_report_for_cell(
            baseline_model,
            &ou_ref,
            &spec,
            baseline.seed,
            args.n,
            args.repeats,
            args.n_proj,
        )?;
        let ou_best = cfg_ou(&base, best.b, best.m_scale)?;
        let ou_report = full_report_for_cell(
            best_model,
            &ou_best,
            &spec,
            best.seed,
            args.n,
            args.repeats,
            args.n_proj,
        )?;

        for (method, rep) in [("lightsb", &baseline_report), ("lightsb-ou", &ou_report)] {
            for (metric, mean, std) in rep.rows() {
                if !mean.is_finite() || !std.is_finite() {
                    bail!(
                        "{} {metric} evaluated to a non-finite value",
                        variant.as_str()
                    );
                }
                writeln!(
                    report,
                    "{},{method},{metric},{mean},{std}",
                    variant.as_str()
                )?;
            }
        }

        summary.push_str(&format!(
            "\n{}  (best cell b = {}, m = {})\n",
            variant.as_str(),
            best.b,
            best.m_scale
        ));
        summary.push_str(&format!(
            "{:<16}{:>22}{:>22}\n",
            "metric", "LightSB", "LightSB-OU"
        ));
        for ((metric, base_mean, base_std), (_, ou_mean, ou_std)) in
            baseline_report.rows().iter().zip(ou_report.rows().iter())
        {
            summary.push_str(&format!(
                "{:<16}{:>22}{:>22}\n",
                metric,
                format!("{base_mean:.4} ± {base_std:.4}"),
                format!("{ou_mean:.4} ± {ou_std:.4}")
            ));
        }
    }
    report.flush()?;
    std::fs::write(&summary_path, &summary)?;
    print!("{summary}");

    let mut builder = ManifestBuilder::new("benchmark", args.seed)
        .config(&serde_json::json!({
            "variant": args.variant,
            "n": args.n,
            "repeats": args.repeats,
            "n_steps": args.n_steps,
            "K": args.k,
            "eps": args.eps,
            "lr": args.lr,
            "batch_size": args.batch_size,
            "b_grid": args.b_grid,
            "m_grid": args.m_grid,
        }))
        .output(&report_path)
        .output(&summary_path);
    for path in &sweep_paths {
        builder = builder.output(path);
    }
    builder.write(&args.out)?;
    Ok(())
}
