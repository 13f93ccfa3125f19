use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lightsb_ou::{
    metrics, sample_pairs, OUParams, PotentialModel, SampleProvider, StandardNormalSource,
};

fn desk_model(k: usize, d: usize, eps: f64, seed: u64) -> (PotentialModel, OUParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let means: Vec<f64> = (0..k * d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let log_diag: Vec<f64> = (0..k * d).map(|_| rng.random_range(-0.7..0.3)).collect();
    let model = PotentialModel::new(d, eps, logits, means, log_diag).unwrap();
    let ou = OUParams::isotropic(-0.1, -0.25, eps, 1.0, d).unwrap();
    (model, ou)
}

fn bench_loss_and_grad(c: &mut Criterion) {
    let (model, ou) = desk_model(30, 2, 0.1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let source = StandardNormalSource { d: 2 };
    let batch_z = source.sample(128, &mut rng);
    let batch_y = source.sample(128, &mut rng);
    c.bench_function("loss_and_grad K=30 d=2 batch=128", |bench| {
        bench.iter(|| model.loss_and_grad(&ou, &batch_z, &batch_y).unwrap())
    });
}

fn bench_log_c(c: &mut Criterion) {
    let (model, ou) = desk_model(30, 2, 0.1, 3);
    c.bench_function("log_c K=30 d=2", |bench| {
        bench.iter(|| model.log_c(&ou, &[0.4, -0.9]).unwrap())
    });
}

fn bench_conditional_sampling(c: &mut Criterion) {
    let (model, ou) = desk_model(30, 2, 0.1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let source = StandardNormalSource { d: 2 }.sample(1000, &mut rng);
    c.bench_function("sample_pairs n=1000 K=30", |bench| {
        bench.iter(|| sample_pairs(&model, &ou, &source, 7).unwrap())
    });
}

fn bench_sliced_w1(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let source = StandardNormalSource { d: 2 };
    let x = source.sample(10_000, &mut rng);
    let y = source.sample(10_000, &mut rng);
    c.bench_function("sliced_w1 n=10000 proj=100", |bench| {
        bench.iter(|| metrics::sliced_w1(&x, &y, 100, 9).unwrap())
    });
}

fn bench_mmd(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let source = StandardNormalSource { d: 2 };
    let x = source.sample(2000, &mut rng);
    let y = source.sample(2000, &mut rng);
    c.bench_function("mmd2 n=2000", |bench| {
        bench.iter_batched(
            || (x.clone(), y.clone()),
            |(a, b)| metrics::mmd2(&a, &b, 0.5).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_loss_and_grad,
    bench_log_c,
    bench_conditional_sampling,
    bench_sliced_w1,
    bench_mmd
);
criterion_main!(benches);
