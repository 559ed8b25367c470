use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use ndarray::s;
use ordcollab_bench::{b2_dataset, corpus};
use ordcollab_core::augment::{controlled_mixup, MixupConfig};
use ordcollab_core::corpus::{b2_histogram_pooled, c_histogram};
use ordcollab_core::nn::{init_model, to_matrices, Adam, AdamConfig, LossKind};
use ordcollab_core::rng_stream;

fn histograms(c: &mut Criterion) {
    let tasks = corpus(0);
    let mut g = c.benchmark_group("histogram");
    g.throughput(Throughput::Elements(tasks.len() as u64));
    g.bench_function("b2_pooled", |b| {
        b.iter(|| tasks.iter().map(|t| b2_histogram_pooled(t).unwrap()[0]).sum::<f64>())
    });
    g.bench_function("c_0.1s_grid", |b| {
        b.iter(|| tasks.iter().map(|t| c_histogram(t).unwrap()[0]).sum::<f64>())
    });
    g.finish();
}

fn mixup(c: &mut Criterion) {
    let data = b2_dataset(0);
    let cfg = MixupConfig::default();
    c.bench_function("controlled_mixup_full_n200", |b| {
        b.iter_batched(
            || rng_stream(0, 0),
            |mut rng| controlled_mixup(&data, &cfg, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn network(c: &mut Criterion) {
    let data = b2_dataset(0);
    let (x, y) = to_matrices::<f32>(&data);
    let mut rng = rng_stream(1, 0);
    let model = init_model(data.dim(), &mut rng).unwrap();

    let mut g = c.benchmark_group("mlp");
    g.sample_size(20);
    for batch in [33usize, 100] {
        let xb = x.slice(s![..batch, ..]);
        let yb = y.slice(s![..batch, ..]);
        let w = vec![1.0; batch];
        g.throughput(Throughput::Elements(batch as u64));
        g.bench_with_input(BenchmarkId::new("predict", batch), &batch, |b, _| {
            b.iter(|| model.predict_proba(xb))
        });
        g.bench_with_input(BenchmarkId::new("loss_and_gradients_oce", batch), &batch, |b, _| {
            b.iter(|| model.loss_and_gradients(xb, yb, LossKind::Oce, &w, Some(&mut rng)).loss)
        });
    }
    let w = vec![1.0; 33];
    let grads = model
        .loss_and_gradients(x.slice(s![..33, ..]), y.slice(s![..33, ..]), LossKind::Ce, &w, None)
        .gradients;
    let mut stepped = model.clone();
    let mut adam = Adam::new(&stepped, AdamConfig::default());
    g.throughput(Throughput::Elements(stepped.parameter_count() as u64));
    g.bench_function("adam_step", |b| b.iter(|| adam.step(&mut stepped, &grads, 1e-3)));
    g.finish();
}

criterion_group!(benches, histograms, mixup, network);
criterion_main!(benches);
