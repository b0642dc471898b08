use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use metric_frag::harness::{run, ExperimentConfig, InputSource};
use metric_frag::Execution;

fn config(spec: &str, trials: usize, execution: Execution) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(InputSource::Generator(spec.parse().unwrap()), 6.0);
    c.trials = trials;
    c.seed = 11;
    c.execution = execution;
    c
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (spec, trials) in [("euclidean:dim=3,n=128,seed=7", 256), ("gnp:p=0.1,n=256,seed=3", 64)] {
        for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let cfg = config(spec, trials, mode);
            group.bench_with_input(BenchmarkId::new(label, spec), &cfg, |b, cfg| {
                b.iter(|| black_box(run(cfg).unwrap().mean))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
