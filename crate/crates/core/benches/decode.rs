use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dac_core::experiments::{generate, run_model, ExperimentConfig, ModelSpec};
use dac_core::{encode, DacParams, Decoder, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn branch_extension(c: &mut Criterion) {
    let model = ModelSpec::TABLE[0].hmm().unwrap();
    let (x, _, y) = generate(&model, 0.5, 1024, 11);
    let mut group = c.benchmark_group("decode_n1024");
    group.sample_size(10);
    for m in [256usize, 2048] {
        let params = DacParams::new(0.5, 0.36, m, 15).unwrap();
        let cw = encode(&x, &params).unwrap();
        for (name, mode) in MODES {
            let decoder = Decoder::new(&model, params).unwrap().with_execution(mode);
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| decoder.decode(&cw, &y).unwrap())
            });
        }
    }
    group.finish();
}

fn trial_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials_n256");
    group.sample_size(10);
    for (name, mode) in MODES {
        let config = ExperimentConfig {
            n: 256,
            max_branches: 256,
            trials: 8,
            entropy_samples: 100_000,
            execution: mode,
            ..ExperimentConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| run_model(&ModelSpec::TABLE[1], &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, branch_extension, trial_batch);
criterion_main!(benches);
