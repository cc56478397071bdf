use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use surmod_core::harness::{run_campaign, Campaign, ConfigOverrides};
use surmod_core::surrogate::{evolve, EvolutionConfig};
use surmod_core::{BenchmarkFunction, Execution, FunctionKind};

fn config(execution: Execution) -> EvolutionConfig {
    let mut c = EvolutionConfig::for_dimension(2);
    c.generations = 3;
    c.seed = 1;
    c.execution = execution;
    c
}

fn offspring_scoring(c: &mut Criterion) {
    let f = BenchmarkFunction::new(FunctionKind::Rastrigin, 2).unwrap();
    let mut g = c.benchmark_group("evolve");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| black_box(evolve(&f, &config(exec)).unwrap())),
        );
    }
    g.finish();
}

fn campaign_runs(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let mut g = c.benchmark_group("campaign");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    let out = dir.path().join(format!("{exec:?}"));
                    let _ = std::fs::remove_dir_all(&out);
                    let mut camp = Campaign::new(vec![FunctionKind::Alpine], vec![2], out);
                    camp.runs = 8;
                    camp.execution = exec;
                    camp.overrides = ConfigOverrides {
                        generations: Some(2),
                        ..ConfigOverrides::default()
                    };
                    black_box(run_campaign(&camp).unwrap())
                })
            },
        );
    }
    g.finish();
}

criterion_group!(benches, offspring_scoring, campaign_runs);
criterion_main!(benches);
