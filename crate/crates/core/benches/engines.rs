use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use streaklab_core::sampling::{Bet, GameConfig, GameMode, Sampler};
use streaklab_core::{Enumerator, Execution, NullModel, SeededStream, StatKind, UndefinedPolicy};

fn strategies() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn bench_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_summary");
    group.sample_size(10);
    for k in [16u32, 20] {
        let model = NullModel::fair(k).unwrap();
        for (name, exec) in strategies() {
            let engine = Enumerator::default().with_execution(exec);
            group.bench_with_input(BenchmarkId::new(name, k), &model, |b, &model| {
                b.iter(|| engine.enumerate_summary(model, StatKind::AfterHitRun(1), UndefinedPolicy::Exclude).unwrap());
            });
        }
    }
    group.finish();
}

fn bench_difference(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_difference");
    group.sample_size(10);
    let model = NullModel::fair(18).unwrap();
    for (name, exec) in strategies() {
        let engine = Enumerator::default().with_execution(exec);
        group.bench_function(name, |b| {
            b.iter(|| engine.enumerate_summary(model, StatKind::Difference(1), UndefinedPolicy::Exclude).unwrap());
        });
    }
    group.finish();
}

fn bench_games(c: &mut Criterion) {
    let mut group = c.benchmark_group("selection_game");
    group.sample_size(10);
    for mode in [GameMode::TwoStage, GameMode::OneStage] {
        let config = GameConfig {
            mode,
            model: NullModel::fair(4).unwrap(),
            bet: Bet::Hit,
            trials: 1_000_000,
            stream: SeededStream::new(42),
            run: 1,
        };
        for (name, exec) in strategies() {
            let sampler = Sampler::new(exec);
            group.bench_with_input(BenchmarkId::new(name, format!("{mode:?}")), &config, |b, config| {
                b.iter(|| sampler.play_selection_game(config).unwrap());
            });
        }
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_unweighted_mean");
    group.sample_size(10);
    let model = NullModel::new(0.45, 100).unwrap();
    for (name, exec) in strategies() {
        let sampler = Sampler::new(exec);
        group.bench_function(name, |b| {
            b.iter(|| {
                sampler
                    .sample_unweighted_mean(model, StatKind::AfterHitRun(2), UndefinedPolicy::Exclude, 200_000, SeededStream::new(7))
                    .unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumeration, bench_difference, bench_games, bench_sampling);
criterion_main!(benches);
