use criterion::{criterion_group, criterion_main, Criterion};

use quotfol::frontend::runner::{run_many, run_scenario, Report};
use quotfol::frontend::{parse_scenario, suites, Scenario};

fn bundled() -> Vec<Scenario> {
    suites::SUITES
        .iter()
        .map(|s| parse_scenario(s.name, s.text).expect("bundled suite parses"))
        .collect()
}

fn bench_bundled(c: &mut Criterion) {
    let scenarios = bundled();
    let mut group = c.benchmark_group("bundled-suites");
    group.sample_size(10);
    group.bench_function("thread-pool", |b| {
        b.iter(|| run_many(&scenarios, false))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| scenarios.iter().map(run_scenario).collect::<Vec<Report>>())
    });
    group.finish();
}

criterion_group!(benches, bench_bundled);
criterion_main!(benches);
