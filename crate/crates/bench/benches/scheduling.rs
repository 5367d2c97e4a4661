use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gapsim_core::gap::{edf_order, schedule_at_level};
use gapsim_core::workload::{generate, SubmitModel, WorkloadSpec};
use gapsim_core::{fcfs_schedule, run, FaultSampler, GapConfig, Instance, SimConfig};

fn spec(n_tasks: usize, n_vms: usize) -> WorkloadSpec {
    WorkloadSpec {
        n_tasks,
        n_vms,
        submit_model: SubmitModel::Uniform {
            horizon: n_tasks as f64 / 10.0,
        },
        seed: 42,
        ..WorkloadSpec::default()
    }
}

fn bench_gap_level(c: &mut Criterion) {
    let mut group = c.benchmark_group("gap_level");
    group.sample_size(10);
    for n in [2_500usize, 5_000, 10_000, 20_000] {
        let (tasks, nodes) = generate(&spec(n, 100));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| schedule_at_level(&tasks, &nodes, 0.8, &GapConfig::default()))
        });
    }
    group.finish();
}

fn bench_edf(c: &mut Criterion) {
    let (tasks, _) = generate(&spec(20_000, 1));
    c.bench_function("edf_order_20k", |b| b.iter(|| edf_order(&tasks)));
}

fn bench_sim(c: &mut Criterion) {
    let (tasks, nodes) = generate(&spec(1_000, 50));
    let instance = Instance::new(tasks, nodes);
    let schedule = fcfs_schedule(&instance.tasks, &instance.nodes);
    c.bench_function("sim_1000_tasks", |b| {
        b.iter(|| {
            run(
                &schedule,
                &instance,
                &instance.fault_model,
                &mut FaultSampler::new(1),
                &SimConfig::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_gap_level, bench_edf, bench_sim);
criterion_main!(benches);
