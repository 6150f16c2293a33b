use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tvcbf::dynamics::{ObstacleState, RobotModel, RobotState};
use tvcbf::geometry::{ObstacleShape, RoboCentricField, RobotShape, DEFAULT_GRADIENT_STEP};
use tvcbf::safety::{cbf_rows_sequential, Obstacle};
use tvcbf::scenario::{load_scenario, ScenarioConfig};
use tvcbf::sim::{run_batch, run_scenario};
use tvcbf::Vec2;

fn obstacles(count: usize, points: usize) -> Vec<Obstacle> {
    (0..count)
        .map(|i| {
            let a = i as f64 * 0.7;
            let p = Vec2::new(3.0 * a.cos(), 3.0 * a.sin());
            Obstacle::new(i, ObstacleShape::square(1.0), ObstacleState::new(p, Vec2::new(0.1, -0.2), Vec2::zeros()), points)
                .unwrap()
        })
        .collect()
}

fn cbf_rows(c: &mut Criterion) {
    let field = RoboCentricField::analytic(RobotShape::l_shape(), DEFAULT_GRADIENT_STEP);
    let state = RobotState::new(RobotModel::Unicycle, 0.1, -0.2, 0.4);
    let mut group = c.benchmark_group("cbf_rows");
    for &(count, points) in &[(2, 24), (10, 24), (10, 240), (50, 480)] {
        let obs = obstacles(count, points);
        let rows = count * points;
        group.bench_with_input(BenchmarkId::new("sequential", rows), &obs, |b, obs| {
            b.iter(|| cbf_rows_sequential(&field, &state, black_box(obs), 1.0))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", rows), &obs, |b, obs| {
            b.iter(|| tvcbf::safety::cbf_rows_parallel(&field, &state, black_box(obs), 1.0))
        });
    }
    group.finish();
}

fn scenarios() -> Vec<ScenarioConfig> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let base: Vec<ScenarioConfig> = ["scenario_a", "scenario_b", "head_on", "no_obstacles"]
        .iter()
        .map(|n| load_scenario(dir.join(format!("{n}.toml"))).unwrap())
        .collect();
    // Alpha sweep: the same layouts with a range of barrier gains.
    base.iter()
        .flat_map(|cfg| {
            (1..=4).map(move |k| {
                let mut c = cfg.clone();
                c.controller.alpha = 0.25 * k as f64;
                c
            })
        })
        .collect()
}

fn batch(c: &mut Criterion) {
    let cfgs = scenarios();
    let mut group = c.benchmark_group("scenario_batch");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| cfgs.iter().map(|cfg| run_scenario(black_box(cfg))).collect::<Vec<_>>())
    });
    group.bench_function("run_batch", |b| b.iter(|| run_batch(black_box(&cfgs))));
    group.finish();
}

criterion_group!(benches, cbf_rows, batch);
criterion_main!(benches);
