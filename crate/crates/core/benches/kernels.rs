use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nearfield_core::channel::exact_channel;
use nearfield_core::combining::{mmse_combiner, mmse_combiner_direct};
use nearfield_core::config::RunConfig;
use nearfield_core::experiments::{run_interference_map, GridSpec};
use nearfield_core::scenario::ScenarioConfig;
use nearfield_core::units::wavelength;
use nearfield_core::{exec, ChannelModel, CombinerScheme, Simulation, SourceLocation, Vec3};

/// `(label, thread cap)`: one worker versus the default pool.
const MODES: [(&str, Option<usize>); 2] = [("sequential", Some(1)), ("parallel", None)];

fn channel_construction(c: &mut Criterion) {
    let config = ScenarioConfig::default();
    let lambda = wavelength(71e9);
    let geometry = config.array.build(lambda).unwrap();
    let source = SourceLocation::from_position(Vec3::new(3.0, -10.0, 40.0)).unwrap();
    let mut group = c.benchmark_group("exact_channel_71ghz");
    for (label, threads) in MODES {
        group.bench_function(BenchmarkId::new(label, geometry.len()), |b| {
            b.iter(|| {
                exec::install(threads, || {
                    exact_channel(&source, &geometry, lambda).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn mmse_drop(c: &mut Criterion) {
    let config = ScenarioConfig {
        num_ues: 20,
        ..ScenarioConfig::default()
    };
    let sim = Simulation::new(config).unwrap();
    let drop = sim.drop_ues(0).unwrap();
    let mut group = c.benchmark_group("mmse_drop_28ghz_k20");
    group.sample_size(20);
    for (label, threads) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| {
                exec::install(threads, || {
                    sim.evaluate_drop(&drop, CombinerScheme::Mmse, ChannelModel::Exact)
                        .unwrap()
                })
            })
        });
    }
    group.finish();
}

fn interference_grid(c: &mut Criterion) {
    let config = RunConfig::default();
    let ue1 = Vec3::new(0.0, -10.0, 20.0);
    let grid = GridSpec::new((-30.0, 30.0), (1.0, 60.0), (12, 12), ue1.y).unwrap();
    let mut group = c.benchmark_group("interference_grid_12x12");
    group.sample_size(10);
    for (label, threads) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| {
                exec::install(threads, || {
                    run_interference_map(
                        &config,
                        ue1,
                        &grid,
                        CombinerScheme::Mmse,
                        ChannelModel::Exact,
                    )
                    .unwrap()
                })
            })
        });
    }
    group.finish();
}

fn mmse_routes(c: &mut Criterion) {
    let mut config = ScenarioConfig::default();
    config.num_ues = 8;
    config.array.n_h = Some(16);
    config.array.n_v = Some(16);
    let sim = Simulation::new(config.clone()).unwrap();
    let drop = sim.drop_ues(0).unwrap();
    let channels = sim.channels(&drop, ChannelModel::Exact).unwrap();
    let powers = vec![config.ue_power_w(); channels.len()];
    let noise = config.noise_power_w();
    let mut group = c.benchmark_group("mmse_route_n256_k8");
    group.bench_function("push_through", |b| {
        b.iter(|| mmse_combiner(&channels, &powers, noise).unwrap())
    });
    group.bench_function("direct", |b| {
        b.iter(|| mmse_combiner_direct(&channels, &powers, noise).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    channel_construction,
    mmse_drop,
    interference_grid,
    mmse_routes
);
criterion_main!(benches);
