//! Sequential-versus-parallel comparison of the two batch workloads that
//! dominate runtime: raw geodesic integration fan-out and a full
//! orthogonality-transport check. Run with `--no-default-features` to
//! confirm the sequential fallback path compiles to the same numbers.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use foliage_core::criteria::{check_orthogonal_transport, SamplingPlan};
use foliage_core::metric::{integrate_geodesic, GeodesicState};
use foliage_core::model::{FoliationModel, IntMat2, SuspensionModel};
use foliage_core::report::Tolerance;
use foliage_core::{run_batch, ExecMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn suspension() -> FoliationModel {
    SuspensionModel::new(IntMat2::new(2, 1, 1, 1), 1.0)
        .unwrap()
        .into_model()
}

fn modes() -> [(&'static str, ExecMode); 2] {
    [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ]
}

/// Integrate one leafwise geodesic per batch index from a deterministic
/// start; the per-item cost is large enough for fan-out to matter.
fn geodesic_batch(c: &mut Criterion) {
    let model = suspension();
    let mut group = c.benchmark_group("geodesic_batch");
    group.sample_size(10);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                let out: Vec<f64> = run_batch(mode, 32, |i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
                    let pos = vec![rng.gen(), rng.gen(), rng.gen()];
                    let vel = vec![0.0, 0.0, 1.0];
                    let trace = integrate_geodesic(
                        &model.metric,
                        GeodesicState::new(pos, vel),
                        2.0,
                        1e-3,
                    )
                    .unwrap();
                    trace.states.last().unwrap().position[2]
                });
                out.iter().sum::<f64>()
            })
        });
    }
    group.finish();
}

/// The complete transport check, exactly as the runner executes it.
fn transport_check(c: &mut Criterion) {
    let model = suspension();
    let mut group = c.benchmark_group("transport_check");
    group.sample_size(10);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                check_orthogonal_transport(
                    &model,
                    SamplingPlan::new(42, 16).with_mode(mode),
                    2.0,
                    1e-3,
                    Tolerance::default(),
                )
                .max_residual
            })
        });
    }
    group.finish();
}

criterion_group!(benches, geodesic_batch, transport_check);
criterion_main!(benches);
