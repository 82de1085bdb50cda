//! Microbenchmarks for the inverse-maintenance kernels and the per-sample
//! decision path. Run with `cargo bench -p streamvol-bench`; under
//! `cargo test` each benchmark executes once as a smoke check.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use rand::Rng;

use streamvol_core::linalg::{
    direct_spd_inverse, rank1_update, sherman_morrison_update, spd_inverse_from_factor,
    CholeskyFactor, EmbeddingVector, SquareMatrix, SymmetricPd,
};
use streamvol_core::rng::seeded_rng;
use streamvol_core::sampler::{SamplerConfig, SamplerState, StreamLength};
use streamvol_core::stream::StreamSample;

const DIMS: [usize; 3] = [16, 64, 256];

fn draw(rng: &mut impl Rng, dim: usize) -> EmbeddingVector {
    let scale = 1.0 / (dim as f64).sqrt();
    let values = (0..dim).map(|_| (rng.random::<f64>() - 0.5) * scale).collect();
    EmbeddingVector::new(values).expect("finite draw")
}

/// Warmed states for one dimension: a factor, its accumulated matrix, and
/// the matching explicit inverse, all after `dim / 4` rank-1 updates so no
/// path benchmarks the trivial identity case.
struct States {
    factor: CholeskyFactor,
    accumulated: SymmetricPd,
    inverse: SquareMatrix,
    vector: EmbeddingVector,
}

fn warmed_states(dim: usize) -> States {
    let mut rng = seeded_rng(17, &format!("bench/kernels/{dim}"));
    let mut factor = CholeskyFactor::scaled_identity(dim, 1.0);
    let mut accumulated = SquareMatrix::scaled_identity(dim, 1.0);
    let mut inverse = SquareMatrix::scaled_identity(dim, 1.0);
    for _ in 0..dim / 4 {
        let v = draw(&mut rng, dim);
        factor = rank1_update(&factor, &v).unwrap();
        accumulated.add_scaled_outer(v.as_slice(), 1.0);
        inverse = sherman_morrison_update(&inverse, &v).unwrap();
    }
    States {
        factor,
        accumulated: SymmetricPd::new(accumulated).unwrap(),
        inverse,
        vector: draw(&mut rng, dim),
    }
}

fn bench_rank1_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank1_update");
    for dim in DIMS {
        let s = warmed_states(dim);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| rank1_update(black_box(&s.factor), black_box(&s.vector)).unwrap())
        });
    }
    group.finish();
}

fn bench_inverse_from_factor(c: &mut Criterion) {
    let mut group = c.benchmark_group("spd_inverse_from_factor");
    for dim in DIMS {
        let s = warmed_states(dim);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| spd_inverse_from_factor(black_box(&s.factor)).unwrap())
        });
    }
    group.finish();
}

fn bench_sherman_morrison(c: &mut Criterion) {
    let mut group = c.benchmark_group("sherman_morrison_update");
    for dim in DIMS {
        let s = warmed_states(dim);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| {
                sherman_morrison_update(black_box(&s.inverse), black_box(&s.vector)).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_direct_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_spd_inverse");
    for dim in DIMS {
        let s = warmed_states(dim);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| direct_spd_inverse(black_box(&s.accumulated)).unwrap())
        });
    }
    group.finish();
}

/// Full per-sample decision at d = 64 with an unfilled budget, so each
/// observation pays the probability evaluation and, when selected, the
/// factor update. State is cloned outside the measured region.
fn bench_sampler_observe(c: &mut Criterion) {
    let dim = 64;
    let n = 512;
    let config = SamplerConfig {
        dim,
        budget: n,
        stream_length: StreamLength::Known(n),
        lambda: 1.0,
        seed: 23,
    };
    let mut rng = seeded_rng(23, "bench/observe");
    let samples: Vec<StreamSample> = (0..33)
        .map(|index| StreamSample {
            index,
            embedding: draw(&mut rng, dim),
            class_tag: None,
            client_id: 0,
        })
        .collect();
    let mut state = SamplerState::new(config).unwrap();
    // Warm the state past the identity regime.
    for s in &samples[..32] {
        state.observe(s).unwrap();
    }
    let next = &samples[32];

    c.bench_function("sampler_observe/64", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| s.observe(black_box(next)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    kernels,
    bench_rank1_update,
    bench_inverse_from_factor,
    bench_sherman_morrison,
    bench_direct_inverse,
    bench_sampler_observe,
);
criterion_main!(kernels);
