use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mtf_core::fem::SubdomainMesh;
use mtf_core::linalg::C64;
use mtf_core::local_solver::ScatteringOperator;
use mtf_core::mesh::{extract_skeleton, generate_partitioned_disk, Mesh, Skeleton};
use mtf_core::potentials::MultiPotential;
use mtf_core::presets::{disk_media, PlaneWave};
use mtf_core::skeleton_solver::{DenseOperator, SkeletonSystem, SolverConfig, SystemForm};
use mtf_core::traces::{cauchy_data, Closure, DtnOperator, MultiTrace, TraceKind};
use mtf_core::Exec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn disk(h: f64) -> (Mesh, Skeleton, Vec<SubdomainMesh>) {
    let mesh = generate_partitioned_disk(3, 1.0, 2.0, h).unwrap();
    let sk = extract_skeleton(&mesh).unwrap();
    let subs = (0..4).map(|j| SubdomainMesh::new(&mesh, &sk, j).unwrap()).collect();
    (mesh, sk, subs)
}

fn local_operators(c: &mut Criterion) {
    let (mesh, _, subs) = disk(0.05);
    let coeffs = disk_media(0.0).unwrap();
    let mut g = c.benchmark_group("local_operators");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("dtn", name), &exec, |b, &exec| {
            b.iter(|| DtnOperator::build(&mesh, &subs, 1.0 / 3.0, Closure::Absorbing, exec).unwrap())
        });
        let dtn = DtnOperator::build(&mesh, &subs, 1.0 / 3.0, Closure::Absorbing, exec).unwrap();
        g.bench_with_input(BenchmarkId::new("scattering", name), &exec, |b, &exec| {
            b.iter(|| ScatteringOperator::build(&mesh, &subs, &coeffs, &dtn, 3.0, exec).unwrap())
        });
    }
    g.finish();
}

fn skeleton_operator(c: &mut Criterion) {
    let (mesh, sk, _) = disk(0.08);
    let coeffs = disk_media(0.0).unwrap();
    let mut g = c.benchmark_group("skeleton_operator");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let cfg = SolverConfig {
            exec,
            ..SolverConfig::default()
        };
        let sys = SkeletonSystem::build(&mesh, &sk, &coeffs, &cfg).unwrap();
        let p = MultiTrace::random(TraceKind::Neumann, &sys.sizes(), &mut ChaCha8Rng::seed_from_u64(1));
        g.bench_with_input(BenchmarkId::new("apply", name), &p, |b, p| b.iter(|| sys.apply(black_box(p))));
        g.bench_function(BenchmarkId::new("materialize", name), |b| {
            b.iter(|| DenseOperator::build(&sys, SystemForm::Product, 2000).unwrap())
        });
    }
    g.finish();
}

fn potentials(c: &mut Criterion) {
    let (mesh, sk, _) = disk(0.05);
    let wave = PlaneWave { kappa: 3.0, theta: 0.2 };
    let pair = cauchy_data(&mesh, &sk, 4, |x| wave.value(x), |x| wave.gradient(x)).unwrap();
    let pot = MultiPotential::new(&mesh, &sk, 1.0 / 3.0, &pair, 4, &[1, 2, 3]).unwrap();
    let points: Vec<[f64; 2]> = (0..400)
        .map(|k| {
            let t = f64::from(k) * 0.0157;
            [1.6 * t.cos(), 1.6 * t.sin()]
        })
        .collect();
    let mut g = c.benchmark_group("potentials");
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("eval_many", name), &exec, |b, &exec| {
            b.iter(|| -> Vec<C64> { pot.eval_many(black_box(&points), exec).unwrap() })
        });
    }
    g.finish();
}

criterion_group!(benches, local_operators, skeleton_operator, potentials);
criterion_main!(benches);
