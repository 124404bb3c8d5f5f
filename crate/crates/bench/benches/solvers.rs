use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use parheom::bath::{decompose_matsubara, BathSpec, SpectralDensity, Temperature};
use parheom::fock::{annihilation_op, hamiltonian, FockSpace};
use parheom::heom::evolve_heom;
use parheom::lindblad::{build_generator, evolve_lindblad};
use parheom::oracle::{
    build_composite, wick_pairing_sum, EnvModel, QueryAction, QueryOp, SuperCorrelationQuery,
};
use parheom_bench::{benchmark_hierarchy, benchmark_parts, excited_state, wide_band_hierarchy};

fn bench_heom_build(c: &mut Criterion) {
    c.bench_function("heom_build_depth6_k6", |b| {
        b.iter(|| black_box(benchmark_hierarchy(6)))
    });
    c.bench_function("heom_build_depth2_k18", |b| {
        b.iter(|| black_box(wide_band_hierarchy(2)))
    });
}

fn bench_heom_evolve(c: &mut Criterion) {
    let hier = benchmark_hierarchy(6);
    let rho0 = excited_state();
    let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    c.bench_function("heom_evolve_depth6_t2", |b| {
        b.iter(|| black_box(evolve_heom(&hier, &rho0, &grid, 1e-8, 1e-10).unwrap()))
    });
    let wide = wide_band_hierarchy(2);
    c.bench_function("heom_evolve_wideband_t2", |b| {
        b.iter(|| black_box(evolve_heom(&wide, &rho0, &grid, 1e-8, 1e-10).unwrap()))
    });
}

fn bench_lindblad(c: &mut Criterion) {
    let sp = FockSpace::new(2);
    let cop = annihilation_op(sp, 0).unwrap();
    let h = hamiltonian(sp, &[1.0, 0.5], &[(0, 1, 0.2)]).unwrap();
    let gen = build_generator(&h, &cop, 0.1, 0.3).unwrap();
    let rho0 = parheom::fock::DensityMatrix::basis_state(sp, 1).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| 0.5 * i as f64).collect();
    c.bench_function("lindblad_evolve_2mode_t50", |b| {
        b.iter(|| black_box(evolve_lindblad(&gen, &rho0, &grid).unwrap()))
    });
}

fn bench_bath(c: &mut Criterion) {
    let bath = BathSpec::new(
        SpectralDensity::Lorentzian { gamma: 0.1, width: 1.0, center: 0.0 },
        Temperature::Finite(2.0),
        0.0,
    )
    .unwrap();
    c.bench_function("matsubara_decompose_n20", |b| {
        b.iter(|| black_box(decompose_matsubara(&bath, 20).unwrap()))
    });
}

fn bench_oracle(c: &mut Criterion) {
    let (_, h, cop, bath) = benchmark_parts();
    let rho0 = excited_state();
    let modes = match &bath.j {
        SpectralDensity::Discrete { modes } => modes.clone(),
        _ => unreachable!(),
    };
    c.bench_function("composite_build_and_eig_16", |b| {
        b.iter(|| {
            black_box(
                build_composite(&modes, &h, &cop, bath.temperature, bath.mu, &rho0).unwrap(),
            )
        })
    });
    let env = EnvModel::new(&[(0.4, 0.9), (0.3, 1.6)], Temperature::Finite(0.7), 0.2).unwrap();
    let times = [2.0, 1.6, 1.1, 0.7, 0.4, 0.1];
    let ops: Vec<QueryOp> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| QueryOp {
            lambda: if i % 2 == 0 {
                parheom::bath::Sigma::Plus
            } else {
                parheom::bath::Sigma::Minus
            },
            action: if i % 3 == 0 { QueryAction::Right } else { QueryAction::Left },
            t,
        })
        .collect();
    let query = SuperCorrelationQuery::new(ops).unwrap();
    c.bench_function("wick_pairing_n6", |b| {
        b.iter(|| black_box(wick_pairing_sum(&env, &query).unwrap()))
    });
    let _ = Complex64::default();
}

criterion_group!(
    benches,
    bench_heom_build,
    bench_heom_evolve,
    bench_lindblad,
    bench_bath,
    bench_oracle
);
criterion_main!(benches);
