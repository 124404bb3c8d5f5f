//! Shared setup for the solver benchmarks.

use num_complex::Complex64;

use parheom::bath::{decompose_discrete, BathSpec, SpectralDensity, Temperature};
use parheom::fock::{annihilation_op, hamiltonian, DensityMatrix, FockOperator, FockSpace};
use parheom::heom::{build_hierarchy, Hierarchy, HierarchyMode};

/// Single resonant level against the three-mode benchmark bath.
pub fn benchmark_parts() -> (FockSpace, FockOperator, FockOperator, BathSpec) {
    let sp = FockSpace::new(1);
    let c = annihilation_op(sp, 0).unwrap();
    let h = hamiltonian(sp, &[1.0], &[]).unwrap();
    let bath = BathSpec::new(
        SpectralDensity::Discrete { modes: vec![(0.05, 0.6), (0.05, 1.0), (0.05, 1.5)] },
        Temperature::Finite(2.0),
        0.0,
    )
    .unwrap();
    (sp, h, c, bath)
}

pub fn benchmark_hierarchy(depth: usize) -> Hierarchy {
    let (_, h, c, bath) = benchmark_parts();
    let d = decompose_discrete(&bath).unwrap();
    build_hierarchy(&d, &c, &h, depth, HierarchyMode::EvenStandard, Complex64::i()).unwrap()
}

pub fn excited_state() -> DensityMatrix {
    DensityMatrix::basis_state(FockSpace::new(1), 1).unwrap()
}

/// Wide nine-mode band used by the Markov-consistency benchmark.
pub fn wide_band_hierarchy(depth: usize) -> Hierarchy {
    let sp = FockSpace::new(1);
    let c = annihilation_op(sp, 0).unwrap();
    let h = hamiltonian(sp, &[1.0], &[]).unwrap();
    let g = (0.1 / std::f64::consts::PI).sqrt();
    let modes: Vec<(f64, f64)> = (0..9).map(|k| (g, -4.0 + k as f64)).collect();
    let bath = BathSpec::new(
        SpectralDensity::Discrete { modes },
        Temperature::Finite(0.05),
        1.0 - (1.0f64 / 0.3 - 1.0).ln() / 0.05,
    )
    .unwrap();
    let d = decompose_discrete(&bath).unwrap();
    build_hierarchy(&d, &c, &h, depth, HierarchyMode::EvenStandard, Complex64::i()).unwrap()
}
