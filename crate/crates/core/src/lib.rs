//! Solvers for the reduced dynamics of a fermionic system coupled to
//! fermionic thermal baths, without parity-symmetry restrictions.
//!
//! The crate provides, over a Jordan-Wigner Fock-space layer:
//!
//! - bath correlation functions and their exponential decompositions
//!   ([`bath`]),
//! - vectorized superoperators including the parity-dressed coupling
//!   vertices ([`superop`]),
//! - a Markovian generator in generalized Lindblad form whose jump term
//!   changes sign between the even and odd parity sectors ([`lindblad`]),
//! - hierarchical equations of motion valid for arbitrary-parity initial
//!   data, with an even-sector standard form ([`heom`]),
//! - an exact-diagonalization oracle with the parity-corrected partial
//!   trace and a Wick pairing-sum checker ([`oracle`]),
//! - system two-time correlation functions and emission spectra
//!   ([`correlators`]).
//!
//! ```
//! use num_complex::Complex64;
//! use parheom::{
//!     annihilation_op, build_hierarchy, decompose_discrete, evolve_heom, hamiltonian,
//!     BathSpec, DensityMatrix, FockSpace, HierarchyMode, SpectralDensity, Temperature,
//! };
//!
//! let space = FockSpace::new(1);
//! let c = annihilation_op(space, 0)?;
//! let h = hamiltonian(space, &[1.0], &[])?;
//! let bath = BathSpec::new(
//!     SpectralDensity::Discrete { modes: vec![(0.05, 0.6), (0.05, 1.0), (0.05, 1.5)] },
//!     Temperature::Finite(2.0),
//!     0.0,
//! )?;
//! let decomposition = decompose_discrete(&bath)?;
//! let hierarchy =
//!     build_hierarchy(&decomposition, &c, &h, 6, HierarchyMode::EvenStandard, Complex64::i())?;
//! let rho0 = DensityMatrix::basis_state(space, 1)?;
//! let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
//! let trajectory = evolve_heom(&hierarchy, &rho0, &grid, 1e-8, 1e-10)?;
//! assert!((trajectory[0].matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
//! # Ok::<(), parheom::Error>(())
//! ```

pub mod bath;
pub mod correlators;
pub mod error;
pub mod fock;
pub mod heom;
pub mod lindblad;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod sparse;
pub mod superop;

pub use error::{Error, Result};

pub use bath::{
    check_decomposition_symmetries, correlation_exact, decompose_discrete, decompose_matsubara,
    fermi_dirac, BathExponent, BathSpec, CorrelationDecomposition, Provenance, Sigma,
    SpectralDensity, SymmetryReport, Temperature,
};
pub use correlators::{spectrum, system_correlation, CorrelationResult, CorrelationSolver};
pub use fock::{
    annihilation_op, creation_op, hamiltonian, number_op, parity_op, parity_project,
    sector_projector, thermal_state, trace_distance, DensityMatrix, FockOperator, FockSpace,
    Parity,
};
pub use heom::{
    build_hierarchy, evolve_heom, rescale_ados, AdoLabel, Hierarchy, HierarchyMode,
    HierarchyState,
};
pub use lindblad::{build_generator, evolve_lindblad, LindbladGenerator};
pub use oracle::{
    build_composite, dyson_reduced, evolve_exact, reduce_parity_aware, reduce_plain,
    super_correlation, two_time_exact, wick_pairing_sum, CompositeModel, EnvModel, QueryAction,
    QueryOp, SuperCorrelationQuery,
};
pub use superop::{
    left_mul, liouvillian, make_a, make_b_script, make_w_kernel, parity_super, right_mul, unvec,
    vec, SuperOperator,
};
