//! Fermionic Fock space construction.
//!
//! Modes are encoded Jordan-Wigner style on an occupation-number basis:
//! basis state = integer bitmask with mode k at bit k, mode 0 is the leftmost
//! string factor, and sign strings act on lower-indexed modes. Operators are
//! sparse, density matrices dense.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::Temperature;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sparse::CsrMatrix;

/// Parity sector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// A set of fermionic modes with its 2^n Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize) -> Self {
        assert!((1..=24).contains(&n_modes), "unreasonable mode count {n_modes}");
        Self { n_modes }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }
}

fn popcount_parity(m: usize) -> f64 {
    if m.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sparse operator on a Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    space: FockSpace,
    matrix: CsrMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: CsrMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} on a dim-{} space",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn from_dense(space: FockSpace, dense: &Array2<Complex64>) -> Result<Self> {
        Self::new(space, CsrMatrix::from_dense(dense, 0.0))
    }

    pub fn identity(space: FockSpace) -> Self {
        Self { space, matrix: CsrMatrix::identity(space.dim()) }
    }

    pub fn zero(space: FockSpace) -> Self {
        Self { space, matrix: CsrMatrix::zeros(space.dim(), space.dim()) }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.matrix.to_dense()
    }

    pub fn dagger(&self) -> FockOperator {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: Complex64) -> FockOperator {
        Self { space: self.space, matrix: self.matrix.scale(factor) }
    }

    pub fn add(&self, other: &FockOperator) -> FockOperator {
        assert_eq!(self.space, other.space, "operator spaces differ");
        Self { space: self.space, matrix: self.matrix.add(&other.matrix) }
    }

    pub fn sub(&self, other: &FockOperator) -> FockOperator {
        assert_eq!(self.space, other.space, "operator spaces differ");
        Self { space: self.space, matrix: self.matrix.sub(&other.matrix) }
    }

    pub fn matmul(&self, other: &FockOperator) -> FockOperator {
        assert_eq!(self.space, other.space, "operator spaces differ");
        Self { space: self.space, matrix: self.matrix.matmul(&other.matrix) }
    }

    pub fn anticommutator(&self, other: &FockOperator) -> FockOperator {
        self.matmul(other).add(&other.matmul(self))
    }

    pub fn commutator(&self, other: &FockOperator) -> FockOperator {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn norm_max(&self) -> f64 {
        self.matrix.norm_max()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.sub(&self.matrix.adjoint()).norm_max() <= tol
    }

    /// Definite parity of the operator, if it has one within `tol`.
    pub fn parity(&self, tol: f64) -> Option<Parity> {
        let even = parity_project(self, Parity::Even);
        let odd = parity_project(self, Parity::Odd);
        match (even.norm_max() <= tol, odd.norm_max() <= tol) {
            (false, true) => Some(Parity::Even),
            (true, false) => Some(Parity::Odd),
            (true, true) => Some(Parity::Even), // zero operator
            (false, false) => None,
        }
    }
}

/// Dense density matrix (or general dense operator in the odd sector).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn new(space: FockSpace, matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{} on a dim-{} space",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        Ok(Self { space, matrix })
    }

    /// |m><m| for an occupation bitmask m.
    pub fn basis_state(space: FockSpace, bits: usize) -> Result<Self> {
        if bits >= space.dim() {
            return Err(Error::InvalidParameter(format!(
                "basis state {bits} outside dim-{} space",
                space.dim()
            )));
        }
        let mut matrix = Array2::zeros((space.dim(), space.dim()));
        matrix[(bits, bits)] = Complex64::new(1.0, 0.0);
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.space.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Check the physical-state invariants of an even-sector density
    /// matrix: Hermitian, unit trace, positive semidefinite, all within
    /// `tol`. Odd-sector objects carry no such constraints.
    pub fn is_physical(&self, tol: f64) -> bool {
        let herm = linalg::max_norm(&(&self.matrix - &linalg::dagger(&self.matrix)));
        if herm > tol {
            return false;
        }
        if (self.trace() - Complex64::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        let (eigs, _) = linalg::eigh(&self.matrix);
        eigs.iter().all(|&w| w > -tol)
    }

    /// Split into parity-sector components (rho_even, rho_odd) as operators.
    pub fn sector_split(&self) -> (Array2<Complex64>, Array2<Complex64>) {
        let d = self.space.dim();
        let mut even = Array2::zeros((d, d));
        let mut odd = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                if popcount_parity(i) == popcount_parity(j) {
                    even[(i, j)] = self.matrix[(i, j)];
                } else {
                    odd[(i, j)] = self.matrix[(i, j)];
                }
            }
        }
        (even, odd)
    }
}

/// Annihilation operator c_mode with the Jordan-Wigner sign string over
/// lower-indexed modes.
pub fn annihilation_op(space: FockSpace, mode: usize) -> Result<FockOperator> {
    if mode >= space.n_modes() {
        return Err(Error::ModeOutOfRange { mode, n_modes: space.n_modes() });
    }
    let bit = 1usize << mode;
    let lower_mask = bit - 1;
    let triplets = (0..space.dim()).filter(|m| m & bit != 0).map(move |m| {
        let sign = popcount_parity(m & lower_mask);
        (m ^ bit, m, Complex64::new(sign, 0.0))
    });
    FockOperator::new(space, CsrMatrix::from_triplets(space.dim(), space.dim(), triplets))
}

pub fn creation_op(space: FockSpace, mode: usize) -> Result<FockOperator> {
    Ok(annihilation_op(space, mode)?.dagger())
}

/// Number operator c_mode^dagger c_mode.
pub fn number_op(space: FockSpace, mode: usize) -> Result<FockOperator> {
    if mode >= space.n_modes() {
        return Err(Error::ModeOutOfRange { mode, n_modes: space.n_modes() });
    }
    let bit = 1usize << mode;
    let triplets = (0..space.dim())
        .filter(|m| m & bit != 0)
        .map(|m| (m, m, Complex64::new(1.0, 0.0)));
    FockOperator::new(space, CsrMatrix::from_triplets(space.dim(), space.dim(), triplets))
}

/// Parity operator P = prod_k exp(i pi c_k^dagger c_k): diagonal signs
/// (-1)^(occupation count).
pub fn parity_op(space: FockSpace) -> FockOperator {
    let triplets =
        (0..space.dim()).map(|m| (m, m, Complex64::new(popcount_parity(m), 0.0)));
    FockOperator {
        space,
        matrix: CsrMatrix::from_triplets(space.dim(), space.dim(), triplets),
    }
}

/// Projector P^{e/o} = (1 +- P)/2 onto the even/odd state subspace.
pub fn sector_projector(space: FockSpace, sector: Parity) -> FockOperator {
    let triplets = (0..space.dim()).filter_map(|m| {
        let keep = match sector {
            Parity::Even => m.count_ones() % 2 == 0,
            Parity::Odd => m.count_ones() % 2 == 1,
        };
        keep.then_some((m, m, Complex64::new(1.0, 0.0)))
    });
    FockOperator {
        space,
        matrix: CsrMatrix::from_triplets(space.dim(), space.dim(), triplets),
    }
}

/// Parity projection of an operator:
/// even part P^e O P^e + P^o O P^o, odd part P^e O P^o + P^o O P^e.
pub fn parity_project(op: &FockOperator, sector: Parity) -> FockOperator {
    let pe = sector_projector(op.space(), Parity::Even);
    let po = sector_projector(op.space(), Parity::Odd);
    match sector {
        Parity::Even => pe.matmul(op).matmul(&pe).add(&po.matmul(op).matmul(&po)),
        Parity::Odd => pe.matmul(op).matmul(&po).add(&po.matmul(op).matmul(&pe)),
    }
}

/// Occupancy of a single mode at the given temperature, chemical potential.
pub(crate) fn equilibrium_occupancy(omega: f64, temperature: Temperature, mu: f64) -> f64 {
    crate::bath::fermi_dirac(omega, temperature, mu)
}

/// Thermal product state rho = prod_k e^{-beta (omega_k - mu) n_k} / Z_k.
///
/// Zero temperature fills modes below the chemical potential (half filling
/// exactly at it) without evaluating any exponential.
pub fn thermal_state(
    space: FockSpace,
    energies: &[f64],
    temperature: Temperature,
    mu: f64,
) -> Result<DensityMatrix> {
    if energies.len() != space.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} energies for {} modes",
            energies.len(),
            space.n_modes()
        )));
    }
    temperature.validate()?;
    let occ: Vec<f64> = energies
        .iter()
        .map(|&w| equilibrium_occupancy(w, temperature, mu))
        .collect();
    let d = space.dim();
    let mut matrix = Array2::zeros((d, d));
    for m in 0..d {
        let mut p = 1.0;
        for (k, &nk) in occ.iter().enumerate() {
            p *= if m & (1 << k) != 0 { nk } else { 1.0 - nk };
        }
        matrix[(m, m)] = Complex64::new(p, 0.0);
    }
    DensityMatrix::new(space, matrix)
}

/// `H = sum_k energies[k] n_k + sum (i,j,t) t (c_i^dagger c_j + c_j^dagger c_i)`.
pub fn hamiltonian(
    space: FockSpace,
    energies: &[f64],
    hopping: &[(usize, usize, f64)],
) -> Result<FockOperator> {
    if energies.len() != space.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} energies for {} modes",
            energies.len(),
            space.n_modes()
        )));
    }
    let mut h = FockOperator::zero(space);
    for (k, &w) in energies.iter().enumerate() {
        if w != 0.0 {
            h = h.add(&number_op(space, k)?.scale(Complex64::new(w, 0.0)));
        }
    }
    for &(i, j, t) in hopping {
        if i == j {
            return Err(Error::InvalidParameter(format!(
                "hopping term ({i},{j}) must connect distinct modes"
            )));
        }
        let hop = creation_op(space, i)?.matmul(&annihilation_op(space, j)?);
        let term = hop.add(&hop.dagger()).scale(Complex64::new(t, 0.0));
        h = h.add(&term);
    }
    Ok(h)
}

/// Trace distance between two density matrices on the same space.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    assert_eq!(a.space(), b.space(), "spaces differ");
    linalg::trace_distance(a.matrix(), b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_annihilator() {
        let sp = FockSpace::new(1);
        let c = annihilation_op(sp, 0).unwrap();
        let d = c.to_dense();
        assert_eq!(d[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(d[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(d[(1, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(d[(1, 1)], Complex64::new(0.0, 0.0));
        // nilpotency
        assert!(c.matmul(&c).norm_max() < 1e-15);
    }

    #[test]
    fn mode_out_of_range() {
        let sp = FockSpace::new(2);
        assert!(matches!(
            annihilation_op(sp, 2),
            Err(Error::ModeOutOfRange { mode: 2, n_modes: 2 })
        ));
    }

    #[test]
    fn anticommutation_relations() {
        for n in 1..=4 {
            let sp = FockSpace::new(n);
            let id = FockOperator::identity(sp);
            for i in 0..n {
                for j in 0..n {
                    let ci = annihilation_op(sp, i).unwrap();
                    let cj = annihilation_op(sp, j).unwrap();
                    let acc = ci.anticommutator(&cj.dagger());
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        acc.sub(&id.scale(Complex64::new(expected, 0.0))).norm_max() < 1e-14,
                        "{{c_{i}, c_{j}^dag}} failed at n={n}"
                    );
                    assert!(ci.anticommutator(&cj).norm_max() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn parity_operator_basics() {
        let sp = FockSpace::new(1);
        let p = parity_op(sp);
        let d = p.to_dense();
        assert_eq!(d[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(d[(1, 1)], Complex64::new(-1.0, 0.0));
        let p2 = FockSpace::new(3);
        let pp = parity_op(p2).matmul(&parity_op(p2));
        assert!(pp.sub(&FockOperator::identity(p2)).norm_max() < 1e-15);
        // P c^dag P = -c^dag
        let sp2 = FockSpace::new(2);
        let p = parity_op(sp2);
        let cd = creation_op(sp2, 1).unwrap();
        let conj = p.matmul(&cd).matmul(&p).add(&cd);
        assert!(conj.norm_max() < 1e-15);
    }

    #[test]
    fn parity_projection_examples() {
        let sp = FockSpace::new(2);
        let c0 = annihilation_op(sp, 0).unwrap();
        assert!(parity_project(&c0, Parity::Even).norm_max() < 1e-15);
        let id = FockOperator::identity(sp);
        assert!(parity_project(&id, Parity::Even).sub(&id).norm_max() < 1e-15);
        // (c0^dag c1 + c0) projects to c0^dag c1 in the even sector
        let mixed = creation_op(sp, 0).unwrap().matmul(&annihilation_op(sp, 1).unwrap()).add(&c0);
        let even = parity_project(&mixed, Parity::Even);
        let expect = creation_op(sp, 0).unwrap().matmul(&annihilation_op(sp, 1).unwrap());
        assert!(even.sub(&expect).norm_max() < 1e-14);
        // sum of sectors restores the operator
        let odd = parity_project(&mixed, Parity::Odd);
        assert!(even.add(&odd).sub(&mixed).norm_max() < 1e-14);
    }

    #[test]
    fn projection_idempotent_on_random_ops() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let sp = FockSpace::new(3);
        let d = sp.dim();
        for _ in 0..5 {
            let mut dense = Array2::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    dense[(i, j)] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let op = FockOperator::from_dense(sp, &dense).unwrap();
            for sector in [Parity::Even, Parity::Odd] {
                let once = parity_project(&op, sector);
                let twice = parity_project(&once, sector);
                assert!(twice.sub(&once).norm_max() < 1e-14);
            }
        }
    }

    #[test]
    fn thermal_state_examples() {
        let sp = FockSpace::new(1);
        // beta = 0: maximally mixed
        let rho = thermal_state(sp, &[1.3], Temperature::Finite(0.0), 0.0).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        // omega = mu: half filling at any beta
        let rho = thermal_state(sp, &[0.7], Temperature::Finite(3.1), 0.7).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        // frozen Fermi-Dirac occupancies: (1/(e+1), 1/(e^2+1))
        let sp2 = FockSpace::new(2);
        let rho = thermal_state(sp2, &[1.0, 2.0], Temperature::Finite(1.0), 0.0).unwrap();
        let n0: f64 = (0..4)
            .filter(|m| m & 1 != 0)
            .map(|m| rho.matrix()[(m, m)].re)
            .sum();
        let n1: f64 = (0..4)
            .filter(|m| m & 2 != 0)
            .map(|m| rho.matrix()[(m, m)].re)
            .sum();
        assert!((n0 - 0.2689414213699951).abs() < 1e-15);
        assert!((n1 - 0.11920292202211755).abs() < 1e-15);
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn thermal_state_zero_temperature() {
        let sp = FockSpace::new(3);
        let rho = thermal_state(sp, &[-1.0, 0.5, 2.0], Temperature::Zero, 0.5).unwrap();
        // mode 0 filled, mode 1 at mu (half), mode 2 empty
        let occ = |k: usize| -> f64 {
            (0..8)
                .filter(|m| m & (1 << k) != 0)
                .map(|m| rho.matrix()[(m, m)].re)
                .sum()
        };
        assert!((occ(0) - 1.0).abs() < 1e-15);
        assert!((occ(1) - 0.5).abs() < 1e-15);
        assert!(occ(2).abs() < 1e-15);
    }

    #[test]
    fn thermal_commutation_identity() {
        // c_k^dag rho = e^{beta(omega_k - mu)} rho c_k^dag
        let sp = FockSpace::new(2);
        let beta = 1.0;
        let mu = 0.3;
        let energies = [1.0, 2.0];
        let rho = thermal_state(sp, &energies, Temperature::Finite(beta), mu).unwrap();
        let rho_op = FockOperator::from_dense(sp, rho.matrix()).unwrap();
        for (k, &energy) in energies.iter().enumerate() {
            let cd = creation_op(sp, k).unwrap();
            let lhs = cd.matmul(&rho_op);
            let factor = Complex64::new((beta * (energy - mu)).exp(), 0.0);
            let rhs = rho_op.matmul(&cd).scale(factor);
            assert!(lhs.sub(&rhs).norm_max() < 1e-12, "mode {k}");
        }
    }

    #[test]
    fn physical_state_validation() {
        let sp = FockSpace::new(2);
        let rho = thermal_state(sp, &[1.0, 2.0], Temperature::Finite(1.0), 0.0).unwrap();
        assert!(rho.is_physical(1e-12));
        // trace off
        let bad = DensityMatrix::new(sp, rho.matrix().mapv(|x| x * 2.0)).unwrap();
        assert!(!bad.is_physical(1e-12));
        // negative eigenvalue
        let mut neg = rho.matrix().clone();
        neg[(0, 0)] = Complex64::new(-0.1, 0.0);
        neg[(3, 3)] += Complex64::new(0.1 + rho.matrix()[(0, 0)].re, 0.0);
        let bad = DensityMatrix::new(sp, neg).unwrap();
        assert!(!bad.is_physical(1e-12));
        // non-Hermitian
        let mut nh = rho.matrix().clone();
        nh[(0, 1)] = Complex64::new(0.3, 0.0);
        let bad = DensityMatrix::new(sp, nh).unwrap();
        assert!(!bad.is_physical(1e-12));
    }

    #[test]
    fn hamiltonian_hermitian_and_even() {
        let sp = FockSpace::new(3);
        let h = hamiltonian(sp, &[1.0, 0.5, -0.2], &[(0, 1, 0.3), (1, 2, -0.1)]).unwrap();
        assert!(h.is_hermitian(1e-14));
        assert_eq!(h.parity(1e-14), Some(Parity::Even));
    }
}
