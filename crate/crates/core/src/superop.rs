//! Superoperators on vectorized density matrices.
//!
//! Column-stacking convention: vec(rho)[j*d + i] = rho[i, j], so that
//! vec(A rho B) = (B^T kron A) vec(rho). All superoperators are materialized
//! as sparse d^2 x d^2 matrices; at desk scale this keeps composition exact
//! and the spectrum inspectable.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::bath::{BathSpec, CorrelationDecomposition, Sigma};
use crate::error::{Error, Result};
use crate::fock::{parity_op, sector_projector, FockOperator, FockSpace, Parity};
use crate::linalg;
use crate::sparse::CsrMatrix;

/// Sparse map on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    dim: usize,
    matrix: CsrMatrix,
}

impl SuperOperator {
    pub fn new(dim: usize, matrix: CsrMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator is {}x{} for operator dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                dim
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CsrMatrix::identity(dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: CsrMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.matrix.to_dense()
    }

    /// Apply to a dense operator.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let v = vec(rho)?;
        if v.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} does not match superoperator dim {}",
                rho.nrows(),
                self.dim
            )));
        }
        let out = self.matrix.matvec(v.as_slice().unwrap());
        unvec(&Array1::from_vec(out))
    }

    /// Composition self after other: `(self ∘ other)[rho] = self[other[rho]]`.
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, other.dim, "superoperator dims differ");
        SuperOperator { dim: self.dim, matrix: self.matrix.matmul(&other.matrix) }
    }

    pub fn add(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, other.dim, "superoperator dims differ");
        SuperOperator { dim: self.dim, matrix: self.matrix.add(&other.matrix) }
    }

    pub fn sub(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, other.dim, "superoperator dims differ");
        SuperOperator { dim: self.dim, matrix: self.matrix.sub(&other.matrix) }
    }

    pub fn scale(&self, factor: Complex64) -> SuperOperator {
        SuperOperator { dim: self.dim, matrix: self.matrix.scale(factor) }
    }

    pub fn norm_max(&self) -> f64 {
        self.matrix.norm_max()
    }
}

/// Column-stacking vectorization.
pub fn vec(rho: &Array2<Complex64>) -> Result<Array1<Complex64>> {
    let (n, m) = rho.dim();
    if n != m {
        return Err(Error::DimensionMismatch(format!("vec of a {n}x{m} matrix")));
    }
    let mut out = Array1::zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = rho[(i, j)];
        }
    }
    Ok(out)
}

/// Inverse of [`vec()`].
pub fn unvec(v: &Array1<Complex64>) -> Result<Array2<Complex64>> {
    let len = v.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::DimensionMismatch(format!("unvec of a length-{len} vector")));
    }
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = v[j * n + i];
        }
    }
    Ok(out)
}

/// vec-level view of a flat slice (used by the hierarchy state blocks).
pub(crate) fn unvec_slice(v: &[Complex64], n: usize) -> Array2<Complex64> {
    debug_assert_eq!(v.len(), n * n);
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = v[j * n + i];
        }
    }
    out
}

pub(crate) fn vec_into_slice(rho: &Array2<Complex64>, out: &mut [Complex64]) {
    let n = rho.nrows();
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = rho[(i, j)];
        }
    }
}

/// rho -> A rho.
pub fn left_mul(a: &FockOperator) -> SuperOperator {
    let d = a.space().dim();
    SuperOperator { dim: d, matrix: CsrMatrix::identity(d).kron(a.matrix()) }
}

/// rho -> rho A.
pub fn right_mul(a: &FockOperator) -> SuperOperator {
    let d = a.space().dim();
    SuperOperator { dim: d, matrix: a.matrix().transpose().kron(&CsrMatrix::identity(d)) }
}

/// rho -> P rho P with the parity operator of the space.
pub fn parity_super(space: FockSpace) -> SuperOperator {
    let p = parity_op(space);
    left_mul(&p).compose(&right_mul(&p))
}

/// rho -> -i [H, rho].
pub fn liouvillian(h: &FockOperator) -> SuperOperator {
    left_mul(h)
        .sub(&right_mul(h))
        .scale(Complex64::new(0.0, -1.0))
}

/// Superoperator projector onto the even/odd operator sector:
/// even keeps P^e . P^e + P^o . P^o, odd keeps the cross blocks.
pub fn sector_projector_super(space: FockSpace, sector: Parity) -> SuperOperator {
    let pe = sector_projector(space, Parity::Even);
    let po = sector_projector(space, Parity::Odd);
    match sector {
        Parity::Even => left_mul(&pe)
            .compose(&right_mul(&pe))
            .add(&left_mul(&po).compose(&right_mul(&po))),
        Parity::Odd => left_mul(&pe)
            .compose(&right_mul(&po))
            .add(&left_mul(&po).compose(&right_mul(&pe))),
    }
}

/// s^sigma: the coupling operator for sigma = -1, its adjoint for sigma = +1.
pub fn coupling_power(s: &FockOperator, sigma: Sigma) -> FockOperator {
    match sigma {
        Sigma::Plus => s.dagger(),
        Sigma::Minus => s.clone(),
    }
}

fn require_odd(s: &FockOperator, what: &str) -> Result<()> {
    match s.parity(1e-12) {
        Some(Parity::Odd) => Ok(()),
        other => Err(Error::ParityViolation(format!(
            "{what} requires an odd-parity coupling operator, found {other:?}"
        ))),
    }
}

/// Raising vertex `A^sigma[rho] = s^{-sigma} rho - P rho s^{-sigma} P`:
/// left action minus the parity-conjugated right action.
pub fn make_a(sigma: Sigma, s: &FockOperator) -> Result<SuperOperator> {
    require_odd(s, "make_a")?;
    let sbar = coupling_power(s, sigma.bar());
    let p = parity_super(s.space());
    Ok(left_mul(&sbar).sub(&p.compose(&right_mul(&sbar))))
}

/// Even-standard replacement of [`make_a`] for an argument of definite
/// parity: `A^sigma[rho] = s^{-sigma} rho + sign(parity) rho s^{-sigma}`.
pub fn make_a_sector(sigma: Sigma, s: &FockOperator, arg_parity: Parity) -> Result<SuperOperator> {
    require_odd(s, "make_a_sector")?;
    let sbar = coupling_power(s, sigma.bar());
    let sign = Complex64::new(arg_parity.sign(), 0.0);
    Ok(left_mul(&sbar).add(&right_mul(&sbar).scale(sign)))
}

/// Lowering vertex for exponent j:
/// `B_j[rho] = -(a_j s^sigma rho + conj(a_partner) P rho s^sigma P)`.
pub fn make_b_script(
    j: usize,
    s: &FockOperator,
    exps: &CorrelationDecomposition,
) -> Result<SuperOperator> {
    require_odd(s, "make_b_script")?;
    if j >= exps.len() {
        return Err(Error::InvalidParameter(format!(
            "exponent index {j} out of range ({} exponents)",
            exps.len()
        )));
    }
    let e = exps.exponents[j];
    let abar = exps.exponents[exps.partner(j)].a.conj();
    let ss = coupling_power(s, e.sigma);
    let p = parity_super(s.space());
    Ok(left_mul(&ss)
        .scale(e.a)
        .add(&p.compose(&right_mul(&ss)).scale(abar))
        .scale(Complex64::new(-1.0, 0.0)))
}

/// Even-standard replacement of [`make_b_script`] for an argument of
/// definite parity: `B_j[rho] = -a_j s^sigma rho + sign(parity)
/// conj(a_partner) rho s^sigma`.
pub fn make_b_script_sector(
    j: usize,
    s: &FockOperator,
    exps: &CorrelationDecomposition,
    arg_parity: Parity,
) -> Result<SuperOperator> {
    require_odd(s, "make_b_script_sector")?;
    if j >= exps.len() {
        return Err(Error::InvalidParameter(format!(
            "exponent index {j} out of range ({} exponents)",
            exps.len()
        )));
    }
    let e = exps.exponents[j];
    let abar = exps.exponents[exps.partner(j)].a.conj();
    let ss = coupling_power(s, e.sigma);
    let sign = Complex64::new(arg_parity.sign(), 0.0);
    Ok(left_mul(&ss)
        .scale(-e.a)
        .add(&right_mul(&ss).scale(sign * abar)))
}

/// Anything that can supply two-time correlation values C^sigma(t2, t1).
pub trait CorrelationSource {
    fn corr(&self, sigma: Sigma, t2: f64, t1: f64) -> Result<Complex64>;
}

impl CorrelationSource for BathSpec {
    fn corr(&self, sigma: Sigma, t2: f64, t1: f64) -> Result<Complex64> {
        crate::bath::correlation_exact(self, sigma, t2, t1)
    }
}

impl CorrelationSource for CorrelationDecomposition {
    fn corr(&self, sigma: Sigma, t2: f64, t1: f64) -> Result<Complex64> {
        Ok(self.evaluate(sigma, t2 - t1))
    }
}

/// Fixed correlation values; used by tests and the Markovian vertex check.
pub struct ConstCorrelation {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl CorrelationSource for ConstCorrelation {
    fn corr(&self, sigma: Sigma, _t2: f64, _t1: f64) -> Result<Complex64> {
        Ok(match sigma {
            Sigma::Plus => self.plus,
            Sigma::Minus => self.minus,
        })
    }
}

fn interaction_picture(op: &Array2<Complex64>, h: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
    // s(t) = U^dagger(t) s U(t), U = exp(-i H t)
    let u = linalg::propagator(h, t);
    linalg::dagger(&u).dot(op).dot(&u)
}

/// Two-time kernel W(t2, t1) = sum_sigma A^sigma(t2) B^sigma(t2, t1) with
/// interaction-picture coupling operators. Only used for low-order Dyson
/// cross-checks.
pub fn make_w_kernel<C: CorrelationSource>(
    corr: &C,
    s: &FockOperator,
    h_s: &FockOperator,
    t2: f64,
    t1: f64,
) -> Result<SuperOperator> {
    require_odd(s, "make_w_kernel")?;
    if t2 < t1 {
        return Err(Error::InvalidParameter(format!(
            "kernel needs t2 >= t1, got t2 = {t2}, t1 = {t1}"
        )));
    }
    let space = s.space();
    let hd = h_s.to_dense();
    let p = parity_super(space);
    let mut w = SuperOperator::zero(space.dim());
    for sigma in [Sigma::Plus, Sigma::Minus] {
        let sbar_t2 = FockOperator::from_dense(
            space,
            &interaction_picture(&coupling_power(s, sigma.bar()).to_dense(), &hd, t2),
        )?;
        let ss_t1 = FockOperator::from_dense(
            space,
            &interaction_picture(&coupling_power(s, sigma).to_dense(), &hd, t1),
        )?;
        let a_vertex = left_mul(&sbar_t2).sub(&p.compose(&right_mul(&sbar_t2)));
        let c = corr.corr(sigma, t2, t1)?;
        let cbar = corr.corr(sigma.bar(), t2, t1)?.conj();
        let b_vertex = left_mul(&ss_t1)
            .scale(c)
            .add(&p.compose(&right_mul(&ss_t1)).scale(cbar))
            .scale(Complex64::new(-1.0, 0.0));
        w = w.add(&a_vertex.compose(&b_vertex));
    }
    Ok(w)
}

/// Sector-restricted kernel W_{+/-}(t2, t1) in commutator/anticommutator
/// form: the even sector uses commutators, the odd sector anticommutators.
/// Algebraically equal to `make_w_kernel` composed with the sector
/// projector.
pub fn make_w_kernel_sector<C: CorrelationSource>(
    sector: Parity,
    corr: &C,
    s: &FockOperator,
    h_s: &FockOperator,
    t2: f64,
    t1: f64,
) -> Result<SuperOperator> {
    require_odd(s, "make_w_kernel_sector")?;
    if t2 < t1 {
        return Err(Error::InvalidParameter(format!(
            "kernel needs t2 >= t1, got t2 = {t2}, t1 = {t1}"
        )));
    }
    let space = s.space();
    let hd = h_s.to_dense();
    // sector sign: + replaces the parity conjugation on even arguments,
    // - on odd arguments
    let pm = Complex64::new(sector.sign(), 0.0);
    let mut w = SuperOperator::zero(space.dim());
    for sigma in [Sigma::Plus, Sigma::Minus] {
        let sbar2 = FockOperator::from_dense(
            space,
            &interaction_picture(&coupling_power(s, sigma.bar()).to_dense(), &hd, t2),
        )?;
        let s1 = FockOperator::from_dense(
            space,
            &interaction_picture(&coupling_power(s, sigma).to_dense(), &hd, t1),
        )?;
        let c = corr.corr(sigma, t2, t1)?;
        let cbar = corr.corr(sigma.bar(), t2, t1)?.conj();
        // -C^sigma (s2 s1 rho -+ s1 rho s2) with s2 = s^{-sigma}(t2), s1 = s^sigma(t1)
        let first = left_mul(&sbar2.matmul(&s1))
            .sub(&left_mul(&s1).compose(&right_mul(&sbar2)).scale(pm))
            .scale(-c);
        // -conj(C^{-sigma}) (rho s1 s2 -+ s2 rho s1)
        let second = right_mul(&s1.matmul(&sbar2))
            .sub(&left_mul(&sbar2).compose(&right_mul(&s1)).scale(pm))
            .scale(-cbar);
        w = w.add(&first).add(&second);
    }
    Ok(w)
}
