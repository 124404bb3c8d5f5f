//! Markovian generator in generalized Lindblad form.
//!
//! For a flat bath J = gamma with constant occupation n0 the influence
//! kernel collapses to delta correlations and the reduced dynamics becomes
//!   d rho / dt = -i [H_S, rho]
//!       + gamma sum_{r = +/-} (1 - n0) D^r_s[rho^r] + n0 D^r_{s^dag}[rho^r],
//! with D^r_O[.] = 2 r O . O^dag - O^dag O . - . O^dag O. The jump term
//! flips sign in the odd parity sector (r = -1); both sector blocks are
//! stored explicitly so the sign difference stays visible and testable.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperator, Parity};
use crate::linalg;
use crate::superop::{
    left_mul, liouvillian, right_mul, sector_projector_super, unvec, vec, SuperOperator,
};

/// Sector-blocked Markovian generator.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    h_s: FockOperator,
    s: FockOperator,
    gamma: f64,
    n0: f64,
    even: SuperOperator,
    odd: SuperOperator,
}

/// Dissipator D^r_O[.] = 2 r O . O^dag - O^dag O . - . O^dag O.
fn dissipator(op: &FockOperator, r: Parity) -> SuperOperator {
    let od = op.dagger();
    let odo = od.matmul(op);
    let jump = left_mul(op)
        .compose(&right_mul(&od))
        .scale(Complex64::new(2.0 * r.sign(), 0.0));
    jump.sub(&left_mul(&odo)).sub(&right_mul(&odo))
}

/// Assemble the generalized Lindblad generator.
pub fn build_generator(
    h_s: &FockOperator,
    s: &FockOperator,
    gamma: f64,
    n0: f64,
) -> Result<LindbladGenerator> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay rate gamma = {gamma}")));
    }
    if !(0.0..=1.0).contains(&n0) {
        return Err(Error::InvalidParameter(format!("occupation n0 = {n0} outside [0, 1]")));
    }
    if s.parity(1e-12) != Some(Parity::Odd) {
        return Err(Error::ParityViolation("coupling operator s must be odd".into()));
    }
    if h_s.parity(1e-12) != Some(Parity::Even) {
        return Err(Error::ParityViolation("system Hamiltonian must be even".into()));
    }
    if h_s.space() != s.space() {
        return Err(Error::DimensionMismatch("H_S and s live on different spaces".into()));
    }

    let lv = liouvillian(h_s);
    let sd = s.dagger();
    let mut blocks = Vec::with_capacity(2);
    for r in [Parity::Even, Parity::Odd] {
        let diss = dissipator(s, r)
            .scale(Complex64::new(gamma * (1.0 - n0), 0.0))
            .add(&dissipator(&sd, r).scale(Complex64::new(gamma * n0, 0.0)));
        blocks.push(lv.add(&diss));
    }
    let odd = blocks.pop().unwrap();
    let even = blocks.pop().unwrap();
    Ok(LindbladGenerator { h_s: h_s.clone(), s: s.clone(), gamma, n0, even, odd })
}

impl LindbladGenerator {
    pub fn h_s(&self) -> &FockOperator {
        &self.h_s
    }

    pub fn coupling(&self) -> &FockOperator {
        &self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Generator acting on the even parity sector (Liouvillian included).
    pub fn even_block(&self) -> &SuperOperator {
        &self.even
    }

    /// Generator acting on the odd parity sector (Liouvillian included).
    pub fn odd_block(&self) -> &SuperOperator {
        &self.odd
    }

    /// Full generator on arbitrary-parity operators: each block composed
    /// with its sector projector.
    pub fn full_superoperator(&self) -> SuperOperator {
        let space = self.s.space();
        let pe = sector_projector_super(space, Parity::Even);
        let po = sector_projector_super(space, Parity::Odd);
        self.even.compose(&pe).add(&self.odd.compose(&po))
    }

    /// Stationary state of the even-sector block, normalized to unit trace.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(
                "steady state needs gamma > 0 (otherwise every H_S eigenstate is stationary)"
                    .into(),
            ));
        }
        let d = self.s.space().dim();
        let mut a = self.even.to_dense();
        let last = d * d - 1;
        for col in 0..d * d {
            a[(last, col)] = Complex64::default();
        }
        for j in 0..d {
            a[(last, j * d + j)] = Complex64::new(1.0, 0.0);
        }
        let mut b = Array2::zeros((d * d, 1));
        b[(last, 0)] = Complex64::new(1.0, 0.0);
        let x = linalg::lu_solve(&a, &b);
        let rho = unvec(&x.column(0).to_owned())?;
        DensityMatrix::new(self.s.space(), rho)
    }
}

/// Evolve an initial state on a time grid by dense matrix exponentials of
/// the vectorized generator; exact to machine precision at fixed steps.
pub fn evolve_lindblad(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != gen.s.space() {
        return Err(Error::DimensionMismatch("initial state on a different space".into()));
    }
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::NonUniformGrid(format!(
                "grid points {} and {} are not ascending",
                w[0], w[1]
            )));
        }
    }

    let full = gen.full_superoperator().to_dense();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut v = vec(rho0.matrix())?.insert_axis(ndarray::Axis(1));
    let mut prev_t = t_grid[0];
    if t_grid[0] != 0.0 {
        let step = full.mapv(|x| x * Complex64::new(t_grid[0], 0.0));
        v = linalg::expm(&step).dot(&v);
    }
    out.push(DensityMatrix::new(rho0.space(), unvec(&v.column(0).to_owned())?)?);

    let mut cached: Option<(f64, Array2<Complex64>)> = None;
    for &t in &t_grid[1..] {
        let dt = t - prev_t;
        let propagator = match &cached {
            Some((cdt, p)) if *cdt == dt => p.clone(),
            _ => {
                let p = linalg::expm(&full.mapv(|x| x * Complex64::new(dt, 0.0)));
                cached = Some((dt, p.clone()));
                p
            }
        };
        v = propagator.dot(&v);
        prev_t = t;
        out.push(DensityMatrix::new(rho0.space(), unvec(&v.column(0).to_owned())?)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation_op, hamiltonian, DensityMatrix, FockSpace};
    use ndarray::Array2;

    fn single_mode() -> (FockSpace, FockOperator, FockOperator) {
        let sp = FockSpace::new(1);
        let c = annihilation_op(sp, 0).unwrap();
        let h = hamiltonian(sp, &[1.0], &[]).unwrap();
        (sp, h, c)
    }

    #[test]
    fn gamma_zero_is_pure_liouvillian() {
        let (_, h, c) = single_mode();
        let gen = build_generator(&h, &c, 0.0, 0.3).unwrap();
        let lv = liouvillian(&h);
        assert!(gen.even_block().sub(&lv).norm_max() < 1e-15);
        assert!(gen.odd_block().sub(&lv).norm_max() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        let (_, h, c) = single_mode();
        assert!(build_generator(&h, &c, -0.1, 0.3).is_err());
        assert!(build_generator(&h, &c, 0.1, 1.2).is_err());
        let even_op = crate::fock::number_op(c.space(), 0).unwrap();
        assert!(matches!(
            build_generator(&h, &even_op, 0.1, 0.3),
            Err(Error::ParityViolation(_))
        ));
    }

    #[test]
    fn population_relaxation_analytic() {
        // n(t) = n0 + (n(0) - n0) e^{-2 gamma t}
        let (sp, h, c) = single_mode();
        let gamma = 0.1;
        let n0 = 0.3;
        let gen = build_generator(&h, &c, gamma, n0).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 1).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| 0.5 * i as f64).collect();
        let traj = evolve_lindblad(&gen, &rho0, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let n = traj[i].matrix()[(1, 1)].re;
            let expect = n0 + (1.0 - n0) * (-2.0 * gamma * t).exp();
            assert!((n - expect).abs() < 1e-8, "t = {t}: {n} vs {expect}");
            assert!((traj[i].trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn odd_sector_coherence_analytic() {
        // rho^o = |1><0| evolves with factor e^{(-i omega - gamma) t},
        // independent of n0
        let (sp, h, c) = single_mode();
        let omega = 1.0;
        let gamma = 0.1;
        for n0 in [0.0, 0.3, 0.9] {
            let gen = build_generator(&h, &c, gamma, n0).unwrap();
            let mut odd = Array2::<Complex64>::zeros((2, 2));
            odd[(1, 0)] = Complex64::new(1.0, 0.0);
            let rho0 = DensityMatrix::new(sp, odd).unwrap();
            let grid: Vec<f64> = (0..=100).map(|i| 0.5 * i as f64).collect();
            let traj = evolve_lindblad(&gen, &rho0, &grid).unwrap();
            for (i, &t) in grid.iter().enumerate() {
                let a = traj[i].matrix()[(1, 0)];
                let expect = (Complex64::new(-gamma, -omega) * t).exp();
                assert!((a - expect).norm() < 1e-8, "n0 = {n0}, t = {t}");
            }
        }
    }

    #[test]
    fn steady_state_is_stationary() {
        let (_, h, c) = single_mode();
        let gen = build_generator(&h, &c, 0.2, 0.35).unwrap();
        let ss = gen.steady_state().unwrap();
        assert!((ss.matrix()[(1, 1)].re - 0.35).abs() < 1e-12);
        let grid = [0.0, 1.0, 5.0, 20.0];
        let traj = evolve_lindblad(&gen, &ss, &grid).unwrap();
        for state in &traj {
            assert!(linalg::max_norm(&(state.matrix() - ss.matrix())) < 1e-10);
        }
    }

    #[test]
    fn single_point_grid_returns_initial() {
        let (sp, h, c) = single_mode();
        let gen = build_generator(&h, &c, 0.1, 0.0).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 1).unwrap();
        let traj = evolve_lindblad(&gen, &rho0, &[0.0]).unwrap();
        assert_eq!(traj.len(), 1);
        assert!(linalg::max_norm(&(traj[0].matrix() - rho0.matrix())) < 1e-15);
    }

    #[test]
    fn sector_independence() {
        // evolving a mixed-parity state jointly equals evolving the sector
        // parts separately and summing
        let sp = FockSpace::new(2);
        let c0 = annihilation_op(sp, 0).unwrap();
        let h = hamiltonian(sp, &[1.0, 0.6], &[(0, 1, 0.2)]).unwrap();
        let gen = build_generator(&h, &c0, 0.15, 0.4).unwrap();
        let mut raw = Array2::<Complex64>::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                raw[(i, j)] = Complex64::new(0.1 + (i as f64) * 0.07, (j as f64) * 0.05 - 0.1);
            }
        }
        let rho = DensityMatrix::new(sp, raw).unwrap();
        let (even, odd) = rho.sector_split();
        let grid = [0.0, 0.7, 1.9];
        let joint = evolve_lindblad(&gen, &rho, &grid).unwrap();
        let ev = evolve_lindblad(&gen, &DensityMatrix::new(sp, even).unwrap(), &grid).unwrap();
        let od = evolve_lindblad(&gen, &DensityMatrix::new(sp, odd).unwrap(), &grid).unwrap();
        for i in 0..grid.len() {
            let sum = ev[i].matrix() + od[i].matrix();
            assert!(linalg::max_norm(&(joint[i].matrix() - &sum)) < 1e-12);
        }
    }

    #[test]
    fn half_weight_kernel_at_equal_times_is_the_dissipator() {
        // with delta correlations C^sigma -> Gamma^sigma = Gamma(1 - sigma
        // + 2 sigma n0) and coincident times, half the two-time kernel is
        // exactly the dissipator of the generalized Lindblad generator
        use crate::superop::{make_w_kernel, sector_projector_super, ConstCorrelation};
        let (sp, h, c) = single_mode();
        let gamma = 0.13;
        let n0 = 0.4;
        let corr = ConstCorrelation {
            plus: Complex64::new(2.0 * gamma * n0, 0.0),
            minus: Complex64::new(2.0 * gamma * (1.0 - n0), 0.0),
        };
        let w = make_w_kernel(&corr, &c, &h, 0.0, 0.0).unwrap();
        let half_w = w.scale(Complex64::new(0.5, 0.0));

        let gen = build_generator(&h, &c, gamma, n0).unwrap();
        let lv = liouvillian(&h);
        let pe = sector_projector_super(sp, Parity::Even);
        let po = sector_projector_super(sp, Parity::Odd);
        let dissipator = gen
            .even_block()
            .sub(&lv)
            .compose(&pe)
            .add(&gen.odd_block().sub(&lv).compose(&po));
        assert!(half_w.sub(&dissipator).norm_max() < 1e-13);
    }

    #[test]
    fn heom_approaches_lindblad_with_bandwidth() {
        // discretized near-flat bands of growing width approach the
        // white-noise trajectory
        use crate::bath::{decompose_discrete, BathSpec, SpectralDensity, Temperature};
        use crate::heom::{build_hierarchy, evolve_heom, HierarchyMode};
        let (sp, h, c) = single_mode();
        let gamma = 0.1;
        let n0 = 0.3;
        let beta = 0.05;
        let mu = 1.0 - (1.0 / n0 - 1.0f64).ln() / beta;
        let gen = build_generator(&h, &c, gamma, n0).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 0).unwrap();
        let grid: Vec<f64> = (0..=25).map(|i| 0.2 * i as f64).collect();
        let lind = evolve_lindblad(&gen, &rho0, &grid).unwrap();

        let distance_for_band = |half_width: f64, n_modes: usize| -> f64 {
            let spacing = 2.0 * half_width / (n_modes - 1) as f64;
            let g = (gamma * spacing / std::f64::consts::PI).sqrt();
            let modes: Vec<(f64, f64)> =
                (0..n_modes).map(|k| (g, -half_width + spacing * k as f64)).collect();
            let bath = BathSpec::new(
                SpectralDensity::Discrete { modes },
                Temperature::Finite(beta),
                mu,
            )
            .unwrap();
            let d = decompose_discrete(&bath).unwrap();
            let hier =
                build_hierarchy(&d, &c, &h, 2, HierarchyMode::EvenStandard, Complex64::i())
                    .unwrap();
            let traj = evolve_heom(&hier, &rho0, &grid, 1e-9, 1e-11).unwrap();
            let mut worst = 0.0f64;
            for i in 0..grid.len() {
                worst = worst.max(crate::fock::trace_distance(&traj[i], &lind[i]));
            }
            worst
        };
        let narrow = distance_for_band(2.0, 5);
        let wide = distance_for_band(4.0, 9);
        assert!(
            wide < narrow,
            "wider band must sit closer to the Markovian limit: narrow {narrow:.4}, wide {wide:.4}"
        );
        assert!(wide < 0.02);
    }

    #[test]
    fn even_sector_positivity() {
        let (sp, h, c) = single_mode();
        let gen = build_generator(&h, &c, 0.3, 0.6).unwrap();
        let mut raw = Array2::<Complex64>::zeros((2, 2));
        raw[(0, 0)] = Complex64::new(0.7, 0.0);
        raw[(1, 1)] = Complex64::new(0.3, 0.0);
        let rho0 = DensityMatrix::new(sp, raw).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let traj = evolve_lindblad(&gen, &rho0, &grid).unwrap();
        for state in &traj {
            let (w, _) = linalg::eigh(state.matrix());
            assert!(w.iter().all(|&x| x >= -1e-10));
        }
    }
}
