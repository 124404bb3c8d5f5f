//! System two-time correlation functions C_AB(t) = Tr[A rho'(t)] with
//! rho'(0) = B rho_S(0), and one-sided emission spectra.
//!
//! The inserted operator B generally makes rho' an odd-parity, non-Hermitian
//! object; it is evolved as-is, which is exactly what the generalized
//! hierarchy and the sector-blocked Lindblad generator are for. The
//! even-standard hierarchy refuses such initial data with a typed error.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperator};
use crate::heom::{evolve_heom, Hierarchy, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::lindblad::{evolve_lindblad, LindbladGenerator};

/// Which solver propagates the inserted state.
pub enum CorrelationSolver<'a> {
    Heom(&'a Hierarchy),
    Lindblad(&'a LindbladGenerator),
}

impl CorrelationSolver<'_> {
    fn name(&self) -> &'static str {
        match self {
            CorrelationSolver::Heom(h) => match h.mode() {
                crate::heom::HierarchyMode::EvenStandard => "heom(even-standard)",
                crate::heom::HierarchyMode::Generalized => "heom(generalized)",
            },
            CorrelationSolver::Lindblad(_) => "lindblad",
        }
    }
}

/// Two-time correlation series with its provenance.
#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub t_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub a_label: String,
    pub b_label: String,
    pub solver: String,
}

/// C_AB(t) by evolving rho'(0) = B rho_S(0) and tracing against A.
pub fn system_correlation(
    a: &FockOperator,
    b: &FockOperator,
    solver: CorrelationSolver<'_>,
    rho_s0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<CorrelationResult> {
    if a.space() != rho_s0.space() || b.space() != rho_s0.space() {
        return Err(Error::DimensionMismatch(
            "correlation operators must live on the state's space".into(),
        ));
    }
    let inserted = b.to_dense().dot(rho_s0.matrix());
    let rho_prime = DensityMatrix::new(rho_s0.space(), inserted)?;
    let trajectory = match &solver {
        CorrelationSolver::Heom(h) => {
            evolve_heom(h, &rho_prime, t_grid, DEFAULT_RTOL, DEFAULT_ATOL)?
        }
        CorrelationSolver::Lindblad(gen) => evolve_lindblad(gen, &rho_prime, t_grid)?,
    };
    let a_dense = a.to_dense();
    let values = trajectory
        .iter()
        .map(|state| {
            let prod = a_dense.dot(state.matrix());
            (0..prod.nrows()).map(|i| prod[(i, i)]).sum()
        })
        .collect();
    Ok(CorrelationResult {
        t_grid: t_grid.to_vec(),
        values,
        a_label: format!("operator[dim={}]", a.space().dim()),
        b_label: format!("operator[dim={}]", b.space().dim()),
        solver: solver.name().to_string(),
    })
}

/// One-sided spectrum with its transform metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Exponential damping width applied to C(t) before transforming, if any.
    pub window: Option<f64>,
    /// Length of the time record that entered the transform.
    pub t_max: f64,
}

/// S(omega) = 2 Re integral_0^T e^{i omega t} C(t) dt by the trapezoid rule
/// on a uniform grid, with an optional exponential damping window e^{-w t}.
pub fn spectrum(
    result: &CorrelationResult,
    omega_grid: &[f64],
    window: Option<f64>,
) -> Result<SpectrumResult> {
    let t = &result.t_grid;
    if t.len() < 2 {
        return Err(Error::InvalidParameter("spectrum needs at least two time points".into()));
    }
    let dt = t[1] - t[0];
    for w in t.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0) {
            return Err(Error::NonUniformGrid(format!(
                "spacing {} differs from {}",
                w[1] - w[0],
                dt
            )));
        }
    }
    let damped: Vec<Complex64> = match window {
        Some(w) => result
            .values
            .iter()
            .zip(t)
            .map(|(&c, &ti)| c * (-w * ti).exp())
            .collect(),
        None => result.values.clone(),
    };
    let values = omega_grid
        .iter()
        .map(|&omega| {
            let mut acc = Complex64::default();
            for (i, &ti) in t.iter().enumerate() {
                let weight = if i == 0 || i == t.len() - 1 { 0.5 } else { 1.0 };
                acc += damped[i] * Complex64::from_polar(weight * dt, omega * ti);
            }
            2.0 * acc.re
        })
        .collect();
    Ok(SpectrumResult {
        omega: omega_grid.to_vec(),
        values,
        window,
        t_max: *t.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{
        decompose_discrete, BathSpec, SpectralDensity, Temperature,
    };
    use crate::fock::{annihilation_op, creation_op, hamiltonian, FockSpace};
    use crate::heom::{build_hierarchy, HierarchyMode};
    use crate::lindblad::build_generator;

    fn setup() -> (FockSpace, FockOperator, FockOperator) {
        let sp = FockSpace::new(1);
        let c = annihilation_op(sp, 0).unwrap();
        let h = hamiltonian(sp, &[1.0], &[]).unwrap();
        (sp, h, c)
    }

    #[test]
    fn decoupled_correlation_is_bare_phase() {
        // g = 0: C_{c c^dag}(t) = e^{-i omega t} for rho = |0><0|
        let (sp, h, c) = setup();
        let bath = BathSpec::new(
            SpectralDensity::Discrete { modes: vec![(0.0, 1.0)] },
            Temperature::Finite(1.0),
            0.0,
        )
        .unwrap();
        let d = decompose_discrete(&bath).unwrap();
        let hier =
            build_hierarchy(&d, &c, &h, 2, HierarchyMode::Generalized, Complex64::i()).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let res = system_correlation(
            &c,
            &creation_op(sp, 0).unwrap(),
            CorrelationSolver::Heom(&hier),
            &rho0,
            &grid,
        )
        .unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, -t);
            // tolerance floor set by the cubic Hermite dense output at
            // the default integrator tolerances
            assert!((res.values[i] - expect).norm() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn markovian_correlation_decays() {
        // C(t) = e^{(-i omega - gamma) t} for the flat bath
        let (sp, h, c) = setup();
        let gamma = 0.1;
        let gen = build_generator(&h, &c, gamma, 0.3).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 0).unwrap();
        let grid: Vec<f64> = (0..=60).map(|i| 0.25 * i as f64).collect();
        let res = system_correlation(
            &c,
            &creation_op(sp, 0).unwrap(),
            CorrelationSolver::Lindblad(&gen),
            &rho0,
            &grid,
        )
        .unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let expect = (Complex64::new(-gamma, -1.0) * t).exp();
            assert!((res.values[i] - expect).norm() < 1e-9, "t = {t}");
        }
        // value at t = 0 equals Tr[A B rho]
        assert!((res.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn even_standard_solver_refuses_odd_insertion() {
        let (sp, h, c) = setup();
        let bath = BathSpec::new(
            SpectralDensity::Discrete { modes: vec![(0.1, 1.0)] },
            Temperature::Finite(1.0),
            0.0,
        )
        .unwrap();
        let d = decompose_discrete(&bath).unwrap();
        let hier =
            build_hierarchy(&d, &c, &h, 2, HierarchyMode::EvenStandard, Complex64::i()).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 0).unwrap();
        let res = system_correlation(
            &c,
            &creation_op(sp, 0).unwrap(),
            CorrelationSolver::Heom(&hier),
            &rho0,
            &[0.0, 1.0],
        );
        assert!(matches!(res, Err(Error::OddStateEvenSolver(_))));
    }

    #[test]
    fn correlation_is_linear_in_operators() {
        let (sp, h, c) = setup();
        let gen = build_generator(&h, &c, 0.2, 0.1).unwrap();
        let rho0 = DensityMatrix::basis_state(sp, 0).unwrap();
        let grid = [0.0, 0.5, 1.5];
        let cd = creation_op(sp, 0).unwrap();
        let a2 = c.scale(Complex64::new(2.0, 1.0));
        let r1 =
            system_correlation(&c, &cd, CorrelationSolver::Lindblad(&gen), &rho0, &grid).unwrap();
        let r2 =
            system_correlation(&a2, &cd, CorrelationSolver::Lindblad(&gen), &rho0, &grid).unwrap();
        for i in 0..grid.len() {
            let expect = Complex64::new(2.0, 1.0) * r1.values[i];
            assert!((r2.values[i] - expect).norm() < 1e-12);
        }
        let b2 = cd.scale(Complex64::new(0.0, -3.0));
        let r3 =
            system_correlation(&c, &b2, CorrelationSolver::Lindblad(&gen), &rho0, &grid).unwrap();
        for i in 0..grid.len() {
            let expect = Complex64::new(0.0, -3.0) * r1.values[i];
            assert!((r3.values[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_lorentzian_peak() {
        // synthetic C(t) = e^{(-i omega0 - gamma) t}
        let omega0 = 1.0;
        let gamma = 0.1;
        let t_max = 20.0 / gamma;
        let n = 8000;
        let t_grid: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
        let values: Vec<Complex64> = t_grid
            .iter()
            .map(|&t| (Complex64::new(-gamma, -omega0) * t).exp())
            .collect();
        let result = CorrelationResult {
            t_grid,
            values,
            a_label: "c".into(),
            b_label: "c^dag".into(),
            solver: "synthetic".into(),
        };
        let omega_grid: Vec<f64> =
            (0..=800).map(|i| omega0 - 4.0 * gamma + 8.0 * gamma * i as f64 / 800.0).collect();
        let spec = spectrum(&result, &omega_grid, None).unwrap();
        // peak height 2/gamma (1 - e^{-gamma T})
        let peak = spec
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let expect_peak = 2.0 / gamma * (1.0 - (-gamma * t_max).exp());
        assert!(
            (peak - expect_peak).abs() / expect_peak < 1e-3,
            "peak {peak} vs {expect_peak}"
        );
        // half width at half maximum within 2% of gamma
        let half = peak / 2.0;
        let mut lo = None;
        let mut hi = None;
        for i in 1..spec.values.len() {
            let (v0, v1) = (spec.values[i - 1], spec.values[i]);
            if v0 < half && v1 >= half {
                let f = (half - v0) / (v1 - v0);
                lo = Some(spec.omega[i - 1] + f * (spec.omega[i] - spec.omega[i - 1]));
            }
            if v0 >= half && v1 < half {
                let f = (v0 - half) / (v0 - v1);
                hi = Some(spec.omega[i - 1] + f * (spec.omega[i] - spec.omega[i - 1]));
            }
        }
        let hwhm = (hi.unwrap() - lo.unwrap()) / 2.0;
        assert!((hwhm - gamma).abs() / gamma < 0.02, "hwhm {hwhm} vs gamma {gamma}");
    }

    #[test]
    fn spectrum_of_zero_is_zero() {
        let t_grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        let result = CorrelationResult {
            t_grid: t_grid.clone(),
            values: vec![Complex64::default(); t_grid.len()],
            a_label: String::new(),
            b_label: String::new(),
            solver: "synthetic".into(),
        };
        let spec = spectrum(&result, &[0.0, 0.5, 1.0], Some(0.05)).unwrap();
        assert!(spec.values.iter().all(|&v| v == 0.0));
        assert_eq!(spec.window, Some(0.05));
    }

    #[test]
    fn spectrum_rejects_nonuniform_grid() {
        let result = CorrelationResult {
            t_grid: vec![0.0, 0.1, 0.3],
            values: vec![Complex64::default(); 3],
            a_label: String::new(),
            b_label: String::new(),
            solver: "synthetic".into(),
        };
        assert!(matches!(
            spectrum(&result, &[0.0], None),
            Err(Error::NonUniformGrid(_))
        ));
    }
}
