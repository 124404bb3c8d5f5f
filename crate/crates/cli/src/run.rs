//! Task execution and artifact export.
//!
//! Every run writes its data as CSV with full round-trip precision (17
//! significant digits) plus a machine-readable summary JSON listing every
//! parameter that influenced the run. Solvers are deterministic, so
//! identical configs produce identical bytes.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use parheom::correlators::{spectrum, system_correlation, CorrelationResult, CorrelationSolver};
use parheom::fock::DensityMatrix;
use parheom::heom::{build_hierarchy, evolve_heom, evolve_heom_states};
use parheom::lindblad::{build_generator, evolve_lindblad};
use parheom::oracle::{build_composite, evolve_exact, reduce_parity_aware, two_time_exact};

use crate::config::{Method, RunConfig, SpectralDensityBlock, TaskBlock};

/// Full-precision decimal formatting: 17 significant digits round-trips f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub task: String,
    pub method: String,
    pub parameters: serde_json::Value,
    pub artifacts: Vec<String>,
    pub timings_s: serde_json::Value,
}

fn time_grid(t_max: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|i| t_max * i as f64 / n_steps as f64).collect()
}

fn parameters_json(config: &RunConfig) -> serde_json::Value {
    let exponents = config.exponent_count();
    serde_json::json!({
        "method": config.solver.method,
        "mode": config.solver.mode,
        "depth": config.solver.depth,
        "rtol": config.solver.rtol,
        "atol": config.solver.atol,
        "alpha": config.solver.alpha,
        "n_matsubara": config.bath.n_matsubara,
        "exponent_count": exponents,
        "mu": config.bath.mu,
        "beta": config.bath.beta,
        "zero_temperature": config.bath.zero_temperature,
    })
}

/// Evolve the configured initial state on the task grid with the configured
/// method.
fn dynamics_trajectory(
    config: &RunConfig,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> anyhow::Result<Vec<DensityMatrix>> {
    match config.solver.method {
        Method::Heom => {
            let d = config.decomposition()?;
            let hier = build_hierarchy(
                &d,
                &config.coupling_operator()?,
                &config.system_hamiltonian()?,
                config.solver.depth,
                config.solver.mode.to_hierarchy_mode(),
                config.alpha(),
            )?;
            Ok(evolve_heom(&hier, rho0, grid, config.solver.rtol, config.solver.atol)?)
        }
        Method::Lindblad => {
            let (gamma, n0) = match &config.bath.spectral_density {
                SpectralDensityBlock::Flat { gamma, n0 } => (*gamma, *n0),
                _ => anyhow::bail!("lindblad method requires the flat bath"),
            };
            let gen = build_generator(
                &config.system_hamiltonian()?,
                &config.coupling_operator()?,
                gamma,
                n0,
            )?;
            Ok(evolve_lindblad(&gen, rho0, grid)?)
        }
        Method::Oracle => {
            let modes = match &config.bath.spectral_density {
                SpectralDensityBlock::Discrete { modes } => modes.clone(),
                _ => anyhow::bail!("oracle method requires a discrete bath"),
            };
            let model = build_composite(
                &modes,
                &config.system_hamiltonian()?,
                &config.coupling_operator()?,
                config.temperature(),
                config.bath.mu,
                rho0,
            )?;
            Ok(grid
                .iter()
                .map(|&t| reduce_parity_aware(&model, &evolve_exact(&model, t)))
                .collect())
        }
    }
}

fn correlation_series(
    config: &RunConfig,
    a: &parheom::fock::FockOperator,
    b: &parheom::fock::FockOperator,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> anyhow::Result<CorrelationResult> {
    match config.solver.method {
        Method::Heom => {
            let d = config.decomposition()?;
            let hier = build_hierarchy(
                &d,
                &config.coupling_operator()?,
                &config.system_hamiltonian()?,
                config.solver.depth,
                config.solver.mode.to_hierarchy_mode(),
                config.alpha(),
            )?;
            Ok(system_correlation(a, b, CorrelationSolver::Heom(&hier), rho0, grid)?)
        }
        Method::Lindblad => {
            let (gamma, n0) = match &config.bath.spectral_density {
                SpectralDensityBlock::Flat { gamma, n0 } => (*gamma, *n0),
                _ => anyhow::bail!("lindblad method requires the flat bath"),
            };
            let gen = build_generator(
                &config.system_hamiltonian()?,
                &config.coupling_operator()?,
                gamma,
                n0,
            )?;
            Ok(system_correlation(a, b, CorrelationSolver::Lindblad(&gen), rho0, grid)?)
        }
        Method::Oracle => {
            let modes = match &config.bath.spectral_density {
                SpectralDensityBlock::Discrete { modes } => modes.clone(),
                _ => anyhow::bail!("oracle method requires a discrete bath"),
            };
            let model = build_composite(
                &modes,
                &config.system_hamiltonian()?,
                &config.coupling_operator()?,
                config.temperature(),
                config.bath.mu,
                rho0,
            )?;
            let values = two_time_exact(&model, a, b, grid)?;
            Ok(CorrelationResult {
                t_grid: grid.to_vec(),
                values,
                a_label: "config.a".into(),
                b_label: "config.b".into(),
                solver: "oracle".into(),
            })
        }
    }
}

fn write_dynamics_csv(grid: &[f64], trajectory: &[DensityMatrix]) -> String {
    let d = trajectory[0].space().dim();
    let mut out = String::new();
    out.push('t');
    for i in 0..d {
        for j in 0..d {
            let _ = write!(out, ",re_{i}{j},im_{i}{j}");
        }
    }
    out.push('\n');
    for (k, &t) in grid.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        let m = trajectory[k].matrix();
        for i in 0..d {
            for j in 0..d {
                let v = m[(i, j)];
                let _ = write!(out, ",{},{}", fmt_f64(v.re), fmt_f64(v.im));
            }
        }
        out.push('\n');
    }
    out
}

fn write_correlation_csv(result: &CorrelationResult) -> String {
    let mut out = String::from("t,re_c,im_c\n");
    for (i, &t) in result.t_grid.iter().enumerate() {
        let v = result.values[i];
        let _ = writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

/// Execute a run/decompose task; returns the summary. Verification lives in
/// [`crate::verify`].
pub fn execute(config: &RunConfig) -> anyhow::Result<RunSummary> {
    let started = Instant::now();
    let mut artifacts = Vec::new();
    match &config.task {
        TaskBlock::Dynamics { initial_state, t_max, n_steps, snapshots } => {
            let rho0 = config.build_state(initial_state)?;
            let grid = time_grid(*t_max, *n_steps);
            let t_solve = Instant::now();
            let trajectory = if *snapshots {
                // full-state route so the ADO blocks can be exported
                let d = config.decomposition()?;
                let hier = build_hierarchy(
                    &d,
                    &config.coupling_operator()?,
                    &config.system_hamiltonian()?,
                    config.solver.depth,
                    config.solver.mode.to_hierarchy_mode(),
                    config.alpha(),
                )?;
                let states =
                    evolve_heom_states(&hier, &rho0, &grid, config.solver.rtol, config.solver.atol)?;
                let snaps: Vec<_> = grid
                    .iter()
                    .zip(&states)
                    .map(|(&t, s)| hier.snapshot(t, s))
                    .collect();
                let snap_path = format!("{}.snapshots.json", config.output);
                std::fs::write(&snap_path, serde_json::to_string(&snaps)?)?;
                artifacts.push(snap_path);
                states
                    .iter()
                    .map(|s| DensityMatrix::new(rho0.space(), s.block(0)))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                dynamics_trajectory(config, &rho0, &grid)?
            };
            let solve_s = t_solve.elapsed().as_secs_f64();
            let csv_path = format!("{}.csv", config.output);
            std::fs::write(&csv_path, write_dynamics_csv(&grid, &trajectory))?;
            artifacts.push(csv_path);
            finish(config, artifacts, started, solve_s)
        }
        TaskBlock::Correlation { a, b, initial_state, t_max, n_steps } => {
            let rho0 = config.build_state(initial_state)?;
            let grid = time_grid(*t_max, *n_steps);
            let a_op = config.build_operator(a)?;
            let b_op = config.build_operator(b)?;
            let t_solve = Instant::now();
            let result = correlation_series(config, &a_op, &b_op, &rho0, &grid)?;
            let solve_s = t_solve.elapsed().as_secs_f64();
            let csv_path = format!("{}.csv", config.output);
            std::fs::write(&csv_path, write_correlation_csv(&result))?;
            artifacts.push(csv_path);
            finish(config, artifacts, started, solve_s)
        }
        TaskBlock::Spectrum {
            a,
            b,
            initial_state,
            t_max,
            n_steps,
            omega_min,
            omega_max,
            n_omega,
            window,
        } => {
            let rho0 = config.build_state(initial_state)?;
            let grid = time_grid(*t_max, *n_steps);
            let a_op = config.build_operator(a)?;
            let b_op = config.build_operator(b)?;
            let t_solve = Instant::now();
            let result = correlation_series(config, &a_op, &b_op, &rho0, &grid)?;
            let omega_grid: Vec<f64> = (0..*n_omega)
                .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (*n_omega - 1) as f64)
                .collect();
            let spec = spectrum(&result, &omega_grid, *window)?;
            let solve_s = t_solve.elapsed().as_secs_f64();

            let corr_path = format!("{}.correlation.csv", config.output);
            std::fs::write(&corr_path, write_correlation_csv(&result))?;
            artifacts.push(corr_path);
            let mut out = String::from("omega,s\n");
            for (i, &w) in spec.omega.iter().enumerate() {
                let _ = writeln!(out, "{},{}", fmt_f64(w), fmt_f64(spec.values[i]));
            }
            let spec_path = format!("{}.spectrum.csv", config.output);
            std::fs::write(&spec_path, out)?;
            artifacts.push(spec_path);
            finish(config, artifacts, started, solve_s)
        }
        TaskBlock::Verify {} => anyhow::bail!("verify tasks run through the verify subcommand"),
    }
}

/// The decompose subcommand: emit the exponent JSON.
pub fn decompose(config: &RunConfig) -> anyhow::Result<RunSummary> {
    let started = Instant::now();
    let d = config.decomposition()?;
    let json_path = format!("{}.exponents.json", config.output);
    std::fs::write(&json_path, serde_json::to_string_pretty(&d)?)?;
    let solve_s = started.elapsed().as_secs_f64();
    finish(config, vec![json_path], started, solve_s)
}

fn finish(
    config: &RunConfig,
    artifacts: Vec<String>,
    started: Instant,
    solve_s: f64,
) -> anyhow::Result<RunSummary> {
    let summary = RunSummary {
        task: config.task.name().to_string(),
        method: format!("{:?}", config.solver.method).to_lowercase(),
        parameters: parameters_json(config),
        artifacts: artifacts.clone(),
        timings_s: serde_json::json!({
            "solve": solve_s,
            "total": started.elapsed().as_secs_f64(),
        }),
    };
    let summary_path = format!("{}.summary.json", config.output);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
