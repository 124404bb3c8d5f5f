//! End-to-end tests driving the built binary.

use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_parheom")
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().expect("binary runs")
}

fn benchmark_config(output: &str) -> serde_json::Value {
    serde_json::json!({
        "system": { "n_modes": 1, "energies": [1.0], "coupling_mode": 0 },
        "bath": {
            "spectral_density": { "discrete": { "modes": [[0.05, 0.6], [0.05, 1.0], [0.05, 1.5]] } },
            "beta": 2.0,
            "mu": 0.0
        },
        "solver": { "method": "heom", "mode": "even-standard", "depth": 6, "rtol": 1e-10, "atol": 1e-12 },
        "task": { "dynamics": { "initial_state": { "occupation": 1 }, "t_max": 10.0, "n_steps": 100 } },
        "output": output
    })
}

fn write_config(dir: &Path, value: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn parse_dynamics_csv(path: &Path) -> Vec<(f64, Vec<Complex64>)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let ncols = header.split(',').count();
    let d2 = (ncols - 1) / 2;
    lines
        .map(|line| {
            let nums: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(nums.len(), ncols);
            let entries = (0..d2)
                .map(|k| Complex64::new(nums[1 + 2 * k], nums[2 + 2 * k]))
                .collect();
            (nums[0], entries)
        })
        .collect()
}

#[test]
fn benchmark_dynamics_reproduces_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench").to_str().unwrap().to_string();
    let config = write_config(dir.path(), &benchmark_config(&out));
    let result = run_cli(&["run", config.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let rows = parse_dynamics_csv(&dir.path().join("bench.csv"));
    assert_eq!(rows.len(), 101);

    // independent oracle route
    use parheom::fock::{annihilation_op, hamiltonian, DensityMatrix, FockSpace};
    use parheom::oracle::{build_composite, evolve_exact, reduce_parity_aware};
    let sp = FockSpace::new(1);
    let c = annihilation_op(sp, 0).unwrap();
    let h = hamiltonian(sp, &[1.0], &[]).unwrap();
    let rho0 = DensityMatrix::basis_state(sp, 1).unwrap();
    let model = build_composite(
        &[(0.05, 0.6), (0.05, 1.0), (0.05, 1.5)],
        &h,
        &c,
        parheom::bath::Temperature::Finite(2.0),
        0.0,
        &rho0,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for (t, entries) in &rows {
        let exact = reduce_parity_aware(&model, &evolve_exact(&model, *t));
        // row-major entries: rho_00, rho_01, rho_10, rho_11
        let diag_err = (entries[0] - exact.matrix()[(0, 0)])
            .norm()
            .max((entries[3] - exact.matrix()[(1, 1)]).norm());
        worst = worst.max(diag_err);
    }
    assert!(worst < 1e-4, "CLI trajectory vs oracle: {worst:.3e}");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["task"], "dynamics");
    assert_eq!(summary["parameters"]["depth"], 6);
    assert!(summary["timings_s"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a").to_str().unwrap().to_string();
    let out2 = dir.path().join("b").to_str().unwrap().to_string();
    let config = write_config(dir.path(), &benchmark_config("ignored"));
    for (out_flag, _) in [(&out1, 0), (&out2, 1)] {
        let result = run_cli(&["run", config.to_str().unwrap(), "--output", out_flag]);
        assert!(result.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "identical config must produce identical bytes");
}

#[test]
fn depth_validation_names_both_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = benchmark_config("unused");
    config["solver"]["depth"] = serde_json::json!(9);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains('9') && stderr.contains('6'), "stderr: {stderr}");
}

#[test]
fn unknown_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = benchmark_config("unused");
    config["frobnicate"] = serde_json::json!(true);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("frobnicate"));

    // unknown keys nested inside the task block are rejected too
    let mut config = benchmark_config("unused");
    config["task"]["dynamics"]["surprise"] = serde_json::json!(1);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1), "nested unknown key must be rejected");
    assert!(String::from_utf8_lossy(&result.stderr).contains("surprise"));
}

#[test]
fn decoupled_dynamics_is_bare_evolution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bare").to_str().unwrap().to_string();
    let mut config = benchmark_config(&out);
    config["bath"]["spectral_density"]["discrete"]["modes"] = serde_json::json!([[0.0, 1.0]]);
    config["solver"]["depth"] = serde_json::json!(2);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let rows = parse_dynamics_csv(&dir.path().join("bare.csv"));
    for (t, entries) in &rows {
        // |1><1| is stationary under H = omega n
        assert!((entries[3] - Complex64::new(1.0, 0.0)).norm() < 1e-8, "t = {t}");
        assert!(entries[0].norm() < 1e-8);
    }
}

#[test]
fn verify_subcommand_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify").to_str().unwrap().to_string();
    let mut config = benchmark_config(&out);
    config["task"] = serde_json::json!({ "verify": {} });
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["verify", path.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("verify.verify.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    for c in checks {
        assert_eq!(c["pass"], true, "check failed: {c}");
        assert!(c["threshold"].is_number());
    }
}

#[test]
fn decompose_emits_consistent_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dec").to_str().unwrap().to_string();
    let config = serde_json::json!({
        "system": { "n_modes": 1, "energies": [1.0], "coupling_mode": 0 },
        "bath": {
            "spectral_density": { "lorentzian": { "gamma": 0.1, "width": 1.0, "center": 0.0 } },
            "beta": 2.0,
            "mu": 0.0,
            "n_matsubara": 10
        },
        "solver": { "method": "heom", "depth": 4 },
        "task": { "verify": {} },
        "output": out
    });
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["decompose", path.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = std::fs::read_to_string(dir.path().join("dec.exponents.json")).unwrap();
    let d: parheom::bath::CorrelationDecomposition = serde_json::from_str(&text).unwrap();
    assert_eq!(d.len(), 22);
    // reconstruction against the quadrature route
    let bath = parheom::bath::BathSpec::new(
        parheom::bath::SpectralDensity::Lorentzian { gamma: 0.1, width: 1.0, center: 0.0 },
        parheom::bath::Temperature::Finite(2.0),
        0.0,
    )
    .unwrap();
    let quad = parheom::bath::correlation_exact(&bath, parheom::bath::Sigma::Plus, 1.0, 0.0).unwrap();
    let rec = d.evaluate(parheom::bath::Sigma::Plus, 1.0);
    assert!((quad - rec).norm() / quad.norm() < 1e-3);
}

#[test]
fn lindblad_method_requires_flat_bath() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = benchmark_config("unused");
    config["solver"]["method"] = serde_json::json!("lindblad");
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("flat"));
}

#[test]
fn decomposition_file_is_consumed_by_heom() {
    let dir = tempfile::tempdir().unwrap();
    let dec_out = dir.path().join("dec").to_str().unwrap().to_string();
    let lorentz_bath = serde_json::json!({
        "spectral_density": { "lorentzian": { "gamma": 0.1, "width": 1.0, "center": 0.0 } },
        "beta": 2.0,
        "mu": 0.0,
        "n_matsubara": 4
    });
    let mut config = benchmark_config(&dec_out);
    config["bath"] = lorentz_bath.clone();
    config["solver"]["depth"] = serde_json::json!(2);
    config["task"]["dynamics"]["t_max"] = serde_json::json!(2.0);
    config["task"]["dynamics"]["n_steps"] = serde_json::json!(20);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["decompose", path.to_str().unwrap()]);
    assert!(result.status.success());
    let exponents_path = dir.path().join("dec.exponents.json");

    // run once with the derived decomposition, once consuming the file
    let out_a = dir.path().join("derived").to_str().unwrap().to_string();
    let result = run_cli(&["run", path.to_str().unwrap(), "--output", &out_a]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let mut config_file = config.clone();
    config_file["bath"]["decomposition_file"] =
        serde_json::json!(exponents_path.to_str().unwrap());
    let path2 = dir.path().join("config2.json");
    std::fs::write(&path2, serde_json::to_string_pretty(&config_file).unwrap()).unwrap();
    let out_b = dir.path().join("fromfile").to_str().unwrap().to_string();
    let result = run_cli(&["run", path2.to_str().unwrap(), "--output", &out_b]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let a = std::fs::read(dir.path().join("derived.csv")).unwrap();
    let b = std::fs::read(dir.path().join("fromfile.csv")).unwrap();
    assert_eq!(a, b, "file-loaded decomposition must reproduce the derived run exactly");
}

#[test]
fn snapshots_export_full_hierarchy_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snap").to_str().unwrap().to_string();
    let mut config = benchmark_config(&out);
    config["task"]["dynamics"]["snapshots"] = serde_json::json!(true);
    config["task"]["dynamics"]["t_max"] = serde_json::json!(1.0);
    config["task"]["dynamics"]["n_steps"] = serde_json::json!(5);
    let path = write_config(dir.path(), &config);
    let result = run_cli(&["run", path.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let snaps: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("snap.snapshots.json")).unwrap(),
    )
    .unwrap();
    let list = snaps.as_array().unwrap();
    assert_eq!(list.len(), 6);
    // 64 ADO labels at depth 6 over 6 exponents
    assert_eq!(list[0]["labels"].as_array().unwrap().len(), 64);
    assert_eq!(list[0]["dim"], 2);
    // physical block of the initial snapshot is |1><1|
    let block0 = list[0]["blocks"][0].as_array().unwrap();
    assert_eq!(block0.len(), 4);
    assert_eq!(block0[3][0], 1.0);
}
