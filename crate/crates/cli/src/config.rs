//! Run configuration: a single JSON document per run. Unknown keys are
//! rejected, numeric knobs live in the file (flags stay for paths and
//! verbosity), and the parsed struct round-trips through serde.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use parheom::bath::{BathSpec, CorrelationDecomposition, SpectralDensity, Temperature};
use parheom::fock::{annihilation_op, creation_op, hamiltonian, DensityMatrix, FockOperator, FockSpace};
use parheom::heom::HierarchyMode;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    pub bath: BathBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    pub task: TaskBlock,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub n_modes: usize,
    pub energies: Vec<f64>,
    /// (i, j, t) terms t (c_i^dag c_j + h.c.).
    #[serde(default)]
    pub hopping: Vec<(usize, usize, f64)>,
    /// Mode whose annihilation operator couples to the bath.
    pub coupling_mode: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    pub spectral_density: SpectralDensityBlock,
    /// Inverse temperature; ignored when `zero_temperature` is set.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub zero_temperature: bool,
    #[serde(default)]
    pub mu: f64,
    /// Fermi-pole count for Lorentzian decompositions.
    #[serde(default = "default_n_matsubara")]
    pub n_matsubara: usize,
    /// Load the exponent decomposition from a JSON file (as emitted by the
    /// decompose subcommand) instead of deriving it from the spectral
    /// density. HEOM only.
    #[serde(default)]
    pub decomposition_file: Option<String>,
}

fn default_n_matsubara() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectralDensityBlock {
    Flat { gamma: f64, n0: f64 },
    Lorentzian { gamma: f64, width: f64, center: f64 },
    Discrete { modes: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub mode: SectorMode,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// ADO scale as [re, im]; the physical block does not depend on it.
    #[serde(default = "default_alpha")]
    pub alpha: [f64; 2],
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            method: default_method(),
            mode: SectorMode::default(),
            depth: default_depth(),
            rtol: default_rtol(),
            atol: default_atol(),
            alpha: default_alpha(),
        }
    }
}

fn default_method() -> Method {
    Method::Heom
}
fn default_depth() -> usize {
    4
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_alpha() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Heom,
    Lindblad,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SectorMode {
    #[default]
    EvenStandard,
    Generalized,
}

impl SectorMode {
    pub fn to_hierarchy_mode(self) -> HierarchyMode {
        match self {
            SectorMode::EvenStandard => HierarchyMode::EvenStandard,
            SectorMode::Generalized => HierarchyMode::Generalized,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskBlock {
    Dynamics {
        initial_state: StateBlock,
        t_max: f64,
        n_steps: usize,
        /// Also dump every ADO block per grid point as JSON (HEOM only).
        #[serde(default)]
        snapshots: bool,
    },
    Correlation {
        a: OperatorBlock,
        b: OperatorBlock,
        initial_state: StateBlock,
        t_max: f64,
        n_steps: usize,
    },
    Spectrum {
        a: OperatorBlock,
        b: OperatorBlock,
        initial_state: StateBlock,
        t_max: f64,
        n_steps: usize,
        omega_min: f64,
        omega_max: f64,
        n_omega: usize,
        #[serde(default)]
        window: Option<f64>,
    },
    Verify {},
}

impl TaskBlock {
    pub fn name(&self) -> &'static str {
        match self {
            TaskBlock::Dynamics { .. } => "dynamics",
            TaskBlock::Correlation { .. } => "correlation",
            TaskBlock::Spectrum { .. } => "spectrum",
            TaskBlock::Verify {} => "verify",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateBlock {
    /// |m><m| for an occupation bitmask m.
    Occupation(usize),
    /// Explicit dense matrix, real and imaginary parts.
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorBlock {
    Annihilation(usize),
    Creation(usize),
    Number(usize),
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("config {} does not match the schema: {e}", path.display()))?;
        let violations = config.validate();
        if !violations.is_empty() {
            anyhow::bail!(
                "config {} has {} validation error(s):\n  - {}",
                path.display(),
                violations.len(),
                violations.join("\n  - ")
            );
        }
        Ok(config)
    }

    /// Collect every schema violation rather than stopping at the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let sys = &self.system;
        if sys.n_modes == 0 || sys.n_modes > 10 {
            errors.push(format!("system.n_modes must be in 1..=10, got {}", sys.n_modes));
        }
        if sys.energies.len() != sys.n_modes {
            errors.push(format!(
                "system.energies has {} entries for {} modes",
                sys.energies.len(),
                sys.n_modes
            ));
        }
        if sys.coupling_mode >= sys.n_modes {
            errors.push(format!(
                "system.coupling_mode {} out of range for {} modes",
                sys.coupling_mode, sys.n_modes
            ));
        }
        for &(i, j, _) in &sys.hopping {
            if i >= sys.n_modes || j >= sys.n_modes || i == j {
                errors.push(format!("system.hopping term ({i}, {j}) invalid for {} modes", sys.n_modes));
            }
        }

        match &self.bath.spectral_density {
            SpectralDensityBlock::Flat { gamma, n0 } => {
                if *gamma < 0.0 {
                    errors.push(format!("bath.gamma must be nonnegative, got {gamma}"));
                }
                if !(0.0..=1.0).contains(n0) {
                    errors.push(format!("bath.n0 must lie in [0, 1], got {n0}"));
                }
            }
            SpectralDensityBlock::Lorentzian { gamma, width, .. } => {
                if *gamma < 0.0 {
                    errors.push(format!("bath.gamma must be nonnegative, got {gamma}"));
                }
                if *width <= 0.0 {
                    errors.push(format!("bath.width must be positive, got {width}"));
                }
            }
            SpectralDensityBlock::Discrete { modes } => {
                if modes.is_empty() {
                    errors.push("bath.modes must not be empty".into());
                }
            }
        }
        if !self.bath.zero_temperature {
            match self.bath.beta {
                Some(b) if b >= 0.0 && b.is_finite() => {}
                Some(b) => errors.push(format!("bath.beta must be finite and nonnegative, got {b}")),
                None => errors.push("bath.beta required unless zero_temperature is set".into()),
            }
        }
        if self.bath.n_matsubara == 0 {
            errors.push("bath.n_matsubara must be at least 1".into());
        }

        let solver = &self.solver;
        if solver.rtol <= 0.0 || solver.atol <= 0.0 {
            errors.push(format!(
                "solver tolerances must be positive, got rtol {} atol {}",
                solver.rtol, solver.atol
            ));
        }
        if solver.alpha[0] == 0.0 && solver.alpha[1] == 0.0 {
            errors.push("solver.alpha must be nonzero".into());
        }
        if solver.method == Method::Heom && self.bath.decomposition_file.is_none() {
            let k = self.exponent_count();
            if solver.depth > k {
                errors.push(format!(
                    "solver.depth {} exceeds the exponent count {k} of the bath decomposition",
                    solver.depth
                ));
            }
        }
        if solver.method == Method::Lindblad
            && !matches!(self.bath.spectral_density, SpectralDensityBlock::Flat { .. })
        {
            errors.push("solver.method lindblad requires the flat spectral density".into());
        }
        if solver.method == Method::Heom
            && matches!(self.bath.spectral_density, SpectralDensityBlock::Flat { .. })
            && self.bath.decomposition_file.is_none()
        {
            errors.push(
                "flat baths are delta-correlated and route to the lindblad method".into(),
            );
        }
        if self.bath.decomposition_file.is_some() && solver.method != Method::Heom {
            errors.push("bath.decomposition_file applies to the heom method only".into());
        }
        if solver.method == Method::Oracle
            && !matches!(self.bath.spectral_density, SpectralDensityBlock::Discrete { .. })
        {
            errors.push("solver.method oracle requires a discrete bath".into());
        }
        if matches!(self.bath.spectral_density, SpectralDensityBlock::Lorentzian { .. })
            && self.bath.zero_temperature
        {
            errors.push("lorentzian baths reject zero temperature (no Matsubara poles)".into());
        }

        let dim = 1usize << sys.n_modes.min(12);
        let check_state = |state: &StateBlock, what: &str| -> Option<String> {
            match state {
                StateBlock::Occupation(bits) => (*bits >= dim)
                    .then(|| format!("{what}: occupation {bits} outside dimension {dim}")),
                StateBlock::Matrix { re, im } => (re.len() != dim
                    || im.len() != dim
                    || re.iter().any(|r| r.len() != dim)
                    || im.iter().any(|r| r.len() != dim))
                .then(|| format!("{what}: matrix must be {dim}x{dim}")),
            }
        };
        match &self.task {
            TaskBlock::Dynamics { initial_state, t_max, n_steps, snapshots } => {
                if *snapshots && self.solver.method != Method::Heom {
                    errors.push("task.snapshots is available for the heom method only".into());
                }
                errors.extend(check_state(initial_state, "task.initial_state"));
                if *t_max <= 0.0 {
                    errors.push(format!("task.t_max must be positive, got {t_max}"));
                }
                if *n_steps == 0 {
                    errors.push("task.n_steps must be at least 1".into());
                }
            }
            TaskBlock::Correlation { initial_state, t_max, n_steps, .. } => {
                errors.extend(check_state(initial_state, "task.initial_state"));
                if *t_max <= 0.0 {
                    errors.push(format!("task.t_max must be positive, got {t_max}"));
                }
                if *n_steps == 0 {
                    errors.push("task.n_steps must be at least 1".into());
                }
            }
            TaskBlock::Spectrum { initial_state, t_max, n_steps, n_omega, omega_min, omega_max, .. } => {
                errors.extend(check_state(initial_state, "task.initial_state"));
                if *t_max <= 0.0 {
                    errors.push(format!("task.t_max must be positive, got {t_max}"));
                }
                if *n_steps == 0 {
                    errors.push("task.n_steps must be at least 1".into());
                }
                if *n_omega < 2 {
                    errors.push("task.n_omega must be at least 2".into());
                }
                if omega_max <= omega_min {
                    errors.push("task.omega_max must exceed task.omega_min".into());
                }
            }
            TaskBlock::Verify {} => {}
        }
        errors
    }

    /// Exponent count of the decomposition this config implies.
    pub fn exponent_count(&self) -> usize {
        match &self.bath.spectral_density {
            SpectralDensityBlock::Discrete { modes } => 2 * modes.len(),
            SpectralDensityBlock::Lorentzian { .. } => 2 * (self.bath.n_matsubara + 1),
            SpectralDensityBlock::Flat { .. } => 0,
        }
    }

    pub fn temperature(&self) -> Temperature {
        if self.bath.zero_temperature {
            Temperature::Zero
        } else {
            Temperature::Finite(self.bath.beta.unwrap_or(0.0))
        }
    }

    pub fn bath_spec(&self) -> anyhow::Result<BathSpec> {
        let j = match &self.bath.spectral_density {
            SpectralDensityBlock::Flat { gamma, n0 } => {
                SpectralDensity::Flat { gamma: *gamma, n0: *n0 }
            }
            SpectralDensityBlock::Lorentzian { gamma, width, center } => {
                SpectralDensity::Lorentzian { gamma: *gamma, width: *width, center: *center }
            }
            SpectralDensityBlock::Discrete { modes } => {
                SpectralDensity::Discrete { modes: modes.clone() }
            }
        };
        Ok(BathSpec::new(j, self.temperature(), self.bath.mu)?)
    }

    /// Decomposition for the HEOM: loaded from `decomposition_file` when
    /// given, otherwise exact for discrete baths and Matsubara for
    /// Lorentzian ones.
    pub fn decomposition(&self) -> anyhow::Result<CorrelationDecomposition> {
        if let Some(path) = &self.bath.decomposition_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read decomposition {path}: {e}"))?;
            let d: CorrelationDecomposition = serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("decomposition {path} is malformed: {e}"))?;
            d.validate()?;
            return Ok(d);
        }
        let bath = self.bath_spec()?;
        match &self.bath.spectral_density {
            SpectralDensityBlock::Discrete { .. } => {
                Ok(parheom::bath::decompose_discrete(&bath)?)
            }
            SpectralDensityBlock::Lorentzian { .. } => {
                Ok(parheom::bath::decompose_matsubara(&bath, self.bath.n_matsubara)?)
            }
            SpectralDensityBlock::Flat { .. } => {
                anyhow::bail!("flat baths are delta-correlated; no exponential decomposition")
            }
        }
    }

    pub fn space(&self) -> FockSpace {
        FockSpace::new(self.system.n_modes)
    }

    pub fn system_hamiltonian(&self) -> anyhow::Result<FockOperator> {
        Ok(hamiltonian(self.space(), &self.system.energies, &self.system.hopping)?)
    }

    pub fn coupling_operator(&self) -> anyhow::Result<FockOperator> {
        Ok(annihilation_op(self.space(), self.system.coupling_mode)?)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.solver.alpha[0], self.solver.alpha[1])
    }

    pub fn build_state(&self, block: &StateBlock) -> anyhow::Result<DensityMatrix> {
        let space = self.space();
        match block {
            StateBlock::Occupation(bits) => Ok(DensityMatrix::basis_state(space, *bits)?),
            StateBlock::Matrix { re, im } => {
                let d = space.dim();
                let mut m = Array2::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
                    }
                }
                Ok(DensityMatrix::new(space, m)?)
            }
        }
    }

    pub fn build_operator(&self, block: &OperatorBlock) -> anyhow::Result<FockOperator> {
        let space = self.space();
        match block {
            OperatorBlock::Annihilation(k) => Ok(annihilation_op(space, *k)?),
            OperatorBlock::Creation(k) => Ok(creation_op(space, *k)?),
            OperatorBlock::Number(k) => Ok(parheom::fock::number_op(space, *k)?),
            OperatorBlock::Matrix { re, im } => {
                let d = space.dim();
                if re.len() != d || im.len() != d {
                    anyhow::bail!("operator matrix must be {d}x{d}");
                }
                let mut m = Array2::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
                    }
                }
                Ok(FockOperator::from_dense(space, &m)?)
            }
        }
    }
}
