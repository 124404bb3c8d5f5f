//! Hierarchical equations of motion for fermionic baths, valid for initial
//! data of arbitrary parity.
//!
//! Auxiliary density operators (ADOs) are labeled by ordered tuples of
//! distinct exponent indices; tuples with repeated indices vanish because
//! the underlying generators are odd and anticommute under the fermionic
//! time ordering. Labels are stored canonically sorted ascending. In the
//! underlying descending-written index string (largest index leftmost, new
//! indices entering at the left), removing the k-th smallest index from a
//! level-n label carries the positional sign (-1)^(n-k), i.e.
//! (-1)^(number of larger indices in the label); inserting a new index
//! picks up the matching reordering sign. The equation for the
//! level-n block of label U reads
//!
//!   d rho_U / dt = (L - sum_{u in U} b_u) rho_U
//!       + alpha^{-1} sum_{v not in U} sign(v, U) A^{sigma_v} rho_{U + v}
//!       + alpha      sum_{u in U}     sign(u, U) B_u         rho_{U - u}
//!
//! with L = -i [H_S, .]. In the generalized mode the vertices A and B carry
//! explicit parity conjugations and the hierarchy applies to any initial
//! parity; the even-standard mode replaces them by sector signs fixed by
//! the parity (-1)^level of the block each vertex acts on, which requires
//! an even top-level state.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::bath::CorrelationDecomposition;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperator, Parity};
use crate::ode;
use crate::sparse::CsrMatrix;
use crate::superop::{
    liouvillian, make_a, make_a_sector, make_b_script, make_b_script_sector, unvec_slice,
    vec_into_slice, SuperOperator,
};

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;

/// Which form of the hierarchy to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyMode {
    /// Standard even-sector form; rejects odd initial data.
    EvenStandard,
    /// Arbitrary-parity form with explicit parity conjugations.
    Generalized,
}

/// Ordered tuple of distinct exponent indices labeling one ADO.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdoLabel {
    indices: Vec<usize>,
}

impl AdoLabel {
    /// Build from indices; they must be strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        for w in indices.windows(2) {
            if w[1] == w[0] {
                return Err(Error::RepeatedExponentIndex(w[0]));
            }
            if w[1] < w[0] {
                return Err(Error::InvalidParameter(format!(
                    "ADO label indices must be sorted ascending, got {indices:?}"
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn root() -> Self {
        Self { indices: Vec::new() }
    }

    pub fn level(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    fn without(&self, pos: usize) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.remove(pos);
        v
    }

    fn with_inserted(&self, idx: usize) -> (Vec<usize>, f64) {
        let pos = self.indices.partition_point(|&u| u < idx);
        let mut v = self.indices.clone();
        v.insert(pos, idx);
        // the new index enters at the leftmost slot of the descending
        // string; moving it into place crosses every larger index
        let larger = self.indices.len() - pos;
        let sign = if larger.is_multiple_of(2) { 1.0 } else { -1.0 };
        (v, sign)
    }

    /// Positional sign for removing the element at `pos`: (-1)^(number of
    /// larger indices present).
    fn removal_sign(&self, pos: usize) -> f64 {
        let larger = self.indices.len() - 1 - pos;
        if larger.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Assembled hierarchy: label table plus the sparse generator over the
/// flattened ADO state.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    decomposition: CorrelationDecomposition,
    couplings: Vec<FockOperator>,
    h_s: FockOperator,
    depth: usize,
    mode: HierarchyMode,
    alpha: Complex64,
    labels: Vec<AdoLabel>,
    index: HashMap<Vec<usize>, usize>,
    generator: CsrMatrix,
    sys_dim: usize,
}

/// Flattened complex state of all ADO blocks; block 0 is the physical state.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    n_blocks: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl HierarchyState {
    pub fn zeros(n_blocks: usize, dim: usize) -> Self {
        Self { n_blocks, dim, data: vec![Complex64::default(); n_blocks * dim * dim] }
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Dense matrix view of one ADO block.
    pub fn block(&self, i: usize) -> Array2<Complex64> {
        let d2 = self.dim * self.dim;
        unvec_slice(&self.data[i * d2..(i + 1) * d2], self.dim)
    }

    pub fn set_block(&mut self, i: usize, matrix: &Array2<Complex64>) {
        let d2 = self.dim * self.dim;
        vec_into_slice(matrix, &mut self.data[i * d2..(i + 1) * d2]);
    }
}

/// JSON-friendly snapshot of a full hierarchy state.
#[derive(Debug, Clone, Serialize)]
pub struct StateSnapshot {
    pub t: f64,
    pub dim: usize,
    pub labels: Vec<Vec<usize>>,
    /// Row-major [re, im] entries per block.
    pub blocks: Vec<Vec<[f64; 2]>>,
}

fn enumerate_labels(n_exponents: usize, depth: usize) -> Vec<AdoLabel> {
    let mut labels = vec![AdoLabel::root()];
    let mut current: Vec<Vec<usize>> = vec![Vec::new()];
    for _level in 1..=depth {
        let mut next = Vec::new();
        for base in &current {
            let start = base.last().map_or(0, |&u| u + 1);
            for idx in start..n_exponents {
                let mut v = base.clone();
                v.push(idx);
                next.push(v);
            }
        }
        labels.extend(next.iter().cloned().map(|indices| AdoLabel { indices }));
        current = next;
    }
    labels
}

fn level_parity(level: usize) -> Parity {
    if level.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Build the hierarchy generator for a single coupling operator.
pub fn build_hierarchy(
    decomposition: &CorrelationDecomposition,
    s: &FockOperator,
    h_s: &FockOperator,
    depth: usize,
    mode: HierarchyMode,
    alpha: Complex64,
) -> Result<Hierarchy> {
    let couplings = vec![s.clone(); decomposition.len()];
    build_hierarchy_with_couplings(decomposition, &couplings, h_s, depth, mode, alpha)
}

/// Build the hierarchy with one coupling operator per exponent, so several
/// independent baths can share the hierarchy by concatenating exponent
/// lists.
pub fn build_hierarchy_with_couplings(
    decomposition: &CorrelationDecomposition,
    couplings: &[FockOperator],
    h_s: &FockOperator,
    depth: usize,
    mode: HierarchyMode,
    alpha: Complex64,
) -> Result<Hierarchy> {
    decomposition.validate()?;
    let k = decomposition.len();
    if depth > k {
        return Err(Error::DepthExceedsExponents { depth, exponents: k });
    }
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    if couplings.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} coupling operators for {} exponents",
            couplings.len(),
            k
        )));
    }
    for s in couplings {
        if s.parity(1e-12) != Some(Parity::Odd) {
            return Err(Error::ParityViolation("coupling operators must be odd".into()));
        }
        if s.space() != h_s.space() {
            return Err(Error::DimensionMismatch(
                "coupling operator and H_S on different spaces".into(),
            ));
        }
    }
    // partner exponents describe the same bath and must share its coupling
    for m in 0..k / 2 {
        if couplings[2 * m].matrix() != couplings[2 * m + 1].matrix() {
            return Err(Error::MissingPartner(2 * m));
        }
    }
    if h_s.parity(1e-12) != Some(Parity::Even) {
        return Err(Error::ParityViolation("system Hamiltonian must be even".into()));
    }

    let dim = h_s.space().dim();
    let d2 = dim * dim;
    let labels = enumerate_labels(k, depth);
    let index: HashMap<Vec<usize>, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.indices.clone(), i)).collect();

    // vertex superoperators, reused across labels; in the even-standard mode
    // they depend on the parity of the block they act on
    let raise_vertex = |j: usize, target_level: usize| -> Result<SuperOperator> {
        let sigma = decomposition.exponents[j].sigma;
        match mode {
            HierarchyMode::Generalized => make_a(sigma, &couplings[j]),
            HierarchyMode::EvenStandard => {
                make_a_sector(sigma, &couplings[j], level_parity(target_level))
            }
        }
    };
    let lower_vertex = |j: usize, target_level: usize| -> Result<SuperOperator> {
        match mode {
            HierarchyMode::Generalized => make_b_script(j, &couplings[j], decomposition),
            HierarchyMode::EvenStandard => {
                make_b_script_sector(j, &couplings[j], decomposition, level_parity(target_level))
            }
        }
    };
    let mut raise_cache: HashMap<(usize, usize), SuperOperator> = HashMap::new();
    let mut lower_cache: HashMap<(usize, usize), SuperOperator> = HashMap::new();

    let lv = liouvillian(h_s);
    let inv_alpha = Complex64::new(1.0, 0.0) / alpha;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();

    let push_block = |triplets: &mut Vec<(usize, usize, Complex64)>,
                          row_block: usize,
                          col_block: usize,
                          m: &CsrMatrix,
                          factor: Complex64| {
        for r in 0..m.nrows() {
            let (cols, vals) = m.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((row_block * d2 + r, col_block * d2 + c, factor * v));
            }
        }
    };

    for (bi, label) in labels.iter().enumerate() {
        let n = label.level();
        // diagonal: Liouvillian minus accumulated decay rates
        push_block(&mut triplets, bi, bi, lv.matrix(), Complex64::new(1.0, 0.0));
        let b_sum: Complex64 =
            label.indices.iter().map(|&j| decomposition.exponents[j].b).sum();
        if b_sum.norm() > 0.0 {
            for r in 0..d2 {
                triplets.push((bi * d2 + r, bi * d2 + r, -b_sum));
            }
        }
        // raising couplings to level n + 1
        if n < depth {
            for v in 0..k {
                if label.indices.binary_search(&v).is_ok() {
                    continue;
                }
                let (target, sign) = label.with_inserted(v);
                let ti = index[&target];
                let vertex = match raise_cache.entry((v, n + 1)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(raise_vertex(v, n + 1)?)
                    }
                };
                push_block(
                    &mut triplets,
                    bi,
                    ti,
                    vertex.matrix(),
                    inv_alpha * Complex64::new(sign, 0.0),
                );
            }
        }
        // lowering couplings to level n - 1
        for (pos, &u) in label.indices.iter().enumerate() {
            let target = label.without(pos);
            let ti = index[&target];
            let sign = label.removal_sign(pos);
            let vertex = match lower_cache.entry((u, n - 1)) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(lower_vertex(u, n - 1)?)
                }
            };
            push_block(
                &mut triplets,
                bi,
                ti,
                vertex.matrix(),
                alpha * Complex64::new(sign, 0.0),
            );
        }
    }

    let total = labels.len() * d2;
    let generator = CsrMatrix::from_triplets(total, total, triplets);
    Ok(Hierarchy {
        decomposition: decomposition.clone(),
        couplings: couplings.to_vec(),
        h_s: h_s.clone(),
        depth,
        mode,
        alpha,
        labels,
        index,
        generator,
        sys_dim: dim,
    })
}

impl Hierarchy {
    pub fn decomposition(&self) -> &CorrelationDecomposition {
        &self.decomposition
    }

    pub fn mode(&self) -> HierarchyMode {
        self.mode
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn labels(&self) -> &[AdoLabel] {
        &self.labels
    }

    pub fn n_ados(&self) -> usize {
        self.labels.len()
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn label_index(&self, indices: &[usize]) -> Option<usize> {
        self.index.get(indices).copied()
    }

    pub fn generator(&self) -> &CsrMatrix {
        &self.generator
    }

    pub fn zero_state(&self) -> HierarchyState {
        HierarchyState::zeros(self.labels.len(), self.sys_dim)
    }

    /// Initial hierarchy state: physical block set, all ADOs zero (their
    /// defining integrals start at zero).
    pub fn initial_state(&self, rho0: &DensityMatrix) -> Result<HierarchyState> {
        if rho0.space() != self.h_s.space() {
            return Err(Error::DimensionMismatch("initial state on a different space".into()));
        }
        if self.mode == HierarchyMode::EvenStandard {
            let (_, odd) = rho0.sector_split();
            let odd_norm = crate::linalg::fro_norm(&odd);
            if odd_norm > 1e-12 {
                return Err(Error::OddStateEvenSolver(odd_norm));
            }
        }
        let mut state = self.zero_state();
        state.set_block(0, rho0.matrix());
        Ok(state)
    }

    pub fn snapshot(&self, t: f64, state: &HierarchyState) -> StateSnapshot {
        let d2 = self.sys_dim * self.sys_dim;
        let blocks = (0..state.n_blocks)
            .map(|b| {
                let blk = state.block(b);
                let mut flat = Vec::with_capacity(d2);
                for i in 0..self.sys_dim {
                    for j in 0..self.sys_dim {
                        let v = blk[(i, j)];
                        flat.push([v.re, v.im]);
                    }
                }
                flat
            })
            .collect();
        StateSnapshot {
            t,
            dim: self.sys_dim,
            labels: self.labels.iter().map(|l| l.indices.clone()).collect(),
            blocks,
        }
    }
}

/// Right-hand side of the hierarchy: linear, time-independent.
pub fn heom_rhs(h: &Hierarchy, state: &HierarchyState, _t: f64) -> Result<HierarchyState> {
    if state.n_blocks != h.labels.len() || state.dim != h.sys_dim {
        return Err(Error::DimensionMismatch(format!(
            "state has {} blocks of dim {}, hierarchy needs {} of dim {}",
            state.n_blocks,
            state.dim,
            h.labels.len(),
            h.sys_dim
        )));
    }
    let mut out = HierarchyState::zeros(state.n_blocks, state.dim);
    h.generator.matvec_into(&state.data, &mut out.data);
    Ok(out)
}

/// Evolve and return the physical block on the time grid.
pub fn evolve_heom(
    h: &Hierarchy,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<DensityMatrix>> {
    let states = evolve_heom_states(h, rho0, t_grid, rtol, atol)?;
    states
        .into_iter()
        .map(|s| DensityMatrix::new(rho0.space(), s.block(0)))
        .collect()
}

/// Evolve and return full hierarchy states on the time grid.
pub fn evolve_heom_states(
    h: &Hierarchy,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<HierarchyState>> {
    let init = h.initial_state(rho0)?;
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        h.generator.matvec_into(y, dy);
    };
    let (samples, _stats) = ode::integrate_adaptive(rhs, &init.data, t_grid, rtol, atol)?;
    Ok(samples
        .into_iter()
        .map(|data| HierarchyState { n_blocks: init.n_blocks, dim: init.dim, data })
        .collect())
}

/// Rebuild the hierarchy with a different ADO scale alpha. The physical
/// block of any trajectory is unchanged; level-n ADOs scale by
/// (alpha_new / alpha_old)^n.
pub fn rescale_ados(h: &Hierarchy, alpha: Complex64) -> Result<Hierarchy> {
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    build_hierarchy_with_couplings(
        &h.decomposition,
        &h.couplings,
        &h.h_s,
        h.depth,
        h.mode,
        alpha,
    )
}
