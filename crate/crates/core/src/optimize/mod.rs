//! Set-specific optimal cloners by multi-start simplex search.
//!
//! A machine is encoded by `4·D'` reals read as two complex columns of
//! length `D'`, orthonormalized, and (for symmetric machines) embedded into
//! the full output space through the Dicke basis of the copies. Every point
//! the search visits is therefore an isometry; no constraint is handled by
//! penalty.
//!
//! Restarts are independent: restart `k` draws its start from a ChaCha
//! stream keyed by `(seed, k)`, and results are merged by index, so a run is
//! bit-reproducible regardless of thread scheduling.

pub mod scan;
pub mod simplex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloners::CloneIsometry;
use crate::error::{Error, Result};
use crate::fidelity::copy_fidelity;
use crate::qlinalg::{binomial, orthonormalize_pair, ComplexMatrix, C64};
use crate::states::{equatorial_trio, InputSet};

pub use scan::{scan_equator, scan_equator_with_budget, ScanGrid, ScanSummary};
pub use simplex::{SimplexOptions, SimplexOutcome};

/// Sharpness of the log-sum-exp smooth minimum used inside the search.
pub const SMOOTH_MIN_SHARPNESS: f64 = 500.0;

/// Machines whose objective is within this of the best are ties.
pub const TIE_TOL: f64 = 1e-10;

/// Restarts within this of the best objective count as hits.
pub const HIT_TOL: f64 = 1e-6;

pub const DEFAULT_MAX_ITERS: usize = 4000;

/// Iterations per raw parameter used by [`OptimizationConfig::scaled_max_iters`].
pub const ITERS_PER_PARAM: usize = 500;

/// Value spread at which a simplex counts as collapsed.
pub const SIMPLEX_SPREAD_TOL: f64 = 1e-13;

/// Largest output dimension the optimizer accepts.
pub const MAX_OUTPUT_DIM: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Smallest fidelity over states and copies.
    MaxMin,
    /// Mean fidelity minus `penalty_weight` times its variance.
    EqualFidelityPenalty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub mode: Mode,
    pub penalty_weight: f64,
    pub symmetric: bool,
    pub economic: bool,
    pub ancilla_dim: usize,
    pub copies: usize,
    pub seed: u64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            tol: 1e-9,
            max_iters: DEFAULT_MAX_ITERS,
            mode: Mode::MaxMin,
            penalty_weight: 100.0,
            symmetric: false,
            economic: true,
            ancilla_dim: 1,
            copies: 2,
            seed: 0,
        }
    }
}

impl OptimizationConfig {
    /// Sets the ancilla dimension and keeps `economic` consistent with it.
    pub fn with_ancilla(mut self, dim: usize) -> Self {
        self.ancilla_dim = dim;
        self.economic = dim == 1;
        self
    }

    /// Iteration cap that scales with the search dimension: the default
    /// 4000, or 500 per raw parameter when that is larger.
    pub fn scaled_max_iters(&self) -> usize {
        let p = Parameterization::for_config(self).map_or(0, |p| p.n_params());
        DEFAULT_MAX_ITERS.max(ITERS_PER_PARAM * p)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMachine(format!("config: {msg}")));
        if self.restarts == 0 {
            return bad("restarts must be positive".into());
        }
        if self.ancilla_dim == 0 {
            return bad("ancilla_dim must be at least 1".into());
        }
        if self.economic != (self.ancilla_dim == 1) {
            return bad(format!(
                "economic = {} with ancilla_dim = {}",
                self.economic, self.ancilla_dim
            ));
        }
        if self.penalty_weight.is_nan() || self.penalty_weight <= 0.0 {
            return bad("penalty_weight must be positive".into());
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad("tol must be nonnegative".into());
        }
        if self.copies == 0 || self.copies > crate::qlinalg::MAX_SYM_QUBITS {
            return bad(format!("{} copies", self.copies));
        }
        if (1usize << self.copies) * self.ancilla_dim > MAX_OUTPUT_DIM {
            return bad("output dimension too large".into());
        }
        Ok(())
    }
}

/// Map from raw parameters to isometries.
#[derive(Clone, Debug)]
pub struct Parameterization {
    copies: usize,
    ancilla_dim: usize,
    symmetric: bool,
    eff_dim: usize,
    /// For each full output row: (effective row, amplitude weight).
    row_map: Vec<(usize, f64)>,
}

impl Parameterization {
    pub fn new(copies: usize, ancilla_dim: usize, symmetric: bool) -> Result<Self> {
        if copies == 0 || copies > crate::qlinalg::MAX_SYM_QUBITS || ancilla_dim == 0 {
            return Err(Error::Shape(format!(
                "{copies} copies with ancilla dimension {ancilla_dim}"
            )));
        }
        let full = (1usize << copies) * ancilla_dim;
        let (eff_dim, row_map) = if symmetric {
            let weights: Vec<f64> = (0..=copies)
                .map(|i| 1.0 / (binomial(copies as u64, i as u64) as f64).sqrt())
                .collect();
            let map = (0..full)
                .map(|r| {
                    let (q, k) = (r / ancilla_dim, r % ancilla_dim);
                    let ones = q.count_ones() as usize;
                    (ones * ancilla_dim + k, weights[ones])
                })
                .collect();
            ((copies + 1) * ancilla_dim, map)
        } else {
            (full, (0..full).map(|r| (r, 1.0)).collect())
        };
        Ok(Self {
            copies,
            ancilla_dim,
            symmetric,
            eff_dim,
            row_map,
        })
    }

    pub fn for_config(cfg: &OptimizationConfig) -> Result<Self> {
        Self::new(cfg.copies, cfg.ancilla_dim, cfg.symmetric)
    }

    /// Columns searched over: full `D`, or `(copies+1)·ancilla_dim` when symmetric.
    pub fn effective_dim(&self) -> usize {
        self.eff_dim
    }

    pub fn full_dim(&self) -> usize {
        self.row_map.len()
    }

    pub fn n_params(&self) -> usize {
        4 * self.eff_dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn fill(&self, params: &[f64], ws: &mut Workspace) -> Result<()> {
        let d = self.eff_dim;
        for k in 0..d {
            ws.w0[k] = C64::new(params[2 * k], params[2 * k + 1]);
            ws.w1[k] = C64::new(params[2 * d + 2 * k], params[2 * d + 2 * k + 1]);
        }
        orthonormalize_pair(&mut ws.w0, &mut ws.w1)?;
        for (r, &(e, w)) in self.row_map.iter().enumerate() {
            ws.v0[r] = ws.w0[e] * w;
            ws.v1[r] = ws.w1[e] * w;
        }
        Ok(())
    }

    pub fn isometry(&self, params: &[f64]) -> Result<CloneIsometry> {
        if params.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters, expected {}",
                params.len(),
                self.n_params()
            )));
        }
        let mut ws = Workspace::new(self, 0);
        self.fill(params, &mut ws)?;
        let data = ws
            .v0
            .iter()
            .zip(&ws.v1)
            .flat_map(|(&x, &y)| [x, y])
            .collect();
        CloneIsometry::new(
            ComplexMatrix::from_row_major(self.full_dim(), 2, data)?,
            self.copies,
            self.ancilla_dim,
        )
    }
}

/// Isometry from raw parameters; `dim` must equal `2^copies · ancilla_dim`.
pub fn parameterize(
    params: &[f64],
    dim: usize,
    symmetric: bool,
    copies: usize,
    ancilla_dim: usize,
) -> Result<CloneIsometry> {
    let p = Parameterization::new(copies, ancilla_dim, symmetric)?;
    if p.full_dim() != dim {
        return Err(Error::Shape(format!(
            "dimension {dim} does not match {copies} copies with ancilla {ancilla_dim}"
        )));
    }
    p.isometry(params)
}

struct Workspace {
    w0: Vec<C64>,
    w1: Vec<C64>,
    v0: Vec<C64>,
    v1: Vec<C64>,
    out: Vec<C64>,
    fids: Vec<f64>,
}

impl Workspace {
    fn new(p: &Parameterization, n_fids: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self {
            w0: vec![zero; p.eff_dim],
            w1: vec![zero; p.eff_dim],
            v0: vec![zero; p.full_dim()],
            v1: vec![zero; p.full_dim()],
            out: vec![zero; p.full_dim()],
            fids: Vec::with_capacity(n_fids),
        }
    }
}

/// Search-time view of one optimization problem.
struct Problem {
    param: Parameterization,
    inputs: Vec<[C64; 2]>,
    /// Copies evaluated during search; a symmetric machine has identical
    /// marginals, so only the first copy is needed there.
    search_copies: Vec<usize>,
    mode: Mode,
    penalty_weight: f64,
}

impl Problem {
    fn new(set: &InputSet, cfg: &OptimizationConfig) -> Result<Self> {
        let param = Parameterization::for_config(cfg)?;
        let search_copies = if cfg.symmetric {
            vec![0]
        } else {
            (0..cfg.copies).collect()
        };
        Ok(Self {
            param,
            inputs: set.points().iter().map(|p| p.amplitudes()).collect(),
            search_copies,
            mode: cfg.mode,
            penalty_weight: cfg.penalty_weight,
        })
    }

    fn workspace(&self) -> Workspace {
        Workspace::new(&self.param, self.inputs.len() * self.search_copies.len())
    }

    fn fidelities(&self, params: &[f64], ws: &mut Workspace) -> Result<()> {
        self.param.fill(params, ws)?;
        ws.fids.clear();
        let anc = self.param.ancilla_dim;
        let copies = self.param.copies;
        for &[alpha, beta] in &self.inputs {
            for ((o, x), y) in ws.out.iter_mut().zip(&ws.v0).zip(&ws.v1) {
                *o = alpha * x + beta * y;
            }
            for &c in &self.search_copies {
                let stride = (1usize << (copies - 1 - c)) * anc;
                let (mut r00, mut r11) = (0.0, 0.0);
                let mut r01 = C64::new(0.0, 0.0);
                for block in (0..ws.out.len()).step_by(2 * stride) {
                    let lo = &ws.out[block..block + stride];
                    let hi = &ws.out[block + stride..block + 2 * stride];
                    for (x, y) in lo.iter().zip(hi) {
                        r00 += x.norm_sqr();
                        r11 += y.norm_sqr();
                        r01 += x * y.conj();
                    }
                }
                let f = alpha.norm_sqr() * r00
                    + beta.norm_sqr() * r11
                    + 2.0 * (alpha.conj() * beta * r01).re;
                ws.fids.push(f);
            }
        }
        Ok(())
    }

    /// Value minimized by the simplex search.
    fn cost(&self, params: &[f64], ws: &mut Workspace) -> f64 {
        if self.fidelities(params, ws).is_err() {
            return f64::INFINITY;
        }
        -match self.mode {
            Mode::MaxMin => smooth_min(&ws.fids, SMOOTH_MIN_SHARPNESS),
            Mode::EqualFidelityPenalty => penalized_mean(&ws.fids, self.penalty_weight),
        }
    }
}

/// `−(1/β)·ln Σ exp(−β x_k)`, never above `min x`.
pub fn smooth_min(xs: &[f64], sharpness: f64) -> f64 {
    let m = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = xs.iter().map(|&x| (-sharpness * (x - m)).exp()).sum();
    m - s.ln() / sharpness
}

fn penalized_mean(xs: &[f64], weight: f64) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    mean - weight * var
}

fn score(fids: &[f64], mode: Mode, penalty_weight: f64) -> f64 {
    match mode {
        Mode::MaxMin => fids.iter().copied().fold(f64::INFINITY, f64::min),
        Mode::EqualFidelityPenalty => penalized_mean(fids, penalty_weight),
    }
}

/// Fidelity of one copy for one input state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFidelity {
    pub state: usize,
    pub copy: usize,
    pub fidelity: f64,
}

fn per_state(v: &CloneIsometry, set: &InputSet) -> Vec<StateFidelity> {
    set.points()
        .iter()
        .enumerate()
        .flat_map(|(s, p)| {
            (0..v.copies()).map(move |c| StateFidelity {
                state: s,
                copy: c,
                fidelity: copy_fidelity(v, p, c).expect("copy in range"),
            })
        })
        .collect()
}

/// Objective of a machine over a set, evaluated on every state and copy.
pub fn objective(v: &CloneIsometry, set: &InputSet, mode: Mode, penalty_weight: f64) -> f64 {
    let fids: Vec<f64> = per_state(v, set).into_iter().map(|s| s.fidelity).collect();
    score(&fids, mode, penalty_weight)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: CloneIsometry,
    pub per_state_fidelities: Vec<StateFidelity>,
    /// Objective of `best` under the configured mode.
    pub objective: f64,
    /// Smallest fidelity of `best` over states and copies.
    pub min_fidelity: f64,
    /// Largest minus smallest fidelity of `best`.
    pub spread: f64,
    pub restarts_hitting_best: usize,
    /// Exact objective reached by each restart, in restart order.
    pub restart_objectives: Vec<f64>,
    pub mode: Mode,
    pub seed: u64,
}

fn draw_params(n: usize, seed: u64, stream: u64) -> impl FnMut() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    move || (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn single_restart(problem: &Problem, cfg: &OptimizationConfig, index: u64) -> Vec<f64> {
    let mut draw = draw_params(problem.param.n_params(), cfg.seed, index);
    let mut ws = problem.workspace();
    // rank-deficient starts are redrawn
    let x0 = loop {
        let x = draw();
        if problem.fidelities(&x, &mut ws).is_ok() {
            break x;
        }
    };
    let opts = SimplexOptions {
        initial_step: 0.5,
        tol: cfg.tol,
        spread_tol: SIMPLEX_SPREAD_TOL,
        max_iters: cfg.max_iters,
    };
    simplex::minimize(|x| problem.cost(x, &mut ws), &x0, &opts).x
}

/// Best machine for `set` over `cfg.restarts` independent simplex searches.
pub fn optimize(set: &InputSet, cfg: &OptimizationConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let problem = Problem::new(set, cfg)?;
    let finals: Vec<Vec<f64>> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|k| single_restart(&problem, cfg, k))
        .collect();

    let machines: Vec<CloneIsometry> = finals
        .iter()
        .map(|x| problem.param.isometry(x))
        .collect::<Result<_>>()?;
    let restart_objectives: Vec<f64> = machines
        .iter()
        .map(|v| objective(v, set, cfg.mode, cfg.penalty_weight))
        .collect();
    let top = restart_objectives
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    // ties go to the canonical-gauge machine with the smallest modulus vector
    let best = machines
        .iter()
        .zip(&restart_objectives)
        .filter(|(_, &o)| o >= top - TIE_TOL)
        .map(|(v, _)| v.canonical_gauge())
        .min_by(|a, b| {
            let (ma, mb) = (a.modulus_vector(), b.modulus_vector());
            ma.iter()
                .zip(&mb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one restart");

    let per_state_fidelities = per_state(&best, set);
    let fids: Vec<f64> = per_state_fidelities.iter().map(|s| s.fidelity).collect();
    let objective = score(&fids, cfg.mode, cfg.penalty_weight);
    let min_fidelity = fids.iter().copied().fold(f64::INFINITY, f64::min);
    let max_fidelity = fids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let restarts_hitting_best = restart_objectives
        .iter()
        .filter(|&&o| o >= objective - HIT_TOL)
        .count();

    Ok(OptimizationResult {
        best,
        per_state_fidelities,
        objective,
        min_fidelity,
        spread: max_fidelity - min_fidelity,
        restarts_hitting_best,
        restart_objectives,
        mode: cfg.mode,
        seed: cfg.seed,
    })
}

/// Runs [`optimize`] once per ancilla dimension, other settings unchanged.
pub fn ancilla_sweep(
    set: &InputSet,
    dims: &[usize],
    cfg: &OptimizationConfig,
) -> Result<Vec<(usize, f64)>> {
    if dims.is_empty() {
        return Err(Error::InvalidSet("no ancilla dimensions".into()));
    }
    dims.iter()
        .map(|&d| {
            let c = cfg.clone().with_ancilla(d);
            optimize(set, &c).map(|r| (d, r.objective))
        })
        .collect()
}

/// Largest copy number accepted by [`optimize_n`].
pub const MAX_N_COPIES: usize = 8;

/// Best symmetric economic 1→n machine for the 120° equatorial trio.
pub fn optimize_n(n: usize, cfg: &OptimizationConfig) -> Result<OptimizationResult> {
    if !(2..=MAX_N_COPIES).contains(&n) {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            allowed: "2..=8",
        });
    }
    let mut c = cfg.clone().with_ancilla(1);
    c.copies = n;
    c.symmetric = true;
    optimize(&equatorial_trio(), &c)
}
