//! Load coupling in OFDMA networks.
//!
//! The load `x[b]` of base station `b` is the fraction of its resource
//! blocks in use. A user `u` served by `b` obtains the rate
//! `B log₂(1 + p[b] g[u,b] / (Σ_{j≠b} x[j] p[j] g[u,j] + σ²))` per block, and
//! the load vector is the fixed point of
//! `f_b(x) = (1/R) Σ_{u∈𝒰_b} d[u] / r_{u,b}(x)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hata::{hata_urban_gain, HataParams};
use crate::cone::{Norm, PositiveVector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mapping::{eval_checked, Flags, Mapping};
use crate::math;
use crate::solver::diagnostics::{
    convergence_diagnostics, error_lower_bound, max_valid_eps, ConvergenceDiagnostics, DiagnosticOptions,
};
use crate::solver::iterate::{fixed_point_iterate, IterateOptions, IterationTrace};
use crate::solver::spectral::{matrix_spectral_radius, Feasibility, SpectralRadiusEstimate};

/// Load of a cell without users. Keeps the mapping strictly positive.
pub const EMPTY_CELL_LOAD: f64 = 1e-12;

/// Radio and traffic parameters shared by all cells and users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadParams {
    /// Resource blocks per cell.
    pub resource_blocks: f64,
    /// Bandwidth of one resource block, Hz.
    pub bandwidth_hz: f64,
    /// Requested rate of every user, bit/s.
    pub demand_bps: f64,
    /// Transmit power per resource block, W.
    pub tx_power_w: f64,
    /// Noise power per resource block, W.
    pub noise_w: f64,
    pub hata: HataParams,
}

impl Default for LoadParams {
    fn default() -> Self {
        LoadParams {
            resource_blocks: 25.0,
            bandwidth_hz: 2e5,
            demand_bps: 1e6,
            tx_power_w: 1.6,
            noise_w: 6.2e-18,
            hata: HataParams::default(),
        }
    }
}

impl LoadParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("R", self.resource_blocks),
            ("B", self.bandwidth_hz),
            ("d", self.demand_bps),
            ("p", self.tx_power_w),
            ("sigma2", self.noise_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        self.hata.validate()
    }
}

/// Placement of the base stations inside the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// Regular grid, half a spacing away from the border.
    #[default]
    Grid,
    /// Independent uniform positions.
    Uniform,
}

impl core::str::FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Layout::Grid),
            "uniform" => Ok(Layout::Uniform),
            other => Err(Error::param("layout", alloc::format!("unknown layout `{other}`"))),
        }
    }
}

impl core::fmt::Display for Layout {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Layout::Grid => "grid",
            Layout::Uniform => "uniform",
        })
    }
}

/// Inputs of the scenario generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub k: usize,
    pub users: usize,
    /// Side of the base-station square, m.
    pub bs_side_m: f64,
    /// Side of the concentric user square, m.
    pub user_side_m: f64,
    pub layout: Layout,
    pub params: LoadParams,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            k: 25,
            users: 400,
            bs_side_m: 2000.0,
            user_side_m: 2500.0,
            layout: Layout::Grid,
            params: LoadParams::default(),
            seed: 0,
        }
    }
}

/// A complete load-coupling instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadScenario {
    k: usize,
    layout: Option<Layout>,
    bs_positions: Vec<[f64; 2]>,
    user_positions: Vec<[f64; 2]>,
    assignment: Vec<usize>,
    /// `users × k`, linear power gains.
    gains: Matrix<f64>,
    power: Vec<f64>,
    demand: Vec<f64>,
    params: LoadParams,
    seed: Option<u64>,
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &g) in row.iter().enumerate() {
        if g > row[best] {
            best = j;
        }
    }
    best
}

impl LoadScenario {
    /// Builds a scenario from geometry, computing gains with the Hata model.
    ///
    /// With `assignment = None` users are attached to their max-gain station;
    /// a supplied assignment must agree with that rule.
    pub fn from_geometry(
        bs_positions: Vec<[f64; 2]>,
        user_positions: Vec<[f64; 2]>,
        assignment: Option<Vec<usize>>,
        params: LoadParams,
        layout: Option<Layout>,
        seed: Option<u64>,
    ) -> Result<Self> {
        params.validate()?;
        let k = bs_positions.len();
        if k == 0 || user_positions.is_empty() {
            return Err(Error::param("scenario", "needs at least one station and one user"));
        }
        let mut data = Vec::with_capacity(k * user_positions.len());
        for u in &user_positions {
            for b in &bs_positions {
                let d = math::hypot(u[0] - b[0], u[1] - b[1]);
                data.push(hata_urban_gain(d.max(f64::MIN_POSITIVE), &params.hata)?);
            }
        }
        let gains = Matrix::from_vec(user_positions.len(), k, data)?;
        let mut s = Self::from_gains(gains, assignment, params)?;
        s.bs_positions = bs_positions;
        s.user_positions = user_positions;
        s.layout = layout;
        s.seed = seed;
        Ok(s)
    }

    /// Builds a scenario from an explicit `users × k` gain matrix, with
    /// uniform powers and demands taken from `params`.
    pub fn from_gains(gains: Matrix<f64>, assignment: Option<Vec<usize>>, params: LoadParams) -> Result<Self> {
        params.validate()?;
        let (n_users, k) = (gains.rows(), gains.cols());
        if k == 0 || n_users == 0 {
            return Err(Error::param("gains", "needs at least one station and one user"));
        }
        if let Some((index, &value)) = gains
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::NotStrictlyPositive { index, value });
        }
        let best: Vec<usize> = (0..n_users).map(|u| argmax(gains.row(u))).collect();
        let assignment = match assignment {
            None => best,
            Some(a) => {
                if a.len() != n_users {
                    return Err(Error::DimensionMismatch {
                        expected: n_users,
                        got: a.len(),
                    });
                }
                for (u, &b) in a.iter().enumerate() {
                    if b >= k || gains[(u, b)] < gains[(u, best[u])] {
                        return Err(Error::param(
                            "assignment",
                            alloc::format!("user {u} is not attached to a max-gain station"),
                        ));
                    }
                }
                a
            }
        };
        Ok(LoadScenario {
            k,
            layout: None,
            bs_positions: Vec::new(),
            user_positions: Vec::new(),
            assignment,
            gains,
            power: vec![params.tx_power_w; k],
            demand: vec![params.demand_bps; n_users],
            params,
            seed: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn users(&self) -> usize {
        self.gains.rows()
    }
    pub fn layout(&self) -> Option<Layout> {
        self.layout
    }
    pub fn bs_positions(&self) -> &[[f64; 2]] {
        &self.bs_positions
    }
    pub fn user_positions(&self) -> &[[f64; 2]] {
        &self.user_positions
    }
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
    pub fn gains(&self) -> &Matrix<f64> {
        &self.gains
    }
    pub fn gain(&self, user: usize, station: usize) -> f64 {
        self.gains[(user, station)]
    }
    pub fn power(&self) -> &[f64] {
        &self.power
    }
    pub fn demand(&self) -> &[f64] {
        &self.demand
    }
    pub fn params(&self) -> &LoadParams {
        &self.params
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Users attached to each station.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.k];
        for (u, &b) in self.assignment.iter().enumerate() {
            cells[b].push(u);
        }
        cells
    }

    /// Same scenario with every demand multiplied by `alpha > 0`.
    pub fn scale_demand(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "must be finite and > 0"));
        }
        let mut s = self.clone();
        s.params.demand_bps *= alpha;
        for d in s.demand.iter_mut() {
            *d *= alpha;
        }
        Ok(s)
    }
}

/// Places stations and users and builds the scenario. Deterministic in `seed`.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<LoadScenario> {
    if spec.k == 0 || spec.users == 0 {
        return Err(Error::param("scenario", "k and the user count must be ≥ 1"));
    }
    if !(spec.bs_side_m > 0.0 && spec.user_side_m > 0.0) {
        return Err(Error::param("side", "square sides must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = spec.bs_side_m;
    let bs: Vec<[f64; 2]> = match spec.layout {
        Layout::Grid => {
            let cols = (1..=spec.k).find(|c| c * c >= spec.k).unwrap_or(spec.k);
            let rows = spec.k.div_ceil(cols);
            let (dx, dy) = (side / cols as f64, side / rows as f64);
            (0..spec.k)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    [(c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy]
                })
                .collect()
        }
        Layout::Uniform => (0..spec.k)
            .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
            .collect(),
    };
    let margin = 0.5 * (spec.user_side_m - side);
    let (lo, hi) = (-margin, side + margin);
    let users: Vec<[f64; 2]> = (0..spec.users)
        .map(|_| [rng.random_range(lo..hi), rng.random_range(lo..hi)])
        .collect();
    LoadScenario::from_geometry(bs, users, None, spec.params, Some(spec.layout), Some(spec.seed))
}

/// The load-coupling mapping of a scenario.
#[derive(Debug, Clone)]
pub struct LoadMapping {
    scenario: Arc<LoadScenario>,
    cells: Vec<Vec<usize>>,
    asymptotic: Matrix<f64>,
}

impl LoadMapping {
    pub fn new(scenario: Arc<LoadScenario>) -> Self {
        let cells = scenario.cells();
        let asymptotic = asymptotic_matrix(&scenario).matrix;
        LoadMapping {
            scenario,
            cells,
            asymptotic,
        }
    }

    pub fn scenario(&self) -> &LoadScenario {
        &self.scenario
    }

    /// Rate of user `u` from station `b` at loads `x`, bit/s per block.
    pub fn rate(&self, u: usize, b: usize, x: &[f64]) -> f64 {
        let s = &*self.scenario;
        let interference: f64 = (0..s.k)
            .filter(|&j| j != b)
            .map(|j| x[j] * s.power[j] * s.gains[(u, j)])
            .sum();
        let sinr = s.power[b] * s.gains[(u, b)] / (interference + s.params.noise_w);
        s.params.bandwidth_hz * math::ln_1p(sinr) / core::f64::consts::LN_2
    }
}

pub fn load_mapping(s: &LoadScenario) -> LoadMapping {
    LoadMapping::new(Arc::new(s.clone()))
}

impl Mapping for LoadMapping {
    fn dim(&self) -> usize {
        self.scenario.k
    }

    fn flags(&self) -> Flags {
        Flags::PC
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let s = &*self.scenario;
        for (b, users) in self.cells.iter().enumerate() {
            out[b] = if users.is_empty() {
                EMPTY_CELL_LOAD
            } else {
                users.iter().map(|&u| s.demand[u] / self.rate(u, b, x)).sum::<f64>()
                    / s.params.resource_blocks
            };
        }
        Ok(())
    }

    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        let s = &*self.scenario;
        // diag(p)⁻¹ M diag(p) x
        let px: Vec<f64> = x.iter().zip(&s.power).map(|(a, p)| a * p).collect();
        let y = self.asymptotic.mul_vec(&px);
        for ((o, yi), p) in out.iter_mut().zip(y).zip(&s.power) {
            *o = yi / p;
        }
        Some(Ok(()))
    }

    fn name(&self) -> &str {
        "load"
    }
}

/// `M[i,b] = Σ_{u∈𝒰_i} ln2 · d[u] · g[u,b] / (R B g[u,i])` for `b ≠ i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticLoadMatrix {
    pub matrix: Matrix<f64>,
}

impl AsymptoticLoadMatrix {
    pub fn spectral_radius(&self, tol: f64) -> Result<SpectralRadiusEstimate> {
        matrix_spectral_radius(&self.matrix, tol)
    }
}

pub fn asymptotic_matrix(s: &LoadScenario) -> AsymptoticLoadMatrix {
    let k = s.k;
    let mut m = Matrix::<f64>::zeros(k, k);
    let scale = core::f64::consts::LN_2 / (s.params.resource_blocks * s.params.bandwidth_hz);
    for (u, &i) in s.assignment.iter().enumerate() {
        let gi = s.gains[(u, i)];
        for b in 0..k {
            if b != i {
                m[(i, b)] += scale * s.demand[u] * s.gains[(u, b)] / gi;
            }
        }
    }
    AsymptoticLoadMatrix { matrix: m }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadExperimentOptions {
    pub iterate: IterateOptions,
    /// Bracket width for `ρ(M)`.
    pub spectral_tol: f64,
    /// Extra evaluations spent polishing `x⋆` after the main run.
    pub polish_iters: usize,
}

impl Default for LoadExperimentOptions {
    fn default() -> Self {
        LoadExperimentOptions {
            iterate: IterateOptions::default(),
            spectral_tol: 1e-10,
            polish_iters: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadExperiment {
    /// Starts at `x₁ = f(0)`; annotated with `x⋆` when the run converged.
    pub trace: IterationTrace,
    pub rho: SpectralRadiusEstimate,
    pub feasibility: Feasibility,
    pub x_star: Option<PositiveVector>,
    /// Eigenvector of `f∞` used by the lower bound.
    pub eigvec: Option<PositiveVector>,
    pub eps: Option<f64>,
    /// `ρⁿ ε ‖v‖₂` aligned with `trace.records` (record `n` ↔ entry `n−1`).
    pub lower_bound: Option<Vec<f64>>,
    /// Whether `x₁ ≪ x⋆` held strictly.
    pub strictly_below: bool,
    pub diagnostics: Option<ConvergenceDiagnostics>,
}

impl LoadExperiment {
    pub fn converged(&self) -> bool {
        self.x_star.is_some()
    }
}

/// Checks feasibility through `ρ(M)`, then iterates from `f(0)`.
pub fn run_load_experiment(s: &LoadScenario, opts: &LoadExperimentOptions) -> Result<LoadExperiment> {
    let f = load_mapping(s);
    let m = asymptotic_matrix(s);
    let rho = m.spectral_radius(opts.spectral_tol)?;
    let feasibility = Feasibility::from_bracket(rho.lo, rho.hi);

    let x1 = PositiveVector::new(eval_checked(&f, &vec![0.0; s.k])?)?;
    let mut trace = fixed_point_iterate(&f, &x1, &opts.iterate, None)?;
    let mut out = LoadExperiment {
        trace: trace.clone(),
        rho: rho.clone(),
        feasibility,
        x_star: None,
        eigvec: None,
        eps: None,
        lower_bound: None,
        strictly_below: false,
        diagnostics: None,
    };
    if !trace.converged() {
        return Ok(out);
    }
    let polish = IterateOptions {
        tol: 0.0,
        max_iter: opts.polish_iters.max(1),
        ..opts.iterate
    };
    let x_star = fixed_point_iterate(&f, trace.last(), &polish, None)?.last().clone();
    trace.annotate(&x_star)?;

    // eigenvector of f∞ = diag(p)⁻¹ M diag(p) is diag(p)⁻¹ v_M
    let eigvec = rho.eigvec.as_ref().map(|v| {
        let w: Vec<f64> = v.as_slice().iter().zip(s.power()).map(|(a, p)| a / p).collect();
        let top = Norm::Linf.of(&w);
        PositiveVector::new(w.iter().map(|c| c / top).collect()).expect("positive eigenvector")
    });
    out.strictly_below = x1.strongly_less(&x_star);
    if let (Some(v), true) = (&eigvec, rho.rho > 0.0 && rho.rho < 1.0) {
        if let Ok(eps) = max_valid_eps(&x1, &x_star, v) {
            out.eps = Some(eps);
            out.lower_bound = Some(error_lower_bound(rho.rho, eps, v, Norm::L2, 1..trace.records.len() + 1)?);
        }
    }
    out.diagnostics = convergence_diagnostics(&trace, &x_star, Norm::L2, &DiagnosticOptions::default()).ok();
    out.eigvec = eigvec;
    out.x_star = Some(x_star);
    out.trace = trace;
    Ok(out)
}
