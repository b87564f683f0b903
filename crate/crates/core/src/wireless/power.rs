//! Uplink power control with base-station selection and receive beamforming.
//!
//! User `u` reaches SINR `x[u] vᴴR[u,b]v / vᴴA_{u,b}(x)v` at station `b` with
//! beamformer `v`, where `A_{u,b}(x) = Σ_{j≠u} x[j] R[j,b] + σ² I`. The
//! minimal powers meeting every target `γ[u]` are the fixed point of
//! `f_u(x) = min_{b∈𝓑_u} γ[u] / λmax(R[u,b], A_{u,b}(x))`.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::pencil::{pencil_lambda_max, pencil_lambda_max_dense, PencilOptions, PencilSolution};
use crate::cone::PositiveVector;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Matrix, Scalar};
use crate::mapping::{eval_checked, Capped, Flags, Mapping};
use crate::math;
use crate::solver::iterate::{fixed_point_iterate, IterateOptions, IterationTrace};
use crate::solver::spectral::{feasibility_check, Feasibility, SpectralOptions, SpectralRadiusEstimate};

/// Largest antenna count handled by the dense fallback.
pub const DENSE_FALLBACK_MAX_L: usize = 8;

/// A power-control instance. Covariances are stored for every
/// user-station pair because the interference at a station involves all
/// users, not only those that may select it.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerScenario {
    k: usize,
    m: usize,
    l: usize,
    candidates: Vec<Vec<usize>>,
    covariances: Vec<Matrix<Complex64>>,
    real: Option<Vec<Matrix<f64>>>,
    gamma: Vec<f64>,
    sigma2: f64,
    p_bar: Option<f64>,
    seed: Option<u64>,
}

impl PowerScenario {
    /// `covariances[u * m + b]` is `R[u,b]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        m: usize,
        l: usize,
        candidates: Vec<Vec<usize>>,
        covariances: Vec<Matrix<Complex64>>,
        gamma: Vec<f64>,
        sigma2: f64,
        p_bar: Option<f64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", "at least two users are required"));
        }
        if m == 0 || l == 0 {
            return Err(Error::param("m, L", "must be ≥ 1"));
        }
        if candidates.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: candidates.len(),
            });
        }
        for (u, c) in candidates.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::param("candidates", alloc::format!("user {u} has no candidate station")));
            }
            if c.iter().any(|&b| b >= m) {
                return Err(Error::param("candidates", alloc::format!("user {u} lists an unknown station")));
            }
        }
        if covariances.len() != k * m {
            return Err(Error::DimensionMismatch {
                expected: k * m,
                got: covariances.len(),
            });
        }
        for (idx, r) in covariances.iter().enumerate() {
            let (user, station) = (idx / m, idx % m);
            let wrap = |e: Error| Error::Pencil {
                user,
                station,
                source: Box::new(e),
            };
            if r.rows() != l || r.cols() != l {
                return Err(wrap(Error::DimensionMismatch {
                    expected: l,
                    got: r.rows(),
                }));
            }
            if !r.is_hermitian(1e-12) {
                return Err(wrap(Error::param("covariance", "not Hermitian")));
            }
            cholesky(r).map_err(wrap)?;
        }
        if gamma.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: gamma.len(),
            });
        }
        if gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::param("gamma", "targets must be finite and > 0"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param("sigma2", "must be finite and > 0"));
        }
        if let Some(p) = p_bar {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::param("p_bar", "must be finite and > 0"));
            }
        }
        let real = covariances
            .iter()
            .all(|r| r.as_slice().iter().all(|z| z.im == 0.0))
            .then(|| {
                covariances
                    .iter()
                    .map(|r| Matrix::from_fn(l, l, |i, j| r[(i, j)].re))
                    .collect()
            });
        Ok(PowerScenario {
            k,
            m,
            l,
            candidates,
            covariances,
            real,
            gamma,
            sigma2,
            p_bar,
            seed,
        })
    }

    /// Single-antenna instance from scalar gains `r[u][b]`.
    pub fn scalar(r: &[Vec<f64>], candidates: Vec<Vec<usize>>, gamma: Vec<f64>, sigma2: f64) -> Result<Self> {
        let k = r.len();
        let m = r.first().map_or(0, |row| row.len());
        let cov = r
            .iter()
            .flat_map(|row| row.iter().map(|&g| Matrix::from_fn(1, 1, |_, _| Complex64::new(g, 0.0))))
            .collect();
        Self::new(k, m, 1, candidates, cov, gamma, sigma2, None, None)
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn candidates(&self) -> &[Vec<usize>] {
        &self.candidates
    }
    pub fn covariance(&self, user: usize, station: usize) -> &Matrix<Complex64> {
        &self.covariances[user * self.m + station]
    }
    pub fn covariances(&self) -> &[Matrix<Complex64>] {
        &self.covariances
    }
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn p_bar(&self) -> Option<f64> {
        self.p_bar
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
    /// True when every covariance is real symmetric.
    pub fn is_real(&self) -> bool {
        self.real.is_some()
    }

    pub fn with_p_bar(mut self, p_bar: Option<f64>) -> Result<Self> {
        if let Some(p) = p_bar {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::param("p_bar", "must be finite and > 0"));
            }
        }
        self.p_bar = p_bar;
        Ok(self)
    }

    fn interference<T: Scalar>(&self, mats: &[Matrix<T>], u: usize, b: usize, x: &[f64]) -> Matrix<T> {
        let mut a = Matrix::<T>::zeros(self.l, self.l);
        for (j, &xj) in x.iter().enumerate() {
            if j != u && xj != 0.0 {
                a.add_scaled(xj, &mats[j * self.m + b]);
            }
        }
        a.add_diagonal(self.sigma2);
        a
    }

    /// `λmax(R[u,b], A_{u,b}(x))` and its beamformer.
    pub fn pencil(&self, u: usize, b: usize, x: &[f64], opts: &PencilOptions) -> Result<PencilSolution<Complex64>> {
        let wrap = |e: Error| Error::Pencil {
            user: u,
            station: b,
            source: Box::new(e),
        };
        if let Some(real) = &self.real {
            let a = self.interference(real, u, b, x);
            let r = &real[u * self.m + b];
            match pencil_lambda_max(r, &a, opts) {
                Ok(s) => {
                    return Ok(PencilSolution {
                        lambda: s.lambda,
                        v: s.v.into_iter().map(|c| Complex64::new(c, 0.0)).collect(),
                        iterations: s.iterations,
                    })
                }
                Err(Error::NoConvergence(_)) if self.l <= DENSE_FALLBACK_MAX_L => {}
                Err(e) => return Err(wrap(e)),
            }
        }
        let a = self.interference(&self.covariances, u, b, x);
        let r = self.covariance(u, b);
        match pencil_lambda_max(r, &a, opts) {
            Ok(s) => Ok(s),
            Err(Error::NoConvergence(_)) if self.l <= DENSE_FALLBACK_MAX_L => {
                pencil_lambda_max_dense(r, &a).map_err(wrap)
            }
            Err(e) => Err(wrap(e)),
        }
    }

    /// Best station and beamformer for user `u` at powers `x`.
    pub fn best_response(&self, u: usize, x: &[f64], opts: &PencilOptions) -> Result<(usize, PencilSolution<Complex64>)> {
        let mut best: Option<(usize, PencilSolution<Complex64>)> = None;
        for &b in &self.candidates[u] {
            let s = self.pencil(u, b, x, opts)?;
            if best.as_ref().is_none_or(|(_, t)| s.lambda > t.lambda) {
                best = Some((b, s));
            }
        }
        Ok(best.expect("candidate sets are nonempty"))
    }

    /// `x[u] vᴴR[u,b]v / vᴴA_{u,b}(x)v`.
    pub fn sinr(&self, u: usize, b: usize, v: &[Complex64], x: &[f64]) -> f64 {
        let a = self.interference(&self.covariances, u, b, x);
        x[u] * self.covariance(u, b).quadratic_form(v) / a.quadratic_form(v)
    }
}

/// The interference mapping of a power scenario.
#[derive(Debug, Clone)]
pub struct InterferenceMapping {
    scenario: Arc<PowerScenario>,
    opts: PencilOptions,
}

impl InterferenceMapping {
    pub fn new(scenario: Arc<PowerScenario>) -> Self {
        InterferenceMapping {
            scenario,
            opts: PencilOptions::default(),
        }
    }

    pub fn with_pencil_options(mut self, opts: PencilOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn scenario(&self) -> &PowerScenario {
        &self.scenario
    }
}

pub fn interference_mapping(s: &PowerScenario) -> InterferenceMapping {
    InterferenceMapping::new(Arc::new(s.clone()))
}

/// `min(f(x), p̄)` coordinatewise; its asymptotic mapping is zero.
pub fn capped_mapping(s: &PowerScenario, p_bar: f64) -> Result<Capped<InterferenceMapping>> {
    Capped::new(interference_mapping(s), p_bar)
}

impl Mapping for InterferenceMapping {
    fn dim(&self) -> usize {
        self.scenario.k
    }

    fn flags(&self) -> Flags {
        Flags::PC
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let s = &*self.scenario;
        for (u, o) in out.iter_mut().enumerate() {
            let (_, best) = s.best_response(u, x, &self.opts)?;
            *o = s.gamma[u] / best.lambda;
        }
        Ok(())
    }

    fn name(&self) -> &str {
        "interference"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSolution {
    pub station: usize,
    /// Unit-norm receive beamformer.
    pub beamformer: Vec<Complex64>,
    pub sinr: f64,
    pub power: f64,
    /// Power sits at the cap and the target may be missed.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub users: Vec<UserSolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerOptions {
    pub iterate: IterateOptions,
    pub spectral: SpectralOptions,
    pub pencil: PencilOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerControlResult {
    pub x_star: PositiveVector,
    pub solution: BeamformingSolution,
    pub trace: IterationTrace,
    /// Spectral test of the mapping that was iterated.
    pub feasibility: Feasibility,
    pub rho: SpectralRadiusEstimate,
    /// `max |SINR_u / γ_u − 1|` over users below the cap.
    pub max_sinr_error: f64,
}

/// Solves the power-control problem, capped at `p_bar` when given.
///
/// The uncapped problem is refused with [`Error::Infeasible`] when the
/// spectral test rules out a fixed point.
pub fn solve_power_control(s: &PowerScenario, opts: &PowerOptions, p_bar: Option<f64>) -> Result<PowerControlResult> {
    let f = interference_mapping(s).with_pencil_options(opts.pencil);
    let zero = PositiveVector::zeros(s.k)?;
    let (feasibility, rho, trace) = match p_bar {
        None => {
            let (verdict, rho) = feasibility_check(&f, &opts.spectral)?;
            if let Feasibility::NoFixedPoint = verdict {
                return Err(Error::Infeasible { lo: rho.lo, hi: rho.hi });
            }
            let trace = fixed_point_iterate(&f, &zero, &opts.iterate, None)?;
            (verdict, rho, trace)
        }
        Some(cap) => {
            let g = Capped::new(f.clone(), cap)?;
            let (verdict, rho) = feasibility_check(&g, &opts.spectral)?;
            let trace = fixed_point_iterate(&g, &zero, &opts.iterate, None)?;
            (verdict, rho, trace)
        }
    };
    if !trace.converged() {
        return Err(Error::NoConvergence("power-control iteration"));
    }
    let x = trace.last().clone();
    let fx = eval_checked(&f, x.as_slice())?;
    let mut users = Vec::with_capacity(s.k);
    let mut max_err = 0.0f64;
    for u in 0..s.k {
        let (b, sol) = s.best_response(u, x.as_slice(), &opts.pencil)?;
        let sinr = s.sinr(u, b, &sol.v, x.as_slice());
        let capped = p_bar.is_some_and(|cap| fx[u] > cap);
        if !capped {
            max_err = max_err.max((sinr / s.gamma[u] - 1.0).abs());
        }
        users.push(UserSolution {
            station: b,
            beamformer: sol.v,
            sinr,
            power: x[u],
            capped,
        });
    }
    Ok(PowerControlResult {
        x_star: x,
        solution: BeamformingSolution { users },
        trace,
        feasibility,
        rho,
        max_sinr_error: max_err,
    })
}

/// Inputs of the random power-scenario generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerScenarioSpec {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub seed: u64,
    /// SINR targets are drawn uniformly in this range, dB.
    pub gamma_db: (f64, f64),
    pub sigma2: f64,
    pub p_bar: Option<f64>,
}

impl Default for PowerScenarioSpec {
    fn default() -> Self {
        PowerScenarioSpec {
            k: 4,
            m: 2,
            l: 2,
            seed: 0,
            gamma_db: (-10.0, 0.0),
            sigma2: 1.0,
            p_bar: None,
        }
    }
}

/// Random instance: users and stations in the unit square, Rayleigh-faded
/// channels with a cubic distance decay, random nonempty candidate sets.
pub fn generate_power_scenario(spec: &PowerScenarioSpec) -> Result<PowerScenario> {
    let (k, m, l) = (spec.k, spec.m, spec.l);
    if l == 0 || m == 0 {
        return Err(Error::param("m, L", "must be ≥ 1"));
    }
    let (lo, hi) = spec.gamma_db;
    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::param("gamma_db", "need a finite range lo ≤ hi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let point = |rng: &mut ChaCha8Rng| [rng.random::<f64>(), rng.random::<f64>()];
    let stations: Vec<[f64; 2]> = (0..m).map(|_| point(&mut rng)).collect();
    let users: Vec<[f64; 2]> = (0..k).map(|_| point(&mut rng)).collect();
    let gain = |u: usize, b: usize| {
        let d = math::hypot(users[u][0] - stations[b][0], users[u][1] - stations[b][1]);
        math::powi(0.1 / d.max(0.05), 3)
    };
    let mut covariances = Vec::with_capacity(k * m);
    for u in 0..k {
        for b in 0..m {
            let scale = math::sqrt(gain(u, b) / (2.0 * l as f64));
            let h = Matrix::from_fn(l, l, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * scale, im * scale)
            });
            let mut r = h.matmul(&h.conj_transpose());
            // exact Hermitian symmetry
            let r_sym = Matrix::from_fn(l, l, |i, j| (r[(i, j)] + r[(j, i)].conj()).scale(0.5));
            r = r_sym;
            let ridge = 1e-6 * r.trace().re / l as f64;
            r.add_diagonal(ridge.max(f64::MIN_POSITIVE));
            covariances.push(r);
        }
    }
    let candidates = (0..k)
        .map(|u| {
            let mut c: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
            if c.is_empty() {
                let best = (0..m)
                    .max_by(|&a, &b| gain(u, a).total_cmp(&gain(u, b)))
                    .unwrap_or(0);
                c.push(best);
            }
            c
        })
        .collect();
    let gamma = (0..k)
        .map(|_| {
            let db = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            math::powf(10.0, db / 10.0)
        })
        .collect();
    PowerScenario::new(k, m, l, candidates, covariances, gamma, spec.sigma2, spec.p_bar, Some(spec.seed))
}

/// Powers for the scalar (`L = 1`), single-candidate case: the solution of
/// `(I − Γ G) x = Γ σ²/r_own` with `G[u,j] = r[j,b_u] / r[u,b_u]`.
pub fn scalar_closed_form(r: &[Vec<f64>], station: &[usize], gamma: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    let k = r.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for u in 0..k {
        let b = station[u];
        for j in 0..k {
            a[u][j] = if j == u { 1.0 } else { -gamma[u] * r[j][b] / r[u][b] };
        }
        a[u][k] = gamma[u] * sigma2 / r[u][b];
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return Err(Error::param("system", "singular"));
        }
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in rest.iter_mut() {
            let fct = row[col] / pivot[col];
            for (r, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *r -= fct * p;
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = ((row + 1)..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][k] - s) / a[row][row];
    }
    Ok(x)
}
