//! Subcommands of the `conefix` binary.
//!
//! Each command writes its files under `--out`, prints a one-line JSON
//! summary per run to the supplied writer and reports whether the analysed
//! problem has a fixed point.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use conefix_core::cone::ConeBox;
use conefix_core::mapping::{builtin, BuiltinId, Capped, Mapping, ScalarMapping};
use conefix_core::solver::{
    box_invariant, contraction_certificate, convergence_diagnostics, feasibility_check, fixed_point_iterate,
    DiagnosticOptions, Feasibility, IterateOptions, RateClass, SpectralOptions, SpectralRadiusEstimate,
};
use conefix_core::wireless::load::{
    asymptotic_matrix, generate_scenario, load_mapping, run_load_experiment, Layout, LoadExperimentOptions,
    LoadScenario, ScenarioSpec,
};
use conefix_core::wireless::power::{
    generate_power_scenario, interference_mapping, solve_power_control, PowerOptions, PowerScenario,
    PowerScenarioSpec,
};
use conefix_core::{Error, Norm, PositiveVector};
use log::info;
use serde::Serialize;

use crate::scenario_file::{read_json, write_json, LoadScenarioDoc, PowerScenarioDoc, PowerSolutionDoc, ScenarioDoc};
use crate::trace_csv::{write_ratio, write_trace, RunHeader};

#[derive(Debug, Parser)]
#[command(name = "conefix", version, about = "Fixed-point experiments on the nonnegative cone")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate a scalar built-in mapping and export the trace.
    Demo1d(Demo1dArgs),
    /// Load-coupling experiment on a generated or stored scenario.
    LoadSim(LoadSimArgs),
    /// Uplink power control with receive beamforming.
    PowerSim(PowerSimArgs),
    /// Issue a local contraction certificate on a box.
    Certify(CertifyArgs),
    /// Bracket the spectral radius of the asymptotic mapping.
    SpectralRadius(SpectralArgs),
}

/// Result of a successful command, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Feasible => 0,
            Outcome::Infeasible => 2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative step tolerance; 0 iterates until the iterates stop changing.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl SolverArgs {
    fn options(&self, tol: f64, max_iter: usize) -> IterateOptions {
        IterateOptions {
            tol: self.tol.unwrap_or(tol),
            max_iter: self.max_iter.unwrap_or(max_iter),
            ..Default::default()
        }
    }
}

fn parse_builtin(s: &str) -> std::result::Result<BuiltinId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_layout(s: &str) -> std::result::Result<Layout, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `a..b` (exclusive) or `a..=b` (inclusive).
pub fn parse_seed_range(s: &str) -> std::result::Result<Range<u64>, String> {
    let bad = || format!("expected `a..b` or `a..=b`, got `{s}`");
    let (a, rest) = s.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let end = match rest.strip_prefix('=') {
        Some(b) => b.trim().parse::<u64>().map_err(|_| bad())? + 1,
        None => rest.trim().parse().map_err(|_| bad())?,
    };
    if end <= a {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok(a..end)
}

#[derive(Debug, Clone, Args)]
pub struct Demo1dArgs {
    /// f1, f2, g, fey, g-eps or g-eps:<eps>
    #[arg(long, value_parser = parse_builtin)]
    pub mapping: BuiltinId,
    #[arg(long, default_value_t = 4.0)]
    pub x1: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LoadSimArgs {
    /// Scenario JSON; overrides the generator flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run every seed of the range concurrently, one output directory each.
    #[arg(long, value_parser = parse_seed_range, conflicts_with = "scenario")]
    pub seeds: Option<Range<u64>>,
    #[arg(long, default_value = "grid", value_parser = parse_layout)]
    pub layout: Layout,
    #[arg(long, default_value_t = 900.0)]
    pub freq_mhz: f64,
    #[arg(long, default_value_t = 25)]
    pub k: usize,
    #[arg(long, default_value_t = 400)]
    pub users: usize,
    /// Multiplies every user's demand.
    #[arg(long, default_value_t = 1.0)]
    pub demand_scale: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write the scenario as JSON.
    #[arg(long)]
    pub emit_scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerSimArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long = "antennas", default_value_t = 2)]
    pub l: usize,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub gamma_db_lo: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma_db_hi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Per-user power cap; the capped problem always has a fixed point.
    #[arg(long)]
    pub p_bar: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub emit_scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long, value_parser = parse_builtin, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub mapping: Option<BuiltinId>,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Lower corner; a single value is repeated in every coordinate.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub box_lo: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub box_hi: Vec<f64>,
    /// Use this μ instead of the largest admissible one.
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[arg(long, value_parser = parse_builtin, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub mapping: Option<BuiltinId>,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Cap applied to a power scenario before taking the asymptote.
    #[arg(long)]
    pub p_bar: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

/// Runs a parsed command line. `command_line` goes into file headers.
pub fn run(cli: &Cli, command_line: &str, stdout: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Demo1d(a) => demo1d(a, command_line, stdout),
        Command::LoadSim(a) => load_sim(a, command_line, stdout),
        Command::PowerSim(a) => power_sim(a, command_line, stdout),
        Command::Certify(a) => certify(a, stdout),
        Command::SpectralRadius(a) => spectral(a, stdout),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn emit<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

/// Root of `g(x) + ε = x` above 2, by bisection on `[2, 4 + ε]`.
pub fn g_eps_root(eps: f64) -> f64 {
    let f = ScalarMapping::new(BuiltinId::GEps(eps)).expect("valid eps");
    let (mut lo, mut hi) = (2.0f64, 4.0 + eps);
    // h(x) = f(x) − x is positive at 2 and negative at 4 + ε
    while hi - lo > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.apply(mid) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reference point of a built-in, if it has one.
pub fn builtin_reference(id: &BuiltinId) -> Option<f64> {
    match id {
        BuiltinId::F1 => Some(1.0),
        BuiltinId::F2 => None,
        BuiltinId::G | BuiltinId::Fey => Some(2.0),
        BuiltinId::GEps(eps) => Some(g_eps_root(*eps)),
    }
}

#[derive(Debug, Serialize)]
struct Demo1dSummary {
    mapping: String,
    x1: f64,
    reference: Option<f64>,
    iters: usize,
    last: f64,
    final_error: Option<f64>,
    c_hat: Option<f64>,
    ratio_limit: Option<f64>,
    class: Option<String>,
}

fn class_name(c: RateClass) -> &'static str {
    match c {
        RateClass::Geometric => "geometric",
        RateClass::Sublinear => "sublinear",
        RateClass::Inconclusive => "inconclusive",
    }
}

fn demo1d(a: &Demo1dArgs, command_line: &str, stdout: &mut dyn Write) -> Result<Outcome> {
    let f = builtin(&a.mapping)?;
    let x1 = PositiveVector::new(vec![a.x1])?;
    let reference = builtin_reference(&a.mapping);
    let star = reference.map(|r| PositiveVector::new(vec![r])).transpose()?;
    let opts = a.solver.options(0.0, 100_000);
    let trace = fixed_point_iterate(&f, &x1, &opts, star.as_ref()).map_err(Error::from)?;
    info!("{}: {} iterations", a.mapping, trace.iterations());
    let header = RunHeader::new(command_line, None);
    write_trace(create(&a.out.join("trace.csv"))?, &header, &trace, None)?;
    write_ratio(create(&a.out.join("ratio.csv"))?, &header, &trace)?;
    let diag = star
        .as_ref()
        .and_then(|s| convergence_diagnostics(&trace, s, Norm::L2, &DiagnosticOptions::default()).ok());
    let last = trace.last()[0];
    emit(
        stdout,
        &Demo1dSummary {
            mapping: a.mapping.to_string(),
            x1: a.x1,
            reference,
            iters: trace.iterations(),
            last,
            final_error: reference.map(|r| (last - r).abs()),
            c_hat: diag.as_ref().map(|d| d.c_hat),
            ratio_limit: diag.as_ref().map(|d| d.ratio_limit),
            class: diag.as_ref().map(|d| class_name(d.class).to_string()),
        },
    )?;
    Ok(if reference.is_some() {
        Outcome::Feasible
    } else {
        Outcome::Infeasible
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadSummary {
    pub seed: Option<u64>,
    pub rho: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub feasible: bool,
    pub converged: bool,
    pub iters: usize,
    pub c_hat: Option<f64>,
    pub class: Option<String>,
    pub eps: Option<f64>,
    pub strictly_below: bool,
}

fn load_scenario_for(a: &LoadSimArgs, seed: u64) -> Result<LoadScenario> {
    let s = match &a.scenario {
        Some(path) => match read_json::<ScenarioDoc>(path)? {
            ScenarioDoc::Load(doc) => doc.to_scenario()?,
            ScenarioDoc::Power(_) => bail!("{} is a power scenario", path.display()),
        },
        None => {
            let mut spec = ScenarioSpec {
                k: a.k,
                users: a.users,
                layout: a.layout,
                seed,
                ..Default::default()
            };
            spec.params.hata.freq_mhz = a.freq_mhz;
            generate_scenario(&spec)?
        }
    };
    if a.demand_scale != 1.0 {
        Ok(s.scale_demand(a.demand_scale)?)
    } else {
        Ok(s)
    }
}

fn load_run(a: &LoadSimArgs, seed: u64, out: &Path, command_line: &str) -> Result<LoadSummary> {
    let s = load_scenario_for(a, seed)?;
    let opts = LoadExperimentOptions {
        iterate: a.solver.options(1e-12, 10_000),
        ..Default::default()
    };
    let e = run_load_experiment(&s, &opts)?;
    let header = RunHeader::new(command_line, s.seed());
    write_trace(create(&out.join("trace.csv"))?, &header, &e.trace, e.lower_bound.as_deref())?;
    let summary = LoadSummary {
        seed: s.seed(),
        rho: e.rho.rho,
        rho_lo: e.rho.lo,
        rho_hi: e.rho.hi,
        feasible: e.feasibility.is_feasible(),
        converged: e.converged(),
        iters: e.trace.iterations(),
        c_hat: e.diagnostics.as_ref().map(|d| d.c_hat),
        class: e.diagnostics.as_ref().map(|d| class_name(d.class).to_string()),
        eps: e.eps,
        strictly_below: e.strictly_below,
    };
    write_json(&out.join("summary.json"), &summary)?;
    info!("seed {:?}: rho = {}, feasible = {}", summary.seed, summary.rho, summary.feasible);
    Ok(summary)
}

fn load_sim(a: &LoadSimArgs, command_line: &str, stdout: &mut dyn Write) -> Result<Outcome> {
    if let Some(path) = &a.emit_scenario {
        let s = load_scenario_for(a, a.seeds.as_ref().map_or(a.seed, |r| r.start))?;
        write_json(path, &ScenarioDoc::Load(LoadScenarioDoc::from_scenario(&s)?))?;
    }
    let summaries = match &a.seeds {
        None => vec![load_run(a, a.seed, &a.out, command_line)?],
        Some(range) => {
            let results: Vec<Result<LoadSummary>> = std::thread::scope(|scope| {
                let handles: Vec<_> = range
                    .clone()
                    .map(|seed| {
                        let dir = a.out.join(format!("seed-{seed}"));
                        scope.spawn(move || load_run(a, seed, &dir, command_line))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| bail!("worker panicked")))
                    .collect()
            });
            results.into_iter().collect::<Result<Vec<_>>>()?
        }
    };
    for s in &summaries {
        emit(stdout, s)?;
    }
    Ok(if summaries.iter().all(|s| s.feasible) {
        Outcome::Feasible
    } else {
        Outcome::Infeasible
    })
}

#[derive(Debug, Serialize)]
struct PowerSummary {
    seed: Option<u64>,
    feasible: bool,
    rho_lo: f64,
    rho_hi: f64,
    iters: Option<usize>,
    max_sinr_error: Option<f64>,
}

fn power_scenario_for(a: &PowerSimArgs) -> Result<PowerScenario> {
    match &a.scenario {
        Some(path) => match read_json::<ScenarioDoc>(path)? {
            ScenarioDoc::Power(doc) => Ok(doc.to_scenario()?),
            ScenarioDoc::Load(_) => bail!("{} is a load scenario", path.display()),
        },
        None => Ok(generate_power_scenario(&PowerScenarioSpec {
            k: a.k,
            m: a.m,
            l: a.l,
            seed: a.seed,
            gamma_db: (a.gamma_db_lo, a.gamma_db_hi),
            sigma2: a.sigma2,
            p_bar: a.p_bar,
        })?),
    }
}

fn power_sim(a: &PowerSimArgs, command_line: &str, stdout: &mut dyn Write) -> Result<Outcome> {
    let s = power_scenario_for(a)?;
    if let Some(path) = &a.emit_scenario {
        write_json(path, &ScenarioDoc::Power(PowerScenarioDoc::from_scenario(&s)))?;
    }
    let p_bar = a.p_bar.or(s.p_bar());
    let opts = PowerOptions {
        iterate: a.solver.options(1e-12, 10_000),
        ..Default::default()
    };
    match solve_power_control(&s, &opts, p_bar) {
        Ok(r) => {
            let mut trace = r.trace.clone();
            trace.annotate(&r.x_star)?;
            write_trace(create(&a.out.join("trace.csv"))?, &RunHeader::new(command_line, s.seed()), &trace, None)?;
            write_json(&a.out.join("solution.json"), &PowerSolutionDoc::from(&r))?;
            emit(
                stdout,
                &PowerSummary {
                    seed: s.seed(),
                    feasible: true,
                    rho_lo: r.rho.lo,
                    rho_hi: r.rho.hi,
                    iters: Some(r.trace.iterations()),
                    max_sinr_error: Some(r.max_sinr_error),
                },
            )?;
            Ok(Outcome::Feasible)
        }
        Err(Error::Infeasible { lo, hi }) => {
            emit(
                stdout,
                &PowerSummary {
                    seed: s.seed(),
                    feasible: false,
                    rho_lo: lo,
                    rho_hi: hi,
                    iters: None,
                    max_sinr_error: None,
                },
            )?;
            Ok(Outcome::Infeasible)
        }
        Err(e) => Err(e.into()),
    }
}

/// Mapping named on the command line: a built-in or the mapping of a
/// scenario file, optionally capped.
fn resolve_mapping(
    mapping: &Option<BuiltinId>,
    scenario: &Option<PathBuf>,
    p_bar: Option<f64>,
) -> Result<(Box<dyn Mapping>, Option<LoadScenario>)> {
    if let Some(id) = mapping {
        return Ok((builtin(id)?, None));
    }
    let path = scenario.as_ref().context("either --mapping or --scenario is required")?;
    match read_json::<ScenarioDoc>(path)? {
        ScenarioDoc::Load(doc) => {
            let s = doc.to_scenario()?;
            Ok((Box::new(load_mapping(&s)), Some(s)))
        }
        ScenarioDoc::Power(doc) => {
            let s = doc.to_scenario()?;
            let f = interference_mapping(&s);
            match p_bar.or(s.p_bar()) {
                Some(cap) => Ok((Box::new(Capped::new(f, cap)?), None)),
                None => Ok((Box::new(f), None)),
            }
        }
    }
}

fn broadcast(v: &[f64], k: usize, name: &str) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; k]),
        n if n == k => Ok(v.to_vec()),
        n => bail!("{name} has {n} values, the mapping has dimension {k}"),
    }
}

#[derive(Debug, Serialize)]
struct CertifySummary {
    mapping: String,
    mu: f64,
    lambda0: f64,
    c: f64,
    degenerate: bool,
    box_invariant: bool,
    rho_lo: f64,
    rho: f64,
    rho_hi: f64,
    fixed_point_in_box: Option<bool>,
    c_ge_rho: Option<bool>,
}

fn certify(a: &CertifyArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let (f, _) = resolve_mapping(&a.mapping, &a.scenario, None)?;
    let k = f.dim();
    let u = ConeBox::from_slices(&broadcast(&a.box_lo, k, "--box-lo")?, &broadcast(&a.box_hi, k, "--box-hi")?)?;
    let cert = contraction_certificate(&f, &u, a.mu)?;
    let (verdict, est) = feasibility_check(&f, &SpectralOptions::default())?;
    // the ordering c ≥ ρ is asserted only when the fixed point sits in U
    let in_box = if verdict.is_feasible() {
        let start = u.lower().clone();
        let t = fixed_point_iterate(
            &f,
            &start,
            &IterateOptions {
                tol: 0.0,
                max_iter: 100_000,
                ..Default::default()
            },
            None,
        )
        .map_err(Error::from)?;
        Some(u.contains(t.last()))
    } else {
        None
    };
    emit(
        stdout,
        &CertifySummary {
            mapping: f.name().to_string(),
            mu: cert.mu,
            lambda0: cert.lambda0,
            c: cert.c,
            degenerate: cert.degenerate,
            box_invariant: box_invariant(&f, &u)?,
            rho_lo: est.lo,
            rho: est.rho,
            rho_hi: est.hi,
            fixed_point_in_box: in_box,
            c_ge_rho: in_box.filter(|b| *b).map(|_| cert.c >= est.rho - 1e-9),
        },
    )?;
    Ok(if verdict.is_feasible() {
        Outcome::Feasible
    } else {
        Outcome::Infeasible
    })
}

#[derive(Debug, Serialize)]
struct SpectralSummary {
    lo: f64,
    rho: f64,
    hi: f64,
    verdict: &'static str,
    iterations: usize,
    converged: bool,
}

fn verdict_name(v: Feasibility) -> &'static str {
    match v {
        Feasibility::HasFixedPoint => "fixed-point",
        Feasibility::NoFixedPoint => "no-fixed-point",
        Feasibility::Inconclusive { .. } => "inconclusive",
    }
}

fn spectral(a: &SpectralArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let (f, load) = resolve_mapping(&a.mapping, &a.scenario, a.p_bar)?;
    let (verdict, est): (Feasibility, SpectralRadiusEstimate) = match load {
        Some(s) => {
            let est = asymptotic_matrix(&s).spectral_radius(a.tol)?;
            (Feasibility::from_bracket(est.lo, est.hi), est)
        }
        None => feasibility_check(
            &f,
            &SpectralOptions {
                tol: a.tol,
                ..Default::default()
            },
        )?,
    };
    emit(
        stdout,
        &SpectralSummary {
            lo: est.lo,
            rho: est.rho,
            hi: est.hi,
            verdict: verdict_name(verdict),
            iterations: est.iterations,
            converged: est.converged,
        },
    )?;
    Ok(match verdict {
        Feasibility::NoFixedPoint => Outcome::Infeasible,
        _ => Outcome::Feasible,
    })
}
