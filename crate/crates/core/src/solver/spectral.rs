//! Nonlinear spectral radius of a monotone, positively homogeneous mapping
//! and the fixed-point existence test built on it.
//!
//! The power-type iteration is shifted: `x_{n+1} = (y + ‖y‖∞ x_n)/‖·‖∞` with
//! `y = f∞(x_n)`. The shifted map has the same eigenvectors, keeps every
//! iterate strictly positive, and does not oscillate on periodic
//! (cyclic-irreducible) matrices. The Collatz–Wielandt quotients `y[i]/x[i]`
//! bracket the spectral radius at every step.
//!
//! On reducible problems the Perron vector has zero entries and the lower
//! quotient stalls on the decaying coordinates. The lower bound is then
//! also taken from truncated iterates: for `z ≥ 0` with `f∞(z) ≥ r z` on the
//! support of `z`, `ρ(f∞) ≥ r` still holds.

use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{check_dims, Norm, PositiveVector};
use crate::error::{Error, Result};
use crate::linalg::{strongly_connected_components, Matrix};
use crate::mapping::asymptotic::{asymptotic_into, AsymptoticOptions};
use crate::mapping::Mapping;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Width of the Collatz–Wielandt bracket at which the run stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Used when the mapping has no closed-form asymptotic mapping.
    pub asymptotic: AsymptoticOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-8,
            max_iter: 100_000,
            asymptotic: AsymptoticOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRadiusEstimate {
    pub rho: f64,
    /// Normalized to `‖v‖∞ = 1`. Absent when `ρ = 0` was detected from a
    /// vanishing image, or when no single eigenvector was computed.
    pub eigvec: Option<PositiveVector>,
    pub lo: f64,
    pub hi: f64,
    /// `‖f∞(v) − ρ v‖∞` for the returned eigenvector.
    pub residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SpectralRadiusEstimate {
    fn zero(iterations: usize) -> Self {
        SpectralRadiusEstimate {
            rho: 0.0,
            eigvec: None,
            lo: 0.0,
            hi: 0.0,
            residual: None,
            iterations,
            converged: true,
        }
    }
}

/// Bracketed power iteration for a homogeneous evaluator `f∞` from `x0 ≫ 0`.
pub fn spectral_radius<F>(mut f_inf: F, x0: &PositiveVector, opts: &SpectralOptions) -> Result<SpectralRadiusEstimate>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    x0.require_strictly_positive()?;
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let k = x0.dim();
    let top = Norm::Linf.of(x0.as_slice());
    let mut x: Vec<f64> = x0.as_slice().iter().map(|c| c / top).collect();
    let mut y = vec![0.0; k];
    let mut z = vec![0.0; k];
    let mut fz = vec![0.0; k];
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for it in 1..=opts.max_iter {
        f_inf(&x, &mut y)?;
        if let Some(index) = y.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NotNonnegative { index, value: y[index] });
        }
        let size = Norm::Linf.of(&y);
        if size == 0.0 {
            return Ok(SpectralRadiusEstimate::zero(it));
        }
        let (l, h) = collatz_wielandt(&x, &y);
        lo = lo.max(l);
        hi = hi.min(h);
        if hi - lo > opts.tol && it % TRUNCATE_EVERY == 0 {
            for theta in TRUNCATION_LEVELS {
                let mut cut = false;
                for (zi, xi) in z.iter_mut().zip(&x) {
                    *zi = if *xi < theta { 0.0 } else { *xi };
                    cut |= *xi < theta;
                }
                if !cut {
                    break;
                }
                f_inf(&z, &mut fz)?;
                let l = z
                    .iter()
                    .zip(&fz)
                    .filter(|(zi, _)| **zi > 0.0)
                    .fold(f64::INFINITY, |m, (zi, fi)| m.min(fi / zi));
                if l.is_finite() {
                    lo = lo.max(l);
                }
            }
        }
        if hi - lo <= opts.tol {
            let rho = 0.5 * (lo + hi);
            let residual = x
                .iter()
                .zip(&y)
                .fold(0.0f64, |m, (xi, yi)| m.max((yi - rho * xi).abs()));
            return Ok(SpectralRadiusEstimate {
                rho,
                eigvec: Some(PositiveVector::new(x)?),
                lo,
                hi,
                residual: Some(residual),
                iterations: it,
                converged: true,
            });
        }
        let mut norm = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi + size * *xi;
            norm = norm.max(*xi);
        }
        for xi in x.iter_mut() {
            *xi /= norm;
        }
    }
    Ok(SpectralRadiusEstimate {
        rho: 0.5 * (lo + hi),
        eigvec: None,
        lo,
        hi,
        residual: None,
        iterations: opts.max_iter,
        converged: false,
    })
}

const TRUNCATE_EVERY: usize = 8;
const TRUNCATION_LEVELS: [f64; 5] = [1e-3, 1e-5, 1e-7, 1e-9, 1e-12];

fn collatz_wielandt(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (xi, yi) in x.iter().zip(y) {
        if *xi > 0.0 {
            let q = yi / xi;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    (lo, hi)
}

/// `ρ(f∞)` for a mapping, starting from the all-ones vector.
pub fn mapping_spectral_radius<M: Mapping + ?Sized>(
    f: &M,
    opts: &SpectralOptions,
) -> Result<SpectralRadiusEstimate> {
    let x0 = PositiveVector::filled(f.dim(), 1.0)?;
    spectral_radius(|x, out| asymptotic_into(f, x, out, &opts.asymptotic), &x0, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feasibility {
    HasFixedPoint,
    NoFixedPoint,
    Inconclusive { lo: f64, hi: f64 },
}

impl Feasibility {
    pub fn from_bracket(lo: f64, hi: f64) -> Self {
        if hi < 1.0 {
            Feasibility::HasFixedPoint
        } else if lo >= 1.0 {
            Feasibility::NoFixedPoint
        } else {
            Feasibility::Inconclusive { lo, hi }
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::HasFixedPoint)
    }
}

/// Fixed-point existence for an SI mapping: a fixed point exists iff
/// `ρ(f∞) < 1`, decided from the Collatz–Wielandt bracket.
///
/// The bracket is tightened around 1 when it straddles it, so `ρ = 1` exactly
/// (as for `x ↦ x + 1`) is reported as no fixed point once the lower bound
/// reaches 1.
pub fn feasibility_check<M: Mapping + ?Sized>(
    f: &M,
    opts: &SpectralOptions,
) -> Result<(Feasibility, SpectralRadiusEstimate)> {
    if !f.flags().is_si() {
        return Err(Error::param("mapping", "feasibility test requires an SI mapping"));
    }
    let est = mapping_spectral_radius(f, opts)?;
    Ok((Feasibility::from_bracket(est.lo, est.hi), est))
}

/// Spectral radius of a nonnegative square matrix.
///
/// Irreducible matrices go straight to the bracketed iteration. Reducible
/// ones are split into strongly connected components and the radius is the
/// largest over the irreducible diagonal blocks; no eigenvector is returned
/// in that case.
pub fn matrix_spectral_radius(m: &Matrix<f64>, tol: f64) -> Result<SpectralRadiusEstimate> {
    check_dims(m.rows(), m.cols())?;
    if m.rows() == 0 {
        return Err(Error::EmptyVector);
    }
    if let Some((index, &value)) = m
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::NotNonnegative { index, value });
    }
    let opts = SpectralOptions {
        tol,
        ..Default::default()
    };
    let comps = strongly_connected_components(m.rows(), |i, j| m[(i, j)] != 0.0);
    if comps.len() == 1 {
        return block_radius(m, &comps[0], &opts);
    }
    let mut best = SpectralRadiusEstimate::zero(0);
    best.converged = true;
    let mut iterations = 0;
    for comp in &comps {
        let est = block_radius(m, comp, &opts)?;
        iterations += est.iterations;
        best.converged &= est.converged;
        best.lo = best.lo.max(est.lo);
        best.hi = best.hi.max(est.hi);
        best.rho = best.rho.max(est.rho);
    }
    best.iterations = iterations;
    Ok(best)
}

fn block_radius(m: &Matrix<f64>, idx: &[usize], opts: &SpectralOptions) -> Result<SpectralRadiusEstimate> {
    if idx.len() == 1 {
        let a = m[(idx[0], idx[0])];
        let mut est = SpectralRadiusEstimate::zero(0);
        est.rho = a;
        est.lo = a;
        est.hi = a;
        if idx.len() == m.rows() {
            est.eigvec = Some(PositiveVector::filled(1, 1.0)?);
            est.residual = Some(0.0);
        }
        return Ok(est);
    }
    let x0 = PositiveVector::filled(idx.len(), 1.0)?;
    spectral_radius(
        |x, out| {
            for (o, &i) in out.iter_mut().zip(idx) {
                *o = idx.iter().zip(x).map(|(&j, xj)| m[(i, j)] * xj).sum();
            }
            Ok(())
        },
        &x0,
        opts,
    )
}
