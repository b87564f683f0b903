//! Post-processing of traces: rate fits, rate classification, the
//! spectral-radius lower bound on the error, and the two upper envelopes.

use alloc::vec::Vec;

use super::iterate::IterationTrace;
use crate::cone::{check_dims, Norm, PositiveVector};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    Sublinear,
    Geometric,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticOptions {
    /// Margin below 1 separating the two rate classes.
    pub tail_tol: f64,
    /// Errors at or below `noise_floor · max(1, ‖x⋆‖)` are treated as
    /// converged-to-rounding and excluded from the fit.
    pub noise_floor: f64,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        DiagnosticOptions {
            tail_tol: 1e-3,
            noise_floor: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDiagnostics {
    /// `exp` of the least-squares slope of `ln error_n` against `n`.
    pub c_hat: f64,
    /// Mean of `error_n / error_{n−1}` over the fitting window.
    pub ratio_limit: f64,
    pub class: RateClass,
    /// Record indices `[start, end)` used by the fit.
    pub window: (usize, usize),
    /// True when the errors reached the noise floor (or exact zero) and the
    /// window was truncated there.
    pub truncated: bool,
    /// Smallest `γ` with `error_n ≤ γ ĉⁿ` on every record before the floor.
    pub gamma: Option<f64>,
}

/// Fits the convergence rate of a trace against a reference point.
///
/// `error_n = ‖iterates[n] − x⋆‖` for the records `n = 1..=N`. The fit uses
/// the tail half of the records that precede the first error at or below
/// the noise floor.
pub fn convergence_diagnostics(
    trace: &IterationTrace,
    x_star: &PositiveVector,
    norm: Norm,
    opts: &DiagnosticOptions,
) -> Result<ConvergenceDiagnostics> {
    check_dims(trace.last().dim(), x_star.dim())?;
    let n_rec = trace.records.len();
    if n_rec < 10 {
        return Err(Error::param("trace", "at least 10 recorded steps are required"));
    }
    let errors = trace.errors(x_star, norm);
    let floor = opts.noise_floor * Norm::Linf.of(x_star.as_slice()).max(1.0);
    // first record index whose error is at the floor
    let cut = (1..=n_rec).find(|&n| errors[n] <= floor).unwrap_or(n_rec + 1);
    let truncated = cut <= n_rec;
    let usable = cut - 1;
    if usable < 4 {
        return Err(Error::param(
            "trace",
            "the error reaches the noise floor before enough steps for a fit",
        ));
    }
    let start = 1 + usable / 2;
    let end = cut;
    let (ns, logs): (Vec<f64>, Vec<f64>) = (start..end)
        .map(|n| (n as f64, math::ln(errors[n])))
        .unzip();
    let slope = least_squares_slope(&ns, &logs);
    let c_hat = math::exp(slope);
    let ratios: Vec<f64> = (start..end).map(|n| errors[n] / errors[n - 1]).collect();
    let ratio_limit = ratios.iter().sum::<f64>() / ratios.len() as f64;

    let still_above = !truncated;
    let sublinear = ratio_limit > 1.0 - opts.tail_tol && still_above;
    let geometric = c_hat < 1.0 - opts.tail_tol;
    let class = match (sublinear, geometric) {
        (true, false) => RateClass::Sublinear,
        (false, true) => RateClass::Geometric,
        _ => RateClass::Inconclusive,
    };
    let gamma = (c_hat > 0.0 && c_hat < 1.0).then(|| geometric_envelope(&errors[..end], c_hat));
    Ok(ConvergenceDiagnostics {
        c_hat,
        ratio_limit,
        class,
        window: (start, end),
        truncated,
        gamma,
    })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Smallest `γ` with `errors[n] ≤ γ cⁿ` for every `n ≥ 1` in the slice.
pub fn geometric_envelope(errors: &[f64], c: f64) -> f64 {
    errors
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, e)| e / math::powi(c, n as i32))
        .fold(0.0, f64::max)
}

/// `ρⁿ ε ‖v‖` for `n` in `range`.
pub fn error_lower_bound(
    rho: f64,
    eps: f64,
    v: &PositiveVector,
    norm: Norm,
    range: core::ops::Range<usize>,
) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", "must lie in (0, 1)"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    let vn = norm.of(v.as_slice());
    if vn == 0.0 {
        return Err(Error::param("v", "must be nonzero"));
    }
    Ok(range.map(|n| math::powi(rho, n as i32) * eps * vn).collect())
}

/// Largest `ε` with `x1 + ε v ≤ x⋆` when `x1 ≪ x⋆` (or `x1 − ε v ≥ x⋆` when
/// `x1 ≫ x⋆`).
pub fn max_valid_eps(x1: &PositiveVector, x_star: &PositiveVector, v: &PositiveVector) -> Result<f64> {
    check_dims(x1.dim(), x_star.dim())?;
    check_dims(x1.dim(), v.dim())?;
    let gap: Vec<f64> = if x1.strongly_less(x_star) {
        x_star.as_slice().iter().zip(x1.as_slice()).map(|(a, b)| a - b).collect()
    } else if x_star.strongly_less(x1) {
        x1.as_slice().iter().zip(x_star.as_slice()).map(|(a, b)| a - b).collect()
    } else {
        return Err(Error::NoValidEpsilon);
    };
    let eps = gap
        .iter()
        .zip(v.as_slice())
        .filter(|(_, vi)| **vi > 0.0)
        .map(|(g, vi)| g / vi)
        .fold(f64::INFINITY, f64::min);
    if eps.is_finite() && eps > 0.0 {
        Ok(eps)
    } else {
        Err(Error::NoValidEpsilon)
    }
}

/// `d_T(iterates[n], x⋆) ≤ cⁿ d_T(iterates[1], iterates[0]) / (1 − c)`.
pub fn banach_bound(c: f64, first_step: f64, n: usize) -> f64 {
    math::powi(c, n as i32) * first_step / (1.0 - c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::mapping::builtin::{builtin, BuiltinId};
    use crate::solver::iterate::{fixed_point_iterate, IterateOptions};

    fn pv(c: &[f64]) -> PositiveVector {
        PositiveVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn f1_rate_is_one_half() {
        let f = builtin(&BuiltinId::F1).unwrap();
        let opts = IterateOptions {
            tol: 0.0,
            max_iter: 200,
            ..Default::default()
        };
        let t = fixed_point_iterate(&f, &pv(&[0.5]), &opts, None).unwrap();
        let d = convergence_diagnostics(&t, &pv(&[1.0]), Norm::L2, &DiagnosticOptions::default()).unwrap();
        assert!((d.c_hat - 0.5).abs() < 1e-9, "{d:?}");
        assert!((d.ratio_limit - 0.5).abs() < 1e-9);
        assert_eq!(d.class, RateClass::Geometric);
        assert!(d.truncated);
        // error_n = 0.5^(n+1), so γ = 0.5
        assert!((d.gamma.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn short_trace_rejected() {
        let f = builtin(&BuiltinId::F1).unwrap();
        let opts = IterateOptions {
            max_iter: 5,
            ..Default::default()
        };
        let t = fixed_point_iterate(&f, &pv(&[0.5]), &opts, None).unwrap();
        assert!(convergence_diagnostics(&t, &pv(&[1.0]), Norm::L2, &DiagnosticOptions::default()).is_err());
    }

    #[test]
    fn lower_bound_sequence() {
        let v = pv(&[1.0]);
        let b = error_lower_bound(0.5, 1.0, &v, Norm::L2, 0..4).unwrap();
        assert_eq!(b, vec![1.0, 0.5, 0.25, 0.125]);
        assert!(error_lower_bound(1.0, 1.0, &v, Norm::L2, 0..1).is_err());
    }

    #[test]
    fn eps_helper() {
        let v = pv(&[1.0, 0.5]);
        assert_eq!(max_valid_eps(&pv(&[1.0, 1.0]), &pv(&[2.0, 3.0]), &v).unwrap(), 1.0);
        assert_eq!(max_valid_eps(&pv(&[3.0, 3.0]), &pv(&[2.0, 2.0]), &v).unwrap(), 1.0);
        assert_eq!(
            max_valid_eps(&pv(&[1.0, 3.0]), &pv(&[2.0, 2.0]), &v),
            Err(Error::NoValidEpsilon)
        );
    }

    #[test]
    fn envelope_and_banach() {
        assert_eq!(geometric_envelope(&[9.0, 1.0, 0.5, 0.25], 0.5), 2.0);
        assert_eq!(banach_bound(0.5, 1.0, 2), 0.5);
    }
}
