//! The asymptotic mapping `f∞(x) = lim_{p→∞} f(px)/p`.
//!
//! A closed form attached to the mapping is used when available. Otherwise
//! `f(px)/p` is evaluated on the doubling schedule `p₀, 2p₀, 4p₀, …` until two
//! successive values agree to a relative tolerance in `‖·‖∞`. For concave `f`
//! the quotient `(f(px) - f(0))/p` is nonincreasing in `p`, so the sequence
//! approaches the limit from above.

use alloc::vec;
use alloc::vec::Vec;

use super::{eval_checked, Mapping};
use crate::cone::{check_dims, Norm, PositiveVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    pub p0: f64,
    pub tol: f64,
    pub p_max: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            p0: 1.0,
            tol: 1e-9,
            p_max: 1e12,
        }
    }
}

impl AsymptoticOptions {
    fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return Err(Error::param("p0", "must be finite and > 0"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be > 0"));
        }
        if !(self.p_max >= self.p0) {
            return Err(Error::param("p_max", "must be ≥ p0"));
        }
        Ok(())
    }
}

/// Result of an asymptotic evaluation. `value` may contain zero coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticValue {
    pub value: Vec<f64>,
    pub converged: bool,
    /// Largest scale `p` evaluated; `None` when the closed form was used.
    pub scale: Option<f64>,
}

impl AsymptoticValue {
    pub fn into_vector(self) -> Result<PositiveVector> {
        PositiveVector::new(self.value)
    }
}

/// Evaluates `f∞(x)`, preferring a closed form.
pub fn asymptotic_evaluate<M: Mapping + ?Sized>(
    f: &M,
    x: &PositiveVector,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticValue> {
    check_dims(f.dim(), x.dim())?;
    let mut out = vec![0.0; x.dim()];
    if let Some(r) = f.asymptotic_into(x.as_slice(), &mut out) {
        r?;
        return Ok(AsymptoticValue {
            value: out,
            converged: true,
            scale: None,
        });
    }
    asymptotic_numeric(f, x, opts)
}

/// Numeric limit on the doubling schedule, ignoring any closed form.
pub fn asymptotic_numeric<M: Mapping + ?Sized>(
    f: &M,
    x: &PositiveVector,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticValue> {
    check_dims(f.dim(), x.dim())?;
    opts.validate()?;
    let xs = x.as_slice();
    if xs.iter().all(|&c| c == 0.0) {
        // positively homogeneous: f∞(0) = 0
        return Ok(AsymptoticValue {
            value: vec![0.0; xs.len()],
            converged: true,
            scale: Some(0.0),
        });
    }
    let quotient = |p: f64| -> Result<Vec<f64>> {
        let px: Vec<f64> = xs.iter().map(|c| p * c).collect();
        let mut v = eval_checked(f, &px)?;
        for c in v.iter_mut() {
            *c /= p;
        }
        Ok(v)
    };
    let mut p = opts.p0;
    let mut prev = quotient(p)?;
    loop {
        let next_p = 2.0 * p;
        if next_p > opts.p_max {
            return Ok(AsymptoticValue {
                value: prev,
                converged: false,
                scale: Some(p),
            });
        }
        p = next_p;
        let cur = quotient(p)?;
        let change = Norm::Linf.distance(&cur, &prev);
        let size = Norm::Linf.of(&cur);
        if change <= opts.tol * size.max(f64::MIN_POSITIVE) {
            return Ok(AsymptoticValue {
                value: cur,
                converged: true,
                scale: Some(p),
            });
        }
        prev = cur;
    }
}

/// Raw-slice evaluator of `f∞` for the spectral-radius iteration.
pub(crate) fn asymptotic_into<M: Mapping + ?Sized>(
    f: &M,
    x: &[f64],
    out: &mut [f64],
    opts: &AsymptoticOptions,
) -> Result<()> {
    if let Some(r) = f.asymptotic_into(x, out) {
        return r;
    }
    let v = asymptotic_numeric(f, &PositiveVector::new(x.to_vec())?, opts)?;
    out.copy_from_slice(&v.value);
    Ok(())
}
