//! Mappings `f: ℝ₊ᵏ → ℝ₊ᵏ` and their structural claims.
//!
//! A [`Mapping`] declares [`Flags`] (monotone, scalable, concave, positive).
//! The flags are claims: [`check`] contains randomized falsifiers that try to
//! refute them, and the solver only trusts them where a proof step needs them
//! (for example, certificates are refused unless the mapping claims to be PC).

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{check_dims, PositiveVector};
use crate::error::{Error, Result};

pub mod asymptotic;
pub mod builtin;
pub mod check;

pub use asymptotic::{asymptotic_evaluate, AsymptoticOptions, AsymptoticValue};
pub use builtin::{builtin, AffineMin, BuiltinId, ScalarMapping};
pub use check::{
    check_c_concave, check_concave, check_monotone, check_positive, check_scalable, Property,
    PropertyReport, Sampler, Verdict, Violation,
};

/// Structural claims attached to a mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub monotone: bool,
    pub scalable: bool,
    pub concave: bool,
    pub positive: bool,
}

impl Flags {
    /// Positive concave: implies monotone and scalable.
    pub const PC: Flags = Flags {
        monotone: true,
        scalable: true,
        concave: true,
        positive: true,
    };

    /// Standard interference with positive range but no concavity claim.
    pub const SI: Flags = Flags {
        monotone: true,
        scalable: true,
        concave: false,
        positive: true,
    };

    pub fn is_pc(&self) -> bool {
        self.concave && self.positive
    }

    pub fn is_si(&self) -> bool {
        self.is_pc() || (self.monotone && self.scalable)
    }
}

/// An evaluatable mapping of the nonnegative cone.
///
/// Implementations must be pure: evaluating twice at the same point gives
/// the same output and no state is observable between calls.
pub trait Mapping: Send + Sync {
    fn dim(&self) -> usize;

    fn flags(&self) -> Flags;

    /// Writes `f(x)` into `out`. Both slices have length [`Mapping::dim`].
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Closed-form asymptotic mapping `f∞(x) = lim f(px)/p`, when known.
    fn asymptotic_into(&self, _x: &[f64], _out: &mut [f64]) -> Option<Result<()>> {
        None
    }

    fn name(&self) -> &str {
        "mapping"
    }
}

impl<M: Mapping + ?Sized> Mapping for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn flags(&self) -> Flags {
        (**self).flags()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        (**self).asymptotic_into(x, out)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<M: Mapping + ?Sized> Mapping for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn flags(&self) -> Flags {
        (**self).flags()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        (**self).asymptotic_into(x, out)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<M: Mapping + ?Sized> Mapping for Arc<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn flags(&self) -> Flags {
        (**self).flags()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        (**self).asymptotic_into(x, out)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Evaluates `f(x)`, validating dimensions and the output.
pub fn evaluate<M: Mapping + ?Sized>(f: &M, x: &PositiveVector) -> Result<PositiveVector> {
    let out = eval_checked(f, x.as_slice())?;
    PositiveVector::new(out)
}

/// Evaluation on a raw slice with the same output checks as [`evaluate`].
pub(crate) fn eval_checked<M: Mapping + ?Sized>(f: &M, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(f.dim(), x.len())?;
    let mut out = vec![0.0; x.len()];
    f.eval_into(x, &mut out)?;
    validate_output(f.flags(), &out)?;
    Ok(out)
}

fn validate_output(flags: Flags, out: &[f64]) -> Result<()> {
    for (index, &value) in out.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NotNonnegative { index, value });
        }
        if flags.positive && value <= 0.0 {
            return Err(Error::PositivityViolated { index, value });
        }
    }
    Ok(())
}

type EvalFn = dyn Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync;

/// A mapping assembled from closures.
pub struct ClosureMapping {
    dim: usize,
    flags: Flags,
    name: &'static str,
    eval: Box<EvalFn>,
    asymptotic: Option<Box<EvalFn>>,
}

impl ClosureMapping {
    pub fn new<F>(dim: usize, flags: Flags, eval: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        ClosureMapping {
            dim,
            flags,
            name: "closure",
            eval: Box::new(eval),
            asymptotic: None,
        }
    }

    pub fn with_asymptotic<F>(mut self, asymptotic: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        self.asymptotic = Some(Box::new(asymptotic));
        self
    }

    pub fn named(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }
}

impl core::fmt::Debug for ClosureMapping {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ClosureMapping")
            .field("dim", &self.dim)
            .field("flags", &self.flags)
            .field("name", &self.name)
            .field("asymptotic", &self.asymptotic.is_some())
            .finish()
    }
}

impl Mapping for ClosureMapping {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flags(&self) -> Flags {
        self.flags
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.eval)(x, out)
    }
    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        self.asymptotic.as_ref().map(|g| g(x, out))
    }
    fn name(&self) -> &str {
        self.name
    }
}

/// `x ↦ min(f(x), cap)` coordinatewise, for `cap > 0`.
///
/// Every coordinate is bounded, so the asymptotic mapping is identically zero.
#[derive(Debug, Clone)]
pub struct Capped<M> {
    inner: M,
    cap: f64,
}

impl<M: Mapping> Capped<M> {
    pub fn new(inner: M, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::param("cap", "must be finite and > 0"));
        }
        Ok(Capped { inner, cap })
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: Mapping> Mapping for Capped<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn flags(&self) -> Flags {
        self.inner.flags()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.eval_into(x, out)?;
        for o in out.iter_mut() {
            *o = o.min(self.cap);
        }
        Ok(())
    }

    fn asymptotic_into(&self, _x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        out.fill(0.0);
        Some(Ok(()))
    }

    fn name(&self) -> &str {
        "capped"
    }
}
