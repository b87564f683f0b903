//! The fixed-point recursion `x_{n+1} = f(x_n)` with a full trace.

use alloc::vec::Vec;

use crate::cone::{check_dims, thompson_unchecked, Norm, PositiveVector};
use crate::error::{Error, Result};
use crate::mapping::{eval_checked, Mapping};

/// A value measured in each of the supported norms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormTriple {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl NormTriple {
    pub fn distance(a: &[f64], b: &[f64]) -> Self {
        NormTriple {
            l1: Norm::L1.distance(a, b),
            l2: Norm::L2.distance(a, b),
            linf: Norm::Linf.distance(a, b),
        }
    }

    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }

    fn ratio(num: &Self, den: &Self) -> Self {
        let r = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
        NormTriple {
            l1: r(num.l1, den.l1),
            l2: r(num.l2, den.l2),
            linf: r(num.linf, den.linf),
        }
    }
}

/// Record of the transition `iterates[n-1] → iterates[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    /// `‖iterates[n] − iterates[n−1]‖`
    pub step: NormTriple,
    /// `‖iterates[n] − x⋆‖`, when a reference is attached.
    pub error: Option<NormTriple>,
    /// `error_n / error_{n−1}` (NaN when the previous error is exactly zero).
    pub ratio: Option<NormTriple>,
    /// `d_T(iterates[n], x⋆)` when both are strictly positive.
    pub d_thompson: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ToleranceMet,
    MaxIters,
    DivergenceGuard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `iterates[0]` is the start point; `iterates[n+1] = f(iterates[n])`.
    pub iterates: Vec<PositiveVector>,
    pub records: Vec<StepRecord>,
    pub stop: StopReason,
    pub reference: Option<PositiveVector>,
}

impl IterationTrace {
    pub fn last(&self) -> &PositiveVector {
        self.iterates.last().expect("a trace holds at least the start point")
    }

    /// Number of evaluations of `f` performed.
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::ToleranceMet
    }

    /// `‖iterates[n] − x⋆‖` for `n = 0..=N`, in the given norm.
    pub fn errors(&self, x_star: &PositiveVector, norm: Norm) -> Vec<f64> {
        self.iterates
            .iter()
            .map(|x| norm.distance(x.as_slice(), x_star.as_slice()))
            .collect()
    }

    /// Attaches a reference point and fills the error, ratio and Thompson
    /// columns of every record.
    pub fn annotate(&mut self, x_star: &PositiveVector) -> Result<()> {
        check_dims(self.last().dim(), x_star.dim())?;
        let xs = x_star.as_slice();
        let mut prev = NormTriple::distance(self.iterates[0].as_slice(), xs);
        let star_pos = x_star.is_strictly_positive();
        for rec in self.records.iter_mut() {
            let x = &self.iterates[rec.n];
            let err = NormTriple::distance(x.as_slice(), xs);
            rec.ratio = Some(NormTriple::ratio(&err, &prev));
            rec.error = Some(err);
            rec.d_thompson = (star_pos && x.is_strictly_positive())
                .then(|| thompson_unchecked(x.as_slice(), xs));
            prev = err;
        }
        self.reference = Some(x_star.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    /// Relative step tolerance in `‖·‖∞`. Zero stops only on exact stagnation.
    pub tol: f64,
    pub max_iter: usize,
    /// Divergence guard on `‖x_n‖∞`.
    pub ceiling: f64,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions {
            tol: 1e-12,
            max_iter: 10_000,
            ceiling: 1e15,
        }
    }
}

/// An evaluation error raised mid-run, with the trace up to that point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("iteration failed after {} steps: {error}", trace.iterations())]
pub struct IterationFailure {
    pub error: Error,
    pub trace: IterationTrace,
}

impl From<IterationFailure> for Error {
    fn from(f: IterationFailure) -> Self {
        f.error
    }
}

/// Runs `x_{n+1} = f(x_n)` from `x1`.
///
/// Stops when `‖x_{n+1} − x_n‖∞ ≤ tol · max(1, ‖x_n‖∞)`, after `max_iter`
/// evaluations, or when `‖x_{n+1}‖∞` exceeds the ceiling.
pub fn fixed_point_iterate<M: Mapping + ?Sized>(
    f: &M,
    x1: &PositiveVector,
    opts: &IterateOptions,
    reference: Option<&PositiveVector>,
) -> core::result::Result<IterationTrace, IterationFailure> {
    let mut trace = IterationTrace {
        iterates: alloc::vec![x1.clone()],
        records: Vec::new(),
        stop: StopReason::MaxIters,
        reference: None,
    };
    let fail = |error: Error, trace: IterationTrace| IterationFailure { error, trace };
    if let Err(e) = check_dims(f.dim(), x1.dim()) {
        return Err(fail(e, trace));
    }
    if !(opts.tol >= 0.0) {
        return Err(fail(Error::param("tol", "must be ≥ 0"), trace));
    }
    if opts.max_iter == 0 {
        return Err(fail(Error::param("max_iter", "must be ≥ 1"), trace));
    }
    for n in 1..=opts.max_iter {
        let x = trace.last().as_slice();
        let next = match eval_checked(f, x) {
            Ok(v) => v,
            Err(e) => return Err(fail(e, trace)),
        };
        let step = NormTriple::distance(&next, x);
        let scale = Norm::Linf.of(x).max(1.0);
        let size = Norm::Linf.of(&next);
        let met = step.linf <= opts.tol * scale;
        trace.records.push(StepRecord {
            n,
            step,
            error: None,
            ratio: None,
            d_thompson: None,
        });
        trace.iterates.push(PositiveVector::new(next).expect("checked output"));
        if size > opts.ceiling {
            trace.stop = StopReason::DivergenceGuard;
            break;
        }
        if met {
            trace.stop = StopReason::ToleranceMet;
            break;
        }
    }
    if let Some(r) = reference {
        if let Err(e) = trace.annotate(r) {
            return Err(fail(e, trace));
        }
    }
    Ok(trace)
}

/// `f(x) ≤ x` componentwise: a sufficient condition for convergence of the
/// iteration from any start point when `f` is SI.
pub fn feasibility_probe<M: Mapping + ?Sized>(f: &M, x: &PositiveVector) -> Result<bool> {
    let fx = eval_checked(f, x.as_slice())?;
    Ok(fx.iter().zip(x.as_slice()).all(|(a, b)| a <= b))
}
