//! The nonnegative cone `ℝ₊ᵏ`, its partial order and Thompson's metric.
//!
//! Thompson's metric on the interior of the cone is
//!
//! ```text
//! d_T(x, y) = ln max{ M(x, y), M(y, x) },   M(x, y) = maxᵢ x[i] / y[i]
//! ```
//!
//! and the componentwise logarithm is an isometry from `(int ℝ₊ᵏ, d_T)` onto
//! `(ℝᵏ, ‖·‖∞)`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math;

/// A point of the closed nonnegative cone.
///
/// Every coordinate is finite and `>= 0`. Strict positivity is a separate,
/// checked view (see [`PositiveVector::is_strictly_positive`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NotNonnegative { index, value });
            }
        }
        Ok(PositiveVector(coords))
    }

    /// Builds a vector in the interior of the cone, rejecting zero coordinates.
    pub fn strictly_positive(coords: Vec<f64>) -> Result<Self> {
        let v = Self::new(coords)?;
        v.require_strictly_positive()?;
        Ok(v)
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        Self::new(alloc::vec![value; dim])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::filled(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&c| c > 0.0)
    }

    pub(crate) fn require_strictly_positive(&self) -> Result<()> {
        match self.0.iter().position(|&c| c <= 0.0) {
            Some(index) => Err(Error::NotStrictlyPositive {
                index,
                value: self.0[index],
            }),
            None => Ok(()),
        }
    }

    /// `alpha * self` for `alpha >= 0`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|c| alpha * c).collect())
    }

    pub fn compare(&self, other: &Self) -> Result<ConeOrder> {
        compare(self, other)
    }

    pub fn le(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self ≪ other`: every coordinate strictly smaller.
    pub fn strongly_less(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a < b)
    }
}

impl core::ops::Index<usize> for PositiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for PositiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Relation between two points under the cone order.
///
/// `Less` means `x < y` (that is `x ≤ y` and `x ≠ y`) without `x ≪ y`.
/// `StronglyLess` means `x ≪ y`, every coordinate strictly smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeOrder {
    Equal,
    Less,
    StronglyLess,
    Greater,
    StronglyGreater,
    Incomparable,
}

impl ConeOrder {
    /// True for `Equal`, `Less` and `StronglyLess`, i.e. `x ≤ y`.
    pub fn is_le(self) -> bool {
        matches!(self, ConeOrder::Equal | ConeOrder::Less | ConeOrder::StronglyLess)
    }

    pub fn is_ge(self) -> bool {
        matches!(
            self,
            ConeOrder::Equal | ConeOrder::Greater | ConeOrder::StronglyGreater
        )
    }
}

pub fn compare(x: &PositiveVector, y: &PositiveVector) -> Result<ConeOrder> {
    check_dims(x.dim(), y.dim())?;
    let (mut lt, mut gt) = (0usize, 0usize);
    for (a, b) in x.0.iter().zip(&y.0) {
        if a < b {
            lt += 1;
        } else if a > b {
            gt += 1;
        }
    }
    let k = x.dim();
    Ok(match (lt, gt) {
        (0, 0) => ConeOrder::Equal,
        (_, 0) if lt == k => ConeOrder::StronglyLess,
        (_, 0) => ConeOrder::Less,
        (0, _) if gt == k => ConeOrder::StronglyGreater,
        (0, _) => ConeOrder::Greater,
        _ => ConeOrder::Incomparable,
    })
}

/// Thompson's metric between two strictly positive vectors.
pub fn thompson_distance(x: &PositiveVector, y: &PositiveVector) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    x.require_strictly_positive()?;
    y.require_strictly_positive()?;
    Ok(thompson_unchecked(&x.0, &y.0))
}

/// Thompson's metric on raw slices; callers guarantee positivity and equal length.
pub(crate) fn thompson_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mut m_xy = 0.0f64;
    let mut m_yx = 0.0f64;
    for (a, b) in x.iter().zip(y) {
        m_xy = m_xy.max(a / b);
        m_yx = m_yx.max(b / a);
    }
    math::ln(m_xy.max(m_yx))
}

/// Componentwise natural logarithm `L(x)`.
pub fn log_iso(x: &PositiveVector) -> Result<Vec<f64>> {
    x.require_strictly_positive()?;
    Ok(x.0.iter().map(|&c| math::ln(c)).collect())
}

/// Componentwise exponential `L⁻¹(y)`.
pub fn exp_iso(y: &[f64]) -> Result<PositiveVector> {
    if y.is_empty() {
        return Err(Error::EmptyVector);
    }
    let coords: Vec<f64> = y.iter().map(|&c| math::exp(c)).collect();
    PositiveVector::strictly_positive(coords)
}

/// The order interval `U = {x : a ≤ x ≤ b}` with `0 ≪ a ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeBox {
    lower: PositiveVector,
    upper: PositiveVector,
}

impl ConeBox {
    pub fn new(lower: PositiveVector, upper: PositiveVector) -> Result<Self> {
        check_dims(lower.dim(), upper.dim())?;
        if !lower.is_strictly_positive() {
            return Err(Error::InvalidBox("lower corner must be strictly positive"));
        }
        if !lower.le(&upper) {
            return Err(Error::InvalidBox("lower corner must be ≤ upper corner"));
        }
        Ok(ConeBox { lower, upper })
    }

    pub fn from_slices(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::new(
            PositiveVector::new(lower.to_vec())?,
            PositiveVector::new(upper.to_vec())?,
        )
    }

    /// `[center / factor, center * factor]` for `factor ≥ 1`.
    pub fn around(center: &PositiveVector, factor: f64) -> Result<Self> {
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(Error::param("factor", "must be finite and ≥ 1"));
        }
        Self::new(center.scaled(1.0 / factor)?, center.scaled(factor)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &PositiveVector {
        &self.lower
    }

    pub fn upper(&self) -> &PositiveVector {
        &self.upper
    }

    pub fn contains(&self, x: &PositiveVector) -> bool {
        self.lower.le(x) && x.le(&self.upper)
    }

    /// True when `x` lies in the interior of the box (strict on every side).
    pub fn contains_interior(&self, x: &PositiveVector) -> bool {
        self.lower.strongly_less(x) && x.strongly_less(&self.upper)
    }
}

/// Thompson diameter of a box: `λ₀ = maxᵢ b[i]/a[i]` and `d₀ = ln λ₀`.
pub fn box_thompson_diameter(u: &ConeBox) -> (f64, f64) {
    let lambda0 = u
        .lower
        .0
        .iter()
        .zip(&u.upper.0)
        .map(|(a, b)| b / a)
        .fold(1.0f64, f64::max);
    (lambda0, math::ln(lambda0))
}

/// Monotone p-norms on `ℝᵏ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|c| c.abs()).sum(),
            Norm::L2 => math::sqrt(v.iter().map(|c| c * c).sum()),
            Norm::Linf => v.iter().fold(0.0f64, |m, c| m.max(c.abs())),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()),
            Norm::Linf => a
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::param("norm", alloc::format!("unsupported norm `{other}`"))),
        }
    }
}

/// Normality constant of `ℝ₊ᵏ` for the given norm.
///
/// All supported norms are monotone on the cone (`0 ≤ x ≤ y ⇒ ‖x‖ ≤ ‖y‖`),
/// and `x = y` attains the bound, so the constant is 1.
pub fn normality_delta(norm: Norm) -> f64 {
    match norm {
        Norm::L1 | Norm::L2 | Norm::Linf => 1.0,
    }
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
