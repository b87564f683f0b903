//! Local contraction certificates in Thompson's metric for PC mappings.
//!
//! On a box `U = [a, b]` with Thompson diameter `ln λ₀`, a PC mapping with
//! `f(0) ≥ μ f(x)` for every `x ∈ U` satisfies `f(λx) ≤ λᶜ f(x)` for all
//! `λ ∈ (1, λ₀]`, where `c = ln((1−μ)λ₀ + μ) / ln λ₀`. For monotone `f` the
//! supremum of `f` over `U` is `f(b)`, so the largest admissible `μ` is
//! `minᵢ f(0)ᵢ / f(b)ᵢ`.

use alloc::format;

use crate::cone::{box_thompson_diameter, check_dims, ConeBox};
use crate::error::{Error, Result};
use crate::mapping::check::SLACK;
use crate::mapping::{eval_checked, Mapping};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub u: ConeBox,
    pub mu: f64,
    pub lambda0: f64,
    pub c: f64,
    /// `λ₀ = 1`: the box is a single ray point and `c` is the limit `1 − μ`.
    pub degenerate: bool,
}

/// `c(λ) = ln((1−μ)λ + μ) / ln λ` for `μ ∈ (0, 1)` and `λ > 1`.
pub fn contraction_curve(mu: f64, lambda: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::param("mu", "must lie in (0, 1)"));
    }
    if !(lambda > 1.0) || lambda.is_nan() {
        return Err(Error::param("lambda", "must be > 1"));
    }
    Ok(curve(mu, lambda))
}

/// Same formula on the closed range `μ ∈ (0, 1]`, `λ ≥ 1`, with the limit at 1.
///
/// Written with `ln_1p` so that `λ` close to 1 and very large `λ` keep full
/// relative accuracy.
pub(crate) fn curve(mu: f64, lambda: f64) -> f64 {
    if lambda == f64::INFINITY {
        return 1.0;
    }
    let t = lambda - 1.0;
    if t == 0.0 {
        return 1.0 - mu;
    }
    let num = math::ln_1p((1.0 - mu) * t);
    let den = math::ln_1p(t);
    if den == 0.0 {
        // t below the resolution of ln_1p: first-order expansion
        return 1.0 - mu;
    }
    num / den
}

/// Issues a certificate for a mapping that claims to be PC.
///
/// With `mu_override`, `μ` is validated against `f(0) ≥ μ f(b)`; otherwise
/// the maximal `μ` is used.
pub fn contraction_certificate<M: Mapping + ?Sized>(
    f: &M,
    u: &ConeBox,
    mu_override: Option<f64>,
) -> Result<ContractionCertificate> {
    check_dims(f.dim(), u.dim())?;
    let flags = f.flags();
    let zero = alloc::vec![0.0; u.dim()];
    if !flags.is_pc() {
        let mut why = format!("`{}` does not claim to be positive concave", f.name());
        if !flags.positive {
            let mut out = alloc::vec![0.0; u.dim()];
            if f.eval_into(&zero, &mut out).is_ok() {
                if let Some((i, v)) = out.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                    why = format!("{why}: f(0)[{i}] = {v}, so f is not positive");
                }
            }
        }
        if !flags.concave {
            why = format!("{why} (no concavity claim)");
        }
        return Err(Error::CertificateRefused(why));
    }
    let f0 = eval_checked(f, &zero)?;
    let fb = eval_checked(f, u.upper().as_slice())?;
    let max_mu = f0
        .iter()
        .zip(&fb)
        .map(|(a, b)| a / b)
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let mu = match mu_override {
        None => max_mu,
        Some(mu) => {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::param("mu", "must lie in (0, 1]"));
            }
            if let Some(i) = f0
                .iter()
                .zip(&fb)
                .position(|(a, b)| *a < mu * b * (1.0 - SLACK))
            {
                return Err(Error::param(
                    "mu",
                    format!("f(0)[{i}] = {} < mu * f(b)[{i}] = {}", f0[i], mu * fb[i]),
                ));
            }
            mu
        }
    };
    let (lambda0, _) = box_thompson_diameter(u);
    Ok(ContractionCertificate {
        u: u.clone(),
        mu,
        lambda0,
        c: curve(mu, lambda0),
        degenerate: lambda0 == 1.0,
    })
}

/// `f(U) ⊆ U` for monotone `f`, decided from the two corners:
/// `f(a) ≥ a` and `f(b) ≤ b`.
pub fn box_invariant<M: Mapping + ?Sized>(f: &M, u: &ConeBox) -> Result<bool> {
    let fa = eval_checked(f, u.lower().as_slice())?;
    let fb = eval_checked(f, u.upper().as_slice())?;
    let lower_ok = fa.iter().zip(u.lower().as_slice()).all(|(y, a)| y >= a);
    let upper_ok = fb.iter().zip(u.upper().as_slice()).all(|(y, b)| y <= b);
    Ok(lower_ok && upper_ok)
}
