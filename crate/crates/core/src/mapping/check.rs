//! Randomized falsifiers for the structural claims of a mapping.
//!
//! Each checker samples points from a user-supplied region (corners first,
//! then uniformly) and tests one inequality. A report with no violations is
//! evidence, not proof. Comparisons use a relative slack of `1e-10`, and a
//! sample only counts as a violation when it breaks the inequality by more
//! than that slack.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Mapping;
use crate::cone::{box_thompson_diameter, check_dims, ConeBox};
use crate::error::{Error, Result};
use crate::math;

/// Relative slack applied to every floating-point comparison.
pub const SLACK: f64 = 1e-10;

/// Maximum number of violations kept verbatim in a report.
pub const MAX_RECORDED: usize = 16;

/// Source of sample points inside an order interval `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    lower: Vec<f64>,
    upper: Vec<f64>,
    lambda_max: f64,
    drawn: usize,
    corner_budget: usize,
}

impl Sampler {
    /// Region `lower ≤ x ≤ upper` with `lower ≥ 0`. Zero lower corners are
    /// allowed here, unlike in [`ConeBox`].
    pub fn new(seed: u64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dims(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (i, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::NotNonnegative { index: i, value: a });
            }
            if !(b.is_finite() && b >= a) {
                return Err(Error::param("upper", "must be finite and ≥ lower"));
            }
        }
        let k = lower.len();
        let corners = if k >= 6 { 64 } else { 1usize << k };
        Ok(Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lower,
            upper,
            lambda_max: 4.0,
            drawn: 0,
            corner_budget: corners,
        })
    }

    pub fn for_box(seed: u64, u: &ConeBox) -> Self {
        Sampler::new(seed, u.lower().as_slice().to_vec(), u.upper().as_slice().to_vec())
            .expect("a valid box is a valid sampling region")
    }

    /// Cube `[0, side]ᵏ`.
    pub fn cube(seed: u64, dim: usize, side: f64) -> Result<Self> {
        Sampler::new(seed, vec![0.0; dim], vec![side; dim])
    }

    /// Upper end of the scaling factors drawn by [`Sampler::lambda`].
    pub fn with_lambda_max(mut self, lambda_max: f64) -> Result<Self> {
        if !(lambda_max > 1.0 && lambda_max.is_finite()) {
            return Err(Error::param("lambda_max", "must be finite and > 1"));
        }
        self.lambda_max = lambda_max;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Next point: the two extreme corners, then further corners, then
    /// uniform points of the region.
    pub fn point(&mut self) -> Vec<f64> {
        let n = self.drawn;
        self.drawn += 1;
        match n {
            0 => self.lower.clone(),
            1 => self.upper.clone(),
            _ if n < self.corner_budget => (0..self.dim())
                .map(|i| {
                    if self.rng.random::<bool>() {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    }
                })
                .collect(),
            _ => self.uniform(),
        }
    }

    /// A uniform point, ignoring the corner schedule.
    pub fn uniform(&mut self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (a, b) = (self.lower[i], self.upper[i]);
                if b > a {
                    self.rng.random_range(a..=b)
                } else {
                    a
                }
            })
            .collect()
    }

    /// Pair `x ≤ y` inside the region. Some coordinates are equal on purpose.
    pub fn ordered_pair(&mut self) -> (Vec<f64>, Vec<f64>) {
        let x = self.point();
        let y = x
            .iter()
            .zip(&self.upper)
            .map(|(&xi, &ui)| {
                if self.rng.random_bool(0.2) {
                    xi
                } else {
                    xi + self.rng.random::<f64>() * (ui - xi)
                }
            })
            .collect();
        (x, y)
    }

    /// Scaling factor `λ ∈ (1, lambda_max]`.
    pub fn lambda(&mut self) -> f64 {
        self.lambda_in(self.lambda_max)
    }

    /// Scaling factor `λ ∈ (1, hi]`, for `hi > 1`.
    pub fn lambda_in(&mut self, hi: f64) -> f64 {
        // random::<f64>() lies in [0, 1), so 1 - u lies in (0, 1]
        let u = 1.0 - self.rng.random::<f64>();
        1.0 + u * (hi - 1.0)
    }

    /// Mixing weight `t ∈ (0, 1)`.
    pub fn t(&mut self) -> f64 {
        loop {
            let t = self.rng.random::<f64>();
            if t > 0.0 {
                return t;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Monotone,
    Scalable,
    Concave,
    Positive,
    CConcave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoViolationFound,
    Violated,
}

/// A refuted instance: the inputs that broke the inequality and by how much
/// (relative to the size of the compared values).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub inputs: Vec<Vec<f64>>,
    /// Scalar parameters of the instance (λ, t or c), when relevant.
    pub params: Vec<f64>,
    pub coordinate: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub samples_tested: usize,
    /// At most [`MAX_RECORDED`] violations, the worst one always included.
    pub violations: Vec<Violation>,
    pub violation_count: usize,
}

impl PropertyReport {
    fn new(property: Property) -> Self {
        PropertyReport {
            property,
            samples_tested: 0,
            violations: Vec::new(),
            violation_count: 0,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.violations.is_empty() {
            Verdict::NoViolationFound
        } else {
            Verdict::Violated
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::NoViolationFound
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }

    fn record(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED {
            self.violations.push(v);
            return;
        }
        let (idx, least) = self
            .violations
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.magnitude.total_cmp(&b.1.magnitude))
            .map(|(i, v)| (i, v.magnitude))
            .unwrap_or((0, f64::INFINITY));
        if v.magnitude > least {
            self.violations[idx] = v;
        }
    }
}

/// Raw evaluation: output checks are left to the individual checker.
fn eval<M: Mapping + ?Sized>(f: &M, x: &[f64]) -> Option<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    match f.eval_into(x, &mut out) {
        Ok(()) if out.iter().all(|v| v.is_finite()) => Some(out),
        _ => None,
    }
}

/// Relative amount by which `lhs ≤ rhs` fails, if it fails beyond the slack.
fn excess(lhs: f64, rhs: f64) -> Option<f64> {
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let gap = lhs - rhs;
    if gap > SLACK * scale {
        Some(gap / scale)
    } else {
        None
    }
}

/// Compares `lhs ≤ rhs` componentwise, returning the worst failing coordinate.
fn worst_excess(lhs: &[f64], rhs: &[f64]) -> Option<(usize, f64)> {
    lhs.iter()
        .zip(rhs)
        .enumerate()
        .filter_map(|(i, (&l, &r))| excess(l, r).map(|m| (i, m)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

fn eval_failure(inputs: Vec<Vec<f64>>, params: Vec<f64>) -> Violation {
    Violation {
        inputs,
        params,
        coordinate: 0,
        magnitude: f64::INFINITY,
    }
}

/// `x ≤ y ⇒ f(x) ≤ f(y)` on ordered pairs.
pub fn check_monotone<M: Mapping + ?Sized>(f: &M, sampler: &mut Sampler, n: usize) -> PropertyReport {
    let mut report = PropertyReport::new(Property::Monotone);
    for _ in 0..n {
        let (x, y) = sampler.ordered_pair();
        report.samples_tested += 1;
        match (eval(f, &x), eval(f, &y)) {
            (Some(fx), Some(fy)) => {
                if let Some((i, m)) = worst_excess(&fx, &fy) {
                    report.record(Violation {
                        inputs: vec![x, y],
                        params: Vec::new(),
                        coordinate: i,
                        magnitude: m,
                    });
                }
            }
            _ => report.record(eval_failure(vec![x, y], Vec::new())),
        }
    }
    report
}

/// `f(λx) ≪ λ f(x)` for `λ > 1`. Only a definite reversal
/// `f(λx) > λ f(x)` beyond the slack is reported.
pub fn check_scalable<M: Mapping + ?Sized>(f: &M, sampler: &mut Sampler, n: usize) -> PropertyReport {
    let mut report = PropertyReport::new(Property::Scalable);
    for _ in 0..n {
        let x = sampler.point();
        let lambda = sampler.lambda();
        let lx: Vec<f64> = x.iter().map(|c| lambda * c).collect();
        report.samples_tested += 1;
        match (eval(f, &lx), eval(f, &x)) {
            (Some(flx), Some(fx)) => {
                let rhs: Vec<f64> = fx.iter().map(|c| lambda * c).collect();
                if let Some((i, m)) = worst_excess(&flx, &rhs) {
                    report.record(Violation {
                        inputs: vec![x],
                        params: vec![lambda],
                        coordinate: i,
                        magnitude: m,
                    });
                }
            }
            _ => report.record(eval_failure(vec![x], vec![lambda])),
        }
    }
    report
}

/// `f(tx + (1−t)y) ≥ t f(x) + (1−t) f(y)` for `t ∈ (0, 1)`.
pub fn check_concave<M: Mapping + ?Sized>(f: &M, sampler: &mut Sampler, n: usize) -> PropertyReport {
    let mut report = PropertyReport::new(Property::Concave);
    for _ in 0..n {
        let x = sampler.point();
        let y = sampler.uniform();
        let t = sampler.t();
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        report.samples_tested += 1;
        match (eval(f, &mid), eval(f, &x), eval(f, &y)) {
            (Some(fm), Some(fx), Some(fy)) => {
                let chord: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                if let Some((i, m)) = worst_excess(&chord, &fm) {
                    report.record(Violation {
                        inputs: vec![x, y],
                        params: vec![t],
                        coordinate: i,
                        magnitude: m,
                    });
                }
            }
            _ => report.record(eval_failure(vec![x, y], vec![t])),
        }
    }
    report
}

/// `f(x) ≫ 0`, always testing `x = 0` first.
pub fn check_positive<M: Mapping + ?Sized>(f: &M, sampler: &mut Sampler, n: usize) -> PropertyReport {
    let mut report = PropertyReport::new(Property::Positive);
    let zero = vec![0.0; sampler.dim()];
    let points = core::iter::once(zero).chain((1..n.max(1)).map(|_| sampler.point()));
    for x in points {
        report.samples_tested += 1;
        match eval(f, &x) {
            Some(fx) => {
                if let Some((i, &v)) = fx
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v <= 0.0)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                {
                    report.record(Violation {
                        inputs: vec![x],
                        params: Vec::new(),
                        coordinate: i,
                        magnitude: -v,
                    });
                }
            }
            None => report.record(eval_failure(vec![x], Vec::new())),
        }
    }
    report
}

/// `f(λx) ≤ λᶜ f(x)` for `x ∈ U` and `λ ∈ (1, λ₀]`.
///
/// The first sample always uses `λ = λ₀`. When `λ₀ = 1` there is no
/// admissible `λ` and the report is vacuous (zero samples).
pub fn check_c_concave<M: Mapping + ?Sized>(
    f: &M,
    u: &ConeBox,
    c: f64,
    sampler: &mut Sampler,
    n: usize,
) -> PropertyReport {
    let mut report = PropertyReport::new(Property::CConcave);
    let (lambda0, _) = box_thompson_diameter(u);
    if lambda0 <= 1.0 {
        return report;
    }
    let mut box_sampler = Sampler::for_box(sampler.rng.random(), u);
    for s in 0..n {
        let x = box_sampler.point();
        let lambda = if s % 4 == 0 { lambda0 } else { sampler.lambda_in(lambda0) };
        let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        report.samples_tested += 1;
        match (eval(f, &lx), eval(f, &x)) {
            (Some(flx), Some(fx)) => {
                let factor = math::powf(lambda, c);
                let rhs: Vec<f64> = fx.iter().map(|v| factor * v).collect();
                if let Some((i, m)) = worst_excess(&flx, &rhs) {
                    report.record(Violation {
                        inputs: vec![x],
                        params: vec![lambda, c],
                        coordinate: i,
                        magnitude: m,
                    });
                }
            }
            _ => report.record(eval_failure(vec![x], vec![lambda, c])),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::builtin::{builtin, BuiltinId};
    use crate::mapping::{ClosureMapping, Flags};

    fn run_all(id: BuiltinId, lo: f64, hi: f64) -> [PropertyReport; 4] {
        let f = builtin(&id).unwrap();
        let mut s = Sampler::new(7, vec![lo], vec![hi]).unwrap();
        [
            check_monotone(&f, &mut s, 400),
            check_scalable(&f, &mut s, 400),
            check_concave(&f, &mut s, 400),
            check_positive(&f, &mut s, 400),
        ]
    }

    #[test]
    fn f1_passes_everything() {
        for r in run_all(BuiltinId::F1, 0.0, 10.0) {
            assert!(r.passed(), "{:?}", r.property);
            assert!(r.samples_tested >= 400);
        }
    }

    #[test]
    fn g_is_concave_but_not_positive() {
        let [mono, _, conc, pos] = run_all(BuiltinId::G, 0.0, 6.0);
        assert!(mono.passed());
        assert!(conc.passed());
        assert_eq!(pos.verdict(), Verdict::Violated);
        assert_eq!(pos.violations[0].inputs[0], vec![0.0]);
    }

    #[test]
    fn fey_fails_concavity_below_inflection() {
        let [mono, scal, conc, pos] = run_all(BuiltinId::Fey, 0.0, 2.0);
        assert!(mono.passed() && scal.passed() && pos.passed());
        assert_eq!(conc.verdict(), Verdict::Violated);
        let w = conc.worst().unwrap();
        assert!(w.magnitude > 1e-6);
    }

    #[test]
    fn decreasing_map_fails_monotonicity() {
        let f = ClosureMapping::new(1, Flags::PC, |x, out| {
            out[0] = 1.0 / (1.0 + x[0]);
            Ok(())
        });
        let mut s = Sampler::cube(1, 1, 5.0).unwrap();
        assert_eq!(check_monotone(&f, &mut s, 100).verdict(), Verdict::Violated);
    }

    #[test]
    fn superlinear_map_fails_scalability() {
        let f = ClosureMapping::new(1, Flags::SI, |x, out| {
            out[0] = 1.0 + x[0] * x[0];
            Ok(())
        });
        let mut s = Sampler::cube(2, 1, 5.0).unwrap();
        assert_eq!(check_scalable(&f, &mut s, 200).verdict(), Verdict::Violated);
    }

    #[test]
    fn c_concavity_of_f1() {
        let f = builtin(&BuiltinId::F1).unwrap();
        let u = ConeBox::from_slices(&[0.5], &[1.5]).unwrap();
        let mut s = Sampler::for_box(3, &u);
        assert!(check_c_concave(&f, &u, 0.771, &mut s, 2000).passed());
        let low = check_c_concave(&f, &u, 0.3, &mut s, 2000);
        assert_eq!(low.verdict(), Verdict::Violated);
    }

    #[test]
    fn c_concavity_vacuous_on_degenerate_box() {
        let f = builtin(&BuiltinId::F1).unwrap();
        let u = ConeBox::from_slices(&[1.0], &[1.0]).unwrap();
        let mut s = Sampler::for_box(3, &u);
        let r = check_c_concave(&f, &u, 0.0, &mut s, 100);
        assert_eq!(r.samples_tested, 0);
        assert!(r.passed());
    }

    #[test]
    fn sampler_is_deterministic_and_in_region() {
        let mut a = Sampler::new(9, vec![0.5, 1.0], vec![2.0, 3.0]).unwrap();
        let mut b = Sampler::new(9, vec![0.5, 1.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(a.point(), vec![0.5, 1.0]);
        assert_eq!(a.point(), vec![2.0, 3.0]);
        b.point();
        b.point();
        for _ in 0..200 {
            let (x, y) = a.ordered_pair();
            assert_eq!((x.clone(), y.clone()), b.ordered_pair());
            for i in 0..2 {
                assert!(x[i] <= y[i]);
                assert!(a.lower()[i] <= x[i] && y[i] <= a.upper()[i]);
            }
            let l = a.lambda();
            b.lambda();
            assert!(l > 1.0 && l <= 4.0);
        }
        assert!(Sampler::new(0, vec![1.0], vec![0.5]).is_err());
    }

    #[test]
    fn report_keeps_worst_violation() {
        let mut r = PropertyReport::new(Property::Monotone);
        for i in 0..(MAX_RECORDED + 10) {
            r.record(Violation {
                inputs: Vec::new(),
                params: Vec::new(),
                coordinate: 0,
                magnitude: (i % 7) as f64 + if i == 3 { 100.0 } else { 0.0 },
            });
        }
        assert_eq!(r.violation_count, MAX_RECORDED + 10);
        assert_eq!(r.violations.len(), MAX_RECORDED);
        assert_eq!(r.worst().unwrap().magnitude, 103.0);
    }
}
