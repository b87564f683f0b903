//! Reference mappings: the scalar examples used throughout the test-suite and
//! the coordinatewise minimum of finitely many positive affine mappings.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{Flags, Mapping};
use crate::error::{Error, Result};
use crate::math;

/// Names of the built-in mappings.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinId {
    /// `x/2 + 1/2`
    F1,
    /// `x + 1`
    F2,
    /// identity on `[0, 2]`, logistic `4/(1 + e^{2-x})` beyond; concave but `g(0) = 0`
    G,
    /// `g + ε` for `ε > 0`
    GEps(f64),
    /// logistic `4/(1 + e^{2-x})`: positive SI but not concave
    Fey,
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinId::F1 => f.write_str("f1"),
            BuiltinId::F2 => f.write_str("f2"),
            BuiltinId::G => f.write_str("g"),
            BuiltinId::GEps(eps) => write!(f, "g-eps({eps})"),
            BuiltinId::Fey => f.write_str("fey"),
        }
    }
}

impl FromStr for BuiltinId {
    type Err = Error;

    /// Accepts `f1`, `f2`, `g`, `fey`, `g-eps` (ε = 1e-3), `g-eps(ε)` and `g-eps:ε`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "f1" => return Ok(BuiltinId::F1),
            "f2" => return Ok(BuiltinId::F2),
            "g" => return Ok(BuiltinId::G),
            "fey" => return Ok(BuiltinId::Fey),
            "g-eps" => return Ok(BuiltinId::GEps(1e-3)),
            _ => {}
        }
        let arg = s
            .strip_prefix("g-eps(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("g-eps:"));
        match arg {
            Some(a) => {
                let eps: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::param("eps", format!("cannot parse `{a}`")))?;
                Ok(BuiltinId::GEps(eps))
            }
            None => Err(Error::param("mapping", format!("unknown builtin `{s}`"))),
        }
    }
}

/// Instantiates a built-in scalar mapping.
pub fn builtin(id: &BuiltinId) -> Result<Box<dyn Mapping>> {
    Ok(Box::new(ScalarMapping::new(id.clone())?))
}

/// One of the scalar (`k = 1`) built-ins.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMapping {
    id: BuiltinId,
    name: String,
}

impl ScalarMapping {
    pub fn new(id: BuiltinId) -> Result<Self> {
        if let BuiltinId::GEps(eps) = id {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::param("eps", "must be finite and > 0"));
            }
        }
        let name = format!("{id}");
        Ok(ScalarMapping { id, name })
    }

    pub fn id(&self) -> &BuiltinId {
        &self.id
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self.id {
            BuiltinId::F1 => 0.5 * x + 0.5,
            BuiltinId::F2 => x + 1.0,
            BuiltinId::G => g(x),
            BuiltinId::GEps(eps) => g(x) + eps,
            BuiltinId::Fey => logistic(x),
        }
    }
}

fn logistic(x: f64) -> f64 {
    4.0 / (1.0 + math::exp(2.0 - x))
}

fn g(x: f64) -> f64 {
    if x <= 2.0 {
        x
    } else {
        logistic(x)
    }
}

impl Mapping for ScalarMapping {
    fn dim(&self) -> usize {
        1
    }

    fn flags(&self) -> Flags {
        match self.id {
            BuiltinId::F1 | BuiltinId::F2 | BuiltinId::GEps(_) => Flags::PC,
            // identity on [0, 2]: concave and monotone, but g(λx) = λg(x) there
            BuiltinId::G => Flags {
                monotone: true,
                scalable: false,
                concave: true,
                positive: false,
            },
            BuiltinId::Fey => Flags::SI,
        }
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.apply(x[0]);
        Ok(())
    }

    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        out[0] = match self.id {
            BuiltinId::F1 => 0.5 * x[0],
            BuiltinId::F2 => x[0],
            // bounded by 4 + ε, so f(px)/p → 0
            BuiltinId::G | BuiltinId::GEps(_) | BuiltinId::Fey => 0.0,
        };
        Some(Ok(()))
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// One positive affine piece `x ↦ A x + b` with `A ≥ 0` and `b ≫ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    /// Row-major `k × k`.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
}

/// Coordinatewise minimum of finitely many positive affine mappings.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMin {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

impl AffineMin {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if pieces.is_empty() {
            return Err(Error::param("pieces", "at least one affine piece is required"));
        }
        for p in &pieces {
            if p.matrix.len() != dim * dim || p.offset.len() != dim {
                return Err(Error::param("pieces", "piece has the wrong shape"));
            }
            if p.matrix.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                return Err(Error::param("pieces", "matrix entries must be finite and ≥ 0"));
            }
            if p.offset.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
                return Err(Error::param("pieces", "offsets must be finite and > 0"));
            }
        }
        Ok(AffineMin { dim, pieces })
    }

    /// A single positive affine mapping.
    pub fn affine(dim: usize, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        Self::new(dim, alloc::vec![AffinePiece { matrix, offset }])
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    fn min_over_pieces(&self, x: &[f64], out: &mut [f64], with_offset: bool) {
        let k = self.dim;
        out.fill(f64::INFINITY);
        for p in &self.pieces {
            for (i, o) in out.iter_mut().enumerate() {
                let row = &p.matrix[i * k..(i + 1) * k];
                let mut v: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
                if with_offset {
                    v += p.offset[i];
                }
                *o = o.min(v);
            }
        }
    }
}

impl Mapping for AffineMin {
    fn dim(&self) -> usize {
        self.dim
    }

    fn flags(&self) -> Flags {
        Flags::PC
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.min_over_pieces(x, out, true);
        Ok(())
    }

    fn asymptotic_into(&self, x: &[f64], out: &mut [f64]) -> Option<Result<()>> {
        self.min_over_pieces(x, out, false);
        Some(Ok(()))
    }

    fn name(&self) -> &str {
        "affine-min"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::PositiveVector;
    use crate::mapping::evaluate;
    use alloc::vec;

    fn eval1(id: BuiltinId, x: f64) -> f64 {
        let f = builtin(&id).unwrap();
        evaluate(&f, &PositiveVector::new(vec![x]).unwrap()).unwrap()[0]
    }

    #[test]
    fn builtin_values() {
        assert_eq!(eval1(BuiltinId::F1, 1.0), 1.0);
        assert_eq!(eval1(BuiltinId::F2, 0.0), 1.0);
        assert_eq!(eval1(BuiltinId::G, 1.0), 1.0);
        assert_eq!(eval1(BuiltinId::G, 2.0), 2.0);
        assert_eq!(eval1(BuiltinId::G, 0.0), 0.0);
        assert!((eval1(BuiltinId::Fey, 2.0) - 2.0).abs() < 1e-15);
        assert!((eval1(BuiltinId::GEps(1e-3), 0.0) - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn g_is_continuous_at_two() {
        let below = eval1(BuiltinId::G, 2.0);
        let above = eval1(BuiltinId::G, 2.0 + 1e-9);
        assert!((above - below).abs() < 2e-9);
    }

    #[test]
    fn builtin_flags() {
        let flags = |id| builtin(&id).unwrap().flags();
        assert_eq!(flags(BuiltinId::F1), Flags::PC);
        assert!(!flags(BuiltinId::G).positive);
        assert!(flags(BuiltinId::G).concave);
        assert_eq!(flags(BuiltinId::GEps(1e-3)), Flags::PC);
        assert!(!flags(BuiltinId::Fey).concave);
        assert!(flags(BuiltinId::Fey).is_si());
    }

    #[test]
    fn parse_ids() {
        assert_eq!("g-eps(0.001)".parse::<BuiltinId>().unwrap(), BuiltinId::GEps(1e-3));
        assert_eq!("g-eps:1e-2".parse::<BuiltinId>().unwrap(), BuiltinId::GEps(1e-2));
        assert_eq!("g-eps".parse::<BuiltinId>().unwrap(), BuiltinId::GEps(1e-3));
        assert!("h".parse::<BuiltinId>().is_err());
        assert!(ScalarMapping::new(BuiltinId::GEps(0.0)).is_err());
        assert!(ScalarMapping::new(BuiltinId::GEps(-1.0)).is_err());
    }

    #[test]
    fn affine_min_evaluates_minimum() {
        let f = AffineMin::new(
            2,
            vec![
                AffinePiece {
                    matrix: vec![0.5, 0.0, 0.0, 0.5],
                    offset: vec![1.0, 1.0],
                },
                AffinePiece {
                    matrix: vec![0.0, 0.25, 0.25, 0.0],
                    offset: vec![2.0, 0.5],
                },
            ],
        )
        .unwrap();
        let x = PositiveVector::new(vec![4.0, 2.0]).unwrap();
        // piece 1: (3, 2); piece 2: (2.5, 1.5)
        assert_eq!(evaluate(&f, &x).unwrap().as_slice(), &[2.5, 1.5]);
        let mut out = [0.0; 2];
        f.asymptotic_into(&[4.0, 2.0], &mut out).unwrap().unwrap();
        assert_eq!(out, [0.5, 1.0]);
    }

    #[test]
    fn affine_min_rejects_bad_pieces() {
        assert!(AffineMin::affine(1, vec![-1.0], vec![1.0]).is_err());
        assert!(AffineMin::affine(1, vec![1.0], vec![0.0]).is_err());
        assert!(AffineMin::affine(2, vec![1.0], vec![1.0, 1.0]).is_err());
        assert!(AffineMin::new(1, vec![]).is_err());
    }
}
