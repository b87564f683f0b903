#![allow(dead_code)]

use conefix_core::mapping::builtin::{AffineMin, AffinePiece};
use conefix_core::solver::{fixed_point_iterate, IterateOptions};
use conefix_core::PositiveVector;
use proptest::prelude::*;

/// Raw parts of a random affine-min mapping whose pieces all have row sums
/// at most `contraction`, so a unique fixed point exists.
#[derive(Debug, Clone)]
pub struct AffineMinSpec {
    pub dim: usize,
    pub pieces: Vec<(Vec<f64>, Vec<f64>)>,
}

impl AffineMinSpec {
    pub fn build(&self) -> AffineMin {
        let pieces = self
            .pieces
            .iter()
            .map(|(m, b)| AffinePiece {
                matrix: m.clone(),
                offset: b.clone(),
            })
            .collect();
        AffineMin::new(self.dim, pieces).unwrap()
    }
}

fn piece(k: usize, contraction: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0f64..1.0, k * k),
        prop::collection::vec(0.05f64..2.0, k),
    )
        .prop_map(move |(mut m, b)| {
            for row in m.chunks_mut(k) {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    row.iter_mut().for_each(|a| *a *= contraction / s);
                }
            }
            (m, b)
        })
}

pub fn affine_min(max_dim: usize, max_pieces: usize) -> impl Strategy<Value = AffineMinSpec> {
    (1..=max_dim, 1..=max_pieces, 0.1f64..0.95).prop_flat_map(|(k, p, c)| {
        prop::collection::vec(piece(k, c), p).prop_map(move |pieces| AffineMinSpec { dim: k, pieces })
    })
}

pub fn pv(v: &[f64]) -> PositiveVector {
    PositiveVector::new(v.to_vec()).unwrap()
}

/// Fixed point by iterating until the iterates stop changing.
pub fn fixed_point(f: &AffineMin) -> PositiveVector {
    let x1 = PositiveVector::filled(f.pieces()[0].offset.len(), 1.0).unwrap();
    let opts = IterateOptions {
        tol: 0.0,
        max_iter: 20_000,
        ..Default::default()
    };
    fixed_point_iterate(f, &x1, &opts, None).unwrap().last().clone()
}
