//! Largest generalized eigenvalue of a Hermitian positive-definite pencil
//! `B v = λ A v`.
//!
//! The iterative solver factorizes `A = C Cᴴ`, runs power iteration on the
//! Hermitian matrix `K = C⁻¹ B C⁻ᴴ`, stops on the Rayleigh-quotient residual
//! and maps the eigenvector back with `v = C⁻ᴴ w`. The dense solver
//! diagonalizes the real symmetric embedding of `K` with Jacobi sweeps.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, congruence_inverse, jacobi_eigen, norm2, normalize, real_embedding, solve_lower_adjoint, Matrix,
    Scalar,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilOptions {
    /// Relative residual `‖K w − θ w‖ ≤ tol ‖K‖_F`.
    pub tol: f64,
    pub max_iter: usize,
    /// Randomized restarts after a stall before giving up.
    pub restarts: usize,
}

impl Default for PencilOptions {
    fn default() -> Self {
        PencilOptions {
            tol: 1e-13,
            max_iter: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PencilSolution<T> {
    pub lambda: f64,
    /// Unit Euclidean norm.
    pub v: Vec<T>,
    pub iterations: usize,
}

/// Random complex-or-real start vector.
trait RandomStart: Scalar {
    fn random(rng: &mut ChaCha8Rng) -> Self;
}

impl RandomStart for f64 {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        rng.random::<f64>() - 0.5
    }
}

impl RandomStart for Complex64 {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }
}

fn check_pair<T: Scalar>(b: &Matrix<T>, a: &Matrix<T>) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    if a.rows() == 0 {
        return Err(Error::EmptyVector);
    }
    Ok(())
}

/// Iterative solver; works for real symmetric (`f64`) and Hermitian
/// (`Complex64`) pencils alike.
#[allow(private_bounds)]
pub fn pencil_lambda_max<T: RandomStart>(
    b: &Matrix<T>,
    a: &Matrix<T>,
    opts: &PencilOptions,
) -> Result<PencilSolution<T>> {
    check_pair(b, a)?;
    let c = cholesky(a)?;
    let k = congruence_inverse(&c, b);
    let n = k.rows();
    let k_norm = k.norm_fro();
    if k_norm == 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    // start from the column of K with the largest diagonal entry
    let j = (0..n)
        .max_by(|&p, &q| k[(p, p)].re().total_cmp(&k[(q, q)].re()))
        .unwrap_or(0);
    let mut w: Vec<T> = (0..n).map(|i| k[(i, j)]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut total = 0;
    for attempt in 0..=opts.restarts {
        if attempt > 0 || normalize(&mut w) == 0.0 {
            w = (0..n).map(|_| T::random(&mut rng)).collect();
            normalize(&mut w);
        }
        for _ in 0..opts.max_iter {
            total += 1;
            let kw = k.mul_vec(&w);
            let theta = crate::linalg::dot(&w, &kw).re();
            let resid = norm2(
                &kw.iter()
                    .zip(&w)
                    .map(|(&p, &q)| p - q.scale(theta))
                    .collect::<Vec<_>>(),
            );
            if resid <= opts.tol * k_norm {
                let mut v = solve_lower_adjoint(&c, &w);
                normalize(&mut v);
                return Ok(PencilSolution {
                    lambda: theta,
                    v,
                    iterations: total,
                });
            }
            w = kw;
            if normalize(&mut w) == 0.0 {
                break;
            }
        }
    }
    Err(Error::NoConvergence("pencil power iteration"))
}

/// Dense solver through the real embedding of `C⁻¹ B C⁻ᴴ`.
pub fn pencil_lambda_max_dense(b: &Matrix<Complex64>, a: &Matrix<Complex64>) -> Result<PencilSolution<Complex64>> {
    check_pair(b, a)?;
    let c = cholesky(a)?;
    let k = congruence_inverse(&c, b);
    let n = k.rows();
    // symmetrize against rounding before the real embedding
    let k = Matrix::from_fn(n, n, |i, j| (k[(i, j)] + k[(j, i)].conj()).scale(0.5));
    let eig = jacobi_eigen(&real_embedding(&k))?;
    let top = eig.values.len() - 1;
    // embedded vector [Re w; Im w]
    let mut w: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(eig.vectors[(i, top)], eig.vectors[(i + n, top)]))
        .collect();
    normalize(&mut w);
    let mut v = solve_lower_adjoint(&c, &w);
    normalize(&mut v);
    Ok(PencilSolution {
        lambda: eig.values[top],
        v,
        iterations: 0,
    })
}

/// `‖B v − λ A v‖ / ‖B‖_F` for a candidate solution.
pub fn pencil_residual<T: Scalar>(b: &Matrix<T>, a: &Matrix<T>, sol: &PencilSolution<T>) -> f64 {
    let bv = b.mul_vec(&sol.v);
    let av = a.mul_vec(&sol.v);
    let r: Vec<T> = bv.iter().zip(&av).map(|(&p, &q)| p - q.scale(sol.lambda)).collect();
    norm2(&r) / b.norm_fro()
}
