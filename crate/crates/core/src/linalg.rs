//! Small dense linear algebra over `f64` and `Complex<f64>`.
//!
//! Only what the wireless applications and the spectral-radius fallback need:
//! row-major matrices, Hermitian Cholesky, triangular solves, the cyclic Jacobi
//! eigensolver for real symmetric matrices and strongly connected components
//! of a sparsity pattern.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Field operations shared by `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + core::fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn from_real(r: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    /// `|z|²`
    fn abs2(self) -> f64;
    fn scale(self, r: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(r: f64) -> Self {
        r
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    fn scale(self, r: f64) -> Self {
        Complex64::new(self.re * r, self.im * r)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::from_real(1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        debug_assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, l| acc + self[(i, l)] * other[(l, j)])
        })
    }

    pub fn conj_transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Matrix<T>) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b.scale(alpha);
        }
    }

    pub fn add_diagonal(&mut self, alpha: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] = self[(i, i)] + T::from_real(alpha);
        }
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.abs2()).sum())
    }

    /// Largest `|a_ij − conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                worst = worst.max(math::sqrt(d.abs2()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.norm_fro().max(1.0)
    }

    /// `xᴴ A x` (real part; exact for Hermitian `A`).
    pub fn quadratic_form(&self, x: &[T]) -> f64 {
        let ax = self.mul_vec(x);
        dot(x, &ax).re()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `xᴴ y`
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    math::sqrt(x.iter().map(|z| z.abs2()).sum())
}

/// Scales `x` to unit Euclidean norm; returns the original norm.
pub fn normalize<T: Scalar>(x: &mut [T]) -> f64 {
    let n = norm2(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z = z.scale(1.0 / n);
        }
    }
    n
}

/// Lower-triangular `C` with `A = C Cᴴ` and positive real diagonal.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let mut c = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re();
        for l in 0..j {
            d -= c[(j, l)].abs2();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = math::sqrt(d);
        c[(j, j)] = T::from_real(djj);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for l in 0..j {
                s = s - c[(i, l)] * c[(j, l)].conj();
            }
            c[(i, j)] = s.scale(1.0 / djj);
        }
    }
    Ok(c)
}

/// Solves `C y = b` for lower-triangular `C`.
pub fn solve_lower<T: Scalar>(c: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = c.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for l in 0..i {
            s = s - c[(i, l)] * y[l];
        }
        y[i] = s.scale(1.0 / c[(i, i)].re());
    }
    y
}

/// Solves `Cᴴ y = b` for lower-triangular `C` (so `Cᴴ` is upper-triangular).
pub fn solve_lower_adjoint<T: Scalar>(c: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = c.rows();
    let mut y = b.to_vec();
    for i in (0..n).rev() {
        let mut s = y[i];
        for l in (i + 1)..n {
            s = s - c[(l, i)].conj() * y[l];
        }
        y[i] = s.scale(1.0 / c[(i, i)].re());
    }
    y
}

/// `C⁻¹ B C⁻ᴴ` for lower-triangular `C`.
pub fn congruence_inverse<T: Scalar>(c: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let n = c.rows();
    // W = C⁻¹ B, column by column
    let mut w = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| b[(i, j)]).collect();
        let s = solve_lower(c, &col);
        for i in 0..n {
            w[(i, j)] = s[i];
        }
    }
    // K = W C⁻ᴴ, i.e. Kᴴ = C⁻¹ Wᴴ
    let wh = w.conj_transpose();
    let mut kh = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| wh[(i, j)]).collect();
        let s = solve_lower(c, &col);
        for i in 0..n {
            kh[(i, j)] = s[i];
        }
    }
    kh.conj_transpose()
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector of `values[j]`.
    pub vectors: Matrix<f64>,
}

pub fn jacobi_eigen(a: &Matrix<f64>) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::<f64>::identity(n);
    let scale = m.norm_fro().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if math::sqrt(off) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / math::sqrt(t * t + 1.0);
                let sn = t * cs;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = cs * mkp - sn * mkq;
                    m[(k, q)] = sn * mkp + cs * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = cs * mpk - sn * mqk;
                    m[(q, k)] = sn * mpk + cs * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi eigensolver"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Real `2n × 2n` embedding `[[Re, −Im], [Im, Re]]` of a complex matrix.
///
/// For Hermitian input the embedding is symmetric and carries every
/// eigenvalue twice.
pub fn real_embedding(a: &Matrix<Complex64>) -> Matrix<f64> {
    let n = a.rows();
    Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Strongly connected components of the directed graph with an edge
/// `i → j` whenever `edge(i, j)`. Components come out in reverse
/// topological order (Tarjan).
pub fn strongly_connected_components(
    n: usize,
    edge: impl Fn(usize, usize) -> bool,
) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| edge(i, j)).collect())
        .collect();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // explicit DFS stack of (node, next neighbour position)
        let mut dfs = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = dfs.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    dfs.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                dfs.pop();
                if let Some(&(parent, _)) = dfs.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack holds v");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
