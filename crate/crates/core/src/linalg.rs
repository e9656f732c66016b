//! Minimal dense linear algebra: a column-major matrix type and a symmetric
//! eigensolver (Householder tridiagonalization + implicit-shift QL).
//!
//! The eigensolver follows the classic EISPACK/Numerical Recipes formulation
//! (`tred2`/`tqli`), reorganized so the O(n^3) tridiagonalization touches the
//! lower triangle through contiguous rows only. Eigenvalues are accurate to
//! machine precision relative to the matrix norm, which is what the spectral
//! certificates downstream rely on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("QL iteration failed to converge for eigenvalue index {index} after {iters} sweeps")]
    NoConvergence { index: usize, iters: usize },
}

/// Dense column-major matrix of `f64`.
///
/// Column-major so that per-node embedding columns are contiguous slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Two distinct columns, mutably. Panics if `a == b`.
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert!(a != b);
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.rows);
        let lo_col = &mut head[lo * self.rows..(lo + 1) * self.rows];
        let hi_col = &mut tail[..self.rows];
        if a < b {
            (lo_col, hi_col)
        } else {
            (hi_col, lo_col)
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    /// `out = A x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.matvec_acc(x, out);
    }

    /// `out += A x`
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (c, &xc) in x.iter().enumerate() {
            if xc != 0.0 {
                axpy(out, xc, self.col(c));
            }
        }
    }

    /// `out = A^T x`
    pub fn matvec_t(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.matvec_t_acc(x, out);
    }

    /// `out += A^T x`
    pub fn matvec_t_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (c, o) in out.iter_mut().enumerate() {
            *o += dot(self.col(c), x);
        }
    }

    /// `self += s * a b^T`
    pub fn add_outer(&mut self, a: &[f64], b: &[f64], s: f64) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        let rows = self.rows;
        for (c, &bc) in b.iter().enumerate() {
            let col = &mut self.data[c * rows..(c + 1) * rows];
            axpy(col, s * bc, a);
        }
    }

    /// `self += s * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Mat, s: f64) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        axpy(&mut self.data, s, &other.data);
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
#[inline]
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Full eigendecomposition of a symmetric matrix.
pub struct SymEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Matching unit eigenvectors as columns (`vectors.col(i)` pairs with `values[i]`).
    pub vectors: Mat,
}

/// All eigenvalues of the symmetric matrix `a` (row/column-major immaterial),
/// returned ascending. `a` is consumed as scratch.
pub fn sym_eigenvalues(a: Vec<f64>, n: usize) -> Result<Vec<f64>, EigenError> {
    let mut a = a;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut a, n, &mut d, &mut e, None);
    ql_implicit(&mut d, &mut e, n, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Eigenvalues and eigenvectors of the symmetric matrix `a`, ascending.
pub fn sym_eigen(a: Vec<f64>, n: usize) -> Result<SymEigen, EigenError> {
    let mut a = a;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut betas = vec![0.0; n];
    tridiagonalize(&mut a, n, &mut d, &mut e, Some(&mut betas));
    let mut q = accumulate_q(&a, n, &betas);
    ql_implicit(&mut d, &mut e, n, Some(&mut q))?;

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(q.col(src));
    }
    Ok(SymEigen { values, vectors })
}

/// Householder reduction of symmetric `a` (n x n, lower triangle authoritative)
/// to tridiagonal form: diagonal in `d`, subdiagonal in `e[0..n-1]`.
///
/// When `betas` is given, the Householder vectors are left in the strict lower
/// triangle (column k, rows k+1..) with their scalars in `betas`, for later
/// accumulation of the orthogonal factor.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], mut betas: Option<&mut [f64]>) {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let sub = n - k - 1;
        // Column k below the diagonal.
        for i in 0..sub {
            v[i] = a[(k + 1 + i) * n + k];
        }
        let sigma = norm2(&v[..sub]);
        if sigma == 0.0 {
            e[k] = 0.0;
            if let Some(b) = betas.as_deref_mut() {
                b[k] = 0.0;
                for i in 0..sub {
                    a[(k + 1 + i) * n + k] = 0.0;
                }
            }
            continue;
        }
        // Reflect x onto alpha*e1 with the sign choice that avoids cancellation.
        let alpha = if v[0] >= 0.0 { -sigma } else { sigma };
        v[0] -= alpha;
        let beta = 2.0 / dot(&v[..sub], &v[..sub]);
        e[k] = alpha;

        // p = beta * A22 * v, reading only the lower triangle row-wise.
        p[..sub].fill(0.0);
        for i in 0..sub {
            let row = &a[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + (k + 1 + i)];
            let vi = v[i];
            let mut acc = 0.0;
            for (j, &aij) in row.iter().enumerate() {
                acc += aij * v[j];
                p[j] += aij * vi;
            }
            p[i] += acc + a[(k + 1 + i) * n + (k + 1 + i)] * vi;
        }
        for pi in &mut p[..sub] {
            *pi *= beta;
        }

        // w = p - (beta/2)(p.v) v, then A22 -= v w^T + w v^T (lower triangle).
        let gamma = 0.5 * beta * dot(&p[..sub], &v[..sub]);
        for i in 0..sub {
            w[i] = p[i] - gamma * v[i];
        }
        for i in 0..sub {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + (k + 2 + i)];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij -= vi * w[j] + wi * v[j];
            }
        }

        if let Some(b) = betas.as_deref_mut() {
            b[k] = beta;
            for i in 0..sub {
                a[(k + 1 + i) * n + k] = v[i];
            }
        }
    }

    for i in 0..n {
        d[i] = a[i * n + i];
    }
    if n >= 2 {
        e[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    e[n - 1] = 0.0;
}

/// Accumulate Q = H_0 H_1 ... H_{n-3} from the stored Householder vectors so
/// that A = Q T Q^T.
fn accumulate_q(a: &[f64], n: usize, betas: &[f64]) -> Mat {
    let mut q = Mat::identity(n);
    let mut v = vec![0.0; n];
    for k in (0..n.saturating_sub(2)).rev() {
        let sub = n - k - 1;
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        for i in 0..sub {
            v[i] = a[(k + 1 + i) * n + k];
        }
        for c in 0..n {
            let col = &mut q.col_mut(c)[k + 1..];
            let s = beta * dot(&v[..sub], col);
            for (ci, vi) in col.iter_mut().zip(&v[..sub]) {
                *ci -= s * vi;
            }
        }
    }
    q
}

/// Implicit-shift QL on a tridiagonal matrix (diagonal `d`, subdiagonal
/// `e[0..n-1]`), rotating the columns of `z` alongside when present.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize, mut z: Option<&mut Mat>) -> Result<(), EigenError> {
    if n <= 1 {
        return Ok(());
    }
    const MAX_SWEEPS: usize = 64;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(EigenError::NoConvergence { index: l, iters: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let shift = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + shift);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            let mut i = m - 1;
            loop {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (zi, zi1) = z.two_cols_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
                if i == l {
                    break;
                }
                i -= 1;
            }
            if underflow && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
