//! Small dense matrices and the factorizations the rest of the crate needs:
//! cyclic Jacobi for symmetric eigenproblems, one-sided Jacobi SVD for
//! rank-revealing work, and Gaussian elimination for square solves.
//!
//! Everything here is deterministic: fixed sweep orders, no randomized
//! pivoting, so repeated runs produce bit-identical results.

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from rows. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(dim: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Mat::zeros(dim, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length mismatch");
            for i in 0..dim {
                m.set(i, j, col[i]);
            }
        }
        m
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in apply");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self.get(i, j) * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute column sum (the induced 1-norm for unit weights).
    pub fn max_col_sum(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Maximum absolute row sum (the induced sup-norm for unit weights).
    pub fn max_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. Convergence is declared when the off-diagonal Frobenius mass
/// drops below `1e-14` relative to the matrix scale.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    assert!(a.is_square(), "sym_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m.get(i, j) * m.get(i, j);
                }
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // m <- Jᵀ m J with J rotating the (p,q) plane.
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).partial_cmp(&m.get(i, i)).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut evecs = Mat::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            evecs.set(i, newj, v.get(i, oldj));
        }
    }
    (evals, evecs)
}

/// Spectral norm (largest singular value) via a symmetric eigensolve of AᵀA.
pub fn spectral_norm(a: &Mat) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    let gram = a.transpose().mul(a);
    let (evals, _) = sym_eigen(&gram);
    evals.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Thin singular value decomposition `a = u · diag(sigma) · vᵀ`.
///
/// `u` is `m×n` with orthonormal nonzero columns, `v` is `n×n` orthogonal,
/// `sigma` is descending. Columns matching zero singular values are zero
/// in `u`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

/// One-sided Jacobi SVD. Computes small singular values to high relative
/// accuracy, which the rank decisions elsewhere depend on.
pub fn svd(a: &Mat) -> Svd {
    let n = a.cols;
    let mut u = a.clone();
    let mut v = Mat::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for k in 0..u.rows {
                    let x = u.get(k, i);
                    let y = u.get(k, j);
                    aii += x * x;
                    ajj += y * y;
                    aij += x * y;
                }
                if aij.abs() <= 1e-15 * (aii * ajj).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..u.rows {
                    let x = u.get(k, i);
                    let y = u.get(k, j);
                    u.set(k, i, c * x - s * y);
                    u.set(k, j, s * x + c * y);
                }
                for k in 0..n {
                    let x = v.get(k, i);
                    let y = v.get(k, j);
                    v.set(k, i, c * x - s * y);
                    v.set(k, j, s * x + c * y);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..u.rows).map(|k| u.get(k, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let mut up = Mat::zeros(u.rows, n);
    let mut vp = Mat::zeros(n, n);
    let mut sp = vec![0.0; n];
    for (newj, &oldj) in order.iter().enumerate() {
        sp[newj] = sigma[oldj];
        let s = sigma[oldj];
        for k in 0..u.rows {
            up.set(k, newj, if s > 0.0 { u.get(k, oldj) / s } else { 0.0 });
        }
        for k in 0..n {
            vp.set(k, newj, v.get(k, oldj));
        }
    }
    sigma = sp;
    Svd { u: up, sigma, v: vp }
}

/// Number of singular values above `tol_rel` times the largest one.
pub fn rank_from_sigma(sigma: &[f64], tol_rel: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol_rel * max).count()
}

/// Orthonormal basis for the column space of `a`; `tol_rel` decides rank.
pub fn orthonormal_range(a: &Mat, tol_rel: f64) -> Mat {
    if a.cols == 0 {
        return Mat::zeros(a.rows, 0);
    }
    let f = svd(a);
    let r = rank_from_sigma(&f.sigma, tol_rel);
    let mut q = Mat::zeros(a.rows, r);
    for j in 0..r {
        for i in 0..a.rows {
            q.set(i, j, f.u.get(i, j));
        }
    }
    q
}

/// Orthonormal basis for the null space of `a`.
pub fn nullspace(a: &Mat, tol_rel: f64) -> Mat {
    if a.cols == 0 {
        return Mat::zeros(0, 0);
    }
    let f = svd(a);
    let r = rank_from_sigma(&f.sigma, tol_rel);
    let k = a.cols - r;
    let mut z = Mat::zeros(a.cols, k);
    for j in 0..k {
        for i in 0..a.cols {
            z.set(i, j, f.v.get(i, r + j));
        }
    }
    z
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-13` times the matrix scale.
pub fn solve(a: &Mat, b: &Mat) -> Option<Mat> {
    assert!(a.is_square());
    assert_eq!(a.rows, b.rows);
    let n = a.rows;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m.get(r, col).abs() > m.get(piv, col).abs() {
                piv = r;
            }
        }
        if m.get(piv, col).abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let t = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            for j in 0..x.cols {
                let t = x.get(col, j);
                x.set(col, j, x.get(piv, j));
                x.set(piv, j, t);
            }
        }
        let d = m.get(col, col);
        for r in col + 1..n {
            let f = m.get(r, col) / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
            for j in 0..x.cols {
                let v = x.get(r, j) - f * x.get(col, j);
                x.set(r, j, v);
            }
        }
    }
    for col in (0..n).rev() {
        let d = m.get(col, col);
        for j in 0..x.cols {
            let mut s = x.get(col, j);
            for k in col + 1..n {
                s -= m.get(col, k) * x.get(k, j);
            }
            x.set(col, j, s / d);
        }
    }
    Some(x)
}
