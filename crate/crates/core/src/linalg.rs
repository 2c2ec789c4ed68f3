//! Dense real symmetric eigenproblems.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, after the classic EISPACK `tred2`/`tql2` pair. Eigenvectors
//! are accumulated in a transposed layout (one eigenvector per matrix *row*)
//! so the Givens updates in the QL sweep run along contiguous memory.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must be symmetric; max |a_ij - a_ji| = {max_asymmetry:e} exceeds tolerance")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("matrix must be non-empty")]
    Empty,
    #[error("QL iteration failed to converge for eigenvalue index {index}")]
    NoConvergence { index: usize },
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn two_rows_mut(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
        assert!(i < j);
        let (head, tail) = self.data.split_at_mut(j * self.cols);
        (
            &mut head[i * self.cols..(i + 1) * self.cols],
            &mut tail[..self.cols],
        )
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute difference between `a_ij` and `a_ji`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `a + t*b`, entrywise. Panics on shape mismatch.
pub fn affine_combination(a: &Matrix, b: &Matrix, t: f64) -> Matrix {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x + t * y)
            .collect(),
    }
}

/// Cholesky factor `L` with `A = L L^T`, or `None` if `A` is not positive
/// definite (within `shift` added to the diagonal).
pub fn cholesky(a: &Matrix, shift: f64) -> Option<Matrix> {
    if a.rows != a.cols {
        return None;
    }
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)] + if i == j { shift } else { 0.0 };
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Full eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row `n` is the orthonormal eigenvector belonging to `values[n]`.
    pub vectors: Matrix,
}

const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
///
/// The input must be symmetric within `1e-12` relative to its largest entry;
/// it is symmetrized exactly before reduction so the output is deterministic.
pub fn eigh(a: &Matrix) -> Result<Eigh, EigenError> {
    if a.rows != a.cols {
        return Err(EigenError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if a.rows == 0 {
        return Err(EigenError::Empty);
    }
    let max_asymmetry = a.max_asymmetry();
    if max_asymmetry > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(EigenError::NotSymmetric { max_asymmetry });
    }

    let n = a.rows;
    let mut z = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut z))?;
    sort_pairs(&mut d, Some(&mut z));
    Ok(Eigh {
        values: d,
        vectors: z,
    })
}

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix given its
/// diagonal and subdiagonal (`offdiag[i]` couples rows `i` and `i+1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>, EigenError> {
    let n = diag.len();
    if n == 0 {
        return Err(EigenError::Empty);
    }
    assert_eq!(offdiag.len(), n.saturating_sub(1));
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(offdiag);
    tql2(&mut d, &mut e, None)?;
    sort_pairs(&mut d, None);
    Ok(d)
}

fn sort_pairs(d: &mut [f64], z: Option<&mut Matrix>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("non-NaN eigenvalues"));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    if let Some(z) = z {
        let old = z.clone();
        for (new_row, &old_row) in order.iter().enumerate() {
            z.row_mut(new_row).copy_from_slice(old.row(old_row));
        }
    }
}

/// Householder reduction of the symmetric matrix stored in `z` to tridiagonal
/// form (`d` diagonal, `e` subdiagonal with `e[0] = 0`), accumulating the
/// orthogonal transform so that row `j` of `z` ends up as the `j`-th column
/// of the EISPACK convention's `Q`.
fn tred2(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = z[(j, n - 1)];
    }

    for i in (1..n).rev() {
        let mut h = 0.0;
        let mut scale = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z[(j, i - 1)];
                z[(j, i)] = 0.0;
                z[(i, j)] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                let f = d[j];
                z[(i, j)] = f;
                let mut g = e[j] + z[(j, j)] * f;
                let row_j = z.row(j);
                for k in (j + 1)..i {
                    g += row_j[k] * d[k];
                    e[k] += row_j[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let row_j = z.row_mut(j);
                for k in j..i {
                    row_j[k] -= f * e[k] + g * d[k];
                }
                d[j] = z[(j, i - 1)];
                z[(j, i)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder transformations.
    for i in 0..(n - 1) {
        z[(i, n - 1)] = z[(i, i)];
        z[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = z[(i + 1, k)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                {
                    let row_next = z.row(i + 1);
                    let row_j = z.row(j);
                    for k in 0..=i {
                        g += row_next[k] * row_j[k];
                    }
                }
                let row_j = z.row_mut(j);
                for k in 0..=i {
                    row_j[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            z[(i + 1, k)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = z[(j, n - 1)];
        z[(j, n - 1)] = 0.0;
    }
    z[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix, optionally
/// accumulating the rotations into the rows of `z`.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Matrix>) -> Result<(), EigenError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 80 {
                    return Err(EigenError::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let ncols = z.ncols();
                        let (row_i, row_i1) = z.two_rows_mut(i, i + 1);
                        for k in 0..ncols {
                            let h = row_i1[k];
                            row_i1[k] = s * row_i[k] + c * h;
                            row_i[k] = c * row_i[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
