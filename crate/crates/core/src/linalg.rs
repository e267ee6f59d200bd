//! Dense symmetric-matrix numerics.
//!
//! Everything downstream (kernels, minors, the spectral sampler) works on
//! small dense matrices, so storage is a flat row-major `Vec<f64>` and the
//! algorithms are the textbook ones: LU with partial pivoting for
//! determinants and cyclic Jacobi rotations for the symmetric eigenproblem.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest asymmetry `|a_ij - a_ji|` accepted at construction.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Jacobi stops once the off-diagonal Frobenius mass drops below this.
pub const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Sweep budget before the eigensolver reports non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Square symmetric matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        Ok(Self {
            n,
            data: vec![0.0; n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        Ok(m)
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    /// Builds a matrix from full rows.
    ///
    /// Entries must be finite and symmetric to within [`SYMMETRY_TOLERANCE`];
    /// the stored value is the average `(a_ij + a_ji) / 2`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite entry at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
        for i in 0..n {
            for j in i..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::input(format!(
                        "matrix is not symmetric at ({}, {}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
                m.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Entrywise sup-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::input(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Parses the kernel CSV format: `n` lines of `n` comma-separated decimals.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|field| {
                    field.trim().parse::<f64>().map_err(|e| {
                        Error::input(format!("line {}: bad number {field:?}: {e}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.data.chunks(self.n) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Rows and columns of `a` restricted to `subset`, in ascending index order.
pub fn principal_submatrix(a: &SymMatrix, subset: &[usize]) -> Result<SymMatrix> {
    if subset.is_empty() {
        return Err(Error::input("principal submatrix needs a nonempty index set"));
    }
    let idx = sorted_checked(subset, a.n)?;
    let k = idx.len();
    let mut out = SymMatrix::zeros(k)?;
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate().skip(r) {
            out.set(r, c, a.get(i, j));
        }
    }
    Ok(out)
}

/// `det(A_S)`, with the empty-set minor equal to 1.
pub fn principal_minor(a: &SymMatrix, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Ok(1.0);
    }
    let idx = sorted_checked(subset, a.n)?;
    let k = idx.len();
    let mut buf = Vec::with_capacity(k * k);
    for &i in &idx {
        for &j in &idx {
            buf.push(a.get(i, j));
        }
    }
    Ok(det_in_place(&mut buf, k))
}

pub fn determinant(a: &SymMatrix) -> f64 {
    let mut buf = a.data.clone();
    det_in_place(&mut buf, a.n)
}

/// Determinant of a general row-major `n x n` buffer by LU with partial
/// pivoting. The buffer is overwritten. `n == 0` yields 1.
pub fn det_in_place(buf: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(buf.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = buf[col * n + col].abs();
        for r in col + 1..n {
            let v = buf[r * n + col].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                buf.swap(col * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = buf[col * n + col];
        det *= p;
        for r in col + 1..n {
            let factor = buf[r * n + col] / p;
            if factor != 0.0 {
                for c in col + 1..n {
                    buf[r * n + c] -= factor * buf[col * n + c];
                }
            }
        }
    }
    det
}

fn sorted_checked(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != subset.len() {
        return Err(Error::input("index set contains duplicates"));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::input(format!(
            "index {} out of range for dimension {n}",
            bad + 1
        )));
    }
    Ok(idx)
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    /// `V diag(values) V^T`, useful for checking reconstructions.
    pub fn reconstruct(&self) -> Result<SymMatrix> {
        let n = self.values.len();
        SymMatrix::from_fn(n, |i, j| {
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(l, v)| l * v[i] * v[j])
                .sum()
        })
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.n;
    let mut m = a.data.clone();
    // v is stored row-major; column k accumulates eigenvector k.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.data.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let tol = JACOBI_OFF_DIAGONAL_TOL * scale;

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::numeric(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y * n + y].total_cmp(&m[x * n + x]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

/// True iff every eigenvalue lies in `[-tol, 1 + tol]`.
pub fn is_valid_kernel(a: &SymMatrix, tol: f64) -> bool {
    match eig_sym(a) {
        Ok(eig) => eig.values.iter().all(|&l| l >= -tol && l <= 1.0 + tol),
        Err(_) => false,
    }
}

/// Gershgorin intervals `[a_ii - r_i, a_ii + r_i]` with `r_i = sum_{j != i} |a_ij|`.
pub fn gershgorin_intervals(a: &SymMatrix) -> Vec<(f64, f64)> {
    (0..a.n)
        .map(|i| {
            let r: f64 = (0..a.n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            (a.get(i, i) - r, a.get(i, i) + r)
        })
        .collect()
}
