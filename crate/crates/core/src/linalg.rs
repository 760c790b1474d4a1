//! Small dense symmetric positive-definite linear algebra.
//!
//! Matrices are stored row-major in a flat `Vec<f64>`. Sizes in this crate
//! stay in the low hundreds, so plain loops are fast enough.

use crate::error::{BanditError, Result};

/// Largest tolerated `|m[i][j] - m[j][i]|` when constructing from raw data.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default jitter for ridge matrices, which `lambda * I` already regularizes.
pub const CONTEXTUAL_JITTER: f64 = 1e-10;

/// Default jitter for kernel matrices.
pub const GP_JITTER: f64 = 1e-5;

/// Symmetric matrix; positive-definiteness is only checked on factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SpdMatrix {
    /// Builds from row-major data, rejecting asymmetry above [`SYMMETRY_TOL`]
    /// and averaging away whatever remains.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(BanditError::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let mut m = Self { dim, data };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = m.data[i * dim + j];
                let b = m.data[j * dim + i];
                if !((a - b).abs() < SYMMETRY_TOL) {
                    return Err(BanditError::Parameter(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(BanditError::Dimension {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    /// `f(i, j)` is evaluated for `j <= i` only and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self::from_fn(dim, |i, j| if i == j { scale } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    fn check_vec(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(BanditError::Dimension {
                expected: self.dim,
                found: x.len(),
            })
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vec(x)?;
        Ok((0..self.dim).map(|i| dot(self.row(i), x)).collect())
    }

    /// `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(x, &self.mul_vec(x)?))
    }

    /// `M + x x^T` in place.
    pub fn add_outer(&mut self, x: &[f64]) -> Result<()> {
        self.check_vec(x)?;
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.data[i * d + j] += x[i] * x[j];
            }
        }
        Ok(())
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += v;
        }
    }

    pub fn max_abs_diff(&self, other: &SpdMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (self.data[i * d + j] + self.data[j * d + i]);
                self.data[i * d + j] = avg;
                self.data[j * d + i] = avg;
            }
        }
    }

    pub fn cholesky(&self, jitter: f64) -> Result<Cholesky> {
        cholesky(self, jitter)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor `L` of `M + jitter * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
    jitter: f64,
}

/// Factor `m + jitter * I = L L^T`. Fails at the first non-positive pivot.
pub fn cholesky(m: &SpdMatrix, jitter: f64) -> Result<Cholesky> {
    if !(jitter >= 0.0) {
        return Err(BanditError::Parameter(format!(
            "jitter must be >= 0, got {jitter}"
        )));
    }
    let d = m.dim;
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let mut diag = m.get(j, j) + jitter;
        for k in 0..j {
            diag -= l[j * d + k] * l[j * d + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(BanditError::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    Ok(Cholesky {
        dim: d,
        lower: l,
        jitter,
    })
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.dim {
            Ok(())
        } else {
            Err(BanditError::Dimension {
                expected: self.dim,
                found: len,
            })
        }
    }

    /// Solves `L y = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check(b.len())?;
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            let row = &self.lower[i * d..i * d + i];
            let s = y[i] - dot(row, &y[..i]);
            y[i] = s / self.lower[i * d + i];
        }
        Ok(y)
    }

    /// Solves `L^T x = y`.
    pub fn backward_solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y.len())?;
        let d = self.dim;
        let mut x = y.to_vec();
        for i in (0..d).rev() {
            let mut s = x[i];
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                s -= self.lower[k * d + i] * xk;
            }
            x[i] = s / self.lower[i * d + i];
        }
        Ok(x)
    }

    /// Solves `(M + jitter I) x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.backward_solve(&self.forward_solve(b)?)
    }

    /// Column-wise solve for several right-hand sides.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rhs.iter().map(|b| self.solve(b)).collect()
    }

    /// `L z`, used to colour standard-normal draws.
    pub fn lower_mul(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z.len())?;
        let d = self.dim;
        Ok((0..d)
            .map(|i| dot(&self.lower[i * d..i * d + i + 1], &z[..=i]))
            .collect())
    }

    /// `log det(M + jitter I)`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.l(i, i).ln()).sum::<f64>()
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> SpdMatrix {
        let d = self.dim;
        SpdMatrix::from_fn(d, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.lower[i * d..i * d + k], &self.lower[j * d..j * d + k])
        })
    }

    /// `(M + jitter I)^{-1}`.
    pub fn inverse(&self) -> SpdMatrix {
        let d = self.dim;
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            cols.push(self.solve(&e).expect("dimension checked"));
        }
        SpdMatrix::from_fn(d, |i, j| 0.5 * (cols[j][i] + cols[i][j]))
    }
}

/// Solve `(M + jitter I) x = rhs` from a factor produced by [`cholesky`].
pub fn solve_spd(factor: &Cholesky, rhs: &[f64]) -> Result<Vec<f64>> {
    factor.solve(rhs)
}

/// `(Sigma + x x^T)^{-1}` from `Sigma^{-1}` via Sherman–Morrison.
pub fn sherman_morrison_update(inv: &SpdMatrix, x: &[f64]) -> Result<SpdMatrix> {
    let mut out = inv.clone();
    sherman_morrison_in_place(&mut out, x)?;
    Ok(out)
}

/// In-place form of [`sherman_morrison_update`].
pub fn sherman_morrison_in_place(inv: &mut SpdMatrix, x: &[f64]) -> Result<()> {
    let u = inv.mul_vec(x)?;
    let denom = 1.0 + dot(x, &u);
    let d = inv.dim;
    for i in 0..d {
        for j in i..d {
            let v = inv.data[i * d + j] - u[i] * u[j] / denom;
            inv.data[i * d + j] = v;
            inv.data[j * d + i] = v;
        }
    }
    Ok(())
}
