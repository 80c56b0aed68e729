//! Dense row-major matrices and a one-sided Jacobi SVD for small sizes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `D_r · self · D_c` for diagonal scalings given as vectors.
    pub fn scale_rows_cols(&self, row_scale: &[f64], col_scale: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] *= row_scale[i] * col_scale[j];
            }
        }
        out
    }

    /// `aᵀ · self · b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| a[i] * self.row(i).iter().zip(b).map(|(m, y)| m * y).sum::<f64>())
            .sum()
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

/// Thin SVD `A = U Σ Vᵀ` with singular values sorted in decreasing order.
///
/// `u` holds `k = min(m, n)` left singular vectors (each of length `m`),
/// `v` the matching right singular vectors (each of length `n`).
#[derive(Debug, Clone)]
pub struct Svd {
    pub sigma: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub sweeps: usize,
}

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD.
pub fn jacobi_svd(a: &Matrix) -> Svd {
    if a.rows() < a.cols() {
        let t = jacobi_svd(&a.transpose());
        return Svd { sigma: t.sigma, u: t.v, v: t.u, sweeps: t.sweeps };
    }
    let (m, n) = (a.rows(), a.cols());
    // Column-major working copies: cols[j] is column j of A·V.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
                let (left, right) = v.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut triples: Vec<(f64, Vec<f64>, Vec<f64>)> = cols
        .into_iter()
        .zip(v)
        .map(|(col, vj)| {
            let sigma = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u = if sigma > 0.0 {
                col.iter().map(|x| x / sigma).collect()
            } else {
                vec![0.0; m]
            };
            (sigma, u, vj)
        })
        .collect();
    triples.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut svd = Svd { sigma: Vec::with_capacity(n), u: Vec::new(), v: Vec::new(), sweeps };
    for (s, u, vj) in triples {
        svd.sigma.push(s);
        svd.u.push(u);
        svd.v.push(vj);
    }
    svd
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    jacobi_svd(a).sigma.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &Svd, m: usize, n: usize) -> Matrix {
        let mut out = Matrix::zeros(m, n);
        for (k, s) in svd.sigma.iter().enumerate() {
            for i in 0..m {
                for j in 0..n {
                    out[(i, j)] += s * svd.u[k][i] * svd.v[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0]]).unwrap();
        let svd = jacobi_svd(&a);
        assert!((svd.sigma[0] - 4.0).abs() < 1e-14);
        assert!((svd.sigma[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[1,1],[0,1]] has singular values (√5 ± 1)/2.
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let svd = jacobi_svd(&a);
        let r5 = 5f64.sqrt();
        assert!((svd.sigma[0] - (r5 + 1.0) / 2.0).abs() < 1e-14);
        assert!((svd.sigma[1] - (r5 - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_rectangular() {
        let a = Matrix::from_rows(&[
            vec![1.0, -2.0, 0.5, 3.0],
            vec![0.3, 0.7, -1.1, 2.0],
            vec![-0.4, 1.5, 2.2, -0.9],
        ])
        .unwrap();
        for mat in [a.clone(), a.transpose()] {
            let svd = jacobi_svd(&mat);
            let r = reconstruct(&svd, mat.rows(), mat.cols());
            for (x, y) in r.as_slice().iter().zip(mat.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
            // Frobenius norm equals the l2 norm of the singular values.
            let fro: f64 = mat.as_slice().iter().map(|x| x * x).sum();
            let ss: f64 = svd.sigma.iter().map(|x| x * x).sum();
            assert!((fro - ss).abs() < 1e-12);
        }
    }

    #[test]
    fn power_iteration_agrees() {
        let a = Matrix::from_rows(&[
            vec![0.2, -0.8, 0.4],
            vec![0.9, 0.1, -0.3],
            vec![-0.5, 0.6, 0.7],
        ])
        .unwrap();
        // Power iteration on AᵀA as an independent route to σ_max.
        let ata = {
            let t = a.transpose();
            let mut out = Matrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    out[(i, j)] = (0..3).map(|k| t[(i, k)] * a[(k, j)]).sum();
                }
            }
            out
        };
        let mut x = vec![1.0, 0.5, 0.25];
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let y: Vec<f64> = (0..3).map(|i| ata.row(i).iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
            lambda = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.iter().map(|v| v / lambda).collect();
        }
        assert!((spectral_norm(&a) - lambda.sqrt()).abs() < 1e-12);
    }
}
