//! Dense symmetric matrices and Jacobi eigensolvers.

use crate::error::{invalid, FracError, Result};
use crate::special::pairwise_dot;
use crate::tridiag::fix_sign;

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("{} entries for a {n}×{n} matrix", data.len()));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        DenseMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return invalid(format!("vector length {} does not match matrix size {}", u.len(), self.n));
        }
        Ok((0..self.n).map(|i| pairwise_dot(self.row(i), u)).collect())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Eigenvalues (ascending) and unit eigenvectors of a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-15;

/// One-sided (Hestenes) Jacobi for a symmetric positive definite matrix.
///
/// Orthogonalizes the columns of `G = K V`; on convergence the column norms of
/// `G` are the eigenvalues and the columns of `V` the eigenvectors.
pub fn jacobi_spd(k: &DenseMatrix) -> Result<DenseEigen> {
    let n = k.n();
    // K symmetric, so its rows are its columns
    let mut g: Vec<Vec<f64>> = (0..n).map(|j| k.row(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let mut norms: Vec<f64> = g.iter().map(|c| pairwise_dot(c, c)).collect();
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                let (gp, gq) = pair_mut(&mut g, p, q);
                let gamma = pairwise_dot(gp, gq);
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(gp, gq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
            }
        }
        // refresh tracked norms to stop drift
        for (nrm, col) in norms.iter_mut().zip(&g) {
            *nrm = pairwise_dot(col, col);
        }
        converged = !rotated;
    }
    if !converged {
        return Err(FracError::Numerical(format!("one-sided Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = norms
        .iter()
        .zip(v)
        .map(|(nrm, mut vec)| {
            let len = pairwise_dot(&vec, &vec).sqrt();
            vec.iter_mut().for_each(|x| *x /= len);
            fix_sign(&mut vec);
            (nrm.sqrt(), vec)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(DenseEigen { values, vectors })
}

fn pair_mut<T>(cols: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (lo, hi) = cols.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}
