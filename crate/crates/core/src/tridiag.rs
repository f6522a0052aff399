//! Symmetric tridiagonal kernels: implicit-shift QL eigenvalues, eigenvectors
//! by inverse iteration, and direct solves.

use crate::error::{FracError, Result};
use crate::special::pairwise_dot;

/// Iteration cap per eigenvalue for the QL sweeps.
pub const QL_MAX_ITER: usize = 50;

/// Eigenvalues of the symmetric tridiagonal matrix `(diag, off)` by the
/// implicit-shift QL algorithm, returned in ascending order.
pub fn ql_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if off.len() + 1 != n && !(n == 0 && off.is_empty()) {
        return Err(FracError::InvalidArgument(format!(
            "off-diagonal length {} does not fit diagonal length {n}",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
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
            if iter > QL_MAX_ITER {
                return Err(FracError::Numerical(format!(
                    "QL iteration did not converge for eigenvalue {l} within {QL_MAX_ITER} sweeps"
                )));
            }
            // Wilkinson-type shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // underflow: split the block and restart
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// LU factorization with partial pivoting of `T − σI`, where `T` is
/// symmetric tridiagonal. `U` has two superdiagonals.
struct PivotedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut lu = PivotedLu {
            u0: vec![0.0; n],
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            mult: vec![0.0; n.saturating_sub(1)],
            swapped: vec![false; n.saturating_sub(1)],
        };
        // (a, b, c): active row entries at columns i, i+1, i+2
        let mut a = diag[0] - shift;
        let mut b = if n > 1 { off[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n.saturating_sub(1) {
            let sub = off[i];
            let next_d = diag[i + 1] - shift;
            let next_sup = if i + 2 < n { off[i + 1] } else { 0.0 };
            if a.abs() >= sub.abs() {
                let piv = if a == 0.0 { tiny } else { a };
                let m = sub / piv;
                lu.mult[i] = m;
                lu.u0[i] = piv;
                lu.u1[i] = b;
                lu.u2[i] = c;
                a = next_d - m * b;
                b = next_sup - m * c;
            } else {
                let m = a / sub;
                lu.mult[i] = m;
                lu.swapped[i] = true;
                lu.u0[i] = sub;
                lu.u1[i] = next_d;
                lu.u2[i] = next_sup;
                a = b - m * next_d;
                b = c - m * next_sup;
            }
            c = 0.0;
        }
        lu.u0[n - 1] = if a == 0.0 { tiny } else { a };
        lu
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

const INVERSE_ITERATIONS: usize = 3;
/// Eigenvalues closer than this fraction of ‖T‖ are treated as a cluster and
/// their vectors are re-orthogonalized against each other.
const CLUSTER_TOL: f64 = 1e-3;

/// Eigenvectors for the ascending `eigenvalues` of `(diag, off)` by inverse
/// iteration. Vectors are Euclidean-normalized and returned as rows.
pub fn inverse_iteration_vectors(diag: &[f64], off: &[f64], eigenvalues: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let tnorm = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i].abs() + l + r
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * tnorm;
    let cluster = CLUSTER_TOL * tnorm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut rng = XorShift::new(0x9e37_79b9_7f4a_7c15);
    let mut first_in_cluster = 0;
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        while lambda - eigenvalues[first_in_cluster] > cluster {
            first_in_cluster += 1;
        }
        let lu = PivotedLu::factor(diag, off, lambda, tiny);
        let mut x: Vec<f64> = (0..n).map(|_| rng.next_unit() - 0.5).collect();
        for _ in 0..INVERSE_ITERATIONS {
            normalize(&mut x);
            lu.solve_in_place(&mut x);
            for v in &vectors[first_in_cluster..k] {
                let dot = pairwise_dot(&x, v);
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
            }
        }
        normalize(&mut x);
        // second Gram-Schmidt pass keeps cluster orthogonality at roundoff
        if first_in_cluster < k {
            for v in &vectors[first_in_cluster..k] {
                let dot = pairwise_dot(&x, v);
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
            }
            normalize(&mut x);
        }
        fix_sign(&mut x);
        vectors.push(x);
    }
    vectors
}

fn normalize(x: &mut [f64]) {
    let nrm = pairwise_dot(x, x).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
}

/// First component above roundoff level is made positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-10 * amax) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Solves `(T + shift·I) x = b` for a symmetric tridiagonal `T` with
/// `T + shift·I` positive definite (Thomas algorithm, no pivoting).
pub fn solve_shifted_spd(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut piv = vec![0.0; n];
    let mut x = rhs.to_vec();
    piv[0] = diag[0] + shift;
    for i in 1..n {
        if !(piv[i - 1] > 0.0) || !piv[i - 1].is_finite() {
            return Err(FracError::Numerical(format!(
                "shifted system singular or indefinite at row {} (shift {shift})",
                i - 1
            )));
        }
        let m = off[i - 1] / piv[i - 1];
        piv[i] = diag[i] + shift - m * off[i - 1];
        x[i] -= m * x[i - 1];
    }
    if !(piv[n - 1] > 0.0) || !piv[n - 1].is_finite() {
        return Err(FracError::Numerical(format!(
            "shifted system singular or indefinite at row {} (shift {shift})",
            n - 1
        )));
    }
    x[n - 1] /= piv[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (x[i] - off[i] * x[i + 1]) / piv[i];
    }
    Ok(x)
}

/// Deterministic start vectors for inverse iteration.
struct XorShift(u64);

impl XorShift {
    fn new(seed: u64) -> Self {
        XorShift(seed)
    }

    fn next_unit(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}
