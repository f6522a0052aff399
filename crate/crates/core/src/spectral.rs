//! Full eigendecomposition of a [`DiscreteOperator`] and spectral evaluation
//! of its complex powers `(A_B)^z f = Σ λ_k^z ⟨f, v_k⟩_h v_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FracError, Result};
use crate::grid::{BcKind, DiscreteOperator, EllipticSpec, Grid};
use crate::special::pairwise_dot;
use crate::tridiag::{inverse_iteration_vectors, ql_eigenvalues};

/// Bound on `|Im z|` accepted by the power routines.
pub const MAX_IMAG_EXPONENT: f64 = 50.0;
/// Bounds on `Re z`.
pub const REAL_EXPONENT_RANGE: (f64, f64) = (-2.0, 2.0);
/// Smallest order accepted by the solve paths.
pub const MIN_SOLVE_ORDER: f64 = 0.01;
/// An eigenvalue below this fraction of the largest one counts as zero.
const ZERO_EIGEN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Augmentation {
    None,
    /// The constant mode (at `index` in ascending order) carries eigenvalue 1
    /// in place of 0, i.e. the decomposition is that of `A + E₀`.
    MeanProjector { index: usize },
}

/// Eigenvalues in ascending order and eigenvectors orthonormal in `⟨·,·⟩_h`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// column-major, column k is v_k
    eigenvectors: Vec<f64>,
    grid: Grid,
    spec: EllipticSpec,
    augmentation: Augmentation,
}

pub fn decompose(op: &DiscreteOperator) -> Result<SpectralDecomposition> {
    let eigenvalues = ql_eigenvalues(op.diag(), op.off_diag())?;
    let rows = inverse_iteration_vectors(op.diag(), op.off_diag(), &eigenvalues);
    let scale = 1.0 / op.weight().sqrt();
    let mut eigenvectors = Vec::with_capacity(op.len() * op.len());
    for v in rows {
        eigenvectors.extend(v.into_iter().map(|x| x * scale));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        grid: op.grid().clone(),
        spec: op.spec().clone(),
        augmentation: Augmentation::None,
    })
}

impl SpectralDecomposition {
    /// Reassembles a decomposition from stored parts (used by the cache loader).
    pub(crate) fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<f64>,
        grid: Grid,
        spec: EllipticSpec,
    ) -> Self {
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
            grid,
            spec,
            augmentation: Augmentation::None,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        let n = self.len();
        &self.eigenvectors[k * n..(k + 1) * n]
    }

    /// Column-major eigenvector matrix.
    pub fn eigenvector_matrix(&self) -> &[f64] {
        &self.eigenvectors
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &EllipticSpec {
        &self.spec
    }

    pub fn bc(&self) -> BcKind {
        self.spec.bc
    }

    pub fn augmentation(&self) -> Augmentation {
        self.augmentation
    }

    pub fn weight(&self) -> f64 {
        self.grid.spacing()
    }

    /// Index of the mean mode for augmented Neumann decompositions.
    pub fn mean_mode(&self) -> Option<usize> {
        match self.augmentation {
            Augmentation::MeanProjector { index } => Some(index),
            Augmentation::None => None,
        }
    }

    /// `Σ_k g_k v_k`, accumulated in ascending k.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return invalid(format!("{} coefficients for a size-{} decomposition", coeffs.len(), self.len()));
        }
        let mut u = vec![0.0; self.len()];
        for (k, &g) in coeffs.iter().enumerate() {
            if g != 0.0 {
                u.iter_mut().zip(self.eigenvector(k)).for_each(|(ui, vi)| *ui += g * vi);
            }
        }
        Ok(u)
    }

    fn check_positive(&self) -> Result<()> {
        let lmax = self.eigenvalues.last().copied().unwrap_or(0.0);
        let lmin = self.eigenvalues.first().copied().unwrap_or(0.0);
        if !(lmin > ZERO_EIGEN_RTOL * lmax) {
            return Err(FracError::Domain(format!(
                "smallest eigenvalue {lmin:e} is not positive; \
                 augment the Neumann decomposition with the mean projector first (neumann_augment)"
            )));
        }
        Ok(())
    }
}

fn check_exponent(z: Complex64) -> Result<()> {
    let (lo, hi) = REAL_EXPONENT_RANGE;
    if !(z.re >= lo && z.re <= hi) {
        return invalid(format!("Re z = {} outside [{lo}, {hi}]", z.re));
    }
    if !(z.im.abs() <= MAX_IMAG_EXPONENT) {
        return invalid(format!("|Im z| = {} exceeds {MAX_IMAG_EXPONENT}", z.im.abs()));
    }
    Ok(())
}

/// `c_k = ⟨f, v_k⟩_h`.
pub fn forward_coefficients(dec: &SpectralDecomposition, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != dec.len() {
        return invalid(format!("vector length {} does not match decomposition size {}", f.len(), dec.len()));
    }
    let h = dec.weight();
    Ok((0..dec.len()).map(|k| h * pairwise_dot(f, dec.eigenvector(k))).collect())
}

/// `(A_B)^s f` for real `s`.
pub fn apply_real_power(dec: &SpectralDecomposition, s: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_exponent(Complex64::new(s, 0.0))?;
    dec.check_positive()?;
    let mut c = forward_coefficients(dec, f)?;
    c.iter_mut().zip(&dec.eigenvalues).for_each(|(ck, &l)| *ck *= l.powf(s));
    dec.synthesize(&c)
}

/// `(A_B)^z f` for complex `z` and real `f`, principal branch of `λ^z`.
pub fn apply_power(dec: &SpectralDecomposition, z: Complex64, f: &[f64]) -> Result<Vec<Complex64>> {
    let fc: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    apply_power_complex(dec, z, &fc)
}

/// `(A_B)^z f` for complex `z` and complex `f`.
pub fn apply_power_complex(dec: &SpectralDecomposition, z: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
    check_exponent(z)?;
    dec.check_positive()?;
    let re: Vec<f64> = f.iter().map(|c| c.re).collect();
    let im: Vec<f64> = f.iter().map(|c| c.im).collect();
    let cr = forward_coefficients(dec, &re)?;
    let ci = forward_coefficients(dec, &im)?;
    let n = dec.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let lz = Complex64::new(dec.eigenvalues[k].ln(), 0.0) * z;
        let g = lz.exp() * Complex64::new(cr[k], ci[k]);
        out.iter_mut().zip(dec.eigenvector(k)).for_each(|(o, &v)| *o += g * v);
    }
    Ok(out)
}

/// Solves `(A_B)^a u = f`, i.e. `u = (A_B)^{-a} f`.
pub fn solve_power(dec: &SpectralDecomposition, a: f64, f: &[f64]) -> Result<Vec<f64>> {
    if !(a >= MIN_SOLVE_ORDER && a <= 1.0) {
        return invalid(format!("order a = {a} must lie in [{MIN_SOLVE_ORDER}, 1]"));
    }
    apply_real_power(dec, -a, f)
}

/// Decomposition of `A + E₀`, `E₀u = vol(Ω)⁻¹ ∫u`, for a Neumann operator with
/// a one-dimensional kernel of constants.
pub fn neumann_augment(dec: &SpectralDecomposition) -> Result<SpectralDecomposition> {
    if dec.bc() != BcKind::Neumann {
        return Err(FracError::InvalidState("mean-projector augmentation applies to Neumann operators only".into()));
    }
    if dec.augmentation != Augmentation::None {
        return Err(FracError::InvalidState("decomposition is already augmented".into()));
    }
    if dec.len() < 2 {
        return Err(FracError::InvalidState("need at least two modes".into()));
    }
    let l1 = dec.eigenvalues[0];
    let l2 = dec.eigenvalues[1];
    if !(l1.abs() <= 1e-8 * l2) {
        return Err(FracError::InvalidState(format!(
            "no numerically zero eigenvalue: λ₁ = {l1:e}, λ₂ = {l2:e}"
        )));
    }
    let n = dec.len();
    let constant = 1.0 / dec.grid.length().sqrt();
    // E₀ has eigenvalue 1 on the constants; keep ascending order
    let index = dec.eigenvalues[1..].partition_point(|&l| l < 1.0);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n * n);
    for k in 1..n {
        if k - 1 == index {
            eigenvalues.push(1.0);
            eigenvectors.extend(std::iter::repeat(constant).take(n));
        }
        eigenvalues.push(dec.eigenvalues[k]);
        eigenvectors.extend_from_slice(dec.eigenvector(k));
    }
    if index == n - 1 {
        eigenvalues.push(1.0);
        eigenvectors.extend(std::iter::repeat(constant).take(n));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        grid: dec.grid.clone(),
        spec: dec.spec.clone(),
        augmentation: Augmentation::MeanProjector { index },
    })
}

/// Validated exponent and right-hand side of `(A_B)^z u = f`.
#[derive(Debug, Clone)]
pub struct PowerProblem {
    pub exponent: Complex64,
    pub rhs: Vec<f64>,
    pub bc: BcKind,
}

impl PowerProblem {
    pub fn new(exponent: Complex64, rhs: Vec<f64>, bc: BcKind) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(PowerProblem { exponent, rhs, bc })
    }
}
