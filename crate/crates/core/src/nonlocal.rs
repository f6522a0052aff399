//! Restricted fractional Laplacian `r⁺(−Δ)^a e⁺` on an interval, the exterior
//! mass `w`, the regional operator `P₀ = K − diag(w)` and a brute-force
//! quadrature of the regional form `p₀`.
//!
//! Assembly works on the piecewise-linear interpolant of the zero-extended
//! grid function. In units of `c_{1,a} h^{-2a}` the coupling between nodes at
//! distance `m` cells is the hat-weighted cell integral
//! `I(m) = ∫_{-1}^{1} (1 − |σ|)(m + σ)^{-1-2a} dσ`. For `m = 1` the singular
//! near field is replaced by the quadratic model of the interpolant, and the
//! end strips `(α, x₁)` and `(x_N, β)` follow the outermost node values. The
//! rows of the assembled matrix sum to the exterior mass, `K·1 = w`.

use crate::error::{invalid, Result};
use crate::grid::{Grid, Layout};
use crate::jacobi::DenseMatrix;
use crate::special::{gamma, int_pow, pairwise_sum};

/// Largest grid accepted by dense assembly.
pub const MAX_DENSE_N: usize = 2048;
/// Largest grid accepted by the quadratic-cost form quadrature.
pub const MAX_BRUTEFORCE_N: usize = 256;

/// `c_{1,a} = 4^a a Γ(a + ½) / (√π Γ(1 − a))`.
pub fn normalization_constant(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return invalid(format!("order a = {a} must lie in (0, 1)"));
    }
    Ok(4f64.powf(a) * a * gamma(a + 0.5) / (std::f64::consts::PI.sqrt() * gamma(1.0 - a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    order: f64,
    normalization: f64,
}

impl KernelSpec {
    pub fn new(a: f64) -> Result<Self> {
        Ok(KernelSpec { order: a, normalization: normalization_constant(a)? })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Spatial dimension; fixed to one.
    pub fn dimension(&self) -> usize {
        1
    }
}

/// `w(x) = c ∫_{ℝ∖(α,β)} |x − y|^{-1-2a} dy = (c/2a)((x−α)^{-2a} + (β−x)^{-2a})`.
pub fn exterior_mass(grid: &Grid, kernel: &KernelSpec) -> Result<Vec<f64>> {
    let (lo, hi) = (grid.lower(), grid.upper());
    let a = kernel.order();
    let scale = kernel.normalization() / (2.0 * a);
    let n = grid.len();
    let h = grid.spacing();
    // distances from the index keep w exactly reflection-symmetric
    let offset = match grid.layout() {
        Layout::NodeCentered => 1.0,
        Layout::CellCentered => 0.5,
    };
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if !(x > lo && x < hi) {
                return invalid(format!("node {i} at x = {x} is not interior to ({lo}, {hi})"));
            }
            let left = (i as f64 + offset) * h;
            let right = ((n - 1 - i) as f64 + offset) * h;
            Ok(scale * (left.powf(-2.0 * a) + right.powf(-2.0 * a)))
        })
        .collect()
}

/// `I(m)` for `m ≥ 2` as the second difference of `t^p / (p(p−1))`, `p = 1 − 2a`,
/// expanded in `1/m` to avoid cancellation (and the removable pole at `a = ½`).
fn far_weight(m: usize, a: f64) -> f64 {
    let p = 1.0 - 2.0 * a;
    let mf = m as f64;
    let inv2 = 1.0 / (mf * mf);
    // r_k = C(p, k) / p
    let mut r = 1.0;
    let mut pw = 1.0;
    let mut sum = 0.0;
    for k in 1..400 {
        if k > 1 {
            r *= (p - (k as f64) + 1.0) / k as f64;
        }
        if k % 2 == 0 {
            pw *= inv2;
            let term = r * pw;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
    }
    mf.powf(p) / (-2.0 * a) * 2.0 * sum
}

/// Nearest-neighbour weight: far part over σ ∈ [1, 2] plus the quadratic
/// near-field model `1/(2 − 2a)`.
fn near_weight(a: f64) -> f64 {
    let p = 1.0 + 2.0 * a;
    2.0 * int_pow(1.0, 2.0, p) - int_pow(1.0, 2.0, p - 1.0) + 1.0 / (2.0 - 2.0 * a)
}

/// End-strip coupling of node `i ≥ 2` (1-based) to the outermost node:
/// `∫_{i−1}^{i} (τ − i + 1) τ^{-1-2a} dτ`.
fn strip_weight(i: usize, a: f64) -> f64 {
    let (t0, t1) = ((i - 1) as f64, i as f64);
    int_pow(t0, t1, 2.0 * a) - t0 * int_pow(t0, t1, 1.0 + 2.0 * a)
}

/// Coupling weights `W(m)`, `m = 0..n`, in units of `c h^{-2a}`; `W(0) = 0`.
pub fn kernel_weights(n: usize, a: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n >= 1 {
        w[1] = near_weight(a);
    }
    for (m, wm) in w.iter_mut().enumerate().skip(2) {
        *wm = far_weight(m, a);
    }
    w
}

#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    matrix: DenseMatrix,
    exterior: Vec<f64>,
    kernel: KernelSpec,
    grid: Grid,
    asymmetry: f64,
}

impl RestrictedOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn exterior_mass(&self) -> &[f64] {
        &self.exterior
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest `|A_ij − A_ji|` of the collocation matrix before symmetrization.
    pub fn asymmetry_before_symmetrization(&self) -> f64 {
        self.asymmetry
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.matrix.matvec(u)
    }

    /// `h·uᵀKv`.
    pub fn form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let ku = self.matrix.matvec(u)?;
        Ok(self.grid.inner(&ku, v))
    }
}

pub fn assemble_restricted(grid: &Grid, kernel: &KernelSpec) -> Result<RestrictedOperator> {
    if grid.layout() != Layout::NodeCentered {
        return invalid("restricted assembly needs a node-centered grid");
    }
    let n = grid.len();
    if n > MAX_DENSE_N {
        return invalid(format!("dense assembly is capped at N = {MAX_DENSE_N}, got {n}"));
    }
    let a = kernel.order();
    let unit = kernel.normalization() * grid.spacing().powf(-2.0 * a);
    let weights = kernel_weights(n, a);
    let strips: Vec<f64> = (0..n).map(|i0| if i0 == 0 { 0.0 } else { strip_weight(i0 + 1, a) }).collect();

    // collocation couplings; the end-strip terms sit in columns 1 and N only
    let coupling = |i: usize, j: usize| -> f64 {
        if i == j {
            return 0.0;
        }
        let mut v = weights[i.abs_diff(j)];
        if j == 0 {
            v += strips[i];
        }
        if j == n - 1 {
            v += strips[n - 1 - i];
        }
        v
    };
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for &j in &[0, n - 1] {
            asymmetry = asymmetry.max((coupling(i, j) - coupling(j, i)).abs() * unit);
        }
    }
    let sym = DenseMatrix::from_fn(n, |i, j| 0.5 * (coupling(i, j) + coupling(j, i)) * unit);
    let exterior = exterior_mass(grid, kernel)?;
    let mut k = DenseMatrix::zeros(n);
    for i in 0..n {
        let row = sym.row(i);
        let degree = pairwise_sum(row);
        for (j, &s) in row.iter().enumerate() {
            k.set(i, j, -s);
        }
        k.set(i, i, degree + exterior[i]);
    }
    Ok(RestrictedOperator { matrix: k, exterior, kernel: *kernel, grid: grid.clone(), asymmetry })
}

#[derive(Debug, Clone)]
pub struct RegionalOperator {
    matrix: DenseMatrix,
    kernel: KernelSpec,
    grid: Grid,
}

impl RegionalOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.matrix.matvec(u)
    }
}

/// `P₀ = K − diag(w)`.
pub fn regional_from_restricted(r: &RestrictedOperator) -> RegionalOperator {
    let mut p = r.matrix.clone();
    for (i, w) in r.exterior.iter().enumerate() {
        p.set(i, i, p.get(i, i) - w);
    }
    RegionalOperator { matrix: p, kernel: r.kernel, grid: r.grid.clone() }
}

const BF_POINTS: usize = 8;
const BF_LEVELS: usize = 4;

/// `p₀(u, v) = (c/2) ∬_{Ω×Ω} (u(x)−u(y))(v(x)−v(y)) |x−y|^{-1-2a} dx dy` for the
/// piecewise-linear interpolants of the zero-extended grid functions.
///
/// Off-diagonal cell pairs use an 8×8 midpoint rule. Diagonal cells are split
/// dyadically four times; the innermost diagonal squares are integrated exactly.
pub fn p0_bruteforce(u: &[f64], v: &[f64], grid: &Grid, kernel: &KernelSpec) -> Result<f64> {
    let n = grid.len();
    if n > MAX_BRUTEFORCE_N {
        return invalid(format!("brute-force quadrature is capped at N = {MAX_BRUTEFORCE_N}, got {n}"));
    }
    if u.len() != n || v.len() != n {
        return invalid(format!("vector lengths {}/{} do not match grid size {n}", u.len(), v.len()));
    }
    let a = kernel.order();
    let mut xs = Vec::with_capacity(n + 2);
    xs.push(grid.lower());
    xs.extend_from_slice(grid.nodes());
    xs.push(grid.upper());
    let pad = |f: &[f64]| {
        let mut out = Vec::with_capacity(n + 2);
        out.push(0.0);
        out.extend_from_slice(f);
        out.push(0.0);
        out
    };
    let (uu, vv) = (pad(u), pad(v));
    let cells = n + 1;
    let g: Vec<f64> = (0..BF_POINTS).map(|k| (k as f64 + 0.5) / BF_POINTS as f64).collect();

    // quadrature points and interpolant values per cell
    struct Cell {
        pts: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
        weight: f64,
        su: f64,
        sv: f64,
        x0: f64,
        width: f64,
    }
    let cell_data: Vec<Cell> = (0..cells)
        .map(|c| {
            let (x0, x1) = (xs[c], xs[c + 1]);
            let width = x1 - x0;
            let su = (uu[c + 1] - uu[c]) / width;
            let sv = (vv[c + 1] - vv[c]) / width;
            let pts: Vec<f64> = g.iter().map(|t| x0 + t * width).collect();
            Cell {
                u: pts.iter().map(|p| uu[c] + su * (p - x0)).collect(),
                v: pts.iter().map(|p| vv[c] + sv * (p - x0)).collect(),
                pts,
                weight: width / BF_POINTS as f64,
                su,
                sv,
                x0,
                width,
            }
        })
        .collect();

    let expo = -1.0 - 2.0 * a;
    let mut total = Vec::with_capacity(cells * cells);
    for (ci, c) in cell_data.iter().enumerate() {
        for (cj, d) in cell_data.iter().enumerate() {
            if ci == cj {
                total.push(diagonal_cell(c.su * c.sv, c.x0, c.width, a, &g, BF_LEVELS));
                continue;
            }
            let mut s = 0.0;
            for p in 0..BF_POINTS {
                for q in 0..BF_POINTS {
                    let r = (c.pts[p] - d.pts[q]).abs();
                    s += (c.u[p] - d.u[q]) * (c.v[p] - d.v[q]) * r.powf(expo);
                }
            }
            total.push(s * c.weight * d.weight);
        }
    }
    Ok(0.5 * kernel.normalization() * pairwise_sum(&total))
}

/// `∬_{[x0,x0+d]²} slope·|x−y|^{1−2a}`; the off-diagonal halves of each dyadic
/// level by midpoint rule, the finest diagonal squares exactly.
fn diagonal_cell(slope: f64, x0: f64, d: f64, a: f64, g: &[f64], level: usize) -> f64 {
    if slope == 0.0 {
        return 0.0;
    }
    if level == 0 {
        return slope * 2.0 * d.powf(3.0 - 2.0 * a) / ((2.0 - 2.0 * a) * (3.0 - 2.0 * a));
    }
    let hd = 0.5 * d;
    let w = (hd / g.len() as f64).powi(2);
    let mut s = 0.0;
    for (ox, oy) in [(0.0, hd), (hd, 0.0)] {
        for tx in g {
            for ty in g {
                let r = ((ox + hd * tx) - (oy + hd * ty)).abs();
                s += r.powf(1.0 - 2.0 * a);
            }
        }
    }
    slope * s * w + diagonal_cell(slope, x0, hd, a, g, level - 1) + diagonal_cell(slope, x0 + hd, hd, a, g, level - 1)
}
