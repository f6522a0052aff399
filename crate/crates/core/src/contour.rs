//! `A^{-a} f` from shifted tridiagonal solves, by sinc quadrature of
//! `A^{-a} = (sin πa / π) ∫₀^∞ λ^{-a} (A + λ)^{-1} dλ` under `λ = e^t`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FracError, Result};
use crate::grid::{BcKind, DiscreteOperator};
use crate::special::pairwise_sum;
use crate::tridiag::solve_shifted_spd;

pub const MIN_RULE_ORDER: f64 = 0.01;
pub const MAX_RULE_ORDER: f64 = 0.99;
pub const MIN_NODES: usize = 4;

/// Residual bound accepted from a single shifted solve.
const SHIFT_RESIDUAL_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    order: f64,
    q: usize,
    step: f64,
    shifts: Vec<f64>,
    weights: Vec<f64>,
}

/// Step that equalizes the truncation error `e^{-min(a,1-a)Qκ}` with the
/// discretization error `e^{-2π²/κ}`.
pub fn default_step(a: f64, q: usize) -> f64 {
    std::f64::consts::PI * (2.0 / (a.min(1.0 - a) * q as f64)).sqrt()
}

/// Rule with the default step.
pub fn build_rule(a: f64, q: usize) -> Result<QuadratureRule> {
    build_rule_with_step(a, q, None)
}

/// Rule with nodes `t_q = qκ`, `q = -Q..=Q`, shifts `e^{t_q}` and weights
/// `(sin πa/π) κ e^{(1-a) t_q}`.
pub fn build_rule_with_step(a: f64, q: usize, step: Option<f64>) -> Result<QuadratureRule> {
    if !(a > MIN_RULE_ORDER && a < MAX_RULE_ORDER) {
        return invalid(format!("rule order a = {a} must lie in ({MIN_RULE_ORDER}, {MAX_RULE_ORDER})"));
    }
    if q < MIN_NODES {
        return invalid(format!("node parameter Q = {q} must be at least {MIN_NODES}"));
    }
    let step = step.unwrap_or_else(|| default_step(a, q));
    if !(step.is_finite() && step > 0.0) {
        return invalid(format!("quadrature step {step} must be positive"));
    }
    let scale = (std::f64::consts::PI * a).sin() / std::f64::consts::PI * step;
    let qi = q as i64;
    let (shifts, weights): (Vec<f64>, Vec<f64>) = (-qi..=qi)
        .map(|j| {
            let t = j as f64 * step;
            (t.exp(), scale * ((1.0 - a) * t).exp())
        })
        .unzip();
    if shifts.iter().chain(&weights).any(|x| !x.is_finite()) || shifts.iter().any(|&s| s <= 0.0) {
        return invalid(format!("step {step} with Q = {q} overflows the shift range"));
    }
    Ok(QuadratureRule { order: a, q, step, shifts, weights })
}

impl QuadratureRule {
    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.shifts.len()
    }

    /// Rule applied to the scalar operator `[λ]`, approximating `λ^{-a}`.
    pub fn apply_scalar(&self, lambda: f64) -> f64 {
        let terms: Vec<f64> = self.shifts.iter().zip(&self.weights).map(|(s, w)| w / (lambda + s)).collect();
        pairwise_sum(&terms)
    }
}

/// Factor-and-solve for `(A + λI) x = b`, one factorization per call.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedSolver<'a> {
    op: &'a DiscreteOperator,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(op: &'a DiscreteOperator) -> Self {
        ShiftedSolver { op }
    }

    pub fn solve(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.op.len() {
            return invalid(format!("rhs length {} does not match operator size {}", rhs.len(), self.op.len()));
        }
        let x = solve_shifted_spd(self.op.diag(), self.op.off_diag(), shift, rhs)?;
        let ax = self.op.apply(&x)?;
        let res = ax.iter().zip(&x).zip(rhs).map(|((ax, x), b)| (ax + shift * x - b).powi(2)).sum::<f64>().sqrt();
        let bn = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        // normwise backward error
        let scale = bn + (shift + self.op.norm_bound()) * xn;
        if res > SHIFT_RESIDUAL_RTOL * scale {
            return Err(FracError::Numerical(format!("shifted solve at λ = {shift:e} lost accuracy")));
        }
        Ok(x)
    }
}

fn require_positive_definite(op: &DiscreteOperator) -> Result<()> {
    if op.spec().bc == BcKind::Neumann {
        let min_c = op.grid().nodes().iter().map(|&x| op.spec().potential.eval(x)).fold(f64::INFINITY, f64::min);
        if !(min_c > 0.0) {
            return Err(FracError::Domain(
                "Neumann operator without a positive potential is singular; use the mean-projector variant".into(),
            ));
        }
    }
    Ok(())
}

fn weighted_sum(op: &DiscreteOperator, rule: &QuadratureRule, f: &[f64]) -> Result<Vec<f64>> {
    let solver = ShiftedSolver::new(op);
    let mut parts = Vec::with_capacity(rule.node_count());
    for (&s, &w) in rule.shifts.iter().zip(&rule.weights) {
        let mut x = solver.solve(s, f)?;
        x.iter_mut().for_each(|v| *v *= w);
        parts.push(x);
    }
    Ok(reduce_parts(&parts, f.len()))
}

/// Pairwise sum over the node index at every grid point.
fn reduce_parts(parts: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut col = vec![0.0; parts.len()];
    (0..n)
        .map(|i| {
            col.iter_mut().zip(parts).for_each(|(c, p)| *c = p[i]);
            pairwise_sum(&col)
        })
        .collect()
}

fn remove_mean(x: &mut [f64]) {
    let m = pairwise_sum(x) / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// `u ≈ A^{-a} f` for positive definite `A` with `a` taken from the rule.
pub fn apply_inverse_power_contour(op: &DiscreteOperator, rule: &QuadratureRule, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != op.len() {
        return invalid(format!("vector length {} does not match operator size {}", f.len(), op.len()));
    }
    require_positive_definite(op)?;
    weighted_sum(op, rule, f)
}

/// `A^{-1} f` by one tridiagonal solve.
pub fn apply_inverse_direct(op: &DiscreteOperator, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != op.len() {
        return invalid(format!("vector length {} does not match operator size {}", f.len(), op.len()));
    }
    require_positive_definite(op)?;
    solve_shifted_spd(op.diag(), op.off_diag(), 0.0, f)
}

/// `A^{-a} f` for `a ∈ (0.01, 1]`; `a = 1` bypasses the quadrature.
pub fn apply_inverse_power_order(op: &DiscreteOperator, a: f64, q: usize, step: Option<f64>, f: &[f64]) -> Result<Vec<f64>> {
    if a == 1.0 {
        return apply_inverse_direct(op, f);
    }
    let rule = build_rule_with_step(a, q, step)?;
    apply_inverse_power_contour(op, &rule, f)
}

/// Relative cutoff (against the spectral-gap estimate) below which shifted
/// solves of a singular Neumann matrix are replaced by a pseudo-inverse series.
const PSEUDO_INVERSE_CUTOFF: f64 = 1e-6;

/// `A⁺g` for mean-zero `g`, pinning the last unknown.
fn pseudo_inverse(op: &DiscreteOperator, g: &[f64]) -> Result<Vec<f64>> {
    let n = g.len();
    let mut x = solve_shifted_spd(&op.diag()[..n - 1], &op.off_diag()[..n - 2], 0.0, &g[..n - 1])?;
    x.push(0.0);
    remove_mean(&mut x);
    Ok(x)
}

/// `(A + E₀)^{-a} f = E₀f + Σ_q w_q P (A + λ_q)^{-1} P f` for a Neumann operator
/// whose kernel is the constants; `P = I - E₀`.
pub fn apply_inverse_power_contour_augmented(
    op: &DiscreteOperator,
    rule: &QuadratureRule,
    f: &[f64],
) -> Result<Vec<f64>> {
    if op.spec().bc != BcKind::Neumann {
        return Err(FracError::InvalidState("mean-projector variant applies to Neumann operators only".into()));
    }
    if f.len() != op.len() || f.len() < 3 {
        return invalid(format!("vector length {} does not match operator size {}", f.len(), op.len()));
    }
    let mean = pairwise_sum(f) / f.len() as f64;
    let mut g = f.to_vec();
    remove_mean(&mut g);

    // (A + λ)^{-1} = A⁺ - λA⁺² + λ²A⁺³ + O(λ³) on mean-zero vectors
    let nodes = op.grid().nodes();
    let a_min = nodes.iter().map(|&x| op.spec().diffusion.eval(x)).fold(f64::INFINITY, f64::min);
    let gap = a_min * (std::f64::consts::PI / op.grid().length()).powi(2);
    let cutoff = PSEUDO_INVERSE_CUTOFF * gap;
    let y1 = pseudo_inverse(op, &g)?;
    let y2 = pseudo_inverse(op, &y1)?;
    let y3 = pseudo_inverse(op, &y2)?;

    let solver = ShiftedSolver::new(op);
    let mut parts = Vec::with_capacity(rule.node_count());
    for (&s, &w) in rule.shifts.iter().zip(&rule.weights) {
        let mut x = if s < cutoff {
            (0..g.len()).map(|i| y1[i] - s * y2[i] + s * s * y3[i]).collect()
        } else {
            let mut x = solver.solve(s, &g)?;
            remove_mean(&mut x);
            x
        };
        x.iter_mut().for_each(|v| *v *= w);
        parts.push(x);
    }
    let mut u = reduce_parts(&parts, g.len());
    u.iter_mut().for_each(|v| *v += mean);
    Ok(u)
}
