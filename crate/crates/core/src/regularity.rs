//! Regularity measurements: eigencoefficient decay fits, Sobolev thresholds,
//! compatibility-trace probes, boundary exponents and the restricted-versus-
//! spectral eigenvalue comparison.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FracError, Result};
use crate::grid::{assemble_elliptic, build_uniform_grid, BcKind, Coefficient, EllipticSpec, Grid};
use crate::jacobi::jacobi_spd;
use crate::nonlocal::{assemble_restricted, KernelSpec, MAX_DENSE_N};
use crate::rhs::{RhsCatalog, RhsForm, RhsFunction, ScalarFn};
use crate::spectral::{decompose, forward_coefficients, neumann_augment, solve_power, Augmentation, SpectralDecomposition};
use crate::symbolic::{poly_eval, TrigPoly};

/// Interval on which all experiments run.
pub const DOMAIN: (f64, f64) = (0.0, std::f64::consts::PI);
pub const MIN_FIT_POINTS: usize = 8;
/// Coefficients below this magnitude are treated as exact zeros.
pub const COEFF_FLOOR: f64 = 1e-14;
pub const MAX_PROBE_DEPTH: u32 = 3;
/// Depth reachable by the finite-difference trace path.
pub const NUMERIC_PROBE_DEPTH: u32 = 1;
pub const TRACE_RTOL: f64 = 1e-6;
pub const DEFAULT_TOL_BETA: f64 = 0.15;
pub const DEFAULT_TOL_THETA: f64 = 0.05;
pub const DEFAULT_ELLIPTICITY_FLOOR: f64 = 1e-3;
pub const BOUNDARY_POINTS: usize = 40;
/// `|u(x₁)| / max|u|` below which the synthesized solution counts as vanishing.
pub const EDGE_RATIO_MAX: f64 = 0.05;
/// Modes where `|c_f|` falls below this fraction of `max|c_f|` carry only
/// rounding error and are left out of the decay fit.
pub const INPUT_RTOL: f64 = 1e-12;
/// Energy ratio below which one parity class counts as absent.
const PARITY_RATIO: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mask {
    All,
    Odd,
    Even,
    Nonzero,
}

impl Mask {
    fn admits(self, k: usize) -> bool {
        match self {
            Mask::All | Mask::Nonzero => true,
            Mask::Odd => k % 2 == 1,
            Mask::Even => k % 2 == 0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Mask::All),
            "odd" => Ok(Mask::Odd),
            "even" => Ok(Mask::Even),
            "nonzero" => Ok(Mask::Nonzero),
            _ => invalid(format!("unknown mask '{s}'")),
        }
    }
}

/// Least-squares fit `log|c_k| ≈ intercept − β log k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 1-based inclusive index range
    pub window: (usize, usize),
    pub mask: Mask,
    pub points: usize,
}

/// Fits `|c_k| ~ k^{-β}` over `k ∈ window` (1-based, inclusive) on the masked
/// subsequence, skipping coefficients below [`COEFF_FLOOR`].
pub fn fit_power_decay(coeffs: &[f64], mask: Mask, window: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if lo == 0 || lo > hi || hi > coeffs.len() {
        return invalid(format!("window [{lo}, {hi}] outside 1..={}", coeffs.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .filter(|&k| mask.admits(k))
        .filter(|&k| coeffs[k - 1].abs() >= COEFF_FLOOR)
        .map(|k| ((k as f64).ln(), coeffs[k - 1].abs().ln()))
        .unzip();
    let m = xs.len();
    if m < MIN_FIT_POINTS {
        return Err(FracError::InsufficientData { usable: m, required: MIN_FIT_POINTS });
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FracError::InsufficientData { usable: 1, required: MIN_FIT_POINTS });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(DecayFit { exponent: -slope, intercept, r_squared, window, mask, points: m })
}

/// Mask chosen by parity energy in the window: a parity class carrying a
/// negligible share of the energy is dropped.
pub fn select_mask(coeffs: &[f64], window: (usize, usize)) -> Mask {
    let (mut odd, mut even) = (0.0, 0.0);
    for k in window.0.max(1)..=window.1.min(coeffs.len()) {
        let e = coeffs[k - 1] * coeffs[k - 1];
        if k % 2 == 1 {
            odd += e;
        } else {
            even += e;
        }
    }
    if even <= PARITY_RATIO * odd {
        Mask::Odd
    } else if odd <= PARITY_RATIO * even {
        Mask::Even
    } else {
        Mask::All
    }
}

/// `s_max = β − ½`: `Σ k^{2s} c_k²` converges for `s < s_max`.
pub fn sobolev_threshold(fit: &DecayFit) -> f64 {
    fit.exponent - 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "depth")]
pub enum ViolationIndex {
    /// first `m` with a nonzero boundary trace of `A^m f`
    At(u32),
    /// all traces vanish through [`MAX_PROBE_DEPTH`] (exact forms only)
    Infinite,
    /// traces vanish through the given depth, beyond which the probe is unreliable
    Inconclusive(Option<u32>),
}

impl fmt::Display for ViolationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationIndex::At(m) => write!(f, "{m}"),
            ViolationIndex::Infinite => f.write_str("inf"),
            ViolationIndex::Inconclusive(Some(d)) => write!(f, "none through {d}"),
            ViolationIndex::Inconclusive(None) => f.write_str("undetermined"),
        }
    }
}

/// Smallest `m ≤ 3` whose trace `γ A^m f` (Dirichlet) or `a·(A^m f)'` (Neumann)
/// exceeds `1e-6·‖f‖_∞` at either endpoint of the decomposition's interval.
pub fn first_violation_index(spec: &EllipticSpec, dec: &SpectralDecomposition, f: &RhsFunction) -> Result<ViolationIndex> {
    let grid = dec.grid();
    let (lo, hi) = (grid.lower(), grid.upper());
    let sup = match f.form() {
        RhsForm::Eigen(k) => {
            if *k == 0 || *k > dec.len() {
                return invalid(format!("{}: index outside 1..={}", f.label(), dec.len()));
            }
            return Ok(ViolationIndex::Infinite);
        }
        _ => grid.sample(|x| f.eval(x).unwrap_or(f64::NAN)).iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    if !sup.is_finite() {
        return invalid(format!("{} is not evaluable on the grid", f.label()));
    }
    let tol = TRACE_RTOL * sup.max(f64::MIN_POSITIVE);
    match (f.form(), spec.diffusion.as_poly(), spec.potential.as_poly()) {
        (RhsForm::Symbolic(p), Some(a), Some(c)) => Ok(symbolic_probe(p, &a, &c, spec.bc, lo, hi, tol)),
        (RhsForm::Symbolic(p), _, _) => {
            let p = p.clone();
            numeric_probe(spec, &(std::sync::Arc::new(move |x| p.eval(x)) as ScalarFn), lo, hi, grid.spacing(), tol, sup)
        }
        (RhsForm::Sampled(func), _, _) => numeric_probe(spec, func, lo, hi, grid.spacing(), tol, sup),
        (RhsForm::Eigen(_), _, _) => unreachable!("handled above"),
    }
}

fn symbolic_probe(f: &TrigPoly, a: &[f64], c: &[f64], bc: BcKind, lo: f64, hi: f64, tol: f64) -> ViolationIndex {
    let mut g = f.clone();
    for m in 0..=MAX_PROBE_DEPTH {
        let trace = match bc {
            BcKind::Dirichlet => g.eval(lo).abs().max(g.eval(hi).abs()),
            BcKind::Neumann => {
                let dg = g.derivative();
                (poly_eval(a, lo) * dg.eval(lo)).abs().max((poly_eval(a, hi) * dg.eval(hi)).abs())
            }
        };
        if trace > tol {
            return ViolationIndex::At(m);
        }
        g = g.apply_elliptic(a, c);
    }
    ViolationIndex::Infinite
}

/// Finite-difference weights for derivatives `0..=max_order` at `z` (Fornberg).
fn fd_weights(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One-sided derivatives `f^{(0..=order)}` at `x0`, stepping inward by `step`
/// (negative at the right end), fourth-order accurate. Also returns a bound on
/// the rounding error of each derivative relative to `‖f‖`.
fn one_sided(func: &dyn Fn(f64) -> f64, x0: f64, step: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let npts = order + 5;
    let offsets: Vec<f64> = (0..npts).map(|j| j as f64 * step).collect();
    let w = fd_weights(0.0, &offsets, order);
    let vals: Vec<f64> = offsets.iter().map(|o| func(x0 + o)).collect();
    let derivs = w.iter().map(|row| row.iter().zip(&vals).map(|(a, b)| a * b).sum()).collect();
    let noise = w.iter().map(|row| f64::EPSILON * row.iter().map(|a| a.abs()).sum::<f64>()).collect();
    (derivs, noise)
}

fn numeric_probe(spec: &EllipticSpec, f: &ScalarFn, lo: f64, hi: f64, h: f64, tol: f64, sup: f64) -> Result<ViolationIndex> {
    let step = h / 8.0;
    let a = |x: f64| spec.diffusion.eval(x);
    let c = |x: f64| spec.potential.eval(x);
    let mut checked: Option<u32> = None;
    for m in 0..=NUMERIC_PROBE_DEPTH {
        let mut trace = 0.0f64;
        let mut noise = 0.0f64;
        for (x0, s) in [(lo, step), (hi, -step)] {
            let order = match spec.bc {
                BcKind::Dirichlet => 2 * m as usize,
                BcKind::Neumann => 2 * m as usize + 1,
            };
            let (fd, fn_) = one_sided(f.as_ref(), x0, s, order);
            let (ad, an) = one_sided(&a, x0, s, order.max(1));
            let (cd, cn) = one_sided(&c, x0, s, order.max(1));
            let scale_a = ad[0].abs().max(1.0);
            let (t, nz) = match (spec.bc, m) {
                (BcKind::Dirichlet, 0) => (fd[0], fn_[0] * sup),
                (BcKind::Neumann, 0) => (ad[0] * fd[1], scale_a * fn_[1] * sup),
                (BcKind::Dirichlet, _) => (
                    -ad[0] * fd[2] - ad[1] * fd[1] + cd[0] * fd[0],
                    scale_a * (fn_[2] + fn_[1]) * sup + (an[1] + cn[0]) * sup,
                ),
                (BcKind::Neumann, _) => {
                    let d_af = -ad[0] * fd[3] - 2.0 * ad[1] * fd[2] - ad[2] * fd[1] + cd[1] * fd[0] + cd[0] * fd[1];
                    (ad[0] * d_af, scale_a * scale_a * (fn_[3] + fn_[2] + fn_[1]) * sup + (an[2] + cn[1]) * sup)
                }
            };
            trace = trace.max(t.abs());
            noise = noise.max(nz * 4.0);
        }
        if noise > 0.25 * tol {
            return Ok(ViolationIndex::Inconclusive(checked));
        }
        if trace > tol {
            return Ok(ViolationIndex::At(m));
        }
        checked = Some(m);
    }
    Ok(ViolationIndex::Inconclusive(checked))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// no prediction is made at this parameter point
    Unassessed,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Row of the eigencoefficient table: `k` is the frequency index used by the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub k: usize,
    pub lambda_k: f64,
    pub c_f: f64,
    pub c_u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatConfig {
    pub bc: BcKind,
    pub a: f64,
    pub rhs: RhsCatalog,
    pub n: usize,
    pub diffusion: Coefficient,
    pub window: Option<(usize, usize)>,
    pub mask: Option<Mask>,
    pub tol_beta: f64,
}

impl CompatConfig {
    pub fn new(bc: BcKind, a: f64, rhs: RhsCatalog, n: usize) -> Self {
        CompatConfig {
            bc,
            a,
            rhs,
            n,
            diffusion: Coefficient::Const(1.0),
            window: None,
            mask: None,
            tol_beta: DEFAULT_TOL_BETA,
        }
    }

    pub fn spec(&self) -> EllipticSpec {
        experiment_spec(self.bc, &self.diffusion)
    }

    pub fn grid(&self) -> Result<Grid> {
        build_uniform_grid(DOMAIN.0, DOMAIN.1, self.n, self.bc.natural_layout())
    }
}

/// Spec used by every experiment: given diffusion, zero potential.
pub fn experiment_spec(bc: BcKind, diffusion: &Coefficient) -> EllipticSpec {
    EllipticSpec::new(diffusion.clone(), Coefficient::Const(0.0), bc, DEFAULT_ELLIPTICITY_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub bc: BcKind,
    pub a: f64,
    pub rhs: String,
    pub diffusion: String,
    pub n: usize,
    pub violation_index: ViolationIndex,
    pub measured_beta: Option<f64>,
    pub predicted_beta: Option<f64>,
    pub measured_s_max: Option<f64>,
    pub predicted_s_max: Option<f64>,
    pub fit: Option<DecayFit>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub note: String,
    #[serde(skip)]
    pub table: Vec<CoefficientRow>,
}

/// `β` predicted for violation index `m`.
pub fn predicted_beta(bc: BcKind, a: f64, m: u32) -> f64 {
    let base = match bc {
        BcKind::Dirichlet => 1.0,
        BcKind::Neumann => 2.0,
    };
    2.0 * f64::from(m) + base + 2.0 * a
}

pub fn compatibility_experiment(cfg: &CompatConfig) -> Result<CompatibilityReport> {
    let op = assemble_elliptic(&cfg.spec(), &cfg.grid()?)?;
    compatibility_experiment_with(cfg, &decompose(&op)?)
}

/// As [`compatibility_experiment`] on a precomputed decomposition of the
/// configured operator.
pub fn compatibility_experiment_with(cfg: &CompatConfig, dec: &SpectralDecomposition) -> Result<CompatibilityReport> {
    if !(0.05..=0.95).contains(&cfg.a) {
        return invalid(format!("compatibility experiments need a ∈ [0.05, 0.95], got {}", cfg.a));
    }
    if cfg.n < 1024 {
        return invalid(format!("compatibility experiments need N ≥ 1024, got {}", cfg.n));
    }
    if dec.len() != cfg.n || dec.bc() != cfg.bc {
        return invalid("decomposition does not match the configuration");
    }
    let spec = cfg.spec();
    let grid = dec.grid().clone();
    let f = cfg.rhs.realize(grid.lower(), grid.upper())?;
    let violation = first_violation_index(&spec, dec, &f)?;
    let fvals = f.sample(&grid, Some(dec))?;

    let work = match (cfg.bc, dec.augmentation()) {
        (BcKind::Neumann, Augmentation::None) => neumann_augment(dec)?,
        _ => dec.clone(),
    };
    let u = solve_power(&work, cfg.a, &fvals)?;
    let cf = forward_coefficients(&work, &fvals)?;
    let cu = forward_coefficients(&work, &u)?;
    // the mean mode is not part of the frequency sequence
    let skip = work.mean_mode();
    let table: Vec<CoefficientRow> = (0..work.len())
        .filter(|&j| Some(j) != skip)
        .enumerate()
        .map(|(i, j)| CoefficientRow { k: i + 1, lambda_k: work.eigenvalues()[j], c_f: cf[j], c_u: cu[j] })
        .collect();
    let cf_max = cf.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let coeffs: Vec<f64> =
        table.iter().map(|r| if r.c_f.abs() > INPUT_RTOL * cf_max { r.c_u } else { 0.0 }).collect();
    let window = cfg.window.unwrap_or((8, (cfg.n / 8).min(coeffs.len())));
    let mask = cfg.mask.unwrap_or_else(|| select_mask(&coeffs, window));
    let fit = fit_power_decay(&coeffs, mask, window);

    let (measured, fit, fit_note) = match fit {
        Ok(fit) => (Some(fit.exponent), Some(fit), String::new()),
        Err(FracError::InsufficientData { usable, .. }) => {
            (None, None, format!("only {usable} resolvable coefficients in the window"))
        }
        Err(e) => return Err(e),
    };
    let (predicted, verdict, note) = match violation {
        ViolationIndex::At(m) => {
            let p = predicted_beta(cfg.bc, cfg.a, m);
            let ok = measured.is_some_and(|b| (b - p).abs() <= cfg.tol_beta);
            let note = if measured.is_none() { fit_note } else { String::new() };
            (Some(p), Verdict::from_bool(ok), note)
        }
        ViolationIndex::Infinite => {
            // faster than any probed compatibility layer
            let floor = predicted_beta(cfg.bc, cfg.a, MAX_PROBE_DEPTH + 1);
            let ok = measured.is_none_or(|b| b >= floor - cfg.tol_beta);
            let note = match measured {
                None => format!("super-polynomial decay: {fit_note}"),
                Some(b) => format!("no trace violated through depth {MAX_PROBE_DEPTH}; fitted β = {b:.3} vs floor {floor:.3}"),
            };
            (None, Verdict::from_bool(ok), note)
        }
        ViolationIndex::Inconclusive(d) => (
            None,
            Verdict::Fail,
            format!("trace probe inconclusive beyond depth {}", d.map_or("-".into(), |d| d.to_string())),
        ),
    };
    Ok(CompatibilityReport {
        bc: cfg.bc,
        a: cfg.a,
        rhs: f.label().to_string(),
        diffusion: cfg.diffusion.label(),
        n: cfg.n,
        violation_index: violation,
        measured_beta: measured,
        predicted_beta: predicted,
        measured_s_max: fit.as_ref().map(sobolev_threshold),
        predicted_s_max: predicted.map(|p| p - 0.5),
        fit,
        verdict,
        tolerance: cfg.tol_beta,
        note,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    /// `None` when `u` changes sign in the window
    pub exponent: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    /// distance-to-boundary range
    pub window: (f64, f64),
    pub side: Side,
    pub points: usize,
    /// `|u(x₁)| / max|u|`
    pub edge_ratio: f64,
    pub note: String,
}

impl BoundaryFit {
    /// `θ > 0` and a small value at the first node.
    pub fn vanishes_at_boundary(&self) -> bool {
        self.exponent.is_some_and(|t| t > 0.1) && self.edge_ratio < EDGE_RATIO_MAX
    }
}

/// Four-point Lagrange interpolation of `(xs, ys)` at `t`.
fn cubic_interp(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = xs.len();
    let i = xs.partition_point(|&x| x <= t).clamp(2, n - 2) - 2;
    let (px, py) = (&xs[i..i + 4], &ys[i..i + 4]);
    (0..4)
        .map(|j| {
            let lj: f64 = (0..4).filter(|&m| m != j).map(|m| (t - px[m]) / (px[j] - px[m])).product();
            lj * py[j]
        })
        .sum()
}

/// Slope of `log|u|` against `log d` at 40 geometric distances `d ∈ [10h, L/8]`
/// from the left endpoint, `u` synthesized from the first `k_modes` modes of
/// `(A_B)^{-a} f`.
pub fn fit_boundary_exponent(dec: &SpectralDecomposition, a: f64, f: &RhsFunction, k_modes: usize) -> Result<BoundaryFit> {
    if dec.bc() != BcKind::Dirichlet {
        return invalid("boundary exponents are fitted for Dirichlet problems");
    }
    let n = dec.len();
    if k_modes == 0 || k_modes > n / 4 {
        return invalid(format!("K_modes = {k_modes} must lie in 1..={}", n / 4));
    }
    let grid = dec.grid();
    let fvals = f.sample(grid, Some(dec))?;
    let cf = forward_coefficients(dec, &fvals)?;
    let g: Vec<f64> = (0..n)
        .map(|k| if k < k_modes { dec.eigenvalues()[k].powf(-a) * cf[k] } else { 0.0 })
        .collect();
    let u = dec.synthesize(&g)?;

    let mut xs = Vec::with_capacity(n + 2);
    xs.push(grid.lower());
    xs.extend_from_slice(grid.nodes());
    xs.push(grid.upper());
    let mut us = Vec::with_capacity(n + 2);
    us.push(0.0);
    us.extend_from_slice(&u);
    us.push(0.0);

    let (d0, d1) = (10.0 * grid.spacing(), grid.length() / 8.0);
    let ds: Vec<f64> = (0..BOUNDARY_POINTS)
        .map(|j| d0 * (d1 / d0).powf(j as f64 / (BOUNDARY_POINTS - 1) as f64))
        .collect();
    let vals: Vec<f64> = ds.iter().map(|d| cubic_interp(&xs, &us, grid.lower() + d)).collect();
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge_ratio = if umax > 0.0 { u[0].abs() / umax } else { 0.0 };
    let base = BoundaryFit {
        exponent: None,
        intercept: None,
        r_squared: None,
        window: (d0, d1),
        side: Side::Left,
        points: BOUNDARY_POINTS,
        edge_ratio,
        note: String::new(),
    };
    let positive = vals.iter().all(|&v| v > 0.0);
    let negative = vals.iter().all(|&v| v < 0.0);
    if !(positive || negative) {
        return Ok(BoundaryFit { note: "fit undefined: u changes sign in the window".into(), ..base });
    }
    let lx: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
    let m = BOUNDARY_POINTS as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(BoundaryFit { exponent: Some(slope), intercept: Some(intercept), r_squared: Some(r2), ..base })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    pub a: f64,
    pub rhs: RhsCatalog,
    pub n: usize,
    pub k_modes: Option<usize>,
    pub diffusion: Coefficient,
    pub tol_theta: f64,
}

impl BoundaryConfig {
    pub fn new(a: f64, rhs: RhsCatalog, n: usize) -> Self {
        BoundaryConfig { a, rhs, n, k_modes: None, diffusion: Coefficient::Const(1.0), tol_theta: DEFAULT_TOL_THETA }
    }

    pub fn spec(&self) -> EllipticSpec {
        experiment_spec(BcKind::Dirichlet, &self.diffusion)
    }

    pub fn grid(&self) -> Result<Grid> {
        build_uniform_grid(DOMAIN.0, DOMAIN.1, self.n, BcKind::Dirichlet.natural_layout())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub a: f64,
    pub rhs: String,
    pub diffusion: String,
    pub n: usize,
    pub k_modes: usize,
    pub violation_index: ViolationIndex,
    pub fit: BoundaryFit,
    pub predicted_theta: Option<f64>,
    pub vanishes: bool,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub note: String,
}

/// `θ` expected at the left endpoint: `2a` below one half when the trace of
/// `f` is violated, otherwise linear vanishing. No prediction at `a = ½`.
pub fn predicted_theta(a: f64, violation: ViolationIndex) -> Option<f64> {
    match violation {
        ViolationIndex::At(0) if (a - 0.5).abs() < 1e-12 => None,
        ViolationIndex::At(0) if a < 0.5 => Some(2.0 * a),
        ViolationIndex::Inconclusive(None) => None,
        _ => Some(1.0),
    }
}

pub fn boundary_experiment(cfg: &BoundaryConfig) -> Result<BoundaryReport> {
    let op = assemble_elliptic(&cfg.spec(), &cfg.grid()?)?;
    boundary_experiment_with(cfg, &decompose(&op)?)
}

pub fn boundary_experiment_with(cfg: &BoundaryConfig, dec: &SpectralDecomposition) -> Result<BoundaryReport> {
    if !(cfg.a > 0.0 && cfg.a < 1.0) {
        return invalid(format!("a = {} must lie in (0, 1)", cfg.a));
    }
    let grid = dec.grid();
    let f = cfg.rhs.realize(grid.lower(), grid.upper())?;
    let k_modes = cfg.k_modes.unwrap_or(cfg.n / 4);
    let violation = first_violation_index(&cfg.spec(), dec, &f)?;
    let fit = fit_boundary_exponent(dec, cfg.a, &f, k_modes)?;
    let predicted = predicted_theta(cfg.a, violation);
    let vanishes = fit.vanishes_at_boundary();
    let (verdict, note) = match (predicted, fit.exponent) {
        (None, _) => (Verdict::Unassessed, "no exponent is predicted at this order".to_string()),
        (Some(_), None) => (Verdict::Fail, fit.note.clone()),
        (Some(p), Some(t)) => (Verdict::from_bool((t - p).abs() <= cfg.tol_theta && vanishes), String::new()),
    };
    Ok(BoundaryReport {
        a: cfg.a,
        rhs: f.label().to_string(),
        diffusion: cfg.diffusion.label(),
        n: cfg.n,
        k_modes,
        violation_index: violation,
        fit,
        predicted_theta: predicted,
        vanishes,
        verdict,
        tolerance: cfg.tol_theta,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenComparison {
    pub a: f64,
    pub n: usize,
    /// `λ₁(A_Dir)^a`
    pub spectral: f64,
    /// smallest eigenvalue of the restricted matrix
    pub restricted: f64,
    /// `spectral − restricted`
    pub gap: f64,
}

/// First eigenvalues of the spectral and restricted realizations on `(0, π)`.
pub fn compare_first_eigenvalues(a: f64, n: usize) -> Result<EigenComparison> {
    if n > MAX_DENSE_N {
        return invalid(format!("N = {n} exceeds the dense limit {MAX_DENSE_N}"));
    }
    let kernel = KernelSpec::new(a)?;
    let spec = EllipticSpec::laplacian(BcKind::Dirichlet);
    let grid = build_uniform_grid(DOMAIN.0, DOMAIN.1, n, BcKind::Dirichlet.natural_layout())?;
    let op = assemble_elliptic(&spec, &grid)?;
    let l1 = crate::tridiag::ql_eigenvalues(op.diag(), op.off_diag())?[0];
    let spectral = l1.powf(a);
    let k = assemble_restricted(&grid, &kernel)?;
    let restricted = jacobi_spd(k.matrix())?.values[0];
    Ok(EigenComparison { a, n, spectral, restricted, gap: spectral - restricted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Layout;
    use std::f64::consts::PI;

    fn dirichlet_dec(n: usize) -> SpectralDecomposition {
        let g = build_uniform_grid(0.0, PI, n, Layout::NodeCentered).unwrap();
        decompose(&assemble_elliptic(&EllipticSpec::laplacian(BcKind::Dirichlet), &g).unwrap()).unwrap()
    }

    #[test]
    fn synthetic_power_law() {
        let c: Vec<f64> = (1..=1000).map(|k| (k as f64).powf(-2.5)).collect();
        let fit = fit_power_decay(&c, Mask::All, (1, 1000)).unwrap();
        assert!((fit.exponent - 2.5).abs() < 1e-6);
        assert!(fit.r_squared >= 0.999999);
        assert_eq!(sobolev_threshold(&fit), fit.exponent - 0.5);
    }

    #[test]
    fn too_few_points() {
        let mut c = vec![0.0; 100];
        c[3] = 1.0;
        assert!(matches!(fit_power_decay(&c, Mask::All, (1, 100)), Err(FracError::InsufficientData { usable: 1, .. })));
        assert!(fit_power_decay(&c, Mask::All, (0, 10)).is_err());
        assert!(fit_power_decay(&c, Mask::All, (5, 101)).is_err());
    }

    #[test]
    fn masks_and_parity_selection() {
        let c: Vec<f64> = (1..=64).map(|k| if k % 2 == 1 { 1.0 / k as f64 } else { 0.0 }).collect();
        assert_eq!(select_mask(&c, (1, 64)), Mask::Odd);
        let d: Vec<f64> = (1..=64).map(|k| 1.0 / k as f64).collect();
        assert_eq!(select_mask(&d, (1, 64)), Mask::All);
        assert_eq!(Mask::parse("even").unwrap(), Mask::Even);
    }

    #[test]
    fn violation_indices_for_catalog() {
        let dec = dirichlet_dec(64);
        let spec = EllipticSpec::laplacian(BcKind::Dirichlet);
        let at = |r: RhsCatalog| first_violation_index(&spec, &dec, &r.realize(0.0, PI).unwrap()).unwrap();
        assert_eq!(at(RhsCatalog::Const), ViolationIndex::At(0));
        assert_eq!(at(RhsCatalog::Poly2), ViolationIndex::At(1));
        assert_eq!(at(RhsCatalog::Lifted), ViolationIndex::At(1));
        assert_eq!(at(RhsCatalog::Sin(1)), ViolationIndex::Infinite);
        assert_eq!(at(RhsCatalog::Eigen(3)), ViolationIndex::Infinite);
    }

    #[test]
    fn neumann_violation_of_linear() {
        let g = build_uniform_grid(0.0, PI, 64, Layout::CellCentered).unwrap();
        let spec = EllipticSpec::laplacian(BcKind::Neumann);
        let dec = decompose(&assemble_elliptic(&spec, &g).unwrap()).unwrap();
        let at = |r: RhsCatalog| first_violation_index(&spec, &dec, &r.realize(0.0, PI).unwrap()).unwrap();
        assert_eq!(at(RhsCatalog::Linear), ViolationIndex::At(0));
        assert_eq!(at(RhsCatalog::Const), ViolationIndex::Infinite);
        // x²(π−x)²-like profiles have zero slope but curvature-driven traces
        assert_eq!(at(RhsCatalog::Poly2), ViolationIndex::At(0));
    }

    #[test]
    fn numeric_probe_agrees_with_symbolic() {
        let dec = dirichlet_dec(256);
        let spec = experiment_spec(BcKind::Dirichlet, &Coefficient::custom("1+x/2", |x| 1.0 + 0.5 * x));
        let par = RhsFunction::from_fn("x(pi-x)", |x| x * (PI - x));
        assert_eq!(first_violation_index(&spec, &dec, &par).unwrap(), ViolationIndex::At(1));
        let one = RhsFunction::from_fn("one", |_| 1.0);
        assert_eq!(first_violation_index(&spec, &dec, &one).unwrap(), ViolationIndex::At(0));
        let s = RhsFunction::from_fn("sin", f64::sin);
        // A sin x = (1 + x/2) sin x − ½ cos x has a nonzero trace
        assert_eq!(first_violation_index(&spec, &dec, &s).unwrap(), ViolationIndex::At(1));
        let s3 = RhsFunction::from_fn("sin3", |x: f64| x.sin().powi(3));
        let lap = experiment_spec(BcKind::Dirichlet, &Coefficient::custom("one", |_| 1.0));
        assert_eq!(first_violation_index(&lap, &dec, &s3).unwrap(), ViolationIndex::Inconclusive(Some(1)));
    }

    #[test]
    fn fd_weights_second_derivative() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn eigenfunction_boundary_slope() {
        let dec = dirichlet_dec(512);
        let f = RhsCatalog::Eigen(1).realize(0.0, PI).unwrap();
        let fit = fit_boundary_exponent(&dec, 0.5, &f, 128).unwrap();
        assert!((fit.exponent.unwrap() - 1.0).abs() < 0.02);
        assert!(fit.vanishes_at_boundary());
    }

    #[test]
    fn boundary_fit_preconditions() {
        let dec = dirichlet_dec(64);
        let f = RhsCatalog::Const.realize(0.0, PI).unwrap();
        assert!(fit_boundary_exponent(&dec, 0.5, &f, 17).is_err());
        assert!(fit_boundary_exponent(&dec, 0.5, &f, 0).is_err());
    }

    #[test]
    fn theta_predictions() {
        assert_eq!(predicted_theta(0.25, ViolationIndex::At(0)), Some(0.5));
        assert_eq!(predicted_theta(0.75, ViolationIndex::At(0)), Some(1.0));
        assert_eq!(predicted_theta(0.5, ViolationIndex::At(0)), None);
        assert_eq!(predicted_theta(0.25, ViolationIndex::Infinite), Some(1.0));
    }

    #[test]
    fn compat_preconditions() {
        let cfg = CompatConfig::new(BcKind::Dirichlet, 0.5, RhsCatalog::Const, 512);
        assert!(compatibility_experiment(&cfg).is_err());
        let cfg = CompatConfig::new(BcKind::Dirichlet, 0.99, RhsCatalog::Const, 1024);
        assert!(compatibility_experiment(&cfg).is_err());
    }

    #[test]
    fn predicted_betas() {
        assert_eq!(predicted_beta(BcKind::Dirichlet, 0.5, 0), 2.0);
        assert_eq!(predicted_beta(BcKind::Dirichlet, 0.5, 1), 4.0);
        assert_eq!(predicted_beta(BcKind::Neumann, 0.25, 0), 2.5);
    }
}
