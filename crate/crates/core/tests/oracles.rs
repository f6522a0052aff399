//! Checks against values computed without the library's own machinery.

use std::f64::consts::PI;

use fraclab_core::contour::{apply_inverse_power_order, build_rule};
use fraclab_core::nonlocal::{exterior_mass, normalization_constant, p0_bruteforce, assemble_restricted, KernelSpec};
use fraclab_core::regularity::{fit_boundary_exponent, fit_power_decay, Mask};
use fraclab_core::rhs::RhsCatalog;
use fraclab_core::special::gamma;
use fraclab_core::*;
use statrs::function::gamma::gamma as statrs_gamma;

fn laplacian(bc: BcKind, n: usize) -> DiscreteOperator {
    let grid = build_uniform_grid(0.0, PI, n, bc.natural_layout()).unwrap();
    assemble_elliptic(&EllipticSpec::laplacian(bc), &grid).unwrap()
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x` (Sturm count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if q != 0.0 { b2 / q } else { b2 / f64::EPSILON };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let bound = diag.iter().map(|d| d.abs()).fold(0.0, f64::max) + 2.0 * off.iter().map(|o| o.abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn dirichlet_laplacian_eigenvalues_are_closed_form() {
    let n = 200;
    let op = laplacian(BcKind::Dirichlet, n);
    let dec = decompose(&op).unwrap();
    let h = PI / (n as f64 + 1.0);
    for (k, &lam) in dec.eigenvalues().iter().enumerate() {
        let exact = (4.0 / (h * h)) * ((k as f64 + 1.0) * h / 2.0).sin().powi(2);
        assert!((lam - exact).abs() <= 1e-11 * exact, "k={k}: {lam} vs {exact}");
    }
}

#[test]
fn neumann_laplacian_eigenvalues_are_closed_form() {
    let n = 128;
    let dec = decompose(&laplacian(BcKind::Neumann, n)).unwrap();
    let h = PI / n as f64;
    for (k, &lam) in dec.eigenvalues().iter().enumerate().skip(1) {
        let exact = (4.0 / (h * h)) * (k as f64 * h / 2.0).sin().powi(2);
        assert!((lam - exact).abs() <= 1e-11 * exact);
    }
    assert!(dec.eigenvalues()[0].abs() <= 1e-10);
}

#[test]
fn variable_coefficient_eigenvalues_match_sturm_bisection() {
    let spec = EllipticSpec::new(Coefficient::Affine { p: 1.0, q: 0.5 }, Coefficient::Const(2.0), BcKind::Dirichlet, 1e-3);
    let grid = build_uniform_grid(0.0, PI, 150, Layout::NodeCentered).unwrap();
    let op = assemble_elliptic(&spec, &grid).unwrap();
    let dec = decompose(&op).unwrap();
    for k in [0, 1, 7, 74, 149] {
        let oracle = bisect_eigenvalue(op.diag(), op.off_diag(), k);
        assert!((dec.eigenvalues()[k] - oracle).abs() <= 1e-11 * oracle, "k={k}");
    }
}

#[test]
fn gamma_agrees_with_statrs() {
    for x in [-2.5, -0.75, -0.25, 0.1, 0.5, 1.0, 1.75, 3.3, 7.0, 12.5] {
        let (ours, theirs) = (gamma(x), statrs_gamma(x));
        assert!((ours - theirs).abs() <= 1e-13 * theirs.abs(), "Γ({x})");
    }
}

/// `c ∫_ℝ (1 − cos y)|y|^{-1-2a} dy = 1`, using `∫_0^∞ (1 − cos y) y^{-1-2a} dy = −Γ(−2a) cos(πa)`.
#[test]
fn normalization_constant_satisfies_fourier_identity() {
    for a in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
        let integral = -2.0 * statrs_gamma(-2.0 * a) * (PI * a).cos();
        let c = normalization_constant(a).unwrap();
        assert!((c * integral - 1.0).abs() < 1e-12, "a={a}");
    }
    assert!((normalization_constant(0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
}

/// Discrete sine coefficients of `f ≡ 1`: `√(2/π)·h·cot(kh/2)` for odd `k`, zero for even.
#[test]
fn forward_coefficients_of_constant() {
    let n = 255;
    let op = laplacian(BcKind::Dirichlet, n);
    let dec = decompose(&op).unwrap();
    let h = op.grid().spacing();
    let c = forward_coefficients(&dec, &vec![1.0; n]).unwrap();
    for (i, ck) in c.iter().enumerate() {
        let k = i as f64 + 1.0;
        let exact = if i % 2 == 0 { (2.0 / PI).sqrt() * h / (k * h / 2.0).tan() } else { 0.0 };
        assert!((ck - exact).abs() < 1e-12, "k={k}: {ck} vs {exact}");
    }
}

/// Continuum sine coefficients of `4x(π − x)/π²` are `16√(2/π)/(π² k³)` for odd `k`.
#[test]
fn forward_coefficients_of_parabola_converge() {
    let n = 1023;
    let op = laplacian(BcKind::Dirichlet, n);
    let dec = decompose(&op).unwrap();
    let f = RhsCatalog::Poly2.realize(0.0, PI).unwrap().sample(op.grid(), None).unwrap();
    let c = forward_coefficients(&dec, &f).unwrap();
    for k in [1usize, 3, 5, 9] {
        let exact = 16.0 * (2.0 / PI).sqrt() / (PI * PI * (k as f64).powi(3));
        assert!((c[k - 1] - exact).abs() < 1e-5 * exact.max(1e-3), "k={k}");
    }
}

#[test]
fn exterior_mass_closed_form_at_half() {
    let grid = build_uniform_grid(0.0, 1.0, 128, Layout::NodeCentered).unwrap();
    let w = exterior_mass(&grid, &KernelSpec::new(0.5).unwrap()).unwrap();
    for (x, wi) in grid.nodes().iter().zip(&w) {
        let exact = (1.0 / PI) * (1.0 / x + 1.0 / (1.0 - x));
        assert!((wi - exact).abs() <= 1e-10 * exact);
    }
}

#[test]
fn restricted_form_matches_bruteforce_energy() {
    let grid = build_uniform_grid(0.0, PI, 128, Layout::NodeCentered).unwrap();
    let u = grid.sample(f64::sin);
    for a in [0.25, 0.5, 0.75] {
        let kernel = KernelSpec::new(a).unwrap();
        let k = assemble_restricted(&grid, &kernel).unwrap();
        let discrete = k.form(&u, &u).unwrap();
        let w = k.exterior_mass();
        let mass: f64 = grid.spacing() * u.iter().zip(w).map(|(ui, wi)| wi * ui * ui).sum::<f64>();
        let brute = p0_bruteforce(&u, &u, &grid, &kernel).unwrap() + mass;
        assert!((discrete - brute).abs() <= 0.01 * brute, "a={a}: {discrete} vs {brute}");
    }
}

#[test]
fn contour_matches_spectral_scalar_limit() {
    let rule = build_rule(0.5, 200).unwrap();
    for lam in [0.5, 1.0, 10.0, 1e3, 1e5] {
        assert!((rule.apply_scalar(lam) - lam.powf(-0.5)).abs() <= 1e-11 * lam.powf(-0.5));
    }
    let op = laplacian(BcKind::Dirichlet, 64);
    let f = vec![1.0; 64];
    let u = apply_inverse_power_order(&op, 1.0, 200, None, &f).unwrap();
    let exact = fraclab_core::contour::apply_inverse_direct(&op, &f).unwrap();
    assert_eq!(u, exact);
}

/// Partial sum of the continuum solution for `f ≡ 1` on `(0, π)`:
/// `u(x) = Σ_{k odd} (4/(πk)) k^{-2a} sin(kx)`.
fn continuum_slope(a: f64, modes: usize, h: f64) -> f64 {
    let u = |x: f64| -> f64 {
        (1..=modes).step_by(2).map(|k| 4.0 / (PI * k as f64) * (k as f64).powf(-2.0 * a) * (k as f64 * x).sin()).sum()
    };
    let (d0, d1) = (10.0 * h, PI / 8.0);
    let pts: Vec<(f64, f64)> = (0..40)
        .map(|j| {
            let d = d0 * (d1 / d0).powf(j as f64 / 39.0);
            (d.ln(), u(d).ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 40.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 40.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn boundary_exponent_agrees_with_continuum_series() {
    let n = 2048;
    let op = laplacian(BcKind::Dirichlet, n);
    let dec = decompose(&op).unwrap();
    let f = RhsCatalog::Const.realize(0.0, PI).unwrap();
    for a in [0.25, 0.75] {
        let fit = fit_boundary_exponent(&dec, a, &f, n / 4).unwrap();
        let oracle = continuum_slope(a, n / 4, op.grid().spacing());
        let theta = fit.exponent.unwrap();
        assert!((theta - oracle).abs() < 0.01, "a={a}: {theta} vs {oracle}");
    }
}

#[test]
fn continuum_coefficients_fit_exactly() {
    // odd-k coefficients of the continuum solution for f ≡ 1 decay like k^{-(1+2a)}
    for a in [0.25, 0.5, 0.75] {
        let c: Vec<f64> = (1..=512).map(|k| if k % 2 == 1 { 4.0 / (PI * k as f64) * (k as f64).powf(-2.0 * a) } else { 0.0 }).collect();
        let fit = fit_power_decay(&c, Mask::Odd, (8, 512)).unwrap();
        assert!((fit.exponent - (1.0 + 2.0 * a)).abs() < 1e-10);
    }
}
