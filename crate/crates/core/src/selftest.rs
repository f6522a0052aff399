//! Seeded invariant suites over every module at small sizes, run by the
//! `selftest` command.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cache::{decode, encode};
use crate::contour::{apply_inverse_power_contour, build_rule};
use crate::error::Result;
use crate::grid::{assemble_elliptic, build_uniform_grid, BcKind, Coefficient, DiscreteOperator, EllipticSpec};
use crate::nonlocal::{assemble_restricted, KernelSpec};
use crate::regularity::{fit_power_decay, Mask};
use crate::spectral::{apply_power, apply_power_complex, apply_real_power, decompose, solve_power};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// worst observed value of the checked quantity
    pub worst: f64,
    pub tolerance: f64,
}

const N: usize = 64;
const TRIALS: usize = 8;

fn operator(bc: BcKind, variable: bool) -> Result<DiscreteOperator> {
    let diffusion = if variable { Coefficient::Affine { p: 1.0, q: 0.5 } } else { Coefficient::Const(1.0) };
    let spec = EllipticSpec::new(diffusion, Coefficient::Const(0.0), bc, 1e-3);
    assemble_elliptic(&spec, &build_uniform_grid(0.0, std::f64::consts::PI, N, bc.natural_layout())?)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn suite(name: &str, worst: f64, tolerance: f64) -> SuiteResult {
    SuiteResult { name: name.into(), passed: worst <= tolerance, worst, tolerance }
}

/// Runs all suites; deterministic for a given seed.
pub fn run_selftest(seed: u64) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    for (bc, variable) in [(BcKind::Dirichlet, false), (BcKind::Dirichlet, true), (BcKind::Neumann, true)] {
        let op = operator(bc, variable)?;
        let g = op.grid().clone();
        let mut worst = 0.0f64;
        for _ in 0..TRIALS {
            let (u, v) = (random_vec(&mut rng, N), random_vec(&mut rng, N));
            let lhs = g.inner(&op.apply(&u)?, &v);
            let rhs = g.inner(&u, &op.apply(&v)?);
            worst = worst.max((lhs - rhs).abs() / (op.norm_bound() * g.norm(&u) * g.norm(&v)));
        }
        let tag = if variable { "variable" } else { "constant" };
        out.push(suite(&format!("grid/{bc}-{tag}/self-adjoint"), worst, 1e-13));

        let dec = decompose(&op)?;
        let mut worst = 0.0f64;
        for k in 0..N {
            let v = dec.eigenvector(k);
            let r: Vec<f64> = op.apply(v)?.iter().zip(v).map(|(av, x)| av - dec.eigenvalues()[k] * x).collect();
            worst = worst.max(g.norm(&r) / dec.eigenvalues()[N - 1]);
        }
        out.push(suite(&format!("spectral/{bc}-{tag}/residual"), worst, 1e-12));
    }

    let op = operator(BcKind::Dirichlet, true)?;
    let dec = decompose(&op)?;
    let mut worst = 0.0f64;
    for _ in 0..TRIALS {
        let f = random_vec(&mut rng, N);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..5.0));
        let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..5.0));
        let composed = apply_power_complex(&dec, z, &apply_power(&dec, w, &f)?)?;
        let direct = apply_power(&dec, z + w, &f)?;
        let num: f64 = composed.iter().zip(&direct).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = direct.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    out.push(suite("spectral/semigroup", worst, 1e-9));

    let mut worst = 0.0f64;
    for _ in 0..TRIALS {
        let f = random_vec(&mut rng, N);
        let a = rng.gen_range(0.05..0.95);
        let u = solve_power(&dec, a, &f)?;
        worst = worst.max(rel_err(&apply_real_power(&dec, a, &u)?, &f));
    }
    out.push(suite("spectral/solve-inverts-power", worst, 1e-10));

    let mut worst = 0.0f64;
    for a in [0.25, 0.5, 0.75] {
        let f = random_vec(&mut rng, N);
        let contour = apply_inverse_power_contour(&op, &build_rule(a, 200)?, &f)?;
        worst = worst.max(rel_err(&contour, &solve_power(&dec, a, &f)?));
    }
    out.push(suite("contour/matches-spectral", worst, 1e-7));

    let back = decode(&encode(&dec)?, &op)?;
    let identical = back.eigenvalues() == dec.eigenvalues() && back.eigenvector_matrix() == dec.eigenvector_matrix();
    out.push(suite("cache/round-trip", if identical { 0.0 } else { 1.0 }, 0.0));

    let grid = build_uniform_grid(0.0, 1.0, 32, BcKind::Dirichlet.natural_layout())?;
    let k = assemble_restricted(&grid, &KernelSpec::new(rng.gen_range(0.1..0.9))?)?;
    let ones = vec![1.0; grid.len()];
    let scale = k.matrix().max_abs();
    let row_defect = rel_err(&k.apply(&ones)?, k.exterior_mass());
    out.push(suite("nonlocal/symmetric", k.matrix().max_asymmetry() / scale, 0.0));
    out.push(suite("nonlocal/constant-maps-to-exterior-mass", row_defect, 1e-12));

    let beta = rng.gen_range(1.0..5.0);
    let c: Vec<f64> = (1..=512).map(|j| (j as f64).powf(-beta)).collect();
    let fit = fit_power_decay(&c, Mask::All, (8, 64))?;
    out.push(suite("regularity/synthetic-decay", (fit.exponent - beta).abs(), 1e-8));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_and_are_deterministic() {
        let a = run_selftest(7).unwrap();
        assert!(a.iter().all(|s| s.passed), "{a:#?}");
        assert_eq!(a, run_selftest(7).unwrap());
    }
}
