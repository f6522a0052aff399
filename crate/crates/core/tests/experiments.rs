use fraclab_core::cache::DecompositionCache;
use fraclab_core::regularity::*;
use fraclab_core::rhs::RhsCatalog;
use fraclab_core::*;

const N: usize = 1024;

fn beta(bc: BcKind, a: f64, rhs: RhsCatalog) -> CompatibilityReport {
    compatibility_experiment(&CompatConfig::new(bc, a, rhs, N)).unwrap()
}

#[test]
fn dirichlet_threshold_law_first_two_layers() {
    for a in [0.25, 0.5, 0.75] {
        for (rhs, m) in [(RhsCatalog::Const, 0), (RhsCatalog::Poly2, 1)] {
            let r = beta(BcKind::Dirichlet, a, rhs);
            assert_eq!(r.violation_index, ViolationIndex::At(m));
            let expect = 2.0 * m as f64 + 1.0 + 2.0 * a;
            assert_eq!(r.predicted_beta, Some(expect));
            assert!((r.measured_beta.unwrap() - expect).abs() <= 0.15, "{r:?}");
            assert_eq!(r.verdict, Verdict::Pass);
        }
    }
}

#[test]
fn neumann_threshold_law() {
    for a in [0.25, 0.5, 0.75] {
        let r = beta(BcKind::Neumann, a, RhsCatalog::Linear);
        assert_eq!(r.violation_index, ViolationIndex::At(0));
        assert!((r.measured_beta.unwrap() - (2.0 + 2.0 * a)).abs() <= 0.15);
        assert_eq!(r.table.len(), N - 1);
    }
}

#[test]
fn removing_the_trace_raises_beta() {
    for a in [0.25, 0.75] {
        let plain = beta(BcKind::Dirichlet, a, RhsCatalog::Const).measured_beta.unwrap();
        let lifted = beta(BcKind::Dirichlet, a, RhsCatalog::Lifted).measured_beta.unwrap();
        assert!(lifted - plain >= 1.5, "a={a}: {plain} -> {lifted}");
    }
}

#[test]
fn variable_coefficient_keeps_threshold() {
    let mut cfg = CompatConfig::new(BcKind::Dirichlet, 0.5, RhsCatalog::Const, N);
    cfg.diffusion = Coefficient::Affine { p: 1.0, q: 0.5 };
    let r = compatibility_experiment(&cfg).unwrap();
    assert!((r.measured_beta.unwrap() - 2.0).abs() <= 0.2);
}

#[test]
fn smooth_compatible_data_reports_superpolynomial_decay() {
    for rhs in [RhsCatalog::Sin(3), RhsCatalog::Eigen(5)] {
        let r = beta(BcKind::Dirichlet, 0.5, rhs);
        assert_eq!(r.violation_index, ViolationIndex::Infinite);
        assert!(r.measured_beta.is_none());
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.note.contains("super-polynomial"));
    }
}

#[test]
fn eigenvalue_gap_is_positive_and_shrinks_toward_one() {
    let gaps: Vec<f64> = [0.5, 0.75, 0.9]
        .iter()
        .map(|&a| {
            let c = compare_first_eigenvalues(a, 256).unwrap();
            assert!(c.restricted > 0.0 && c.restricted < c.spectral);
            c.gap
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn warm_cache_reproduces_cold_results_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cache = DecompositionCache::new(dir.path());
    let cfg = CompatConfig::new(BcKind::Neumann, 0.25, RhsCatalog::Linear, N);
    let op = assemble_elliptic(&cfg.spec(), &cfg.grid().unwrap()).unwrap();
    let (cold, hit_cold) = cache.load_or_decompose(&op).unwrap();
    let (warm, hit_warm) = cache.load_or_decompose(&op).unwrap();
    assert!(!hit_cold && hit_warm);
    let a = compatibility_experiment_with(&cfg, &cold).unwrap();
    let b = compatibility_experiment_with(&cfg, &warm).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.measured_beta.unwrap().to_bits(), b.measured_beta.unwrap().to_bits());
}

#[test]
fn boundary_experiment_at_moderate_size() {
    let mut cfg = BoundaryConfig::new(0.25, RhsCatalog::Const, 2048);
    cfg.tol_theta = 0.1;
    let r = boundary_experiment(&cfg).unwrap();
    assert_eq!(r.predicted_theta, Some(0.5));
    assert!(r.vanishes);
    assert!((r.fit.exponent.unwrap() - 0.5).abs() < 0.1);

    let r = boundary_experiment(&BoundaryConfig::new(0.5, RhsCatalog::Const, 1024)).unwrap();
    assert_eq!(r.verdict, Verdict::Unassessed);

    let r = boundary_experiment(&BoundaryConfig::new(0.5, RhsCatalog::Sin(1), 1024)).unwrap();
    assert!((r.fit.exponent.unwrap() - 1.0).abs() <= 0.02);
    assert_eq!(r.verdict, Verdict::Pass);
}
