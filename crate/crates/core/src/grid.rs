//! Uniform grids on an interval and the flux-form finite-difference
//! realization of `A = -(a(x) u')' + c(x) u` under Dirichlet or homogeneous
//! conormal (Neumann) boundary conditions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FracError, Result};
use crate::special::pairwise_dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// `x_i = α + i·h`, `h = (β−α)/(n+1)`; the endpoints are unknown-free.
    NodeCentered,
    /// `x_i = α + (i−½)·h`, `h = (β−α)/n`; endpoints sit on cell faces.
    CellCentered,
}

impl Layout {
    pub fn code(self) -> u8 {
        match self {
            Layout::NodeCentered => 0,
            Layout::CellCentered => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Layout::NodeCentered),
            1 => Some(Layout::CellCentered),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

impl BcKind {
    /// The grid layout that makes this boundary condition second-order
    /// accurate with a plain flux scheme.
    pub fn natural_layout(self) -> Layout {
        match self {
            BcKind::Dirichlet => Layout::NodeCentered,
            BcKind::Neumann => Layout::CellCentered,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BcKind::Dirichlet => 0,
            BcKind::Neumann => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BcKind::Dirichlet),
            1 => Some(BcKind::Neumann),
            _ => None,
        }
    }
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcKind::Dirichlet => f.write_str("dirichlet"),
            BcKind::Neumann => f.write_str("neumann"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: f64,
    upper: f64,
    layout: Layout,
    spacing: f64,
    nodes: Vec<f64>,
}

/// Builds a uniform grid with `n` unknowns on `(lower, upper)`.
pub fn build_uniform_grid(lower: f64, upper: f64, n: usize, layout: Layout) -> Result<Grid> {
    if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
        return invalid(format!("interval ({lower}, {upper}) must satisfy α < β"));
    }
    if n < 2 {
        return invalid(format!("grid needs at least 2 points, got {n}"));
    }
    let len = upper - lower;
    let (spacing, nodes) = match layout {
        Layout::NodeCentered => {
            let h = len / (n as f64 + 1.0);
            (h, (1..=n).map(|i| lower + i as f64 * h).collect())
        }
        Layout::CellCentered => {
            let h = len / n as f64;
            (h, (1..=n).map(|i| lower + (i as f64 - 0.5) * h).collect())
        }
    };
    Ok(Grid {
        lower,
        upper,
        layout,
        spacing,
        nodes,
    })
}

impl Grid {
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `⟨u, v⟩_h = h·Σ u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.spacing * pairwise_dot(u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// A scalar coefficient function of `x`, named so that configurations and
/// cache keys can refer to it.
#[derive(Clone)]
pub enum Coefficient {
    Const(f64),
    /// `p + q·x`
    Affine { p: f64, q: f64 },
    Custom {
        name: String,
        func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        self.label() == other.label()
    }
}

impl Coefficient {
    pub fn custom(name: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Custom {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    /// Parses `const:v` or `affine:p,q`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: std::result::Result<Vec<f64>, _> = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>())
            .collect();
        let nums = nums.map_err(|e| FracError::InvalidArgument(format!("coefficient '{s}': {e}")))?;
        match (kind, nums.as_slice()) {
            ("const", [v]) => Ok(Coefficient::Const(*v)),
            ("affine", [p, q]) => Ok(Coefficient::Affine { p: *p, q: *q }),
            _ => invalid(format!("unknown coefficient '{s}' (expected const:v or affine:p,q)")),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Const(v) => *v,
            Coefficient::Affine { p, q } => p + q * x,
            Coefficient::Custom { func, .. } => func(x),
        }
    }

    /// Monomial coefficients when the function is a polynomial.
    pub fn as_poly(&self) -> Option<Vec<f64>> {
        match self {
            Coefficient::Const(v) => Some(vec![*v]),
            Coefficient::Affine { p, q } => Some(vec![*p, *q]),
            Coefficient::Custom { .. } => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Const(_)) || matches!(self, Coefficient::Affine { q, .. } if *q == 0.0)
    }

    pub fn label(&self) -> String {
        match self {
            Coefficient::Const(v) => format!("const:{v}"),
            Coefficient::Affine { p, q } => format!("affine:{p},{q}"),
            Coefficient::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

/// Coefficients and boundary condition of the second-order operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSpec {
    pub diffusion: Coefficient,
    pub potential: Coefficient,
    pub bc: BcKind,
    pub ellipticity_floor: f64,
}

impl EllipticSpec {
    /// `-u''` with the given boundary condition.
    pub fn laplacian(bc: BcKind) -> Self {
        EllipticSpec {
            diffusion: Coefficient::Const(1.0),
            potential: Coefficient::Const(0.0),
            bc,
            ellipticity_floor: 1.0,
        }
    }

    pub fn new(diffusion: Coefficient, potential: Coefficient, bc: BcKind, ellipticity_floor: f64) -> Self {
        EllipticSpec {
            diffusion,
            potential,
            bc,
            ellipticity_floor,
        }
    }

    /// Canonical string used for cache keys and report echoes.
    pub fn label(&self) -> String {
        format!(
            "{};a={};c={};c0={}",
            self.bc,
            self.diffusion.label(),
            self.potential.label(),
            self.ellipticity_floor
        )
    }
}

/// Symmetric tridiagonal realization of `A_B` on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    diag: Vec<f64>,
    off: Vec<f64>,
    grid: Grid,
    spec: EllipticSpec,
}

/// Flux-form assembly: row `i` receives `(a_{i-½} + a_{i+½})/h² + c(x_i)` on
/// the diagonal and `-a_{i±½}/h²` off the diagonal, with `a_{i±½} = a(x_i ± h/2)`.
/// Dirichlet drops the boundary couplings; Neumann omits the exterior flux.
pub fn assemble_elliptic(spec: &EllipticSpec, grid: &Grid) -> Result<DiscreteOperator> {
    if grid.layout() != spec.bc.natural_layout() {
        return invalid(format!(
            "{} conditions need a {:?} grid, got {:?}",
            spec.bc,
            spec.bc.natural_layout(),
            grid.layout()
        ));
    }
    if !(spec.ellipticity_floor > 0.0) {
        return invalid("ellipticity floor must be positive");
    }
    let h = grid.spacing();
    let n = grid.len();
    let c0 = spec.ellipticity_floor;
    for (i, &x) in grid.nodes().iter().enumerate() {
        let a = spec.diffusion.eval(x);
        if !(a >= c0) {
            return Err(FracError::Assembly {
                node: i,
                x,
                reason: format!("diffusion coefficient {a} below ellipticity floor {c0}"),
            });
        }
        let c = spec.potential.eval(x);
        if !(c >= 0.0) {
            return Err(FracError::Assembly {
                node: i,
                x,
                reason: format!("negative potential {c}"),
            });
        }
    }
    // a at the faces x_{i-½}, i = 0..=n (face i sits left of node i)
    let faces: Vec<f64> = (0..=n)
        .map(|i| {
            let x = if i < n { grid.nodes()[i] - 0.5 * h } else { grid.nodes()[n - 1] + 0.5 * h };
            spec.diffusion.eval(x)
        })
        .collect();
    for (i, &a) in faces.iter().enumerate() {
        if !(a >= c0) {
            return Err(FracError::Assembly {
                node: i.min(n - 1),
                x: if i < n { grid.nodes()[i] - 0.5 * h } else { grid.upper() },
                reason: format!("diffusion coefficient {a} at cell face below ellipticity floor {c0}"),
            });
        }
    }
    let h2 = h * h;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let (mut left, mut right) = (faces[i], faces[i + 1]);
        if spec.bc == BcKind::Neumann {
            if i == 0 {
                left = 0.0;
            }
            if i == n - 1 {
                right = 0.0;
            }
        }
        diag[i] = (left + right) / h2 + spec.potential.eval(grid.nodes()[i]);
        if i + 1 < n {
            off[i] = -faces[i + 1] / h2;
        }
    }
    Ok(DiscreteOperator {
        diag,
        off,
        grid: grid.clone(),
        spec: spec.clone(),
    })
}

impl DiscreteOperator {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &EllipticSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Weight of the discrete inner product.
    pub fn weight(&self) -> f64 {
        self.grid.spacing()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.len() {
            return invalid(format!("vector length {} does not match operator size {}", u.len(), self.len()));
        }
        Ok(tridiag_matvec(&self.diag, &self.off, u))
    }
}

pub fn apply_operator(op: &DiscreteOperator, u: &[f64]) -> Result<Vec<f64>> {
    op.apply(u)
}

pub(crate) fn tridiag_matvec(diag: &[f64], off: &[f64], u: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut y = diag[i] * u[i];
            if i > 0 {
                y += off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                y += off[i] * u[i + 1];
            }
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn node_centered_grid() {
        let g = build_uniform_grid(0.0, PI, 3, Layout::NodeCentered).unwrap();
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        let want = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
        for (x, w) in g.nodes().iter().zip(want) {
            assert!((x - w).abs() < 1e-15);
        }
    }

    #[test]
    fn cell_centered_grid() {
        let g = build_uniform_grid(0.0, 1.0, 2, Layout::CellCentered).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.nodes(), &[0.25, 0.75]);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(matches!(
            build_uniform_grid(1.0, 0.0, 4, Layout::NodeCentered),
            Err(FracError::InvalidArgument(_))
        ));
        assert!(build_uniform_grid(0.0, 1.0, 0, Layout::CellCentered).is_err());
        assert!(build_uniform_grid(0.0, 1.0, 1, Layout::CellCentered).is_err());
    }

    #[test]
    fn constant_dirichlet_stencil() {
        let g = build_uniform_grid(0.0, PI, 5, Layout::NodeCentered).unwrap();
        let op = assemble_elliptic(&EllipticSpec::laplacian(BcKind::Dirichlet), &g).unwrap();
        let h2 = g.spacing().powi(2);
        for &d in op.diag() {
            assert!((d * h2 - 2.0).abs() < 1e-14);
        }
        for &e in op.off_diag() {
            assert!((e * h2 + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_row_sums_vanish() {
        let g = build_uniform_grid(0.0, PI, 17, Layout::CellCentered).unwrap();
        let op = assemble_elliptic(&EllipticSpec::laplacian(BcKind::Neumann), &g).unwrap();
        let y = op.apply(&vec![1.0; 17]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn layout_mismatch_rejected() {
        let g = build_uniform_grid(0.0, 1.0, 8, Layout::CellCentered).unwrap();
        assert!(assemble_elliptic(&EllipticSpec::laplacian(BcKind::Dirichlet), &g).is_err());
    }

    #[test]
    fn ellipticity_violation_names_node() {
        let g = build_uniform_grid(0.0, 1.0, 9, Layout::NodeCentered).unwrap();
        let spec = EllipticSpec::new(
            Coefficient::Affine { p: 1.0, q: -2.0 },
            Coefficient::Const(0.0),
            BcKind::Dirichlet,
            0.5,
        );
        match assemble_elliptic(&spec, &g) {
            Err(FracError::Assembly { node, x, .. }) => {
                assert!(1.0 - 2.0 * x < 0.5);
                assert_eq!(node, 2); // x = 0.3 is the first node with a < 0.5
            }
            other => panic!("expected assembly error, got {other:?}"),
        }
    }

    #[test]
    fn apply_checks_length() {
        let g = build_uniform_grid(0.0, 1.0, 4, Layout::NodeCentered).unwrap();
        let op = assemble_elliptic(&EllipticSpec::laplacian(BcKind::Dirichlet), &g).unwrap();
        assert!(op.apply(&[1.0, 2.0]).is_err());
        assert_eq!(op.apply(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn coefficient_parsing() {
        assert_eq!(Coefficient::parse("const:2.5").unwrap().eval(7.0), 2.5);
        assert_eq!(Coefficient::parse("affine:1,0.5").unwrap().eval(2.0), 2.0);
        assert!(Coefficient::parse("affine:1").is_err());
        assert!(Coefficient::parse("cubic:1").is_err());
    }
}
