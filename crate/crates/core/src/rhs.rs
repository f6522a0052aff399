//! Right-hand-side catalog: `const`, `poly2`, `linear`, `lifted`, `sin:k`,
//! `eigen:k` and `custom:path` (CSV samples `x,f`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{invalid, FracError, Result};
use crate::grid::Grid;
use crate::spectral::SpectralDecomposition;
use crate::symbolic::{Trig, TrigPoly};
use crate::tridiag::solve_shifted_spd;

#[derive(Debug, Clone, PartialEq)]
pub enum RhsCatalog {
    /// `f ≡ 1`
    Const,
    /// `4(x − α)(β − x)/L²`
    Poly2,
    /// `x − α`
    Linear,
    /// `1 − cos(2π(x − α)/L)`: the constant with its trace removed by a smooth lift
    Lifted,
    /// `sin(kπ(x − α)/L)`
    Sin(u32),
    /// the `k`-th discrete eigenvector (1-based, ascending eigenvalues)
    Eigen(usize),
    Custom(PathBuf),
}

impl RhsCatalog {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let index = |a: Option<&str>| -> Result<usize> {
            let a = a.ok_or_else(|| FracError::InvalidArgument(format!("'{s}' needs an index")))?;
            match a.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => invalid(format!("'{s}': index must be a positive integer")),
            }
        };
        match (kind, arg) {
            ("const", None) => Ok(RhsCatalog::Const),
            ("poly2", None) => Ok(RhsCatalog::Poly2),
            ("linear", None) => Ok(RhsCatalog::Linear),
            ("lifted", None) => Ok(RhsCatalog::Lifted),
            ("sin", a) => Ok(RhsCatalog::Sin(u32::try_from(index(a)?).map_err(|_| FracError::InvalidArgument(format!("'{s}': index too large")))?)),
            ("eigen", a) => Ok(RhsCatalog::Eigen(index(a)?)),
            ("custom", Some(p)) if !p.is_empty() => Ok(RhsCatalog::Custom(PathBuf::from(p))),
            _ => invalid(format!(
                "unknown right-hand side '{s}' (expected const, poly2, linear, lifted, sin:k, eigen:k or custom:path)"
            )),
        }
    }

    /// Builds the function on `(lower, upper)`; `custom` reads its CSV here.
    pub fn realize(&self, lower: f64, upper: f64) -> Result<RhsFunction> {
        let len = upper - lower;
        let form = match self {
            RhsCatalog::Const => RhsForm::Symbolic(TrigPoly::polynomial(vec![1.0])),
            RhsCatalog::Poly2 => {
                let s = 4.0 / (len * len);
                // 4(x − α)(β − x)/L² = s(−αβ + (α + β)x − x²)
                RhsForm::Symbolic(TrigPoly::polynomial(vec![-s * lower * upper, s * (lower + upper), -s]))
            }
            RhsCatalog::Linear => RhsForm::Symbolic(TrigPoly::polynomial(vec![-lower, 1.0])),
            RhsCatalog::Lifted => {
                let omega = 2.0 * std::f64::consts::PI / len;
                RhsForm::Symbolic(
                    TrigPoly::polynomial(vec![1.0]).add(TrigPoly::trig(vec![-1.0], omega, lower, Trig::Cos)),
                )
            }
            RhsCatalog::Sin(k) => {
                let omega = f64::from(*k) * std::f64::consts::PI / len;
                RhsForm::Symbolic(TrigPoly::trig(vec![1.0], omega, lower, Trig::Sin))
            }
            RhsCatalog::Eigen(k) => RhsForm::Eigen(*k),
            RhsCatalog::Custom(path) => {
                let spline = CubicSpline::from_csv(path)?;
                let (lo, hi) = spline.range();
                let slack = 1e-9 * len;
                if lo > lower + slack || hi < upper - slack {
                    return invalid(format!(
                        "samples in {} cover [{lo}, {hi}], need [{lower}, {upper}]",
                        path.display()
                    ));
                }
                let s = Arc::new(spline);
                RhsForm::Sampled(Arc::new(move |x| s.eval(x)))
            }
        };
        Ok(RhsFunction { label: self.to_string(), form })
    }
}

impl fmt::Display for RhsCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsCatalog::Const => f.write_str("const"),
            RhsCatalog::Poly2 => f.write_str("poly2"),
            RhsCatalog::Linear => f.write_str("linear"),
            RhsCatalog::Lifted => f.write_str("lifted"),
            RhsCatalog::Sin(k) => write!(f, "sin:{k}"),
            RhsCatalog::Eigen(k) => write!(f, "eigen:{k}"),
            RhsCatalog::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RhsForm {
    /// exact form; `A` can be applied symbolically
    Symbolic(TrigPoly),
    /// callable only; traces need finite differences
    Sampled(ScalarFn),
    /// a discrete eigenvector, defined on the grid only
    Eigen(usize),
}

#[derive(Clone)]
pub struct RhsFunction {
    label: String,
    form: RhsForm,
}

impl fmt::Debug for RhsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RhsFunction({})", self.label)
    }
}

impl RhsFunction {
    pub fn from_fn(label: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RhsFunction { label: label.into(), form: RhsForm::Sampled(Arc::new(func)) }
    }

    pub fn symbolic(label: impl Into<String>, f: TrigPoly) -> Self {
        RhsFunction { label: label.into(), form: RhsForm::Symbolic(f) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn form(&self) -> &RhsForm {
        &self.form
    }

    /// Pointwise value; `None` for grid-only eigenvectors.
    pub fn eval(&self, x: f64) -> Option<f64> {
        match &self.form {
            RhsForm::Symbolic(p) => Some(p.eval(x)),
            RhsForm::Sampled(f) => Some(f(x)),
            RhsForm::Eigen(_) => None,
        }
    }

    /// Grid samples; eigenvector entries are taken from `dec`.
    pub fn sample(&self, grid: &Grid, dec: Option<&SpectralDecomposition>) -> Result<Vec<f64>> {
        match &self.form {
            RhsForm::Eigen(k) => {
                let dec = dec.ok_or_else(|| FracError::InvalidArgument(format!("{} needs a decomposition", self.label)))?;
                if *k > dec.len() {
                    return invalid(format!("{}: only {} eigenvectors available", self.label, dec.len()));
                }
                Ok(dec.eigenvector(k - 1).to_vec())
            }
            _ => {
                let v = grid.sample(|x| self.eval(x).expect("pointwise form"));
                if v.iter().any(|x| !x.is_finite()) {
                    return invalid(format!("{} is not finite on the grid", self.label));
                }
                Ok(v)
            }
        }
    }
}

/// Natural cubic spline through `(x_i, y_i)`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return invalid("a spline needs at least three (x, f) samples");
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("spline abscissae must be strictly increasing");
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut off = vec![0.0; k.saturating_sub(1)];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                diag[i - 1] = (h0 + h1) / 3.0;
                if i < n - 2 {
                    off[i - 1] = h1 / 6.0;
                }
                rhs[i - 1] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            }
            let inner = solve_shifted_spd(&diag, &off, 0.0, &rhs)?;
            m[1..n - 1].copy_from_slice(&inner);
        }
        Ok(CubicSpline { x, y, m })
    }

    /// Reads two numeric columns `x,f`; non-numeric lines (headers) are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| FracError::InvalidArgument(format!("{}: {e}", path.display())))?;
        let mut pts = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| FracError::InvalidArgument(format!("{}: {e}", path.display())))?;
            let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
            if let (Some(x), Some(f)) = (parse(0), parse(1)) {
                pts.push((x, f));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, y) = pts.into_iter().unzip();
        CubicSpline::new(x, y)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x[1..n - 1].partition_point(|&k| k <= t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - t) / h, (t - x0) / h);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_uniform_grid, Layout};
    use std::f64::consts::PI;
    use std::io::Write;

    #[test]
    fn catalog_round_trip() {
        for s in ["const", "poly2", "linear", "lifted", "sin:3", "eigen:2"] {
            assert_eq!(RhsCatalog::parse(s).unwrap().to_string(), s);
        }
        assert!(RhsCatalog::parse("sin:0").is_err());
        assert!(RhsCatalog::parse("cubic").is_err());
        assert!(RhsCatalog::parse("custom:").is_err());
    }

    #[test]
    fn catalog_values() {
        let f = RhsCatalog::Poly2.realize(0.0, PI).unwrap();
        assert!((f.eval(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(f.eval(0.0).unwrap().abs() < 1e-15);
        let l = RhsCatalog::Lifted.realize(1.0, 3.0).unwrap();
        assert!(l.eval(1.0).unwrap().abs() < 1e-15 && l.eval(3.0).unwrap().abs() < 1e-15);
        assert!((l.eval(2.0).unwrap() - 2.0).abs() < 1e-15);
        let s = RhsCatalog::Sin(2).realize(1.0, 2.0).unwrap();
        assert!((s.eval(1.25).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let x: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let y: Vec<f64> = x.iter().map(|t| (2.0 * t).sin()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        assert!((s.eval(0.513) - (1.026f64).sin()).abs() < 1e-5);
        assert!(CubicSpline::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn custom_csv_with_header() {
        let mut file = std::env::temp_dir();
        file.push(format!("fraclab-rhs-{}.csv", std::process::id()));
        {
            let mut w = std::fs::File::create(&file).unwrap();
            writeln!(w, "x,f").unwrap();
            for i in 0..=64 {
                let x = PI * i as f64 / 64.0;
                writeln!(w, "{x},{}", x.sin()).unwrap();
            }
        }
        let f = RhsCatalog::parse(&format!("custom:{}", file.display())).unwrap().realize(0.0, PI).unwrap();
        assert!((f.eval(1.0).unwrap() - 1f64.sin()).abs() < 1e-5);
        assert!(RhsCatalog::Custom(file.clone()).realize(0.0, 4.0).is_err());
        std::fs::remove_file(file).ok();
    }

    #[test]
    fn eigen_needs_decomposition() {
        let g = build_uniform_grid(0.0, 1.0, 8, Layout::NodeCentered).unwrap();
        let f = RhsCatalog::Eigen(1).realize(0.0, 1.0).unwrap();
        assert!(f.sample(&g, None).is_err());
        assert!(f.eval(0.5).is_none());
    }
}
