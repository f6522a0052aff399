//! Exact arithmetic on sums of `p(x)·cos(ω(x − s))` and `p(x)·sin(ω(x − s))`
//! with polynomial `p`, closed under differentiation and multiplication by
//! polynomials. Used to apply `A = −(a u')' + c u` with polynomial `a`, `c`
//! to catalog right-hand sides and read off exact boundary traces.

/// Polynomial coefficients in ascending powers of `x`.
pub type Poly = Vec<f64>;

pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn poly_deriv(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

pub fn poly_mul(p: &[f64], q: &[f64]) -> Poly {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub poly: Poly,
    pub omega: f64,
    pub shift: f64,
    pub kind: Trig,
}

impl TrigTerm {
    fn phase(&self, x: f64) -> f64 {
        let t = self.omega * (x - self.shift);
        match self.kind {
            Trig::Cos => t.cos(),
            Trig::Sin => t.sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn polynomial(p: Poly) -> Self {
        TrigPoly { terms: vec![TrigTerm { poly: p, omega: 0.0, shift: 0.0, kind: Trig::Cos }] }
    }

    pub fn trig(poly: Poly, omega: f64, shift: f64, kind: Trig) -> Self {
        TrigPoly { terms: vec![TrigTerm { poly, omega, shift, kind }] }
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| poly_eval(&t.poly, x) * t.phase(x)).sum()
    }

    pub fn add(mut self, other: TrigPoly) -> Self {
        self.terms.extend(other.terms);
        self.simplify()
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.poly.iter_mut().for_each(|c| *c *= s));
        self
    }

    pub fn mul_poly(&self, p: &[f64]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm { poly: poly_mul(&t.poly, p), ..t.clone() })
            .collect();
        TrigPoly { terms }.simplify()
    }

    pub fn derivative(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            terms.push(TrigTerm { poly: poly_deriv(&t.poly), ..t.clone() });
            if t.omega != 0.0 {
                // (cos)' = −ω sin, (sin)' = ω cos
                let (kind, sign) = match t.kind {
                    Trig::Cos => (Trig::Sin, -t.omega),
                    Trig::Sin => (Trig::Cos, t.omega),
                };
                terms.push(TrigTerm { poly: t.poly.iter().map(|c| sign * c).collect(), omega: t.omega, shift: t.shift, kind });
            }
        }
        TrigPoly { terms }.simplify()
    }

    /// `−(a f')' + c f`.
    pub fn apply_elliptic(&self, a: &[f64], c: &[f64]) -> Self {
        let flux = self.derivative().mul_poly(a);
        flux.derivative().scale(-1.0).add(self.mul_poly(c))
    }

    /// Merges terms with identical frequency, shift and kind; drops zero terms.
    fn simplify(self) -> Self {
        let mut out: Vec<TrigTerm> = Vec::new();
        for t in self.terms {
            if t.kind == Trig::Sin && t.omega == 0.0 {
                continue;
            }
            match out.iter_mut().find(|o| o.omega == t.omega && o.shift == t.shift && o.kind == t.kind) {
                Some(o) => {
                    if o.poly.len() < t.poly.len() {
                        o.poly.resize(t.poly.len(), 0.0);
                    }
                    o.poly.iter_mut().zip(&t.poly).for_each(|(a, b)| *a += b);
                }
                None => out.push(t),
            }
        }
        for o in &mut out {
            while o.poly.last() == Some(&0.0) {
                o.poly.pop();
            }
        }
        out.retain(|o| !o.poly.is_empty());
        TrigPoly { terms: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_calculus() {
        assert_eq!(poly_eval(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(poly_deriv(&[1.0, 2.0, 3.0]), vec![2.0, 6.0]);
        assert_eq!(poly_mul(&[1.0, 1.0], &[-1.0, 1.0]), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn laplacian_of_parabola() {
        // f = x(π − x), −f'' = 2
        let f = TrigPoly::polynomial(vec![0.0, PI, -1.0]);
        let af = f.apply_elliptic(&[1.0], &[0.0]);
        assert!((af.eval(0.3) - 2.0).abs() < 1e-15);
        assert!(af.apply_elliptic(&[1.0], &[0.0]).terms().is_empty());
    }

    #[test]
    fn sine_is_an_eigenfunction() {
        let f = TrigPoly::trig(vec![1.0], 3.0, 0.5, Trig::Sin);
        let af = f.apply_elliptic(&[1.0], &[0.0]);
        for x in [0.1, 0.7, 2.0] {
            assert!((af.eval(x) - 9.0 * f.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn variable_coefficient_matches_finite_differences() {
        let f = TrigPoly::trig(vec![0.0, 1.0], 2.0, 0.0, Trig::Cos);
        let (a, c) = (vec![1.0, 0.5], vec![0.3]);
        let af = f.apply_elliptic(&a, &c);
        let x = 0.8;
        let h = 1e-4;
        let flux = |y: f64| poly_eval(&a, y) * (f.eval(y + h) - f.eval(y - h)) / (2.0 * h);
        let fd = -(flux(x + h) - flux(x - h)) / (2.0 * h) + 0.3 * f.eval(x);
        assert!((af.eval(x) - fd).abs() < 1e-5);
    }
}
