//! Closed-form scalar and vector fields: parsed expressions with symbolic
//! derivatives, the built-in catalog, and manufactured forcing.

mod ast;
pub mod catalog;
mod parser;

pub use ast::{Expr, Func, Var};
pub use catalog::{Catalog, TimeProfile};
pub use parser::parse_components;

use crate::{Error, Point, Result};

/// Value and derivatives of a field at one point. Scalars use component 0.
///
/// `grad[c][i] = d_i f_c`, `hess[c][i][j] = d_i d_j f_c`, `dt[c] = d_t f_c`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 3],
    pub hess: [[[f64; 3]; 3]; 3],
    pub dt: [f64; 3],
}

impl Jet {
    pub fn divergence(&self) -> f64 {
        self.grad[0][0] + self.grad[1][1] + self.grad[2][2]
    }

    pub fn laplacian(&self, c: usize) -> f64 {
        self.hess[c][0][0] + self.hess[c][1][1] + self.hess[c][2][2]
    }
}

/// A parsed expression together with its precomputed symbolic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    text: String,
    comps: Vec<Expr>,
    grad: Vec<[Expr; 3]>,
    hess: Vec<[[Expr; 3]; 3]>,
    dt: Vec<Expr>,
}

impl Parsed {
    fn from_components(text: String, comps: Vec<Expr>) -> Self {
        let grad: Vec<[Expr; 3]> = comps
            .iter()
            .map(|e| Var::SPACE.map(|v| e.derivative(v)))
            .collect();
        let hess = grad
            .iter()
            .map(|g| {
                let mut h: [[Expr; 3]; 3] = Default::default();
                for i in 0..3 {
                    for j in 0..3 {
                        h[i][j] = g[i].derivative(Var::SPACE[j]);
                    }
                }
                h
            })
            .collect();
        let dt = comps.iter().map(|e| e.derivative(Var::T)).collect();
        Parsed {
            text,
            comps,
            grad,
            hess,
            dt,
        }
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Num(0.0)
    }
}

/// Source of a manufactured forcing evaluated from jets of (w, q).
#[derive(Debug, Clone, PartialEq)]
pub struct JetForcing {
    pub velocity: Box<FieldExpression>,
    pub pressure: Box<FieldExpression>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpression {
    Parsed(Parsed),
    Catalog(Catalog),
    /// `d_t w + w . grad w - mu lap w + grad q` evaluated pointwise; values only.
    Forcing(JetForcing),
}

fn check_finite(point: Point, v: [f64; 3]) -> Result<[f64; 3]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            point,
            msg: "non-finite value".into(),
        })
    }
}

impl FieldExpression {
    pub fn parse(text: &str) -> Result<Self> {
        let comps = parse_components(text)?;
        Ok(FieldExpression::Parsed(Parsed::from_components(text.to_string(), comps)))
    }

    /// Catalog name first, otherwise an expression.
    pub fn resolve(text: &str) -> Result<Self> {
        match Catalog::lookup(text) {
            Some(c) => Ok(FieldExpression::Catalog(c)),
            None => FieldExpression::parse(text),
        }
    }

    pub fn catalog(name: &str) -> Self {
        FieldExpression::Catalog(Catalog::lookup(name).unwrap_or_else(|| panic!("unknown catalog field {name}")))
    }

    pub fn from_components(comps: Vec<Expr>) -> Self {
        let text = if comps.len() == 1 {
            comps[0].to_string()
        } else {
            format!("({}, {}, {})", comps[0], comps[1], comps[2])
        };
        FieldExpression::Parsed(Parsed::from_components(text, comps))
    }

    pub fn arity(&self) -> usize {
        match self {
            FieldExpression::Parsed(p) => p.comps.len(),
            FieldExpression::Catalog(c) => c.arity(),
            FieldExpression::Forcing(_) => 3,
        }
    }

    /// Text form: the source text for parsed fields, the name for catalog fields.
    pub fn describe(&self) -> String {
        match self {
            FieldExpression::Parsed(p) => p.text.clone(),
            FieldExpression::Catalog(c) => c.name(),
            FieldExpression::Forcing(f) => format!(
                "forcing(w = {}, q = {}, mu = {:?})",
                f.velocity.describe(),
                f.pressure.describe(),
                f.mu
            ),
        }
    }

    /// Fully parenthesised expression text that parses back to the same values.
    pub fn print(&self) -> Option<String> {
        match self {
            FieldExpression::Parsed(p) => Some(if p.comps.len() == 1 {
                p.comps[0].to_string()
            } else {
                format!("({}, {}, {})", p.comps[0], p.comps[1], p.comps[2])
            }),
            _ => None,
        }
    }

    pub fn eval(&self, p: Point, t: f64) -> Result<[f64; 3]> {
        let v = match self {
            FieldExpression::Parsed(e) => {
                let vars = [p[0], p[1], p[2], t];
                let mut out = [0.0; 3];
                for (o, c) in out.iter_mut().zip(&e.comps) {
                    *o = c.eval(&vars);
                }
                out
            }
            FieldExpression::Catalog(c) => c.jet(p, t).value,
            FieldExpression::Forcing(f) => {
                let w = f.velocity.jet(p, t)?;
                let q = f.pressure.jet(p, t)?;
                let mut out = [0.0; 3];
                for (c, o) in out.iter_mut().enumerate() {
                    let conv: f64 = (0..3).map(|j| w.value[j] * w.grad[c][j]).sum();
                    *o = w.dt[c] + conv - f.mu * w.laplacian(c) + q.grad[0][c];
                }
                out
            }
        };
        check_finite(p, v)
    }

    /// Value, gradient, Hessian and time derivative at `(p, t)`.
    pub fn jet(&self, p: Point, t: f64) -> Result<Jet> {
        match self {
            FieldExpression::Parsed(e) => {
                let vars = [p[0], p[1], p[2], t];
                let mut jet = Jet::default();
                for c in 0..e.comps.len() {
                    jet.value[c] = e.comps[c].eval(&vars);
                    jet.dt[c] = e.dt[c].eval(&vars);
                    for i in 0..3 {
                        jet.grad[c][i] = e.grad[c][i].eval(&vars);
                        for j in 0..3 {
                            jet.hess[c][i][j] = e.hess[c][i][j].eval(&vars);
                        }
                    }
                }
                let finite = jet.value.iter().chain(jet.dt.iter()).all(|v| v.is_finite())
                    && jet.grad.iter().flatten().all(|v| v.is_finite())
                    && jet.hess.iter().flatten().flatten().all(|v| v.is_finite());
                if finite {
                    Ok(jet)
                } else {
                    Err(Error::Evaluation {
                        point: p,
                        msg: "non-finite derivative".into(),
                    })
                }
            }
            FieldExpression::Catalog(c) => Ok(c.jet(p, t)),
            FieldExpression::Forcing(_) => Err(Error::UnsupportedExpression(
                "derivatives of a jet-evaluated forcing are not available".into(),
            )),
        }
    }

    /// Symbolic derivative of every component (parsed fields only).
    pub fn differentiate(&self, var: Var, order: usize) -> Result<FieldExpression> {
        match self {
            FieldExpression::Parsed(p) => Ok(FieldExpression::from_components(
                p.comps.iter().map(|e| e.differentiate(var, order)).collect(),
            )),
            other => Err(Error::UnsupportedExpression(format!(
                "{} has no symbolic form",
                other.describe()
            ))),
        }
    }
}

/// Forcing `f = d_t w + w . grad w - mu lap w + grad q` that makes `(w, q)`
/// an exact solution of the forced Navier-Stokes system.
///
/// Parsed inputs give a symbolic result; otherwise the forcing is evaluated
/// pointwise from the fields' jets.
pub fn manufactured_forcing(w: &FieldExpression, q: &FieldExpression, mu: f64) -> Result<FieldExpression> {
    if w.arity() != 3 || q.arity() != 1 {
        return Err(Error::InvalidArgument(format!(
            "manufactured forcing needs a vector velocity and scalar pressure, got arities {} and {}",
            w.arity(),
            q.arity()
        )));
    }
    match (w, q) {
        (FieldExpression::Parsed(wp), FieldExpression::Parsed(qp)) => {
            let comps = (0..3)
                .map(|c| {
                    let mut f = wp.dt[c].clone();
                    for j in 0..3 {
                        f = Expr::add(f, Expr::mul(wp.comps[j].clone(), wp.grad[c][j].clone()));
                    }
                    let lap = (0..3).fold(Expr::num(0.0), |acc, j| Expr::add(acc, wp.hess[c][j][j].clone()));
                    f = Expr::sub(f, Expr::mul(Expr::num(mu), lap));
                    Expr::add(f, qp.grad[0][c].clone())
                })
                .collect();
            Ok(FieldExpression::from_components(comps))
        }
        _ => Ok(FieldExpression::Forcing(JetForcing {
            velocity: Box::new(w.clone()),
            pressure: Box::new(q.clone()),
            mu,
        })),
    }
}

/// Symbolic text of the vortex pair, used to cross-check the catalog.
pub const VORTEX_TEXT: &str = "(pi*sin(pi*x)^2*sin(2*pi*y)*sin(pi*z)^2, -pi*sin(2*pi*x)*sin(pi*y)^2*sin(pi*z)^2, 0)";
pub const VORTEX_PRESSURE_TEXT: &str = "cos(pi*x)*cos(pi*y)*cos(pi*z)";

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
    }

    #[test]
    fn first_derivative() {
        let f = FieldExpression::parse("x^2").unwrap();
        let d = f.differentiate(Var::X, 1).unwrap();
        assert_eq!(d.eval([2.0, 0.0, 0.0], 0.0).unwrap()[0], 4.0);
    }

    #[test]
    fn second_derivative_matches_central_difference() {
        let f = FieldExpression::parse("sin(pi*x)").unwrap();
        let d2 = f.differentiate(Var::X, 2).unwrap();
        let h = 1e-4;
        let v = |x: f64| f.eval([x, 0.0, 0.0], 0.0).unwrap()[0];
        let fd = (v(0.3 + h) - 2.0 * v(0.3) + v(0.3 - h)) / (h * h);
        assert!((d2.eval([0.3, 0.0, 0.0], 0.0).unwrap()[0] - fd).abs() < 1e-6);
    }

    #[test]
    fn mixed_partials_commute() {
        let f = FieldExpression::parse("sin(x*y)*exp(z) + x^3*y/(1+z^2) + cos(x*t)").unwrap();
        for p in random_points(100, 7) {
            let j = f.jet(p, 0.4).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    assert!((j.hess[0][a][b] - j.hess[0][b][a]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn print_round_trip() {
        for text in [
            "(sin(pi*x)*sin(pi*y)*sin(pi*z), 0, 0)",
            "x^2 - 3.5e-3*y/(2 + cos(t)) - -z",
            "exp(-x)*x^(-2) + 1e20*y",
            VORTEX_TEXT,
        ] {
            let f = FieldExpression::parse(text).unwrap();
            let g = FieldExpression::parse(&f.print().unwrap()).unwrap();
            for p in random_points(100, 3) {
                let p = [p[0] + 0.5, p[1], p[2]];
                let (a, b) = (f.eval(p, 0.7).unwrap(), g.eval(p, 0.7).unwrap());
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() <= 1e-14 * a[c].abs().max(1.0), "{text}");
                }
            }
        }
    }

    #[test]
    fn parsed_and_catalog_vortex_agree() {
        let parsed = FieldExpression::parse(VORTEX_TEXT).unwrap();
        let cat = FieldExpression::catalog("vortex");
        let pp = FieldExpression::parse(VORTEX_PRESSURE_TEXT).unwrap();
        let pc = FieldExpression::catalog("vortex_pressure");
        for p in random_points(50, 11) {
            let (a, b) = (parsed.jet(p, 0.0).unwrap(), cat.jet(p, 0.0).unwrap());
            for c in 0..3 {
                assert!((a.value[c] - b.value[c]).abs() < 1e-12);
                for i in 0..3 {
                    assert!((a.grad[c][i] - b.grad[c][i]).abs() < 1e-11);
                    for j in 0..3 {
                        assert!((a.hess[c][i][j] - b.hess[c][i][j]).abs() < 1e-10);
                    }
                }
            }
            let (a, b) = (pp.jet(p, 0.0).unwrap(), pc.jet(p, 0.0).unwrap());
            assert!((a.value[0] - b.value[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn symbolic_divergence_of_vortex_vanishes() {
        let w = FieldExpression::parse(VORTEX_TEXT).unwrap();
        let div = match &w {
            FieldExpression::Parsed(p) => (0..3).fold(Expr::num(0.0), |acc, c| Expr::add(acc, p.grad[c][c].clone())),
            _ => unreachable!(),
        };
        for p in random_points(1000, 5) {
            assert!(div.eval(&[p[0], p[1], p[2], 0.0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn forcing_of_zero_pair_is_zero() {
        let w = FieldExpression::parse("(0, 0, 0)").unwrap();
        let q = FieldExpression::parse("0").unwrap();
        let f = manufactured_forcing(&w, &q, 1.0).unwrap();
        for p in random_points(10, 1) {
            assert_eq!(f.eval(p, 0.0).unwrap(), [0.0; 3]);
        }
    }

    #[test]
    fn forcing_decomposes_into_stokes_part() {
        let w = FieldExpression::parse("(sin(pi*y)*t, x^2*z, cos(x+y))").unwrap();
        let q = FieldExpression::parse("x*y*z").unwrap();
        let mu = 0.3;
        let f = manufactured_forcing(&w, &q, mu).unwrap();
        for p in random_points(50, 2) {
            let t = 0.4;
            let (wj, qj) = (w.jet(p, t).unwrap(), q.jet(p, t).unwrap());
            let fv = f.eval(p, t).unwrap();
            for c in 0..3 {
                let stokes = -mu * wj.laplacian(c) + qj.grad[0][c];
                let conv: f64 = (0..3).map(|j| wj.value[j] * wj.grad[c][j]).sum();
                assert!((fv[c] - stokes - (wj.dt[c] + conv)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symbolic_and_jet_forcing_agree() {
        let mu = 0.7;
        let sym = manufactured_forcing(
            &FieldExpression::parse(VORTEX_TEXT).unwrap(),
            &FieldExpression::parse(VORTEX_PRESSURE_TEXT).unwrap(),
            mu,
        )
        .unwrap();
        let cat = manufactured_forcing(
            &FieldExpression::catalog("vortex"),
            &FieldExpression::catalog("vortex_pressure"),
            mu,
        )
        .unwrap();
        assert!(matches!(sym, FieldExpression::Parsed(_)));
        assert!(matches!(cat, FieldExpression::Forcing(_)));
        for p in random_points(100, 9) {
            let (a, b) = (sym.eval(p, 0.0).unwrap(), cat.eval(p, 0.0).unwrap());
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn evaluation_failure_reports_point() {
        let f = FieldExpression::parse("1/x").unwrap();
        match f.eval([0.0, 0.5, 0.5], 0.0) {
            Err(Error::Evaluation { point, .. }) => assert_eq!(point, [0.0, 0.5, 0.5]),
            other => panic!("{other:?}"),
        }
    }
}
