//! Quadrature on the reference tetrahedron {x, y, z >= 0, x + y + z <= 1}.
//!
//! Degrees 1 and 2 use the classical centroid and 4-point rules. Higher
//! degrees use a collapsed (Duffy) tensor product of Gauss-Legendre rules,
//! which has positive weights and is exact for every polynomial of the
//! requested total degree.

use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn collapsed(degree: usize) -> QuadratureRule {
    // x = u, y = (1-u) v, z = (1-u)(1-v) w with Jacobian (1-u)^2 (1-v):
    // the integrand has degree d+2 in u, d+1 in v and d in w.
    let pts = |d: usize| d / 2 + 1;
    let (gu, wu) = gauss_legendre(pts(degree + 2));
    let (gv, wv) = gauss_legendre(pts(degree + 1));
    let (gw, ww) = gauss_legendre(pts(degree));
    let mut points = Vec::with_capacity(gu.len() * gv.len() * gw.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (&u, &a) in gu.iter().zip(&wu) {
        for (&v, &b) in gv.iter().zip(&wv) {
            for (&w, &c) in gw.iter().zip(&ww) {
                let x = u;
                let y = (1.0 - u) * v;
                let z = (1.0 - u) * (1.0 - v) * w;
                points.push([x, y, z]);
                weights.push(a * b * c * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    QuadratureRule { points, weights, degree }
}

/// A rule exact for all polynomials of total degree `degree` (1..=10).
pub fn make_quadrature(degree: usize) -> Result<QuadratureRule> {
    match degree {
        1 => Ok(QuadratureRule {
            points: vec![[0.25; 3]],
            weights: vec![1.0 / 6.0],
            degree,
        }),
        2 => {
            let a = 0.138_196_601_125_010_5;
            let b = 0.585_410_196_624_968_5;
            Ok(QuadratureRule {
                points: vec![[a, a, a], [b, a, a], [a, b, a], [a, a, b]],
                weights: vec![1.0 / 24.0; 4],
                degree,
            })
        }
        3..=10 => Ok(collapsed(degree)),
        _ => Err(Error::UnsupportedDegree(degree)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Closed form: int x^a y^b z^c over the reference tet = a! b! c! / (a+b+c+3)!.
    fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
        factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
    }

    #[test]
    fn centroid_rule() {
        let q = make_quadrature(1).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.weights[0], 1.0 / 6.0);
    }

    #[test]
    fn weights_sum_to_reference_volume() {
        for d in 1..=10 {
            let q = make_quadrature(d).unwrap();
            let s: f64 = q.weights.iter().sum();
            assert!((s - 1.0 / 6.0).abs() < 1e-15, "degree {d}");
            assert!(q.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn x_squared() {
        let q = make_quadrature(2).unwrap();
        let v: f64 = q.iter().map(|(p, w)| w * p[0] * p[0]).sum();
        assert!((v - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn exact_on_all_monomials() {
        for d in 1..=10u32 {
            let q = make_quadrature(d as usize).unwrap();
            for a in 0..=d {
                for b in 0..=d - a {
                    for c in 0..=d - a - b {
                        let v: f64 = q
                            .iter()
                            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                            .sum();
                        let exact = monomial_integral(a, b, c);
                        assert!((v - exact).abs() < 1e-13, "degree {d}: x^{a} y^{b} z^{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn sum_power_eight() {
        // (x+y+z)^8 integrates to 1/22 (s^8 * s^2/2 ds over [0,1]).
        let q = make_quadrature(8).unwrap();
        let v: f64 = q.iter().map(|(p, w)| w * (p[0] + p[1] + p[2]).powi(8)).sum();
        assert!((v - 1.0 / 22.0).abs() < 1e-13);
    }

    #[test]
    fn unsupported_degrees() {
        assert!(make_quadrature(0).is_err());
        assert!(make_quadrature(11).is_err());
    }
}
