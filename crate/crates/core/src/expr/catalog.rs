//! Named closed-form fields with hand-written derivatives.
//!
//! Every catalog field is a sum of separable products `c * f(x) g(y) h(z)`
//! times a time profile, so first and second derivatives follow from the
//! one-dimensional factor derivatives below without symbolic machinery.

use std::f64::consts::PI;

use super::Jet;
use crate::Point;

/// One-dimensional factor; `eval` returns value, first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    One,
    Ident,
    /// sin(k s)
    Sin(f64),
    /// cos(k s)
    Cos(f64),
    /// sin(k s)^2
    SinSq(f64),
}

impl Factor {
    fn eval(self, s: f64) -> [f64; 3] {
        match self {
            Factor::One => [1.0, 0.0, 0.0],
            Factor::Ident => [s, 1.0, 0.0],
            Factor::Sin(k) => {
                let (sn, cs) = (k * s).sin_cos();
                [sn, k * cs, -k * k * sn]
            }
            Factor::Cos(k) => {
                let (sn, cs) = (k * s).sin_cos();
                [cs, -k * sn, -k * k * cs]
            }
            Factor::SinSq(k) => {
                let sn = (k * s).sin();
                let (s2, c2) = (2.0 * k * s).sin_cos();
                [sn * sn, k * s2, 2.0 * k * k * c2]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    factors: [Factor; 3],
}

impl Term {
    fn new(coef: f64, fx: Factor, fy: Factor, fz: Factor) -> Self {
        Term {
            coef,
            factors: [fx, fy, fz],
        }
    }
}

/// Time dependence `g(t)` multiplying a catalog field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Steady,
    /// g(t) = cos(omega t)
    Cos(f64),
}

impl TimeProfile {
    /// (g(t), g'(t))
    pub fn eval(self, t: f64) -> (f64, f64) {
        match self {
            TimeProfile::Steady => (1.0, 0.0),
            TimeProfile::Cos(w) => ((w * t).cos(), -w * (w * t).sin()),
        }
    }
}

/// Angular frequency of the `*_pulse` manufactured pair.
pub const PULSE_OMEGA: f64 = 8.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Catalog {
    /// Vector zero field.
    Zero,
    /// Scalar zero field.
    ZeroScalar,
    Constant([f64; 3]),
    /// (x, 0, 0)
    Linear,
    /// (-y, x, 0)
    Rotation,
    /// sin(pi x) sin(pi y) sin(pi z) (1, 0, 0)
    Sine,
    /// Divergence-free, zero-trace velocity
    /// (pi s(x)^2 sin(2 pi y) s(z)^2, -pi sin(2 pi x) s(y)^2 s(z)^2, 0), s = sin(pi .).
    Vortex(TimeProfile),
    /// Zero-mean pressure cos(pi x) cos(pi y) cos(pi z) paired with `Vortex`.
    VortexPressure(TimeProfile),
}

impl Catalog {
    /// Resolves a catalog name. A trailing `_catalog` is accepted and ignored.
    pub fn lookup(name: &str) -> Option<Catalog> {
        let name = name.trim();
        let name = name.strip_suffix("_catalog").unwrap_or(name);
        if let Some(rest) = name.strip_prefix("const:") {
            let vals: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .ok()?;
            return match vals.as_slice() {
                &[a, b, c] => Some(Catalog::Constant([a, b, c])),
                _ => None,
            };
        }
        Some(match name {
            "zero" => Catalog::Zero,
            "zero_scalar" => Catalog::ZeroScalar,
            "linear" => Catalog::Linear,
            "rotation" => Catalog::Rotation,
            "sine" => Catalog::Sine,
            "vortex" => Catalog::Vortex(TimeProfile::Steady),
            "vortex_pressure" => Catalog::VortexPressure(TimeProfile::Steady),
            "vortex_pulse" => Catalog::Vortex(TimeProfile::Cos(PULSE_OMEGA)),
            "vortex_pulse_pressure" => Catalog::VortexPressure(TimeProfile::Cos(PULSE_OMEGA)),
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Catalog::Zero => "zero".into(),
            Catalog::ZeroScalar => "zero_scalar".into(),
            Catalog::Constant([a, b, c]) => format!("const:{a:?},{b:?},{c:?}"),
            Catalog::Linear => "linear".into(),
            Catalog::Rotation => "rotation".into(),
            Catalog::Sine => "sine".into(),
            Catalog::Vortex(TimeProfile::Steady) => "vortex".into(),
            Catalog::VortexPressure(TimeProfile::Steady) => "vortex_pressure".into(),
            Catalog::Vortex(_) => "vortex_pulse".into(),
            Catalog::VortexPressure(_) => "vortex_pulse_pressure".into(),
        }
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "zero",
            "zero_scalar",
            "const:a,b,c",
            "linear",
            "rotation",
            "sine",
            "vortex",
            "vortex_pressure",
            "vortex_pulse",
            "vortex_pulse_pressure",
        ]
    }

    pub fn arity(&self) -> usize {
        match self {
            Catalog::ZeroScalar | Catalog::VortexPressure(_) => 1,
            _ => 3,
        }
    }

    fn profile(&self) -> TimeProfile {
        match self {
            Catalog::Vortex(p) | Catalog::VortexPressure(p) => *p,
            _ => TimeProfile::Steady,
        }
    }

    fn terms(&self) -> Vec<Vec<Term>> {
        use Factor::*;
        match self {
            Catalog::Zero => vec![vec![], vec![], vec![]],
            Catalog::ZeroScalar => vec![vec![]],
            Catalog::Constant(c) => c.iter().map(|&v| vec![Term::new(v, One, One, One)]).collect(),
            Catalog::Linear => vec![vec![Term::new(1.0, Ident, One, One)], vec![], vec![]],
            Catalog::Rotation => vec![
                vec![Term::new(-1.0, One, Ident, One)],
                vec![Term::new(1.0, Ident, One, One)],
                vec![],
            ],
            Catalog::Sine => vec![vec![Term::new(1.0, Sin(PI), Sin(PI), Sin(PI))], vec![], vec![]],
            Catalog::Vortex(_) => vec![
                vec![Term::new(PI, SinSq(PI), Sin(2.0 * PI), SinSq(PI))],
                vec![Term::new(-PI, Sin(2.0 * PI), SinSq(PI), SinSq(PI))],
                vec![],
            ],
            Catalog::VortexPressure(_) => vec![vec![Term::new(1.0, Cos(PI), Cos(PI), Cos(PI))]],
        }
    }

    pub fn jet(&self, p: Point, t: f64) -> Jet {
        let (g, dg) = self.profile().eval(t);
        let mut jet = Jet::default();
        for (c, terms) in self.terms().iter().enumerate() {
            for term in terms {
                let f: Vec<[f64; 3]> = (0..3).map(|d| term.factors[d].eval(p[d])).collect();
                // Product with derivative orders `o` along each axis.
                let prod = |o: [usize; 3]| term.coef * f[0][o[0]] * f[1][o[1]] * f[2][o[2]];
                let v = prod([0, 0, 0]);
                jet.value[c] += g * v;
                jet.dt[c] += dg * v;
                for i in 0..3 {
                    let mut o = [0; 3];
                    o[i] += 1;
                    jet.grad[c][i] += g * prod(o);
                    for j in 0..3 {
                        let mut o2 = o;
                        o2[j] += 1;
                        jet.hess[c][i][j] += g * prod(o2);
                    }
                }
            }
        }
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(field: &Catalog) {
        let h = 1e-5;
        let pts = [[0.13, 0.71, 0.37], [0.5, 0.25, 0.9], [0.83, 0.08, 0.44]];
        for p in pts {
            for t in [0.0, 0.3] {
                let j = field.jet(p, t);
                for i in 0..3 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[i] += h;
                    pm[i] -= h;
                    let (jp, jm) = (field.jet(pp, t), field.jet(pm, t));
                    for c in 0..3 {
                        let fd = (jp.value[c] - jm.value[c]) / (2.0 * h);
                        assert!((fd - j.grad[c][i]).abs() < 1e-6, "{field:?} grad");
                        for k in 0..3 {
                            let fd2 = (jp.grad[c][k] - jm.grad[c][k]) / (2.0 * h);
                            assert!((fd2 - j.hess[c][k][i]).abs() < 1e-5, "{field:?} hess");
                        }
                    }
                }
                let (jp, jm) = (field.jet(p, t + h), field.jet(p, t - h));
                for c in 0..3 {
                    assert!(((jp.value[c] - jm.value[c]) / (2.0 * h) - j.dt[c]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for name in ["linear", "rotation", "sine", "vortex", "vortex_pressure", "vortex_pulse", "vortex_pulse_pressure"] {
            fd_check(&Catalog::lookup(name).unwrap());
        }
    }

    #[test]
    fn lookup_round_trips() {
        for name in ["zero", "linear", "rotation", "sine", "vortex", "vortex_pulse_pressure", "const:1.0,2.0,2.0"] {
            assert_eq!(Catalog::lookup(name).unwrap().name(), name);
        }
        assert_eq!(Catalog::lookup("sine_catalog"), Some(Catalog::Sine));
        assert_eq!(Catalog::lookup("const:1,2"), None);
        assert_eq!(Catalog::lookup("nope"), None);
    }

    #[test]
    fn vortex_is_divergence_free_and_zero_on_boundary() {
        let w = Catalog::lookup("vortex").unwrap();
        let mut s = 0.123_f64;
        for _ in 0..1000 {
            let mut p = [0.0; 3];
            for v in p.iter_mut() {
                s = (s * 9301.0 + 49297.0) % 233280.0;
                *v = s / 233280.0;
            }
            let j = w.jet(p, 0.0);
            let div = j.grad[0][0] + j.grad[1][1] + j.grad[2][2];
            assert!(div.abs() <= 1e-12);
            for d in 0..3 {
                for side in [0.0, 1.0] {
                    let mut q = p;
                    q[d] = side;
                    let v = w.jet(q, 0.0).value;
                    assert!(v.iter().all(|c| c.abs() < 1e-14));
                }
            }
        }
    }
}
