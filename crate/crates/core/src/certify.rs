//! Regularity certificate for a computed trajectory.
//!
//! Given the computed norm `M`, the certificate evaluates
//!
//! ```text
//! alpha(s) = 1 / [C1* + C1* (C0 + (C0 + 1) s)^9]^2
//! beta(s)  = C1 + C1 s^15
//! phi(s)   = alpha(beta(s)),   Phi(s) = beta(C0 beta(s) + s + C0)
//! tau_M    = min(phi(M)/2, 1/(8 max(C2, C3) Phi(M)^8), exp(-C9 Phi(M)^8)/2)
//! h_M      = exp(-2 C9 Phi(M)^8)/4
//! ```
//!
//! and checks `M_lhs <= M`, `tau < tau_M`, `h < h_M` and the energy ledger.
//! All evaluation happens on logarithms: `ln alpha`, `ln beta`, `ln phi` and
//! `ln Phi` always fit in an `f64`, while `ln tau_M` and `ln h_M` can exceed
//! it and are carried as [`WideReal`].

use std::fmt::Write as _;

use crate::expr::FieldExpression;
use crate::fespace::SpacePair;
use crate::norms::{energy_ledger, expr_sobolev_norm, linf_time_norm, LedgerStatus, NormKind};
use crate::stepper::Trajectory;
use crate::wide::WideReal;
use crate::{Error, Result};

pub const CONSTANT_NAMES: [&str; 11] = ["C0", "C1", "C1star", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9"];

const DEFAULT_PROVENANCE: &str = "default 1 (existence-only constant, no value available)";

/// Explicit values of the constants of the analysis, with a provenance note each.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsLedger {
    pub values: [f64; 11],
    pub provenance: [String; 11],
    pub mu: f64,
}

impl ConstantsLedger {
    pub fn all_ones(mu: f64) -> Self {
        ConstantsLedger {
            values: [1.0; 11],
            provenance: std::array::from_fn(|_| DEFAULT_PROVENANCE.to_string()),
            mu,
        }
    }

    fn index(name: &str) -> Result<usize> {
        CONSTANT_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown constant `{name}`")))
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(self.values[Self::index(name)?])
    }

    pub fn set(&mut self, name: &str, value: f64, provenance: &str) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!("constant {name} must be positive and finite, got {value}")));
        }
        let i = Self::index(name)?;
        self.values[i] = value;
        self.provenance[i] = provenance.to_string();
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value, "user supplied")?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in CONSTANT_NAMES.iter().zip(&self.values) {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("constant {n} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn c0(&self) -> f64 {
        self.values[0]
    }
    pub fn c1(&self) -> f64 {
        self.values[1]
    }
    pub fn c1_star(&self) -> f64 {
        self.values[2]
    }
    pub fn c2(&self) -> f64 {
        self.values[3]
    }
    pub fn c3(&self) -> f64 {
        self.values[4]
    }
    pub fn c9(&self) -> f64 {
        self.values[10]
    }

    pub fn is_all_ones(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`
fn logaddexp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn check_arg(s: f64) {
    assert!(s >= 0.0 && s.is_finite(), "argument must be finite and nonnegative, got {s}");
}

/// `ln alpha(s)` for `ln s` given, `s >= 0` (pass `-inf` for zero).
fn ln_alpha_of_ln(ln_s: f64, l: &ConstantsLedger) -> f64 {
    let c0 = l.c0();
    let ln_y = logaddexp(c0.ln(), (c0 + 1.0).ln() + ln_s);
    -2.0 * (l.c1_star().ln() + softplus(9.0 * ln_y))
}

fn ln_beta_of_ln(ln_s: f64, l: &ConstantsLedger) -> f64 {
    l.c1().ln() + softplus(15.0 * ln_s)
}

pub fn ln_alpha(s: f64, l: &ConstantsLedger) -> f64 {
    check_arg(s);
    ln_alpha_of_ln(s.ln(), l)
}

pub fn ln_beta(s: f64, l: &ConstantsLedger) -> f64 {
    check_arg(s);
    ln_beta_of_ln(s.ln(), l)
}

pub fn ln_phi(s: f64, l: &ConstantsLedger) -> f64 {
    check_arg(s);
    ln_alpha_of_ln(ln_beta(s, l), l)
}

#[allow(non_snake_case)]
pub fn ln_Phi(s: f64, l: &ConstantsLedger) -> f64 {
    check_arg(s);
    let c0 = l.c0();
    let ln_arg = logaddexp(c0.ln() + ln_beta(s, l), (s + c0).ln());
    ln_beta_of_ln(ln_arg, l)
}

pub fn alpha(s: f64, l: &ConstantsLedger) -> WideReal {
    WideReal::from_ln(ln_alpha(s, l))
}

pub fn beta(s: f64, l: &ConstantsLedger) -> WideReal {
    WideReal::from_ln(ln_beta(s, l))
}

pub fn phi(s: f64, l: &ConstantsLedger) -> WideReal {
    WideReal::from_ln(ln_phi(s, l))
}

#[allow(non_snake_case)]
pub fn Phi(s: f64, l: &ConstantsLedger) -> WideReal {
    WideReal::from_ln(ln_Phi(s, l))
}

/// Thresholds `tau_M`, `h_M` with their logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub m: f64,
    pub ln_phi_m: f64,
    pub ln_big_phi_m: f64,
    /// Natural logs of the three candidates for `tau_M`.
    pub ln_tau_terms: [WideReal; 3],
    pub ln_tau_m: WideReal,
    pub ln_h_m: WideReal,
    /// Index (0, 1, 2) of the smallest `tau_M` candidate.
    pub binding_term: usize,
    /// `tau_M` as an `f64`, clamped to the smallest positive normal on underflow.
    pub tau_m: f64,
    pub h_m: f64,
    pub tau_underflow: bool,
    pub h_underflow: bool,
}

fn ln_to_clamped(ln: WideReal) -> (f64, bool) {
    let v = ln.to_f64().exp();
    if v < f64::MIN_POSITIVE {
        (f64::MIN_POSITIVE, true)
    } else {
        (v, false)
    }
}

impl Thresholds {
    pub fn log10_tau_m(&self) -> WideReal {
        self.ln_tau_m.scale(1.0 / std::f64::consts::LN_10)
    }

    pub fn log10_h_m(&self) -> WideReal {
        self.ln_h_m.scale(1.0 / std::f64::consts::LN_10)
    }

    /// `log10(tau) - log10(tau_M)`; positive when `tau >= tau_M`.
    pub fn tau_gap(&self, tau: f64) -> WideReal {
        WideReal::from_f64(tau.log10()).sub(self.log10_tau_m())
    }

    pub fn h_gap(&self, h: f64) -> WideReal {
        WideReal::from_f64(h.log10()).sub(self.log10_h_m())
    }

    pub fn tau_ok(&self, tau: f64) -> bool {
        WideReal::from_f64(tau.ln()) < self.ln_tau_m
    }

    pub fn h_ok(&self, h: f64) -> bool {
        WideReal::from_f64(h.ln()) < self.ln_h_m
    }
}

pub fn thresholds(m: f64, l: &ConstantsLedger) -> Result<Thresholds> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("M must be positive and finite, got {m}")));
    }
    l.validate()?;
    let lp = ln_phi(m, l);
    let lbp = ln_Phi(m, l);
    let ln2 = WideReal::from_f64(std::f64::consts::LN_2);
    // C9 Phi^8, possibly beyond f64.
    let c9_phi8 = WideReal::from_ln(l.c9().ln() + 8.0 * lbp);
    let terms = [
        WideReal::from_f64(lp).sub(ln2),
        WideReal::from_f64(-(8.0f64.ln() + l.c2().max(l.c3()).ln() + 8.0 * lbp)),
        c9_phi8.neg().sub(ln2),
    ];
    let mut binding_term = 0;
    for k in 1..3 {
        if terms[k] < terms[binding_term] {
            binding_term = k;
        }
    }
    let ln_tau_m = terms[binding_term];
    let ln_h_m = c9_phi8.scale(-2.0).sub(WideReal::from_f64(4.0f64.ln()));
    let (tau_m, tau_underflow) = ln_to_clamped(ln_tau_m);
    let (h_m, h_underflow) = ln_to_clamped(ln_h_m);
    Ok(Thresholds {
        m,
        ln_phi_m: lp,
        ln_big_phi_m: lbp,
        ln_tau_terms: terms,
        ln_tau_m,
        ln_h_m,
        binding_term,
        tau_m,
        h_m,
        tau_underflow,
        h_underflow,
    })
}

/// Nonnegative data of a discrete Gronwall inequality
/// `a_{n+1} + tau sum b <= tau sum gamma a + tau sum c + B`, indexed so that
/// entry `m` holds the value at `m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallData {
    pub tau: f64,
    pub b_const: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl GronwallData {
    fn validate(&self) -> Result<()> {
        let n = self.gamma.len();
        if self.b.len() != n || self.c.len() != n {
            return Err(Error::InvalidArgument("sequences b, c, gamma must have equal length".into()));
        }
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !nonneg(self.tau) || !nonneg(self.b_const) {
            return Err(Error::InvalidArgument("tau and B must be nonnegative".into()));
        }
        for (name, seq) in [("b", &self.b), ("c", &self.c), ("gamma", &self.gamma)] {
            if let Some(i) = seq.iter().position(|&v| !nonneg(v)) {
                return Err(Error::InvalidArgument(format!("{name}[{i}] = {} is not nonnegative", seq[i])));
            }
        }
        if let Some(m) = self.gamma.iter().position(|&g| !(self.tau * g < 0.5)) {
            return Err(Error::Precondition(format!(
                "tau * gamma_{} = {} is not below 1/2",
                m + 1,
                self.tau * self.gamma[m]
            )));
        }
        Ok(())
    }

    /// `exp(2 sum_{m<=n} tau gamma_{m+1}) (tau sum_{m<=n} c_{m+1} + B)` for each n.
    pub fn bound(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let (mut sg, mut sc) = (0.0, 0.0);
        Ok(self
            .gamma
            .iter()
            .zip(&self.c)
            .map(|(g, c)| {
                sg += self.tau * g;
                sc += self.tau * c;
                (2.0 * sg).exp() * (sc + self.b_const)
            })
            .collect())
    }

    /// `a_{n+1} + tau sum_{m<=n} b_{m+1}` for a sequence `a` (entry m is a_{m+1}).
    pub fn lhs(&self, a: &[f64]) -> Vec<f64> {
        let mut sb = 0.0;
        a.iter()
            .zip(&self.b)
            .map(|(a, b)| {
                sb += self.tau * b;
                a + sb
            })
            .collect()
    }
}

pub fn gronwall_bound(b: &[f64], c: &[f64], gamma: &[f64], tau: f64, b_const: f64) -> Result<Vec<f64>> {
    GronwallData { tau, b_const, b: b.to_vec(), c: c.to_vec(), gamma: gamma.to_vec() }.bound()
}

/// Norm inputs of the certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateNorms {
    /// `max_n |u^n|_{L4}`
    pub linf_l4: f64,
    /// Full H2 norm of the initial data.
    pub u0_h2: f64,
}

impl CertificateNorms {
    pub fn m_lhs(&self) -> f64 {
        self.linf_l4 + self.u0_h2 + 1.0
    }
}

pub fn certificate_norms(traj: &Trajectory, u0: &FieldExpression, space: &SpacePair) -> Result<CertificateNorms> {
    Ok(CertificateNorms {
        linf_l4: linf_time_norm(traj, NormKind::L4),
        u0_h2: expr_sobolev_norm(u0, space, 2)?,
    })
}

/// `|u_{h,tau}|_{L^inf(L4)} + |u0|_{H2} + 1`.
#[allow(non_snake_case)]
pub fn compute_M_lhs(traj: &Trajectory, u0: &FieldExpression, space: &SpacePair) -> Result<f64> {
    Ok(certificate_norms(traj, u0, space)?.m_lhs())
}

/// Smallest number with three significant digits that is `>= x`.
pub fn round_up_3(x: f64) -> f64 {
    if !(x > 0.0 && x.is_finite()) {
        return x;
    }
    let e = x.log10().floor() as i32 - 2;
    let unit = 10f64.powi(e);
    let mut r = (x / unit).ceil() * unit;
    // Guard against the product landing just below x.
    while r < x {
        r += unit;
    }
    // Strip representation noise, e.g. 1.2300000000000002.
    let s: f64 = format!("{:.*e}", 2, r).parse().unwrap_or(r);
    if s >= x {
        s
    } else {
        r
    }
}

pub const VERDICT_CERTIFIED: &str = "certified";

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub norms: CertificateNorms,
    pub m_lhs: f64,
    pub m: f64,
    pub m_user_supplied: bool,
    pub thresholds: Thresholds,
    pub tau: f64,
    pub h: f64,
    pub t_final: f64,
    pub norm_condition: bool,
    pub tau_condition: bool,
    pub h_condition: bool,
    pub energy: LedgerStatus,
    pub energy_min_slack: f64,
    pub bound: f64,
    pub verdict: String,
    pub regularity: String,
    pub ledger: ConstantsLedger,
}

pub const CERTIFICATE_CSV_HEADER: &str = "verdict,m_lhs,m,log10_phi_m,log10_Phi_m,log10_tau_m,log10_h_m,tau_m,h_m,tau,h,norm_condition,tau_condition,h_condition,energy_ledger,bound";

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == VERDICT_CERTIFIED
    }

    pub fn to_text(&self) -> String {
        let th = &self.thresholds;
        let ln10 = std::f64::consts::LN_10;
        let mut s = String::new();
        let _ = writeln!(s, "# regularity certificate");
        let _ = writeln!(
            s,
            "# note: the constants below have no values in the underlying analysis; any verdict is relative to this ledger"
        );
        if self.ledger.is_all_ones() {
            let _ = writeln!(s, "# note: all-ones default ledger in use");
        }
        let _ = writeln!(s, "verdict: {}", self.verdict);
        let _ = writeln!(s, "regularity: {}", self.regularity);
        let _ = writeln!(s, "linf_l4: {:.12e}", self.norms.linf_l4);
        let _ = writeln!(s, "u0_h2: {:.12e}", self.norms.u0_h2);
        let _ = writeln!(s, "u0_norm_interpretation: full H2 norm");
        let _ = writeln!(s, "m_lhs: {:.12e}", self.m_lhs);
        let _ = writeln!(s, "m: {}", self.m);
        let _ = writeln!(s, "m_source: {}", if self.m_user_supplied { "user" } else { "m_lhs rounded up to 3 significant digits" });
        let _ = writeln!(s, "log10_phi_m: {:.12e}", th.ln_phi_m / ln10);
        let _ = writeln!(s, "log10_Phi_m: {:.12e}", th.ln_big_phi_m / ln10);
        let _ = writeln!(s, "log10_tau_m: {:.12}", th.log10_tau_m());
        let _ = writeln!(s, "log10_h_m: {:.12}", th.log10_h_m());
        let _ = writeln!(s, "tau_m: {:e}{}", th.tau_m, if th.tau_underflow { " (clamped, underflow)" } else { "" });
        let _ = writeln!(s, "h_m: {:e}{}", th.h_m, if th.h_underflow { " (clamped, underflow)" } else { "" });
        let _ = writeln!(s, "tau_m_binding_term: {}", ["phi(M)/2", "1/(8 max(C2,C3) Phi(M)^8)", "exp(-C9 Phi(M)^8)/2"][th.binding_term]);
        let _ = writeln!(s, "tau: {:e}", self.tau);
        let _ = writeln!(s, "h: {:.16e}", self.h);
        let _ = writeln!(s, "t_final: {:e}", self.t_final);
        let _ = writeln!(s, "log10_tau_gap: {:.6}", th.tau_gap(self.tau));
        let _ = writeln!(s, "log10_h_gap: {:.6}", th.h_gap(self.h));
        let _ = writeln!(s, "norm_condition: {}", self.norm_condition);
        let _ = writeln!(s, "tau_condition: {}", self.tau_condition);
        let _ = writeln!(s, "h_condition: {}", self.h_condition);
        let _ = writeln!(s, "energy_ledger: {}", self.energy.label());
        let _ = writeln!(s, "energy_min_slack: {:.6e}", self.energy_min_slack);
        let _ = writeln!(s, "bound: {:.16e}", self.bound);
        let _ = writeln!(s, "bound_formula: tau + h^(3/2)");
        let _ = writeln!(s, "mu: {}", self.ledger.mu);
        for (i, n) in CONSTANT_NAMES.iter().enumerate() {
            let _ = writeln!(s, "{n}: {} [{}]", self.ledger.values[i], self.ledger.provenance[i]);
        }
        s
    }

    pub fn csv_row(&self) -> String {
        let th = &self.thresholds;
        let ln10 = std::f64::consts::LN_10;
        format!(
            "{},{:.12e},{},{:.12e},{:.12e},{:.12},{:.12},{:e},{:e},{:e},{:.16e},{},{},{},{},{:.16e}",
            self.verdict.replace(',', ";"),
            self.m_lhs,
            self.m,
            th.ln_phi_m / ln10,
            th.ln_big_phi_m / ln10,
            th.log10_tau_m(),
            th.log10_h_m(),
            th.tau_m,
            th.h_m,
            self.tau,
            self.h,
            self.norm_condition,
            self.tau_condition,
            self.h_condition,
            self.energy.label(),
            self.bound
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CERTIFICATE_CSV_HEADER}\n{}\n", self.csv_row())
    }
}

/// Verdict from precomputed norms; a pure function of its arguments.
#[allow(clippy::too_many_arguments)]
pub fn certify_from_norms(
    norms: CertificateNorms,
    tau: f64,
    h: f64,
    t_final: f64,
    energy: LedgerStatus,
    energy_min_slack: f64,
    ledger: &ConstantsLedger,
    m: Option<f64>,
) -> Result<Certificate> {
    let m_lhs = norms.m_lhs();
    let m_value = m.unwrap_or_else(|| round_up_3(m_lhs));
    let th = thresholds(m_value, ledger)?;
    let norm_condition = m_lhs <= m_value;
    let tau_condition = th.tau_ok(tau);
    let h_condition = th.h_ok(h);
    let mut failures = vec![];
    if !norm_condition {
        failures.push(format!("M_lhs = {m_lhs:.6e} > M = {m_value}"));
    }
    if !tau_condition {
        failures.push(format!("tau >= tau_M (log10 gap {:.6})", th.tau_gap(tau)));
    }
    if !h_condition {
        failures.push(format!("h >= h_M (log10 gap {:.6})", th.h_gap(h)));
    }
    match energy {
        LedgerStatus::Pass => {}
        LedgerStatus::Fail => failures.push("energy ledger failed".into()),
        LedgerStatus::NotApplicable => failures.push("energy ledger not applicable (nonzero forcing)".into()),
    }
    let (verdict, regularity) = if failures.is_empty() {
        (
            VERDICT_CERTIFIED.to_string(),
            "a unique solution exists with u in L^inf(0,T;(H^1_0 cap H^2)^3) and du/dt in L^2(0,T;(H^1)^3); \
             |u_h,tau - u|^2 in L^inf(0,T;L^2) is at most tau + h^(3/2)"
                .to_string(),
        )
    } else {
        (format!("conditions not met: {}", failures.join("; ")), "no conclusion".to_string())
    };
    Ok(Certificate {
        norms,
        m_lhs,
        m: m_value,
        m_user_supplied: m.is_some(),
        thresholds: th,
        tau,
        h,
        t_final,
        norm_condition,
        tau_condition,
        h_condition,
        energy,
        energy_min_slack,
        bound: tau + h.powf(1.5),
        verdict,
        regularity,
        ledger: ledger.clone(),
    })
}

/// Certificate for a completed trajectory on a mesh of size `h`.
pub fn certify(
    traj: &Trajectory,
    u0: &FieldExpression,
    space: &SpacePair,
    h: f64,
    ledger: &ConstantsLedger,
    m: Option<f64>,
) -> Result<Certificate> {
    let norms = certificate_norms(traj, u0, space)?;
    let el = energy_ledger(traj);
    certify_from_norms(norms, traj.tau, h, traj.t_final, el.status, el.min_slack, ledger, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones() -> ConstantsLedger {
        ConstantsLedger::all_ones(1.0)
    }

    #[test]
    fn hand_values() {
        let l = ones();
        assert!((alpha(0.0, &l).to_f64() - 0.25).abs() < 1e-15);
        assert!((beta(0.0, &l).to_f64() - 1.0).abs() < 1e-15);
        assert!((beta(1.0, &l).to_f64() - 2.0).abs() < 1e-15);
        assert!((Phi(0.0, &l).to_f64() - 32769.0).abs() < 1e-9);
        // phi(0) = alpha(1) = 1/(1 + 3^9)^2
        let expect = 1.0 / (19684.0f64 * 19684.0);
        assert!((phi(0.0, &l).to_f64() - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn small_m_thresholds_are_dominated_by_the_exponential() {
        let th = thresholds(1e-12, &ones()).unwrap();
        assert_eq!(th.binding_term, 2);
        // ln tau_M = -ln 2 - Phi(0)^8 with Phi(0) close to 32769.
        let expect = -(2f64.ln()) - 32769f64.powi(8);
        assert!((th.ln_tau_m.to_f64() - expect).abs() <= 1e-9 * expect.abs());
        assert!(th.tau_underflow && th.h_underflow);
        assert_eq!(th.tau_m, f64::MIN_POSITIVE);
    }

    #[test]
    fn large_m_stays_finite_in_log_space() {
        let th = thresholds(1e3, &ones()).unwrap();
        assert!(th.ln_big_phi_m.is_finite());
        assert!(th.log10_tau_m().ln_abs().is_finite());
        assert!(th.log10_tau_m().sign() < 0);
        assert!(th.tau_gap(0.01).sign() > 0);
        assert!(!th.tau_ok(1e-300));
    }

    #[test]
    fn gronwall_basics() {
        let c = vec![1.0, 2.0, 3.0];
        let z = vec![0.0; 3];
        let b = gronwall_bound(&z, &c, &z, 0.1, 0.5).unwrap();
        assert_eq!(b, vec![0.1 + 0.5, 0.1 + 0.2 + 0.5, 0.1 + 0.2 + 0.30000000000000004 + 0.5]);
        match gronwall_bound(&z, &c, &[0.0, 5.0, 0.0], 0.1, 0.5) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("gamma_2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rounding_up() {
        assert_eq!(round_up_3(1.0), 1.0);
        assert_eq!(round_up_3(1.2301), 1.24);
        assert_eq!(round_up_3(12345.0), 12400.0);
        assert_eq!(round_up_3(0.0012341), 0.00124);
        for x in [3.14169, 2.999999, 7.77e-5, 123.0001] {
            assert!(round_up_3(x) >= x);
        }
    }

    #[test]
    fn ledger_validation() {
        let mut l = ones();
        assert!(l.set("C5", -1.0, "x").is_err());
        assert!(l.set("C10", 1.0, "x").is_err());
        l.set("c1star", 2.0, "test").unwrap();
        assert_eq!(l.c1_star(), 2.0);
    }

    proptest! {
        #[test]
        fn monotone_in_argument(a in 0.0f64..50.0, d in 1e-6f64..10.0) {
            let l = ones();
            let b = a + d;
            prop_assert!(ln_alpha(a, &l) > ln_alpha(b, &l));
            prop_assert!(ln_beta(a, &l) < ln_beta(b, &l));
            prop_assert!(ln_phi(a, &l) > ln_phi(b, &l));
            prop_assert!(ln_Phi(a, &l) < ln_Phi(b, &l));
        }
    }
}
