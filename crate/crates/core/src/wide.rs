//! Real numbers stored as sign and natural logarithm of the magnitude.
//!
//! The certificate thresholds involve quantities like `exp(-C9 Phi^8)` whose
//! exponents exceed the `f64` range by many orders of magnitude. `WideReal`
//! keeps them finite and comparable, and formats them in scientific notation.

use std::cmp::Ordering;
use std::fmt;

const LN_10: f64 = std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WideReal {
    /// -1, 0 or 1.
    sign: i8,
    /// ln|x|; meaningless when `sign == 0`.
    ln_abs: f64,
}

impl WideReal {
    pub const ZERO: WideReal = WideReal { sign: 0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: WideReal = WideReal { sign: 1, ln_abs: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            WideReal { sign: if x > 0.0 { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    /// The positive number `exp(ln)`.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            WideReal { sign: 1, ln_abs: ln }
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn ln_abs(self) -> f64 {
        self.ln_abs
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs / LN_10
    }

    /// Saturates to `0` or `inf` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    /// True when `to_f64` loses the value to underflow or overflow.
    pub fn out_of_f64_range(self) -> bool {
        self.sign != 0 && (self.ln_abs > f64::MAX.ln() || self.ln_abs < (f64::MIN_POSITIVE * f64::EPSILON).ln())
    }

    pub fn abs(self) -> Self {
        WideReal { sign: self.sign.abs(), ..self }
    }

    pub fn mul(self, o: Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return Self::ZERO;
        }
        WideReal { sign: self.sign * o.sign, ln_abs: self.ln_abs + o.ln_abs }
    }

    pub fn div(self, o: Self) -> Self {
        assert!(o.sign != 0, "division by zero");
        if self.sign == 0 {
            return Self::ZERO;
        }
        WideReal { sign: self.sign * o.sign, ln_abs: self.ln_abs - o.ln_abs }
    }

    pub fn scale(self, a: f64) -> Self {
        self.mul(Self::from_f64(a))
    }

    pub fn powf(self, p: f64) -> Self {
        assert!(self.sign >= 0, "real power of a negative number");
        if self.sign == 0 {
            return Self::ZERO;
        }
        WideReal { sign: 1, ln_abs: self.ln_abs * p }
    }

    pub fn add(self, o: Self) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= o.ln_abs { (self, o) } else { (o, self) };
        let d = small.ln_abs - big.ln_abs;
        if big.sign == small.sign {
            WideReal { sign: big.sign, ln_abs: big.ln_abs + d.exp().ln_1p() }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            WideReal { sign: big.sign, ln_abs: big.ln_abs + (-d.exp()).ln_1p() }
        }
    }

    pub fn neg(self) -> Self {
        WideReal { sign: -self.sign, ..self }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn min(self, o: Self) -> Self {
        if self <= o {
            self
        } else {
            o
        }
    }

    pub fn max(self, o: Self) -> Self {
        if self >= o {
            self
        } else {
            o
        }
    }

    /// Mantissa in `[1, 10)` and decimal exponent.
    fn decimal(self) -> (f64, i64) {
        let l = self.log10_abs();
        let mut e = l.floor();
        let mut m = 10f64.powf(l - e);
        if m >= 9.9999999995 {
            m = 1.0;
            e += 1.0;
        }
        (m, e as i64)
    }
}

impl PartialOrd for WideReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&o.ln_abs),
                _ => o.ln_abs.partial_cmp(&self.ln_abs),
            },
            ord => Some(ord),
        }
    }
}

impl From<f64> for WideReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

/// Scientific notation with the requested precision (default 6), for example
/// `-3.141593e-123456789`.
impl fmt::Display for WideReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(6);
        if self.sign == 0 {
            return write!(f, "{:.*}e0", prec, 0.0);
        }
        if !self.ln_abs.is_finite() {
            return write!(f, "{}inf", if self.sign < 0 { "-" } else { "" });
        }
        let (m, e) = self.decimal();
        let m = format!("{:.*}", prec, m);
        // Rounding can carry the mantissa to 10.
        let (m, e) = if m.starts_with("10") { (format!("{:.*}", prec, 1.0), e + 1) } else { (m, e) };
        write!(f, "{}{}e{}", if self.sign < 0 { "-" } else { "" }, m, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_and_display() {
        for x in [1.0, -2.5, 1e-300, 6.02e23] {
            let w = WideReal::from_f64(x);
            assert!((w.to_f64() - x).abs() <= 1e-12 * x.abs());
        }
        assert_eq!(format!("{:.3}", WideReal::from_f64(1234.5)), "1.234e3");
        assert_eq!(format!("{:.2}", WideReal::from_f64(-0.00999999)), "-1.00e-2");
        assert_eq!(format!("{}", WideReal::ZERO), "0.000000e0");
        let tiny = WideReal::from_ln(-1e12);
        assert!(tiny.out_of_f64_range());
        assert_eq!(tiny.to_f64(), 0.0);
        let s = format!("{:.2}", tiny);
        assert!(s.ends_with(&format!("e{}", (-1e12 / LN_10).floor() as i64)), "{s}");
    }

    #[test]
    fn ordering_across_signs() {
        let a = WideReal::from_f64(-5.0);
        let b = WideReal::from_f64(-1.0);
        let c = WideReal::ZERO;
        let d = WideReal::from_ln(-1e9);
        assert!(a < b && b < c && c < d);
        assert_eq!(d.min(WideReal::ONE), d);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let (a, b) = (WideReal::from_f64(x), WideReal::from_f64(y));
            let tol = 1e-9 * (x.abs() + y.abs() + 1.0);
            prop_assert!((a.add(b).to_f64() - (x + y)).abs() <= tol);
            prop_assert!((a.sub(b).to_f64() - (x - y)).abs() <= tol);
            prop_assert!((a.mul(b).to_f64() - x * y).abs() <= 1e-12 * (x * y).abs() + 1e-300);
            prop_assert_eq!(a.partial_cmp(&b), x.partial_cmp(&y));
        }
    }
}
