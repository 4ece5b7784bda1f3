//! TeX scaled-point arithmetic.
//!
//! Every length in the engine is an integer number of scaled points
//! (1pt = 65536sp). Parsing, printing, division and the hypotenuse
//! routine follow TeX's integer algorithms so emitted numbers are stable.

use std::fmt;
use thiserror::Error;

/// One point in scaled points.
pub const UNITY: i64 = 65536;
/// Largest legal dimension.
pub const MAX_DIMEN: i64 = 0x3FFF_FFFF;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixError {
    #[error("Bad number: `{0}'. 0 substituted.")]
    BadNumber(String),
    #[error("Illegal unit of measure in `{0}'")]
    BadUnit(String),
    #[error("Dimension too large")]
    Overflow,
    #[error("Division by zero")]
    DivByZero,
}

/// A signed count of scaled points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Sp(pub i32);

impl Sp {
    pub const ZERO: Sp = Sp(0);
    pub const MAX: Sp = Sp(MAX_DIMEN as i32);

    /// Whole points.
    pub const fn pt(n: i32) -> Sp {
        Sp(n * 65536)
    }

    /// Checked construction from a wide value.
    pub fn checked(v: i64) -> Result<Sp, FixError> {
        if v.abs() > MAX_DIMEN {
            Err(FixError::Overflow)
        } else {
            Ok(Sp(v as i32))
        }
    }

    /// Clamp a wide value to the dimension range.
    pub fn saturate(v: i64) -> Sp {
        Sp(v.clamp(-MAX_DIMEN, MAX_DIMEN) as i32)
    }

    /// Nearest Sp to a value given in points.
    pub fn from_pt_f64(v: f64) -> Sp {
        Sp::saturate((v * UNITY as f64).round() as i64)
    }

    pub fn to_pt(self) -> f64 {
        self.0 as f64 / UNITY as f64
    }

    pub fn raw(self) -> i64 {
        self.0 as i64
    }

    pub fn abs(self) -> Sp {
        Sp(self.0.abs())
    }

    /// Multiplication by an integer, saturating.
    pub fn times(self, n: i64) -> Sp {
        Sp::saturate(self.raw() * n)
    }

    /// Division by an integer, truncating toward zero like `\divide`.
    pub fn div_int(self, n: i64) -> Sp {
        if n == 0 {
            self
        } else {
            Sp((self.raw() / n) as i32)
        }
    }

    /// Scale by a float factor, rounding to the nearest sp.
    pub fn scale(self, f: f64) -> Sp {
        Sp::saturate((self.0 as f64 * f).round() as i64)
    }
}

impl std::ops::Add for Sp {
    type Output = Sp;
    fn add(self, o: Sp) -> Sp {
        Sp::saturate(self.raw() + o.raw())
    }
}

impl std::ops::Sub for Sp {
    type Output = Sp;
    fn sub(self, o: Sp) -> Sp {
        Sp::saturate(self.raw() - o.raw())
    }
}

impl std::ops::Neg for Sp {
    type Output = Sp;
    fn neg(self) -> Sp {
        Sp(-self.0)
    }
}

impl fmt::Display for Sp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_sp(*self))
    }
}

/// A validated decimal number as accepted by the number checker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Num {
    pub negative: bool,
    pub int_part: u64,
    pub frac_digits: String,
}

impl Num {
    pub fn zero() -> Num {
        Num { negative: false, int_part: 0, frac_digits: String::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.int_part == 0 && self.frac_digits.bytes().all(|b| b == b'0')
    }

    /// Fractional part rounded to sp (TeX `round_decimals`).
    pub fn frac_sp(&self) -> i64 {
        round_decimals(&self.frac_digits)
    }

    pub fn to_f64(&self) -> f64 {
        let s = format!("{}.{}0", self.int_part, self.frac_digits);
        let v: f64 = s.parse().unwrap_or(0.0);
        if self.negative {
            -v
        } else {
            v
        }
    }

    /// The number as a fixed-point factor in sp (1.0 = 65536).
    pub fn to_sp_factor(&self) -> Result<Sp, FixError> {
        if self.int_part >= 16384 {
            return Err(FixError::Overflow);
        }
        let v = self.int_part as i64 * UNITY + self.frac_sp();
        Sp::checked(if self.negative { -v } else { v })
    }

    /// `<number><dimen>` as TeX scans it: `n·v + xn_over_d(v, f, 2^16)`.
    pub fn times_dimen(&self, v: Sp) -> Result<Sp, FixError> {
        let n = self.int_part as i64;
        let prod = n.checked_mul(v.raw()).ok_or(FixError::Overflow)? + xn_over_d(v.raw(), self.frac_sp(), UNITY);
        if prod.abs() > MAX_DIMEN {
            return Err(FixError::Overflow);
        }
        Ok(Sp(if self.negative { -prod } else { prod } as i32))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative && !self.is_zero() {
            f.write_str("-")?;
        }
        write!(f, "{}", self.int_part)?;
        if !self.frac_digits.is_empty() {
            write!(f, ".{}", self.frac_digits)?;
        }
        Ok(())
    }
}

/// Validate a number: optional `-`, digits, at most one `.`, digits.
pub fn parse_number(text: &str) -> Result<Num, FixError> {
    let bad = || FixError::BadNumber(text.to_string());
    let t = text.trim();
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let (ip, fp) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if !ip.bytes().all(|b| b.is_ascii_digit()) || !fp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let int_part = if ip.is_empty() { 0 } else { ip.parse::<u64>().map_err(|_| bad())? };
    if int_part > i32::MAX as u64 {
        return Err(bad());
    }
    Ok(Num { negative, int_part, frac_digits: fp.to_string() })
}

/// TeX `round_decimals`: digits after the point to a fraction of 2^16.
pub fn round_decimals(digits: &str) -> i64 {
    let mut a: i64 = 0;
    for d in digits.bytes().take(17).rev() {
        a = (a + (d - b'0') as i64 * 131072) / 10;
    }
    (a + 1) / 2
}

/// `x·n/d` truncated toward zero.
pub fn xn_over_d(x: i64, n: i64, d: i64) -> i64 {
    let r = (x.unsigned_abs() as u128 * n as u128) / d as u128;
    if x < 0 {
        -(r as i64)
    } else {
        r as i64
    }
}

/// TeX `print_scaled` without the unit suffix.
pub fn format_sp(x: Sp) -> String {
    let mut out = String::new();
    let mut s = x.raw();
    if s < 0 {
        out.push('-');
        s = -s;
    }
    out.push_str(&(s / UNITY).to_string());
    out.push('.');
    s = 10 * (s % UNITY) + 5;
    let mut delta = 10;
    loop {
        if delta > UNITY {
            s += 0x8000 - 50000;
        }
        out.push((b'0' + (s / UNITY) as u8) as char);
        s = 10 * (s % UNITY);
        delta *= 10;
        if s <= delta {
            break;
        }
    }
    out
}

/// Physical units and their exact TeX ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Pt,
    Pc,
    In,
    Bp,
    Cm,
    Mm,
    Dd,
    Cc,
    Sp,
}

impl Unit {
    pub fn from_name(s: &str) -> Option<Unit> {
        Some(match s {
            "pt" => Unit::Pt,
            "pc" => Unit::Pc,
            "in" => Unit::In,
            "bp" => Unit::Bp,
            "cm" => Unit::Cm,
            "mm" => Unit::Mm,
            "dd" => Unit::Dd,
            "cc" => Unit::Cc,
            "sp" => Unit::Sp,
            _ => return None,
        })
    }

    /// Numerator and denominator against points.
    pub fn ratio(self) -> (i64, i64) {
        match self {
            Unit::Pt | Unit::Sp => (1, 1),
            Unit::Pc => (12, 1),
            Unit::In => (7227, 100),
            Unit::Bp => (7227, 7200),
            Unit::Cm => (7227, 254),
            Unit::Mm => (7227, 2540),
            Unit::Dd => (1238, 1157),
            Unit::Cc => (14856, 1157),
        }
    }
}

/// Convert a checked number with an explicit physical unit.
pub fn num_with_unit(n: &Num, unit: Unit) -> Result<Sp, FixError> {
    let mut x = n.int_part as i64;
    let v = if unit == Unit::Sp {
        x
    } else {
        let mut f = n.frac_sp();
        let (num, den) = unit.ratio();
        if num != 1 || den != 1 {
            let q = x * num / den;
            let rem = x * num % den;
            f = (num * f + UNITY * rem) / den;
            x = q + f / UNITY;
            f %= UNITY;
        }
        if x >= 16384 {
            return Err(FixError::Overflow);
        }
        x * UNITY + f
    };
    if v > MAX_DIMEN {
        return Err(FixError::Overflow);
    }
    Ok(Sp(if n.negative { -v } else { v } as i32))
}

/// Split a length into its number and unit text.
fn split_length(text: &str) -> (&str, &str) {
    let t = text.trim();
    let cut = t.find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-')).unwrap_or(t.len());
    (t[..cut].trim(), t[cut..].trim())
}

/// Parse a length. Bare numbers are multiples of `default_unit`.
pub fn parse_length(text: &str, default_unit: Sp) -> Result<Sp, FixError> {
    let (num, unit) = split_length(text);
    let n = parse_number(num).map_err(|_| FixError::BadNumber(text.trim().to_string()))?;
    if unit.is_empty() {
        return n.times_dimen(default_unit);
    }
    let unit = unit.strip_prefix("true").map(str::trim).unwrap_or(unit);
    match Unit::from_name(unit) {
        Some(u) => num_with_unit(&n, u),
        None => Err(FixError::BadUnit(text.trim().to_string())),
    }
}

/// `\pst@@divide`: guarded fixed-point ratio `a/b` in sp of a point.
pub fn sp_div(a: Sp, b: Sp) -> Result<Sp, FixError> {
    let mut g = a.raw();
    let mut c = b.raw();
    for _ in 0..4 {
        if g.abs() < 67108863 {
            g *= 16;
        } else {
            c /= 16;
        }
    }
    if c == 0 {
        return Err(FixError::DivByZero);
    }
    Sp::checked(g / c)
}

fn pyth_step(dima: Sp, d: Sp) -> Result<Sp, FixError> {
    let g = sp_div(dima, d)?;
    Sp::checked((d.raw() + g.raw()) / 2)
}

/// `\pst@pyth` with overflow reported.
pub fn sp_pyth_checked(a: Sp, b: Sp) -> Result<Sp, FixError> {
    let a = a.raw().abs();
    let s = a + b.raw().abs();
    if s == 0 {
        return Ok(Sp::ZERO);
    }
    let s = Sp::checked(s)?;
    let mut g = sp_div(Sp::checked(8 * a)?, s)?;
    g = Sp::checked((g.raw() - 4 * UNITY) * 2)?;
    let tempa = parse_number(&format_sp(g))?;
    let mut dima = tempa.times_dimen(g)?;
    dima = Sp::checked((dima.raw() + 64 * UNITY) / 2)?;
    let mut d = Sp::pt(7);
    for _ in 0..3 {
        d = pyth_step(dima, d)?;
    }
    let tempa = parse_number(&format_sp(d))?;
    let g = tempa.times_dimen(s)?;
    Ok(Sp((g.raw() / 8) as i32))
}

/// `\pst@pyth`: iterative approximation of `sqrt(a²+b²)`, saturating.
pub fn sp_pyth(a: Sp, b: Sp) -> Sp {
    sp_pyth_checked(a, b).unwrap_or(Sp::MAX)
}

/// The unit registers consulted by bare numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitRegisters {
    pub unit: Sp,
    pub xunit: Sp,
    pub yunit: Sp,
    pub runit: Sp,
}

/// One centimetre in sp.
pub const CM: Sp = Sp(1864679);

impl Default for UnitRegisters {
    fn default() -> Self {
        UnitRegisters { unit: CM, xunit: CM, yunit: CM, runit: CM }
    }
}

impl UnitRegisters {
    /// Setting `unit` drags xunit and yunit along.
    pub fn set_unit(&mut self, v: Sp) {
        self.unit = v;
        self.runit = v;
        self.xunit = v;
        self.yunit = v;
    }

    /// `runit` is the same register as `unit`.
    pub fn set_runit(&mut self, v: Sp) {
        self.unit = v;
        self.runit = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1.4").unwrap(), Num { negative: false, int_part: 1, frac_digits: "4".into() });
        assert_eq!(parse_number("-.5").unwrap(), Num { negative: true, int_part: 0, frac_digits: "5".into() });
        for bad in ["1.2.3", "", "-", "+5", "1e3", "--1", "1-2", "a"] {
            assert!(parse_number(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_number("1.2.3").unwrap_err().to_string(), "Bad number: `1.2.3'. 0 substituted.");
        assert_eq!(parse_number("-.5").unwrap().to_string(), "-0.5");
    }

    #[test]
    fn lengths() {
        assert_eq!(parse_length("2", CM).unwrap(), Sp(3729358));
        assert_eq!(parse_length("5pt", CM).unwrap(), Sp(327680));
        assert_eq!(parse_length("0", CM).unwrap(), Sp(0));
        assert_eq!(parse_length("0mm", CM).unwrap(), Sp(0));
        assert_eq!(parse_length("1cm", CM).unwrap(), CM);
        assert_eq!(parse_length("1in", CM).unwrap(), Sp(4736286));
        assert_eq!(parse_length("1bp", CM).unwrap(), Sp(65781));
        assert_eq!(parse_length("-.5pt", CM).unwrap(), Sp(-32768));
        assert_eq!(parse_length("10 sp", CM).unwrap(), Sp(10));
        assert!(matches!(parse_length("3 furlong", CM), Err(FixError::BadUnit(_))));
        assert!(matches!(parse_length("20000pt", CM), Err(FixError::Overflow)));
    }

    #[test]
    fn printing() {
        assert_eq!(format_sp(Sp(327680)), "5.0");
        assert_eq!(format_sp(Sp(21845)), "0.33333");
        assert_eq!(format_sp(Sp(0)), "0.0");
        assert_eq!(format_sp(Sp(-32768)), "-0.5");
        assert_eq!(format_sp(Sp(1)), "0.00002");
        assert_eq!(format_sp(CM), "28.45274");
    }

    #[test]
    fn division() {
        assert_eq!(sp_div(Sp::pt(1), Sp::pt(3)).unwrap(), Sp(21845));
        assert_eq!(sp_div(Sp::pt(7), Sp::pt(7)).unwrap(), Sp(65536));
        assert_eq!(sp_div(Sp(0), Sp::pt(2)).unwrap(), Sp(0));
        assert_eq!(sp_div(Sp::pt(1), Sp(0)), Err(FixError::DivByZero));
    }

    #[test]
    fn pyth_worked() {
        assert_eq!(sp_pyth(Sp(0), Sp(0)), Sp(0));
        let r = sp_pyth(Sp::pt(3), Sp::pt(4));
        assert!((r.to_pt() - 5.0).abs() < 0.01, "{}", r.to_pt());
        for a in [1, 10, 100] {
            let r = sp_pyth(Sp::pt(a), Sp::pt(a)).to_pt();
            let want = a as f64 * 2f64.sqrt();
            assert!((r - want).abs() <= 0.002 * want, "{a}: {r}");
        }
    }

    #[test]
    fn unit_registers() {
        let mut u = UnitRegisters::default();
        assert_eq!(u.xunit, CM);
        u.set_unit(Sp::pt(10));
        assert_eq!((u.unit, u.xunit, u.yunit, u.runit), (Sp::pt(10), Sp::pt(10), Sp::pt(10), Sp::pt(10)));
    }
}
