//! Exact angle expressions.
//!
//! An angle is `q*pi + r + sum c_k * arg(w_k)` with rational q, r, integer
//! c_k and cyclotomic w_k. Failure angles stay exact through any number of
//! rounds and can be evaluated at whatever precision a caller needs.

use std::fmt;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{PqfError, Result};
use crate::ival::Ival;
use crate::rings::{CIval, CycInt};

#[derive(Clone, PartialEq, Debug)]
pub struct Angle {
    pi_mult: Rational,
    rad: Rational,
    args: Vec<(i64, CycInt)>,
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17}", self.to_f64())
    }
}

fn arg_of(v: &CIval) -> Option<Ival> {
    if v.re.is_neg() {
        let w = CIval::new(v.re.neg(), v.im.neg());
        let p = Ival::pi(v.re.prec());
        Ival::atan2(&w.im, &w.re).map(|a| a.add(&p))
    } else {
        Ival::atan2(&v.im, &v.re)
    }
}

impl Angle {
    pub fn zero() -> Angle {
        Angle { pi_mult: Rational::new(), rad: Rational::new(), args: Vec::new() }
    }

    pub fn pi_times(q: Rational) -> Angle {
        Angle { pi_mult: q, ..Angle::zero() }
    }

    pub fn radians(r: Rational) -> Angle {
        Angle { rad: r, ..Angle::zero() }
    }

    pub fn from_f64(x: f64) -> Angle {
        Angle::radians(Rational::from_f64(x).unwrap_or_default())
    }

    /// Parses `pi`, `-pi/4`, `3*pi/8`, `pi*3/8`, `0.1`, `1e-3`.
    pub fn parse(s: &str) -> Result<Angle> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || PqfError::InvalidInput(format!("cannot parse angle '{s}'"));
        if t.contains("pi") {
            let (sign, body) = match t.strip_prefix('-') {
                Some(b) => (-1, b.to_string()),
                None => (1, t.trim_start_matches('+').to_string()),
            };
            let (num_part, den_part) = match body.split_once('/') {
                Some((a, b)) => (a.to_string(), Some(b.to_string())),
                None => (body.clone(), None),
            };
            let factor = num_part.replace("*pi", "").replace("pi*", "").replace("pi", "");
            let num = if factor.is_empty() { Rational::from(1) } else { parse_decimal(&factor).ok_or_else(bad)? };
            let den = match den_part {
                Some(d) => parse_decimal(&d).ok_or_else(bad)?,
                None => Rational::from(1),
            };
            if den == 0 {
                return Err(bad());
            }
            Ok(Angle::pi_times(num / den * sign))
        } else {
            parse_decimal(&t).map(Angle::radians).ok_or_else(bad)
        }
    }

    /// Text that `parse` maps back to this exact angle, when one exists.
    pub fn exact_repr(&self) -> Option<String> {
        if !self.args.is_empty() {
            return None;
        }
        if self.rad == 0 {
            let (n, d) = (self.pi_mult.numer(), self.pi_mult.denom());
            return Some(format!("{n}*pi/{d}"));
        }
        if self.pi_mult == 0 {
            return decimal_repr(&self.rad);
        }
        None
    }

    pub fn pi_mult(&self) -> &Rational {
        &self.pi_mult
    }

    pub fn is_rational_pi(&self) -> bool {
        self.rad == 0 && self.args.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_rational_pi() && self.pi_mult == 0
    }

    pub fn add_pi(&self, q: &Rational) -> Angle {
        let mut a = self.clone();
        a.pi_mult += q;
        a
    }

    /// self + c * arg(w).
    pub fn add_arg(&self, c: i64, w: &CycInt) -> Angle {
        let mut a = self.clone();
        if c != 0 {
            a.args.push((c, w.clone()));
        }
        a
    }

    pub fn add(&self, o: &Angle) -> Angle {
        let mut a = self.clone();
        a.pi_mult += &o.pi_mult;
        a.rad += &o.rad;
        a.args.extend(o.args.iter().cloned());
        a
    }

    pub fn neg(&self) -> Angle {
        Angle {
            pi_mult: (-&self.pi_mult).into(),
            rad: (-&self.rad).into(),
            args: self.args.iter().map(|(c, w)| (-c, w.clone())).collect(),
        }
    }

    pub fn sub(&self, o: &Angle) -> Angle {
        self.add(&o.neg())
    }

    pub fn scale_half(&self) -> Option<Angle> {
        if self.args.iter().any(|(c, _)| c % 2 != 0) {
            return None;
        }
        Some(Angle {
            pi_mult: Rational::from(&self.pi_mult / 2u32),
            rad: Rational::from(&self.rad / 2u32),
            args: self.args.iter().map(|(c, w)| (c / 2, w.clone())).collect(),
        })
    }

    pub fn eval(&self, prec: u32) -> Ival {
        let p = prec + 16;
        let mut v = Ival::pi(p).mul(&Ival::from_rational(p, &self.pi_mult)).add(&Ival::from_rational(p, &self.rad));
        for (c, w) in &self.args {
            let a = arg_of(&w.eval(p)).expect("argument of a nonzero ring element");
            v = v.add(&a.mul_int(&Integer::from(*c)));
        }
        v
    }

    pub fn to_f64(&self) -> f64 {
        self.eval(96).to_f64()
    }

    /// Nearest integer to self / (2 pi / m).
    pub fn nearest_step(&self, m: u32) -> i64 {
        if self.is_rational_pi() {
            let q = Rational::from(self.pi_mult() * m) / 2u32;
            let r = q.round();
            return r.numer().to_i64().expect("step index fits i64");
        }
        let v = self.eval(128);
        let step = Ival::pi(128).mul_int(&Integer::from(2)).div_u32(m);
        let q = v.div(&step).expect("nonzero step");
        q.mid().round().to_f64() as i64
    }
}

/// Target precision, held exactly.
#[derive(Clone, PartialEq, Debug)]
pub struct Eps {
    value: Rational,
    approx: f64,
}

impl Eps {
    pub fn new(value: Rational) -> Result<Eps> {
        if value <= 0 || value >= 1 {
            return Err(PqfError::InvalidInput(format!("eps must lie in (0, 1), got {}", value.to_f64())));
        }
        let approx = value.to_f64();
        Ok(Eps { value, approx })
    }

    pub fn parse(s: &str) -> Result<Eps> {
        let v = parse_decimal(s).ok_or_else(|| PqfError::InvalidInput(format!("cannot parse eps '{s}'")))?;
        Eps::new(v)
    }

    pub fn from_f64(x: f64) -> Result<Eps> {
        Eps::new(Rational::from_f64(x).ok_or_else(|| PqfError::InvalidInput("eps is not finite".into()))?)
    }

    /// 10^{-k}.
    pub fn pow10(k: u32) -> Eps {
        Eps::new(Rational::from((1, Integer::from(10).pow(k)))).expect("10^-k lies in (0,1)")
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn log2_inv(&self) -> f64 {
        -self.approx.log2()
    }

    pub fn ival(&self, prec: u32) -> Ival {
        Ival::from_rational(prec, &self.value)
    }

    /// Exact text form accepted by `parse`.
    pub fn exact_repr(&self) -> String {
        decimal_repr(&self.value).unwrap_or_else(|| format!("{:e}", self.approx))
    }

    /// Default working precision for this accuracy.
    pub fn default_prec(&self) -> u32 {
        crate::ival::default_prec(self.log2_inv())
    }
}

/// `N e-k` form of a rational whose denominator divides a power of ten.
pub fn decimal_repr(r: &Rational) -> Option<String> {
    let mut d = r.denom().clone();
    let (mut a, mut b) = (0u32, 0u32);
    while d.is_divisible_u(2) {
        d /= 2u32;
        a += 1;
    }
    while d.is_divisible_u(5) {
        d /= 5u32;
        b += 1;
    }
    if d != 1 {
        return None;
    }
    let k = a.max(b);
    let n = Integer::from(r.numer() * Integer::from(10).pow(k)) / r.denom();
    Some(if k == 0 { n.to_string() } else { format!("{n}e-{k}") })
}

/// Exact rational value of a decimal literal such as `-1.25e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let scale = exp - fp.len() as i32;
    let ten = Integer::from(10);
    let mut r = if scale >= 0 {
        Rational::from(n * ten.pow(scale as u32))
    } else {
        Rational::from((n, ten.pow((-scale) as u32)))
    };
    if neg {
        r = -r;
    }
    Some(r)
}
