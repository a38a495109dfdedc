//! Exact arithmetic in Z[zeta_m] for m in {4, 8, 12} and in the real
//! subrings Z[rho] (plain Z for m = 4).
//!
//! Coefficients are stored low degree first in the power basis of zeta.
//! Reduction: zeta^2 = -1 (m=4), zeta^4 = -1 (m=8), zeta^4 = zeta^2 - 1
//! (m=12). The real generator is rho = zeta + zeta^*, i.e. sqrt(2) for
//! m=8 and sqrt(3) for m=12.

pub mod parity;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::DivRounding;
use rug::{Complete, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{PqfError, Result};
use crate::ival::Ival;

pub use parity::{orbit_table, parity_mu, N2Value, Orbit, ParityClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    M4,
    M8,
    M12,
}

impl Ring {
    pub fn from_m(m: u32) -> Result<Ring> {
        match m {
            4 => Ok(Ring::M4),
            8 => Ok(Ring::M8),
            12 => Ok(Ring::M12),
            _ => Err(PqfError::InvalidInput(format!("unsupported ring order m={m}"))),
        }
    }

    pub fn m(self) -> u32 {
        match self {
            Ring::M4 => 4,
            Ring::M8 => 8,
            Ring::M12 => 12,
        }
    }

    /// Degree phi(m) of the power basis.
    pub fn d(self) -> usize {
        match self {
            Ring::M4 => 2,
            _ => 4,
        }
    }

    /// rho^2 (0 for m = 4 where the real subring is Z).
    pub fn disc(self) -> u32 {
        match self {
            Ring::M4 => 0,
            Ring::M8 => 2,
            Ring::M12 => 3,
        }
    }

    /// Exponent k with zeta^k = i.
    pub fn i_exp(self) -> i64 {
        match self {
            Ring::M4 => 1,
            Ring::M8 => 2,
            Ring::M12 => 3,
        }
    }

    /// Fundamental unit of the real subring (1 for m = 4).
    pub fn fundamental_unit(self) -> RealCycInt {
        match self {
            Ring::M4 => RealCycInt::from_i64(self, 1),
            Ring::M8 => RealCycInt::from_i64s(self, 1, 1),
            Ring::M12 => RealCycInt::from_i64s(self, 2, 1),
        }
    }
}

fn check(a: Ring, b: Ring) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(PqfError::MixedRing(a.m(), b.m()))
    }
}

/// Sign of A + B*sqrt(D), decided exactly.
pub fn sign_quad(a: &Integer, b: &Integer, disc: u32) -> Ordering {
    let sa = a.cmp0();
    let sb = if disc == 0 { Ordering::Equal } else { b.cmp0() };
    match (sa, sb) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        (Ordering::Greater, Ordering::Less) => {
            let a2 = a.square_ref().complete();
            let b2 = b.square_ref().complete() * disc;
            a2.cmp(&b2)
        }
        (Ordering::Less, Ordering::Greater) => {
            let a2 = a.square_ref().complete();
            let b2 = b.square_ref().complete() * disc;
            b2.cmp(&a2)
        }
    }
}

/// Element of Z[zeta_m].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    ring: Ring,
    c: Vec<Integer>,
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, a) in self.c.iter().enumerate() {
            match j {
                0 => write!(f, "{a}")?,
                1 => write!(f, " + {a}*w")?,
                _ => write!(f, " + {a}*w^{j}")?,
            }
        }
        write!(f, " (m={})", self.ring.m())
    }
}

impl CycInt {
    pub fn new(ring: Ring, c: Vec<Integer>) -> Result<CycInt> {
        if c.len() != ring.d() {
            return Err(PqfError::InvalidInput(format!(
                "expected {} coefficients for m={}, got {}",
                ring.d(),
                ring.m(),
                c.len()
            )));
        }
        Ok(CycInt { ring, c })
    }

    pub fn from_i64s(ring: Ring, c: &[i64]) -> CycInt {
        assert_eq!(c.len(), ring.d());
        CycInt { ring, c: c.iter().map(|&v| Integer::from(v)).collect() }
    }

    pub fn from_int(ring: Ring, v: Integer) -> CycInt {
        let mut c = vec![Integer::new(); ring.d()];
        c[0] = v;
        CycInt { ring, c }
    }

    pub fn zero(ring: Ring) -> CycInt {
        CycInt { ring, c: vec![Integer::new(); ring.d()] }
    }

    pub fn one(ring: Ring) -> CycInt {
        CycInt::from_int(ring, Integer::from(1))
    }

    /// zeta^k for any integer k.
    pub fn zeta_pow(ring: Ring, k: i64) -> CycInt {
        let m = ring.m() as i64;
        let k = k.rem_euclid(m) as usize;
        let mut wide = vec![Integer::new(); m as usize];
        wide[k] = Integer::from(1);
        CycInt::reduce(ring, wide)
    }

    pub fn imag_unit(ring: Ring) -> CycInt {
        CycInt::zeta_pow(ring, ring.i_exp())
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    /// Canonical reduction of a polynomial in zeta of arbitrary length.
    fn reduce(ring: Ring, mut w: Vec<Integer>) -> CycInt {
        let d = ring.d();
        match ring {
            Ring::M4 => {
                for k in (d..w.len()).rev() {
                    let v = std::mem::take(&mut w[k]);
                    w[k - 2] -= v;
                }
            }
            Ring::M8 => {
                for k in (d..w.len()).rev() {
                    let v = std::mem::take(&mut w[k]);
                    w[k - 4] -= v;
                }
            }
            Ring::M12 => {
                for k in (d..w.len()).rev() {
                    let v = std::mem::take(&mut w[k]);
                    w[k - 2] += &v;
                    w[k - 4] -= v;
                }
            }
        }
        w.truncate(d);
        w.resize(d, Integer::new());
        CycInt { ring, c: w }
    }

    pub fn try_add(&self, o: &CycInt) -> Result<CycInt> {
        check(self.ring, o.ring)?;
        Ok(CycInt { ring: self.ring, c: self.c.iter().zip(&o.c).map(|(a, b)| (a + b).complete()).collect() })
    }

    pub fn try_sub(&self, o: &CycInt) -> Result<CycInt> {
        check(self.ring, o.ring)?;
        Ok(CycInt { ring: self.ring, c: self.c.iter().zip(&o.c).map(|(a, b)| (a - b).complete()).collect() })
    }

    pub fn try_mul(&self, o: &CycInt) -> Result<CycInt> {
        check(self.ring, o.ring)?;
        let d = self.ring.d();
        let mut w = vec![Integer::new(); 2 * d - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    w[i + j] += a * b;
                }
            }
        }
        Ok(CycInt::reduce(self.ring, w))
    }

    pub fn scale(&self, k: &Integer) -> CycInt {
        CycInt { ring: self.ring, c: self.c.iter().map(|a| (a * k).complete()).collect() }
    }

    pub fn scale_i64(&self, k: i64) -> CycInt {
        CycInt { ring: self.ring, c: self.c.iter().map(|a| (a * k).complete()).collect() }
    }

    /// Division by a rational integer when exact.
    pub fn div_int_exact(&self, k: &Integer) -> Option<CycInt> {
        if k.is_zero() {
            return None;
        }
        let mut c = Vec::with_capacity(self.c.len());
        for a in &self.c {
            if !a.is_divisible(k) {
                return None;
            }
            c.push(a.div_exact_ref(k).complete());
        }
        Some(CycInt { ring: self.ring, c })
    }

    pub fn pow(&self, e: u32) -> CycInt {
        let mut acc = CycInt::one(self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Complex conjugation zeta -> zeta^{-1}.
    pub fn conj(&self) -> CycInt {
        let c = &self.c;
        let v = match self.ring {
            Ring::M4 => vec![c[0].clone(), (-&c[1]).complete()],
            Ring::M8 => vec![c[0].clone(), (-&c[3]).complete(), (-&c[2]).complete(), (-&c[1]).complete()],
            Ring::M12 => vec![
                (&c[0] + &c[2]).complete(),
                c[1].clone(),
                (-&c[2]).complete(),
                (-(&c[1] + &c[3]).complete()),
            ],
        };
        CycInt { ring: self.ring, c: v }
    }

    /// The automorphism zeta -> -zeta (m = 8, 12 only).
    pub fn bullet(&self) -> Result<CycInt> {
        if self.ring == Ring::M4 {
            return Err(PqfError::InvalidInput("bullet is not used for m=4".into()));
        }
        Ok(self.bullet_unchecked())
    }

    fn bullet_unchecked(&self) -> CycInt {
        let c = self.c.iter().enumerate().map(|(j, a)| if j % 2 == 1 { (-a).complete() } else { a.clone() }).collect();
        CycInt { ring: self.ring, c }
    }

    /// z * z^* as an element of the real subring.
    pub fn norm_sq(&self) -> RealCycInt {
        let p = self * &self.conj();
        RealCycInt::from_cyc(&p).expect("z z^* must lie in the real subring")
    }

    /// Product of all Galois conjugates; a non-negative rational integer.
    pub fn galois_norm(&self) -> Integer {
        let n = self.norm_sq();
        match self.ring {
            Ring::M4 => n.a,
            _ => n.abs_norm(),
        }
    }

    /// Product of the non-identity Galois conjugates.
    fn norm_cofactor(&self) -> CycInt {
        let cj = self.conj();
        match self.ring {
            Ring::M4 => cj,
            _ => {
                let b = self.bullet_unchecked();
                let bc = cj.bullet_unchecked();
                &(&cj * &b) * &bc
            }
        }
    }

    /// self / o when the quotient lies in the ring.
    pub fn div_exact(&self, o: &CycInt) -> Option<CycInt> {
        if o.is_zero() || self.ring != o.ring {
            return None;
        }
        let n = o.galois_norm();
        let num = self * &o.norm_cofactor();
        num.div_int_exact(&n)
    }

    pub fn divides(&self, o: &CycInt) -> bool {
        o.div_exact(self).is_some()
    }

    /// Euclidean division: returns (q, r) with self = q o + r and N(r) < N(o).
    pub fn div_rem(&self, o: &CycInt) -> Result<(CycInt, CycInt)> {
        check(self.ring, o.ring)?;
        if o.is_zero() {
            return Err(PqfError::InvalidInput("division by zero".into()));
        }
        let n = o.galois_norm();
        let num = self * &o.norm_cofactor();
        let two_n = (&n * 2u32).complete();
        let q: Vec<Integer> = num
            .c
            .iter()
            .map(|a| {
                let t = (a * 2u32).complete() + &n;
                t.div_floor(&two_n)
            })
            .collect();
        let qc = CycInt { ring: self.ring, c: q };
        let r = self - &(&qc * o);
        let nn = o.galois_norm();
        if r.galois_norm() < nn {
            return Ok((qc, r));
        }
        // Coordinate rounding missed; search the enclosing unit cell.
        let floors: Vec<Integer> = num.c.iter().map(|a| a.clone().div_floor(&n)).collect();
        let d = self.ring.d();
        let mut best: Option<(Integer, CycInt, CycInt)> = None;
        for mask in 0..(1u32 << d) {
            let c = floors.iter().enumerate().map(|(j, f)| (f + ((mask >> j) & 1)).complete()).collect();
            let qc = CycInt { ring: self.ring, c };
            let r = self - &(&qc * o);
            let rn = r.galois_norm();
            if best.as_ref().map_or(true, |b| rn < b.0) {
                best = Some((rn, qc, r));
            }
        }
        let (rn, qc, r) = best.unwrap();
        if rn < nn {
            Ok((qc, r))
        } else {
            Err(PqfError::InternalReductionFailure("Euclidean step did not reduce the norm".into()))
        }
    }

    /// Greatest common divisor, unique up to units.
    pub fn gcd(&self, o: &CycInt) -> Result<CycInt> {
        check(self.ring, o.ring)?;
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// Twice the real part as (A, B) meaning A + B sqrt(disc).
    pub fn re2(&self) -> (Integer, Integer) {
        let c = &self.c;
        match self.ring {
            Ring::M4 => ((&c[0] * 2u32).complete(), Integer::new()),
            Ring::M8 => ((&c[0] * 2u32).complete(), (&c[1] - &c[3]).complete()),
            Ring::M12 => ((&c[0] * 2u32).complete() + &c[2], c[1].clone()),
        }
    }

    /// Twice the imaginary part as (A, B) meaning A + B sqrt(disc).
    pub fn im2(&self) -> (Integer, Integer) {
        let c = &self.c;
        match self.ring {
            Ring::M4 => ((&c[1] * 2u32).complete(), Integer::new()),
            Ring::M8 => ((&c[2] * 2u32).complete(), (&c[1] + &c[3]).complete()),
            Ring::M12 => ((&c[3] * 2u32).complete() + &c[1], c[2].clone()),
        }
    }

    pub fn eval(&self, prec: u32) -> CIval {
        let disc = self.ring.disc();
        let s = if disc == 0 { Ival::zero(prec) } else { Ival::sqrt_int(prec, disc) };
        let part = |(a, b): (Integer, Integer)| Ival::from_int(prec, &a).add(&s.mul_int(&b)).div_u32(2);
        CIval { re: part(self.re2()), im: part(self.im2()) }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        let v = self.eval(64);
        (v.re.to_f64(), v.im.to_f64())
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> Integer {
        self.c.iter().map(|a| a.clone().abs()).max().unwrap_or_default()
    }
}

impl<'a> Add<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn add(self, o: &CycInt) -> CycInt {
        self.try_add(o).expect("mixed-ring addition")
    }
}

impl<'a> Sub<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn sub(self, o: &CycInt) -> CycInt {
        self.try_sub(o).expect("mixed-ring subtraction")
    }
}

impl<'a> Mul<&'a CycInt> for &'a CycInt {
    type Output = CycInt;
    fn mul(self, o: &CycInt) -> CycInt {
        self.try_mul(o).expect("mixed-ring multiplication")
    }
}

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt { ring: self.ring, c: self.c.iter().map(|a| (-a).complete()).collect() }
    }
}

/// Complex interval.
#[derive(Clone, Debug)]
pub struct CIval {
    pub re: Ival,
    pub im: Ival,
}

impl CIval {
    pub fn new(re: Ival, im: Ival) -> CIval {
        CIval { re, im }
    }

    pub fn abs_sq(&self) -> Ival {
        self.re.sqr().add(&self.im.sqr())
    }

    pub fn abs(&self) -> Ival {
        self.abs_sq().sqrt()
    }

    pub fn mul(&self, o: &CIval) -> CIval {
        CIval {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn add(&self, o: &CIval) -> CIval {
        CIval { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CIval) -> CIval {
        CIval { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn conj(&self) -> CIval {
        CIval { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn scale(&self, s: &Ival) -> CIval {
        CIval { re: self.re.mul(s), im: self.im.mul(s) }
    }

    /// e^{i t}.
    pub fn expi(t: &Ival) -> CIval {
        CIval { re: t.cos(), im: t.sin() }
    }

    pub fn arg(&self) -> Option<Ival> {
        Ival::atan2(&self.im, &self.re)
    }
}

/// Element a + b rho of the real subring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RealCycInt {
    ring: Ring,
    pub(crate) a: Integer,
    pub(crate) b: Integer,
}

impl fmt::Debug for RealCycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RealCycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ring {
            Ring::M4 => write!(f, "{}", self.a),
            r => write!(f, "{} + {}*sqrt({})", self.a, self.b, r.disc()),
        }
    }
}

impl RealCycInt {
    pub fn new(ring: Ring, a: Integer, b: Integer) -> Result<RealCycInt> {
        if ring == Ring::M4 && !b.is_zero() {
            return Err(PqfError::InvalidInput("m=4 reals are rational integers".into()));
        }
        Ok(RealCycInt { ring, a, b })
    }

    pub fn from_int(ring: Ring, a: Integer) -> RealCycInt {
        RealCycInt { ring, a, b: Integer::new() }
    }

    pub fn from_i64(ring: Ring, a: i64) -> RealCycInt {
        RealCycInt::from_int(ring, Integer::from(a))
    }

    pub fn from_i64s(ring: Ring, a: i64, b: i64) -> RealCycInt {
        assert!(ring != Ring::M4 || b == 0);
        RealCycInt { ring, a: Integer::from(a), b: Integer::from(b) }
    }

    pub fn rho(ring: Ring) -> RealCycInt {
        RealCycInt::from_i64s(ring, 0, 1)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }

    pub fn b(&self) -> &Integer {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a == 1 && self.b.is_zero()
    }

    pub fn try_add(&self, o: &RealCycInt) -> Result<RealCycInt> {
        check(self.ring, o.ring)?;
        Ok(RealCycInt { ring: self.ring, a: (&self.a + &o.a).complete(), b: (&self.b + &o.b).complete() })
    }

    pub fn try_sub(&self, o: &RealCycInt) -> Result<RealCycInt> {
        check(self.ring, o.ring)?;
        Ok(RealCycInt { ring: self.ring, a: (&self.a - &o.a).complete(), b: (&self.b - &o.b).complete() })
    }

    pub fn try_mul(&self, o: &RealCycInt) -> Result<RealCycInt> {
        check(self.ring, o.ring)?;
        let disc = self.ring.disc();
        let a = (&self.a * &o.a).complete() + (&self.b * &o.b).complete() * disc;
        let b = (&self.a * &o.b).complete() + (&self.b * &o.a).complete();
        Ok(RealCycInt { ring: self.ring, a, b })
    }

    pub fn scale(&self, k: &Integer) -> RealCycInt {
        RealCycInt { ring: self.ring, a: (&self.a * k).complete(), b: (&self.b * k).complete() }
    }

    pub fn pow(&self, e: u32) -> RealCycInt {
        let mut acc = RealCycInt::from_i64(self.ring, 1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Conjugate rho -> -rho.
    pub fn bullet(&self) -> RealCycInt {
        RealCycInt { ring: self.ring, a: self.a.clone(), b: (-&self.b).complete() }
    }

    /// r r^bullet (r^2 for m = 4).
    pub fn abs_norm(&self) -> Integer {
        match self.ring {
            Ring::M4 => self.a.square_ref().complete(),
            r => self.a.square_ref().complete() - self.b.square_ref().complete() * r.disc(),
        }
    }

    pub fn sign(&self) -> Ordering {
        sign_quad(&self.a, &self.b, self.ring.disc())
    }

    pub fn sign_bullet(&self) -> Ordering {
        self.bullet().sign()
    }

    pub fn is_totally_nonneg(&self) -> bool {
        self.sign() != Ordering::Less && (self.ring == Ring::M4 || self.sign_bullet() != Ordering::Less)
    }

    pub fn is_totally_positive(&self) -> bool {
        self.sign() == Ordering::Greater && (self.ring == Ring::M4 || self.sign_bullet() == Ordering::Greater)
    }

    pub fn is_unit(&self) -> bool {
        self.abs_norm().abs() == 1
    }

    pub fn div_exact(&self, o: &RealCycInt) -> Option<RealCycInt> {
        if o.is_zero() || self.ring != o.ring {
            return None;
        }
        let n = o.abs_norm();
        let num = if self.ring == Ring::M4 { self.clone() } else { self * &o.bullet() };
        let n = if self.ring == Ring::M4 { o.a.clone() } else { n };
        if num.a.is_divisible(&n) && num.b.is_divisible(&n) {
            Some(RealCycInt { ring: self.ring, a: num.a.div_exact(&n), b: num.b.div_exact(&n) })
        } else {
            None
        }
    }

    pub fn to_cyc(&self) -> CycInt {
        let (a, b) = (&self.a, &self.b);
        let c = match self.ring {
            Ring::M4 => vec![a.clone(), Integer::new()],
            Ring::M8 => vec![a.clone(), b.clone(), Integer::new(), (-b).complete()],
            Ring::M12 => vec![a.clone(), (b * 2u32).complete(), Integer::new(), (-b).complete()],
        };
        CycInt { ring: self.ring, c }
    }

    /// Inverse of `to_cyc`; `None` if `z` is not real.
    pub fn from_cyc(z: &CycInt) -> Option<RealCycInt> {
        let c = &z.c;
        match z.ring {
            Ring::M4 => c[1].is_zero().then(|| RealCycInt::from_int(Ring::M4, c[0].clone())),
            Ring::M8 => (c[2].is_zero() && (&c[3] + &c[1]).complete().is_zero())
                .then(|| RealCycInt { ring: Ring::M8, a: c[0].clone(), b: c[1].clone() }),
            Ring::M12 => (c[2].is_zero() && (&c[3] * 2u32).complete() + &c[1] == 0)
                .then(|| RealCycInt { ring: Ring::M12, a: c[0].clone(), b: (-&c[3]).complete() }),
        }
    }

    pub fn eval(&self, prec: u32) -> Ival {
        let v = Ival::from_int(prec, &self.a);
        match self.ring.disc() {
            0 => v,
            d => v.add(&Ival::sqrt_int(prec, d).mul_int(&self.b)),
        }
    }

    pub fn eval_bullet(&self, prec: u32) -> Ival {
        self.bullet().eval(prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.eval(64).to_f64()
    }
}

impl<'a> Add<&'a RealCycInt> for &'a RealCycInt {
    type Output = RealCycInt;
    fn add(self, o: &RealCycInt) -> RealCycInt {
        self.try_add(o).expect("mixed-ring addition")
    }
}

impl<'a> Sub<&'a RealCycInt> for &'a RealCycInt {
    type Output = RealCycInt;
    fn sub(self, o: &RealCycInt) -> RealCycInt {
        self.try_sub(o).expect("mixed-ring subtraction")
    }
}

impl<'a> Mul<&'a RealCycInt> for &'a RealCycInt {
    type Output = RealCycInt;
    fn mul(self, o: &RealCycInt) -> RealCycInt {
        self.try_mul(o).expect("mixed-ring multiplication")
    }
}

impl Neg for &RealCycInt {
    type Output = RealCycInt;
    fn neg(self) -> RealCycInt {
        RealCycInt { ring: self.ring, a: (-&self.a).complete(), b: (-&self.b).complete() }
    }
}

/// Element w of Z[zeta] with |w|^2 equal to the fundamental totally
/// positive unit, and its inverse.
fn half_unit(ring: Ring) -> (CycInt, CycInt) {
    match ring {
        Ring::M8 => {
            // |1 + sqrt2|^2 = (1 + sqrt2)^2.
            let l = RealCycInt::from_i64s(ring, 1, 1).to_cyc();
            let li = RealCycInt::from_i64s(ring, -1, 1).to_cyc();
            (l, li)
        }
        Ring::M12 => {
            let w = CycInt::from_i64s(ring, &[1, 1, 0, 0]);
            let inv = &w.conj() * &RealCycInt::from_i64s(ring, 2, -1).to_cyc();
            (w, inv)
        }
        Ring::M4 => (CycInt::one(ring), CycInt::one(ring)),
    }
}

/// Rescale `y` by a unit so that `norm_sq(y) == target` exactly.
pub fn unit_adjust(y: &CycInt, target: &RealCycInt) -> Result<CycInt> {
    check(y.ring, target.ring)?;
    let n = y.norm_sq();
    if n == *target {
        return Ok(y.clone());
    }
    let u = n.div_exact(target).ok_or(PqfError::NotAdjustable)?;
    if !u.is_unit() || !u.is_totally_positive() {
        return Err(PqfError::NotAdjustable);
    }
    let ring = y.ring;
    if ring == Ring::M4 {
        return Err(PqfError::NotAdjustable);
    }
    // Totally positive units are powers of v^2 (m=8) or v (m=12).
    let base = match ring {
        Ring::M8 => RealCycInt::from_i64s(ring, 3, 2),
        _ => RealCycInt::from_i64s(ring, 2, 1),
    };
    let big = Float::with_val(64, u.a.clone().abs()) + Float::with_val(64, u.b.clone().abs()) * Float::with_val(64, ring.disc()).sqrt();
    let step = base.eval(64).mid().ln();
    let mag = (big.ln() / step).to_f64().round() as i64;
    let j = if u.b.cmp0() == Ordering::Greater { mag } else { -mag };
    let pw = base.pow(j.unsigned_abs() as u32);
    let expect = if j >= 0 { pw } else { pw.bullet() };
    if expect != u {
        return Err(PqfError::NotAdjustable);
    }
    let (w, winv) = half_unit(ring);
    let f = if j >= 0 { winv.pow(j as u32) } else { w.pow((-j) as u32) };
    let out = y * &f;
    debug_assert_eq!(out.norm_sq(), *target);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c8(v: &[i64]) -> CycInt {
        CycInt::from_i64s(Ring::M8, v)
    }

    fn c12(v: &[i64]) -> CycInt {
        CycInt::from_i64s(Ring::M12, v)
    }

    /// Oracle: evaluate sum a_j e^{2 pi i j/m} with independent cos/sin.
    fn oracle_eval(z: &CycInt, prec: u32) -> (Float, Float) {
        let m = z.ring().m();
        let mut re = Float::new(prec);
        let mut im = Float::new(prec);
        for (j, a) in z.coeffs().iter().enumerate() {
            let t = Float::with_val(prec, rug::float::Constant::Pi) * 2u32 * j as u32 / m;
            re += Float::with_val(prec, t.cos_ref()) * a;
            im += Float::with_val(prec, t.sin_ref()) * a;
        }
        (re, im)
    }

    fn close(iv: &Ival, x: &Float, tol_exp: i32) -> bool {
        let tol = Float::with_val(64, Float::i_exp(1, tol_exp));
        let lo = Float::with_val(iv.prec() + 64, iv.lo() - &tol);
        let hi = Float::with_val(iv.prec() + 64, iv.hi() + &tol);
        &lo <= x && x <= &hi
    }

    #[test]
    fn root_of_unity_identities() {
        assert_eq!(&CycInt::zeta_pow(Ring::M8, 1) * &CycInt::zeta_pow(Ring::M8, 7), CycInt::one(Ring::M8));
        assert_eq!(CycInt::zeta_pow(Ring::M12, 6), -&CycInt::one(Ring::M12));
        assert_eq!(CycInt::zeta_pow(Ring::M4, 2), -&CycInt::one(Ring::M4));
        let w = c8(&[0, 1, 0, 0]);
        let a = &c8(&[1, 0, 0, 0]) + &w;
        let b = &c8(&[1, 0, 0, 0]) - &w;
        assert_eq!(&a * &b, c8(&[1, 0, -1, 0]));
        assert_eq!(CycInt::zeta_pow(Ring::M12, 1).pow(12), CycInt::one(Ring::M12));
    }

    #[test]
    fn mixed_ring_rejected() {
        let r = CycInt::one(Ring::M8).try_mul(&CycInt::one(Ring::M12));
        assert_eq!(r, Err(PqfError::MixedRing(8, 12)));
    }

    #[test]
    fn conj_examples() {
        assert_eq!(c8(&[0, 1, 0, 0]).conj(), c8(&[0, 0, 0, -1]));
        assert_eq!(c8(&[1, 0, 0, -1]).conj(), c8(&[1, 1, 0, 0]));
        assert_eq!(CycInt::one(Ring::M12).conj(), CycInt::one(Ring::M12));
    }

    #[test]
    fn bullet_examples() {
        let rho = RealCycInt::rho(Ring::M8).to_cyc();
        assert_eq!(rho.bullet().unwrap(), -&rho);
        assert!(CycInt::one(Ring::M4).bullet().is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(c8(&[1, 0, 0, -1]).norm_sq(), RealCycInt::from_i64s(Ring::M8, 2, 1));
        assert_eq!(CycInt::from_i64s(Ring::M4, &[2, 1]).norm_sq(), RealCycInt::from_i64(Ring::M4, 5));
        assert_eq!(RealCycInt::from_i64s(Ring::M8, 5, -2).abs_norm(), 17);
        assert_eq!(RealCycInt::from_i64s(Ring::M8, 1, 1).abs_norm(), -1);
        assert_eq!(RealCycInt::from_i64(Ring::M4, 3).abs_norm(), 9);
    }

    #[test]
    fn eval_examples() {
        let w = c8(&[0, 1, 0, 0]).eval(200);
        let h = Float::with_val(200, 2).sqrt() / 2u32;
        assert!(close(&w.re, &h, -190) && close(&w.im, &h, -190));
        let rho = RealCycInt::rho(Ring::M12).to_cyc().eval(200);
        assert!(close(&rho.re, &Float::with_val(200, 3).sqrt(), -190));
        assert!(rho.im.contains_zero());
    }

    #[test]
    fn gcd_examples() {
        let r = Ring::M4;
        let g = CycInt::from_int(r, 2.into()).gcd(&CycInt::from_i64s(r, &[1, 1])).unwrap();
        assert_eq!(g.galois_norm(), 2);
        assert!(g.divides(&CycInt::from_int(r, 2.into())));
        let p = CycInt::from_int(r, 13.into());
        let g = p.gcd(&CycInt::from_i64s(r, &[5, 1])).unwrap();
        assert_eq!(g.galois_norm(), 13);
        let z = c8(&[3, -1, 4, 1]);
        let g = z.gcd(&CycInt::zero(Ring::M8)).unwrap();
        assert_eq!(g, z);
    }

    #[test]
    fn real_embedding_round_trip() {
        for ring in [Ring::M8, Ring::M12] {
            let r = RealCycInt::from_i64s(ring, 7, -3);
            assert_eq!(RealCycInt::from_cyc(&r.to_cyc()), Some(r.clone()));
            let z = r.to_cyc();
            assert_eq!(z, z.conj());
        }
    }

    #[test]
    fn unit_adjust_examples() {
        let r = Ring::M8;
        let y = c8(&[1, 2, 0, -1]);
        let t = y.norm_sq();
        assert_eq!(unit_adjust(&y, &t).unwrap(), y);
        let l = RealCycInt::from_i64s(r, 1, 1);
        let y2 = &y * &l.to_cyc();
        let out = unit_adjust(&y2, &t).unwrap();
        assert_eq!(out.norm_sq(), t);
        assert_eq!(unit_adjust(&y, &(-&t)), Err(PqfError::NotAdjustable));
        let lam3 = l.pow(3);
        let y3 = &y * &lam3.bullet().to_cyc();
        assert_eq!(unit_adjust(&y3, &t).unwrap().norm_sq(), t);
        // A unit of norm -1 is never a norm.
        assert_eq!(unit_adjust(&y, &(&t * &l)), Err(PqfError::NotAdjustable));
        let y12 = c12(&[2, -1, 3, 1]);
        let t12 = y12.norm_sq();
        let w = c12(&[1, 1, 0, 0]).pow(5);
        assert_eq!(unit_adjust(&(&y12 * &w), &t12).unwrap().norm_sq(), t12);
        let w = c12(&[1, 1, 0, 0]).conj().pow(2);
        assert_eq!(unit_adjust(&(&y12 * &w), &t12).unwrap().norm_sq(), t12);
        let winv = CycInt::one(Ring::M12).div_exact(&w).unwrap();
        assert_eq!(unit_adjust(&(&y12 * &winv), &t12).unwrap().norm_sq(), t12);
    }

    #[test]
    fn quad_sign() {
        assert_eq!(sign_quad(&Integer::from(-1), &Integer::from(1), 2), Ordering::Greater);
        assert_eq!(sign_quad(&Integer::from(2), &Integer::from(-1), 3), Ordering::Greater);
        assert_eq!(sign_quad(&Integer::from(3), &Integer::from(-2), 3), Ordering::Less);
        assert_eq!(sign_quad(&Integer::from(0), &Integer::from(0), 3), Ordering::Equal);
    }

    fn arb_cyc(ring: Ring, bound: i64) -> impl Strategy<Value = CycInt> {
        proptest::collection::vec(-bound..=bound, ring.d()).prop_map(move |v| CycInt::from_i64s(ring, &v))
    }

    fn arb_ring() -> impl Strategy<Value = Ring> {
        prop_oneof![Just(Ring::M4), Just(Ring::M8), Just(Ring::M12)]
    }

    proptest! {
        #[test]
        fn conj_matches_complex_conjugate((z, prec) in arb_ring().prop_flat_map(|r| (arb_cyc(r, 1 << 40), prop_oneof![Just(64u32), Just(200u32)]))) {
            let e = z.conj().eval(prec);
            let (re, im) = oracle_eval(&z, prec + 40);
            prop_assert!(close(&e.re, &re, -(prec as i32) + 50));
            prop_assert!(close(&e.im, &(-im), -(prec as i32) + 50));
        }

        #[test]
        fn automorphisms_are_ring_maps(ring in prop_oneof![Just(Ring::M8), Just(Ring::M12)], seed in any::<u64>()) {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let mut gen = || {
                let v: Vec<i64> = (0..4).map(|_| rand::Rng::gen_range(&mut rng, -50..=50)).collect();
                CycInt::from_i64s(ring, &v)
            };
            let (a, b) = (gen(), gen());
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
            prop_assert_eq!((&a * &b).bullet().unwrap(), &a.bullet().unwrap() * &b.bullet().unwrap());
            prop_assert_eq!((&a + &b).bullet().unwrap(), &a.bullet().unwrap() + &b.bullet().unwrap());
            prop_assert_eq!(a.conj().bullet().unwrap(), a.bullet().unwrap().conj());
            prop_assert_eq!(a.bullet().unwrap().bullet().unwrap(), a.clone());
        }

        #[test]
        fn norm_sq_is_modulus_squared(z in arb_ring().prop_flat_map(|r| arb_cyc(r, 1000))) {
            let n = z.norm_sq();
            let v = z.eval(128).abs_sq();
            let e = n.eval(128);
            prop_assert!(e.sub(&v).abs().hi() < &Float::with_val(64, Float::i_exp(1, -80)));
            prop_assert!(n.sign() != Ordering::Less);
            if z.ring() != Ring::M4 {
                let zb = z.bullet().unwrap().eval(128).abs_sq();
                let prod = v.mul(&zb);
                let an = Ival::from_int(128, &n.abs_norm());
                prop_assert!(an.sub(&prod).abs().hi() < &Float::with_val(64, Float::i_exp(1, -60)));
            }
        }

        #[test]
        fn div_rem_reduces_norm((a, b) in arb_ring().prop_flat_map(|r| (arb_cyc(r, 1 << 20), arb_cyc(r, 1000)))) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b).unwrap();
            prop_assert_eq!(&(&q * &b) + &r, a);
            prop_assert!(r.galois_norm() < b.galois_norm());
        }

        #[test]
        fn gcd_divides_both((a, b, c) in arb_ring().prop_flat_map(|r| (arb_cyc(r, 300), arb_cyc(r, 300), arb_cyc(r, 30)))) {
            prop_assume!(!c.is_zero());
            let (x, y) = (&a * &c, &b * &c);
            let g = x.gcd(&y).unwrap();
            if !g.is_zero() {
                prop_assert!(g.divides(&x) && g.divides(&y) && c.divides(&g));
            }
        }

        #[test]
        fn gcd_terminates_on_huge_inputs(ring in arb_ring(), seed in any::<u64>()) {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let mut gen = || {
                let c = (0..ring.d()).map(|_| {
                    let mut bytes = [0u8; 32];
                    rand::RngCore::fill_bytes(&mut rng, &mut bytes);
                    let v = Integer::from_digits(&bytes, rug::integer::Order::Lsf);
                    if rand::Rng::gen_bool(&mut rng, 0.5) { -v } else { v }
                }).collect();
                CycInt::new(ring, c).unwrap()
            };
            let (a, b) = (gen(), gen());
            let g = a.gcd(&b).unwrap();
            prop_assert!(g.divides(&a) && g.divides(&b));
        }
    }
}
