//! Closed real intervals with outward-rounded MPFR endpoints.
//!
//! Every operation returns an interval guaranteed to contain the exact
//! result for all points of the operands. Transcendentals use a midpoint
//! evaluation widened by a derivative bound.

use std::fmt;

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

#[derive(Clone)]
pub struct Ival {
    lo: Float,
    hi: Float,
}

impl fmt::Debug for Ival {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.20e}, {:.20e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

macro_rules! rd {
    ($prec:expr, $e:expr) => {
        Float::with_val_round($prec, $e, Round::Down).0
    };
}
macro_rules! ru {
    ($prec:expr, $e:expr) => {
        Float::with_val_round($prec, $e, Round::Up).0
    };
}

impl Ival {
    pub fn from_bounds(lo: Float, hi: Float) -> Ival {
        debug_assert!(lo <= hi, "inverted interval");
        Ival { lo, hi }
    }

    pub fn from_int(prec: u32, v: &Integer) -> Ival {
        Ival { lo: rd!(prec, v), hi: ru!(prec, v) }
    }

    pub fn from_i64(prec: u32, v: i64) -> Ival {
        Ival::from_int(prec, &Integer::from(v))
    }

    pub fn from_rational(prec: u32, v: &Rational) -> Ival {
        Ival { lo: rd!(prec, v), hi: ru!(prec, v) }
    }

    pub fn from_float(prec: u32, v: &Float) -> Ival {
        Ival { lo: rd!(prec, v), hi: ru!(prec, v) }
    }

    pub fn zero(prec: u32) -> Ival {
        Ival::from_i64(prec, 0)
    }

    pub fn one(prec: u32) -> Ival {
        Ival::from_i64(prec, 1)
    }

    pub fn pi(prec: u32) -> Ival {
        Ival { lo: rd!(prec, Constant::Pi), hi: ru!(prec, Constant::Pi) }
    }

    pub fn sqrt_int(prec: u32, d: u32) -> Ival {
        Ival::from_i64(prec, d as i64).sqrt()
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        let s = Float::with_val(p, &self.lo + &self.hi);
        s / 2u32
    }

    /// Upper bound on the half-width.
    pub fn rad(&self) -> Float {
        self.mid_rad().1
    }

    /// A centre inside the interval and a radius covering it from there.
    pub fn mid_rad(&self) -> (Float, Float) {
        let p = self.prec();
        let m = self.mid();
        let a = ru!(p, &self.hi - &m);
        let b = ru!(p, &m - &self.lo);
        let r = if a > b { a } else { b };
        (m, r)
    }

    pub fn width(&self) -> Float {
        ru!(self.prec(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn is_pos(&self) -> bool {
        self.lo > 0
    }

    pub fn is_neg(&self) -> bool {
        self.hi < 0
    }

    pub fn set_prec(&self, prec: u32) -> Ival {
        Ival { lo: rd!(prec, &self.lo), hi: ru!(prec, &self.hi) }
    }

    pub fn add(&self, o: &Ival) -> Ival {
        let p = self.prec().max(o.prec());
        Ival { lo: rd!(p, &self.lo + &o.lo), hi: ru!(p, &self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &Ival) -> Ival {
        let p = self.prec().max(o.prec());
        Ival { lo: rd!(p, &self.lo - &o.hi), hi: ru!(p, &self.hi - &o.lo) }
    }

    pub fn neg(&self) -> Ival {
        Ival { lo: Float::with_val(self.prec(), -&self.hi), hi: Float::with_val(self.prec(), -&self.lo) }
    }

    pub fn mul(&self, o: &Ival) -> Ival {
        let p = self.prec().max(o.prec());
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = rd!(p, a * b);
            let h = ru!(p, a * b);
            lo = Some(match lo {
                Some(x) if x <= l => x,
                _ => l,
            });
            hi = Some(match hi {
                Some(x) if x >= h => x,
                _ => h,
            });
        }
        Ival { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    pub fn mul_int(&self, k: &Integer) -> Ival {
        self.mul(&Ival::from_int(self.prec(), k))
    }

    pub fn sqr(&self) -> Ival {
        let p = self.prec();
        if self.lo >= 0 {
            Ival { lo: rd!(p, self.lo.square_ref()), hi: ru!(p, self.hi.square_ref()) }
        } else if self.hi <= 0 {
            Ival { lo: rd!(p, self.hi.square_ref()), hi: ru!(p, self.lo.square_ref()) }
        } else {
            let a = ru!(p, self.lo.square_ref());
            let b = ru!(p, self.hi.square_ref());
            Ival { lo: Float::new(p), hi: if a > b { a } else { b } }
        }
    }

    /// self^e by repeated squaring.
    pub fn pow_u(&self, e: u32) -> Ival {
        let mut acc = Ival::one(self.prec());
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.sqr();
            e >>= 1;
        }
        acc
    }

    /// Division; `None` when the divisor interval contains zero.
    pub fn div(&self, o: &Ival) -> Option<Ival> {
        if o.contains_zero() {
            return None;
        }
        let p = self.prec().max(o.prec());
        let inv = Ival { lo: rd!(p, 1 / &o.hi), hi: ru!(p, 1 / &o.lo) };
        Some(self.mul(&inv))
    }

    pub fn div_u32(&self, k: u32) -> Ival {
        let p = self.prec();
        Ival { lo: rd!(p, &self.lo / k), hi: ru!(p, &self.hi / k) }
    }

    pub fn mul_2si(&self, e: i32) -> Ival {
        let p = self.prec();
        Ival { lo: Float::with_val(p, &self.lo << e), hi: Float::with_val(p, &self.hi << e) }
    }

    pub fn abs(&self) -> Ival {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            let a = Float::with_val(self.prec(), -&self.lo);
            let hi = if a > self.hi { a } else { self.hi.clone() };
            Ival { lo: Float::new(self.prec()), hi }
        }
    }

    pub fn sqrt(&self) -> Ival {
        let p = self.prec();
        let lo = if self.lo > 0 { rd!(p, self.lo.sqrt_ref()) } else { Float::new(p) };
        let hi = if self.hi > 0 { ru!(p, self.hi.sqrt_ref()) } else { Float::new(p) };
        Ival { lo, hi }
    }

    fn widen(center_lo: Float, center_hi: Float, r: &Float) -> Ival {
        let p = center_lo.prec();
        Ival { lo: rd!(p, &center_lo - r), hi: ru!(p, &center_hi + r) }
    }

    pub fn sin(&self) -> Ival {
        let p = self.prec();
        let (m, r) = self.mid_rad();
        let out = Ival::widen(rd!(p, m.sin_ref()), ru!(p, m.sin_ref()), &r);
        out.clamp_unit()
    }

    pub fn cos(&self) -> Ival {
        let p = self.prec();
        let (m, r) = self.mid_rad();
        let out = Ival::widen(rd!(p, m.cos_ref()), ru!(p, m.cos_ref()), &r);
        out.clamp_unit()
    }

    fn clamp_unit(mut self) -> Ival {
        if self.lo < -1 {
            self.lo = Float::with_val(self.prec(), -1);
        }
        if self.hi > 1 {
            self.hi = Float::with_val(self.prec(), 1);
        }
        self
    }

    /// Angle of the point (x, y); `None` if the box may touch the origin.
    /// The box must not straddle the negative real axis.
    pub fn atan2(y: &Ival, x: &Ival) -> Option<Ival> {
        let p = y.prec().max(x.prec());
        let r2 = x.sqr().add(&y.sqr());
        if !r2.is_pos() {
            return None;
        }
        let rmin = rd!(p, r2.lo.sqrt_ref());
        let ((ym, yr), (xm, xr)) = (y.mid_rad(), x.mid_rad());
        let d = ru!(p, &yr + &xr);
        let e = ru!(p, &d / &rmin);
        let c_lo = rd!(p, ym.atan2_ref(&xm));
        let c_hi = ru!(p, ym.atan2_ref(&xm));
        Some(Ival::widen(c_lo, c_hi, &e))
    }

    pub fn ln(&self) -> Option<Ival> {
        if !self.is_pos() {
            return None;
        }
        let p = self.prec();
        Some(Ival { lo: rd!(p, self.lo.ln_ref()), hi: ru!(p, self.hi.ln_ref()) })
    }

    pub fn log2(&self) -> Option<Ival> {
        if !self.is_pos() {
            return None;
        }
        let p = self.prec();
        Some(Ival { lo: rd!(p, self.lo.log2_ref()), hi: ru!(p, self.hi.log2_ref()) })
    }

    pub fn exp2(&self) -> Ival {
        let p = self.prec();
        Ival { lo: rd!(p, self.lo.exp2_ref()), hi: ru!(p, self.hi.exp2_ref()) }
    }

    pub fn exp(&self) -> Ival {
        let p = self.prec();
        Ival { lo: rd!(p, self.lo.exp_ref()), hi: ru!(p, self.hi.exp_ref()) }
    }

    /// Certain strict comparison: `Some(true)` if every point is below `o`,
    /// `Some(false)` if every point is at or above, `None` otherwise.
    pub fn lt(&self, o: &Ival) -> Option<bool> {
        if self.hi < o.lo {
            Some(true)
        } else if self.lo >= o.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn le(&self, o: &Ival) -> Option<bool> {
        if self.hi <= o.lo {
            Some(true)
        } else if self.lo > o.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn hull(&self, o: &Ival) -> Ival {
        let lo = if self.lo <= o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi >= o.hi { self.hi.clone() } else { o.hi.clone() };
        Ival { lo, hi }
    }

    /// Floor of the lower endpoint and ceiling of the upper endpoint.
    pub fn int_hull(&self) -> (Integer, Integer) {
        let lo = self.lo.to_integer_round(Round::Down).map(|v| v.0).unwrap_or_default();
        let hi = self.hi.to_integer_round(Round::Up).map(|v| v.0).unwrap_or_default();
        (lo, hi)
    }
}

/// Working precision for a target accuracy: 4 ceil(log2(1/eps)) + 64 bits.
pub fn default_prec(log2_inv_eps: f64) -> u32 {
    4 * log2_inv_eps.ceil().max(1.0) as u32 + 64
}
