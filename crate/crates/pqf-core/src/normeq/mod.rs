//! Norm equations |y|^2 = xi over Z[zeta_m] and two squares over Z[i].
//!
//! Solvability is decided from a limited factorization of xi in the real
//! subring: trial division by the primes below 1000, a bounded Pollard-Brent
//! run on what is left of the norm, then Miller-Rabin. Every rational prime
//! found is lifted to its ring primes, and each odd-exponent ring prime must
//! be good for the equation to be easy.

pub mod factor;

use std::cmp::Ordering;

use rug::{Complete, Integer};
use serde::Serialize;

use crate::error::{PqfError, Result};
use crate::rings::{unit_adjust, CycInt, RealCycInt, Ring};

use factor::{cornacchia, factor_limited, is_prime, sqrt_mod};

/// Rho iterations allowed per call; about a quarter second of desk CPU on
/// the norms that arise at eps = 1e-20.
pub const DEFAULT_RHO_BUDGET: u64 = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    pub rho_budget: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { rho_budget: DEFAULT_RHO_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitedFactorization {
    pub unit: RealCycInt,
    pub factors: Vec<(RealCycInt, u32)>,
    /// 1 when the factorization is complete, else an element whose norm is
    /// an unfactored composite.
    pub cofactor: RealCycInt,
    pub budget_spent: u64,
}

impl LimitedFactorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    /// unit * prod factor^exp * cofactor.
    pub fn product(&self) -> RealCycInt {
        let mut acc = &self.unit * &self.cofactor;
        for (p, e) in &self.factors {
            acc = &acc * &p.pow(*e);
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrimeClass {
    Good,
    Bad,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormEqStatus {
    Solved(CycInt),
    ProvablyUnsolvable,
    NotEasy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormEqOutcome {
    pub status: NormEqStatus,
    pub certificate: Option<LimitedFactorization>,
}

impl NormEqOutcome {
    pub fn solution(&self) -> Option<&CycInt> {
        match &self.status {
            NormEqStatus::Solved(y) => Some(y),
            _ => None,
        }
    }
}

/// Nearest integer to x / n for n > 0.
fn round_div(x: &Integer, n: &Integer) -> Integer {
    let num = (x * 2u32).complete() + n;
    let den = (n * 2u32).complete();
    num.div_rem_floor(den).0
}

/// Euclidean division in Z[rho] with rounded coordinates; the remainder has
/// strictly smaller |abs_norm| for rho^2 = 2 and rho^2 = 3.
fn real_div_rem(a: &RealCycInt, b: &RealCycInt) -> (RealCycInt, RealCycInt) {
    let ring = a.ring();
    let mut n = b.abs_norm();
    let mut num = if ring == Ring::M4 { a.clone() } else { a * &b.bullet() };
    if ring == Ring::M4 {
        n = b.a().clone();
    }
    if n.cmp0() == Ordering::Less {
        n = -n;
        num = -&num;
    }
    let q = RealCycInt::new(ring, round_div(num.a(), &n), round_div(num.b(), &n)).expect("same ring");
    let r = a - &(&q * b);
    (q, r)
}

fn real_gcd(a: &RealCycInt, b: &RealCycInt) -> RealCycInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let (_, r) = real_div_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Totally positive associate when one exists, else the positive one.
fn normalize(p: &RealCycInt) -> RealCycInt {
    let mut p = p.clone();
    if p.ring() == Ring::M8 && p.abs_norm().cmp0() == Ordering::Less {
        p = &p * &RealCycInt::from_i64s(Ring::M8, 1, 1);
    }
    if p.sign() == Ordering::Less {
        p = -&p;
    }
    p
}

/// Ring primes of Z[rho] above the rational prime p, up to units.
pub fn primes_above(p: &Integer, ring: Ring) -> Vec<RealCycInt> {
    let d = ring.disc();
    match ring {
        Ring::M4 => return vec![RealCycInt::from_int(ring, p.clone())],
        Ring::M8 if *p == 2 => return vec![RealCycInt::from_i64s(ring, 2, 1)],
        Ring::M12 if *p == 2 => return vec![RealCycInt::from_i64s(ring, 1, 1)],
        Ring::M12 if *p == 3 => return vec![RealCycInt::rho(ring)],
        _ => {}
    }
    match sqrt_mod(&Integer::from(d), p) {
        Some(s) => {
            let pe = RealCycInt::from_int(ring, p.clone());
            let t = RealCycInt::new(ring, s, Integer::from(1)).expect("real ring");
            let pi = normalize(&real_gcd(&pe, &t));
            debug_assert_eq!(pi.abs_norm().abs(), *p);
            let pb = normalize(&pi.bullet());
            vec![pi, pb]
        }
        None => vec![RealCycInt::from_int(ring, p.clone())],
    }
}

/// Good/bad classification of a prime element of Z[rho].
pub fn classify_prime(xi: &RealCycInt, ring: Ring) -> Result<PrimeClass> {
    if xi.ring() != ring {
        return Err(PqfError::MixedRing(xi.ring().m(), ring.m()));
    }
    let m = ring.m();
    let n = match ring {
        Ring::M4 => xi.a().clone().abs(),
        _ => xi.abs_norm().abs(),
    };
    let good = |v: bool| if v { PrimeClass::Good } else { PrimeClass::Bad };
    let q = xi.a().clone().abs();
    if xi.b().is_zero() && is_prime(&q) {
        return Ok(good(q.mod_u(m) != m - 1));
    }
    if is_prime(&n) {
        return Ok(good(n.mod_u(m) == 1 || (ring == Ring::M8 && n == 2)));
    }
    if n.is_perfect_square() {
        let q = n.clone().sqrt();
        if is_prime(&q) && xi.div_exact(&RealCycInt::from_int(ring, q.clone())).is_some_and(|u| u.is_unit()) {
            return Ok(good(q.mod_u(m) != m - 1));
        }
    }
    Err(PqfError::PreconditionViolated(format!("{xi} is not a prime of the real subring")))
}

fn norm_int(xi: &RealCycInt) -> Integer {
    match xi.ring() {
        Ring::M4 => xi.a().clone().abs(),
        _ => xi.abs_norm().abs(),
    }
}

/// Factor xi as unit * prod primes^e * cofactor within the rho budget.
pub fn limited_factor(xi: &RealCycInt, config: &FactorConfig) -> Result<LimitedFactorization> {
    if xi.is_zero() {
        return Err(PqfError::PreconditionViolated("limited_factor needs xi != 0".into()));
    }
    let ring = xi.ring();
    let mut budget = config.rho_budget;
    let (rational, rest) = factor_limited(&norm_int(xi), &mut budget);
    let mut cur = xi.clone();
    let mut factors = Vec::new();
    for (p, _) in &rational {
        for pi in primes_above(p, ring) {
            let mut e = 0;
            while let Some(q) = cur.div_exact(&pi) {
                cur = q;
                e += 1;
            }
            if e > 0 {
                factors.push((pi, e));
            }
        }
    }
    let one = RealCycInt::from_i64(ring, 1);
    let (unit, cofactor) = if rest == 1 { (cur, one) } else { (one, cur) };
    let lf = LimitedFactorization { unit, factors, cofactor, budget_spent: config.rho_budget - budget };
    debug_assert_eq!(lf.product(), *xi);
    if lf.is_complete() && !lf.unit.is_unit() {
        return Err(PqfError::InternalReductionFailure(format!("leftover {} in factoring {xi}", lf.unit)));
    }
    Ok(lf)
}

/// g in Z[zeta] with |g|^2 an associate of the good prime pi.
fn prime_solution(pi: &RealCycInt) -> Result<CycInt> {
    let ring = pi.ring();
    let fail = || PqfError::InternalReductionFailure(format!("cannot split good prime {pi}"));
    if ring == Ring::M8 && pi.abs_norm().abs() == 2 {
        return Ok(CycInt::from_i64s(ring, &[1, 1, 0, 0]));
    }
    let n = norm_int(pi);
    let p = if is_prime(&n) { n } else { n.sqrt() };
    if ring == Ring::M4 {
        let (x, y) = cornacchia(&p).ok_or_else(fail)?;
        return CycInt::new(ring, vec![x, y]);
    }
    let i = CycInt::imag_unit(ring);
    let t = match sqrt_mod(&Integer::from(-1), &p) {
        Some(h) => CycInt::from_int(ring, h),
        None => {
            let dinv = Integer::from(ring.disc()).invert(&p).map_err(|_| fail())?;
            let s = sqrt_mod(&(-dinv), &p).ok_or_else(fail)?;
            RealCycInt::new(ring, Integer::new(), s)?.to_cyc()
        }
    };
    let g = pi.to_cyc().gcd(&(&t + &i))?;
    let ok = RealCycInt::from_cyc(&g.norm_sq().to_cyc())
        .and_then(|n| n.div_exact(pi))
        .is_some_and(|u| u.is_unit());
    if !ok {
        return Err(fail());
    }
    Ok(g)
}

/// Decide and, when easy, solve |y|^2 = xi.
pub fn solve_norm_eq(xi: &RealCycInt, config: &FactorConfig) -> Result<NormEqOutcome> {
    let ring = xi.ring();
    if !xi.is_totally_nonneg() {
        return Ok(NormEqOutcome { status: NormEqStatus::ProvablyUnsolvable, certificate: None });
    }
    if xi.is_zero() {
        return Ok(NormEqOutcome { status: NormEqStatus::Solved(CycInt::zero(ring)), certificate: None });
    }
    let lf = limited_factor(xi, config)?;
    let mut y = CycInt::one(ring);
    let easy = lf.is_complete();
    for (pi, e) in &lf.factors {
        let class = classify_prime(pi, ring)?;
        if class == PrimeClass::Bad {
            if e % 2 == 1 {
                return Ok(NormEqOutcome { status: NormEqStatus::ProvablyUnsolvable, certificate: Some(lf) });
            }
            y = &y * &pi.to_cyc().pow(e / 2);
        } else if easy {
            y = &y * &prime_solution(pi)?.pow(*e);
        }
    }
    if !easy {
        return Ok(NormEqOutcome { status: NormEqStatus::NotEasy, certificate: Some(lf) });
    }
    let y = unit_adjust(&y, xi).map_err(|e| match e {
        PqfError::NotAdjustable => PqfError::InternalReductionFailure(format!("unit mismatch solving |y|^2 = {xi}")),
        e => e,
    })?;
    if y.norm_sq() != *xi {
        return Err(PqfError::Verification(format!("norm_sq({y}) != {xi}")));
    }
    Ok(NormEqOutcome { status: NormEqStatus::Solved(y), certificate: Some(lf) })
}

/// Two squares over Z[i] with the full outcome.
pub fn solve_two_squares_with(n: &Integer, config: &FactorConfig) -> Result<NormEqOutcome> {
    if n.cmp0() == Ordering::Less {
        return Err(PqfError::PreconditionViolated("two squares needs n >= 0".into()));
    }
    solve_norm_eq(&RealCycInt::from_int(Ring::M4, n.clone()), config)
}

/// y in Z[i] with |y|^2 = n, when the equation is easily solvable.
pub fn solve_two_squares(n: &Integer) -> Option<CycInt> {
    solve_two_squares_with(n, &FactorConfig::default()).ok()?.solution().cloned()
}
