//! Stage 1: approximate e^{i theta} by a unimodular cyclotomic rational
//! z^*/z.
//!
//! For m = 8, 12 a fixed-point PSLQ runs on x_j = sin(theta/2 + 2 pi j/m)
//! and stops at the first column of B whose linear form certifies
//! 2|Im(z e^{i theta/2})| < eps |z|. For m = 4 continued fractions of
//! -tan(theta/2) play the same role.

use rug::float::Round;
use rug::ops::{DivRounding, Pow};
use rug::{Complete, Float, Integer, Rational};

use crate::angle::{Angle, Eps};
use crate::error::{PqfError, Result, Stage};
use crate::ival::Ival;
use crate::rings::{sign_quad, CIval, CycInt, RealCycInt, Ring};

/// Number of precision doublings before giving up.
const MAX_DOUBLINGS: u32 = 4;

#[derive(Clone, Debug)]
pub struct PhaseTarget {
    pub theta: Angle,
    pub eps: Eps,
}

#[derive(Clone, Debug)]
pub struct PhaseApprox {
    pub z: CycInt,
    /// Rigorous upper bound on |z^*/z - e^{i theta}|.
    pub achieved_error: f64,
    /// Value of the linear form F(a, x(theta)) = Im(z e^{i theta/2}).
    pub residual: f64,
    pub iterations: usize,
    pub prec: u32,
}

/// x_j(theta) = sin(theta/2 + 2 pi j/m), j < phi(m).
pub fn relation_coeffs(theta: &Ival, ring: Ring) -> Vec<Ival> {
    let p = theta.prec();
    let half = theta.div_u32(2);
    let two_pi = Ival::pi(p).mul_int(&Integer::from(2));
    (0..ring.d())
        .map(|j| half.add(&two_pi.mul_int(&Integer::from(j)).div_u32(ring.m())).sin())
        .collect()
}

/// Im(z e^{i theta/2}) as an interval.
pub fn linear_form(z: &CycInt, theta: &Ival) -> Ival {
    let e = CIval::expi(&theta.div_u32(2));
    z.eval(theta.prec()).mul(&e).im
}

/// Rigorous enclosure of |z^*/z - e^{i theta}| = 2|Im(z e^{i theta/2})|/|z|.
pub fn phase_error(z: &CycInt, theta: &Ival) -> Option<Ival> {
    let f = linear_form(z, theta).abs().mul_int(&Integer::from(2));
    f.div(&z.eval(theta.prec()).abs())
}

fn upper_f64(v: &Ival) -> f64 {
    v.hi().to_f64_round(Round::Up)
}

/// Outcome of a PSLQ run.
#[derive(Clone, Debug)]
pub struct PslqOutcome {
    pub a: Vec<Integer>,
    pub iterations: usize,
}

fn to_fixed(v: &Float, p: u32) -> Integer {
    let s = Float::with_val(v.prec() + p + 2, v << p);
    s.to_integer().unwrap_or_default()
}

fn sqrt_fixed(v: &Integer, p: u32) -> Integer {
    (v << p).complete().sqrt()
}

fn round_div(a: &Integer, b: &Integer) -> Integer {
    let (a, b) = if b.cmp0() == std::cmp::Ordering::Less { ((-a).complete(), (-b).complete()) } else { (a.clone(), b.clone()) };
    let num = (a * 2u32) + &b;
    num.div_floor(b * 2u32)
}

fn fixed_to_f64(v: &Integer, p: u32) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let (m, e) = v.to_f64_exp();
    m * 2f64.powi(e as i32 - p as i32)
}

fn log2_abs(v: &Integer) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = v.to_f64_exp();
    m.abs().log2() + e as f64
}

/// PSLQ with gamma = sqrt(4/3) in `p`-bit fixed point.
///
/// After initialisation and after every iteration the column a of B
/// paired with the smallest |y_j| is offered to `stop(a, r)`, where r
/// approximates |a . x|. The first accepted vector is returned.
pub fn pslq_find<F>(x: &[Float], p: u32, cap: usize, mut stop: F) -> Result<PslqOutcome>
where
    F: FnMut(&[Integer], f64) -> bool,
{
    let n = x.len();
    if n < 2 {
        return Err(PqfError::InvalidInput("PSLQ needs at least two entries".into()));
    }
    let xs: Vec<Integer> = x.iter().map(|v| to_fixed(v, p)).collect();
    if xs.iter().any(|v| v.is_zero()) {
        return Err(PqfError::PreconditionViolated("PSLQ input has a zero entry".into()));
    }
    let exhausted = || PqfError::PrecisionExhausted { stage: Stage::Relation, bits: p };

    // Initial identity columns.
    for j in 0..n {
        let mut a = vec![Integer::new(); n];
        a[j] = Integer::from(1);
        let r = x[j].to_f64().abs();
        if stop(&a, r) {
            return Ok(PslqOutcome { a, iterations: 0 });
        }
    }

    let mut s = vec![Integer::new(); n];
    for k in 0..n {
        let mut t = Integer::new();
        for v in &xs[k..] {
            t += (v.square_ref().complete()) >> p;
        }
        s[k] = sqrt_fixed(&t, p);
    }
    let norm = s[0].clone();
    if norm.is_zero() {
        return Err(exhausted());
    }
    let norm_f64 = fixed_to_f64(&norm, p);
    let mut y: Vec<Integer> = xs.iter().map(|v| (v << p).complete() / &norm).collect();
    for v in s.iter_mut() {
        *v = (&*v << p).complete() / &norm;
    }
    let mut h = vec![vec![Integer::new(); n - 1]; n];
    for i in 0..n {
        for j in 0..(n - 1) {
            if i == j {
                if s[i].is_zero() {
                    return Err(exhausted());
                }
                h[i][j] = (&s[i + 1] << p).complete() / &s[i];
            } else if i > j {
                let den = (&s[j] * &s[j + 1]).complete();
                if den.is_zero() {
                    return Err(exhausted());
                }
                h[i][j] = (-(&y[i] * &y[j]).complete() << p) / den;
            }
        }
    }
    let mut a_mat: Vec<Vec<Integer>> = (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as i32)).collect()).collect();
    let mut b_mat = a_mat.clone();

    let reduce = |y: &mut Vec<Integer>,
                      h: &mut Vec<Vec<Integer>>,
                      a_mat: &mut Vec<Vec<Integer>>,
                      b_mat: &mut Vec<Vec<Integer>>,
                      i: usize,
                      jmax: usize|
     -> Result<()> {
        for j in (0..=jmax).rev() {
            if h[j][j].is_zero() {
                return Err(exhausted());
            }
            let t = round_div(&h[i][j], &h[j][j]);
            if t.is_zero() {
                continue;
            }
            let yi = y[i].clone();
            y[j] += &t * &yi;
            for k in 0..=j {
                let hj = h[j][k].clone();
                h[i][k] -= &t * &hj;
            }
            for k in 0..n {
                let aj = a_mat[j][k].clone();
                a_mat[i][k] -= &t * &aj;
                let bi = b_mat[k][i].clone();
                b_mat[k][j] += &t * &bi;
            }
        }
        Ok(())
    };

    for i in 1..n {
        reduce(&mut y, &mut h, &mut a_mat, &mut b_mat, i, i - 1)?;
    }

    // Only the current best column, the one with the smallest |y_j|, is
    // offered to the predicate.
    let check = |y: &[Integer], b_mat: &[Vec<Integer>], stop: &mut F| -> Option<Vec<Integer>> {
        let j = (0..n).min_by(|&i, &j| y[i].cmp_abs(&y[j])).expect("n >= 2");
        let a: Vec<Integer> = (0..n).map(|k| b_mat[k][j].clone()).collect();
        let r = fixed_to_f64(&y[j], p).abs() * norm_f64;
        stop(&a, r).then_some(a)
    };

    if let Some(a) = check(&y, &b_mat, &mut stop) {
        return Ok(PslqOutcome { a, iterations: 0 });
    }

    let log2_gamma = 0.5 * (4.0f64 / 3.0).log2();
    for iter in 1..=cap {
        let mut m = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..(n - 1) {
            let v = log2_gamma * (i + 1) as f64 + log2_abs(&h[i][i]);
            if v > best {
                best = v;
                m = i;
            }
        }
        y.swap(m, m + 1);
        a_mat.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b_mat.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let t0 = sqrt_fixed(&((h[m][m].square_ref().complete() + h[m][m + 1].square_ref().complete()) >> p), p);
            if t0.is_zero() {
                return Err(exhausted());
            }
            let t1 = (&h[m][m] << p).complete() / &t0;
            let t2 = (&h[m][m + 1] << p).complete() / &t0;
            for row in h.iter_mut().skip(m) {
                let t3 = row[m].clone();
                let t4 = row[m + 1].clone();
                row[m] = ((&t1 * &t3).complete() + (&t2 * &t4).complete()) >> p;
                row[m + 1] = ((&t1 * &t4).complete() - (&t2 * &t3).complete()) >> p;
            }
        }
        for i in (m + 1)..n {
            reduce(&mut y, &mut h, &mut a_mat, &mut b_mat, i, (i - 1).min(m + 1))?;
        }
        if let Some(a) = check(&y, &b_mat, &mut stop) {
            return Ok(PslqOutcome { a, iterations: iter });
        }
        if y.iter().any(|v| v.is_zero()) && h.iter().take(n - 1).enumerate().any(|(i, r)| r[i].is_zero()) {
            return Err(exhausted());
        }
    }
    Err(PqfError::IterationCap { stage: Stage::Relation, cap })
}

fn iteration_cap(eps: &Eps) -> usize {
    (64.0 * eps.log2_inv()).ceil().max(64.0) as usize
}

/// Stage-1 approximation for m = 8, 12.
pub fn approx_phase(target: &PhaseTarget, ring: Ring, prec: Option<u32>) -> Result<PhaseApprox> {
    if ring == Ring::M4 {
        return cf_phase(target, prec);
    }
    let mut p = prec.unwrap_or_else(|| target.eps.default_prec());
    let cap = iteration_cap(&target.eps);
    let eps_f = target.eps.to_f64();
    for _ in 0..=MAX_DOUBLINGS {
        let theta = target.theta.eval(p + 32);
        let eps_iv = target.eps.ival(p + 32);
        if let Some(a) = exact_check(&CycInt::one(ring), &theta, &eps_iv) {
            return Ok(finish(CycInt::one(ring), a, &theta, 0, p));
        }
        let xs = relation_coeffs(&theta, ring);
        // Largest entry first.
        let mut perm: Vec<usize> = (0..ring.d()).collect();
        perm.sort_by(|&i, &j| xs[j].abs().mid().partial_cmp(&xs[i].abs().mid()).unwrap());
        let xp: Vec<Float> = perm.iter().map(|&i| xs[i].mid()).collect();
        let mut found: Option<(CycInt, Ival)> = None;
        let res = pslq_find(&xp, p, cap, |a, r| {
            let mut c = vec![Integer::new(); ring.d()];
            for (k, &i) in perm.iter().enumerate() {
                c[i] = a[k].clone();
            }
            let z = CycInt::new(ring, c).expect("length matches ring");
            if z.is_zero() {
                return false;
            }
            let (re, im) = z.to_c64();
            let zabs = re.hypot(im);
            if 2.0 * r > 4.0 * eps_f * zabs {
                return false;
            }
            match exact_check(&z, &theta, &eps_iv) {
                Some(err) => {
                    found = Some((z, err));
                    true
                }
                None => false,
            }
        });
        match res {
            Ok(out) => {
                let (z, err) = found.expect("accepted candidate recorded");
                return Ok(finish(z, err, &theta, out.iterations, p));
            }
            Err(PqfError::PrecisionExhausted { .. }) => p *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(PqfError::PrecisionExhausted { stage: Stage::Relation, bits: p })
}

fn exact_check(z: &CycInt, theta: &Ival, eps: &Ival) -> Option<Ival> {
    let err = phase_error(z, theta)?;
    (err.lt(eps) == Some(true)).then_some(err)
}

fn finish(z: CycInt, err: Ival, theta: &Ival, iterations: usize, prec: u32) -> PhaseApprox {
    let residual = linear_form(&z, theta).to_f64();
    PhaseApprox { z, achieved_error: upper_f64(&err), residual, iterations, prec }
}

/// Stage-1 approximation for m = 4: z = q + p i with p/q a convergent of
/// -tan(theta/2).
pub fn cf_phase(target: &PhaseTarget, prec: Option<u32>) -> Result<PhaseApprox> {
    let ring = Ring::M4;
    let mut p = prec.unwrap_or_else(|| target.eps.default_prec());
    for _ in 0..=MAX_DOUBLINGS {
        let theta = target.theta.eval(p + 32);
        let eps_iv = target.eps.ival(p + 32);
        let half = theta.div_u32(2);
        let t = half.sin().neg().div(&half.cos()).ok_or(PqfError::PreconditionViolated("theta too close to pi".into()))?;
        let mut rem = Rational::from(t.mid().to_rational().unwrap_or_default());
        let (mut p0, mut q0) = (Integer::from(0), Integer::from(1));
        let (mut p1, mut q1) = (Integer::from(1), Integer::from(0));
        let mut iterations = 0;
        loop {
            iterations += 1;
            let a = rem.floor_ref().complete().into_numer_denom().0;
            let p2 = (&a * &p1).complete() + &p0;
            let q2 = (&a * &q1).complete() + &q0;
            let z = CycInt::new(ring, vec![q2.clone(), p2.clone()]).expect("two coefficients");
            let zz = if q2.cmp0() == std::cmp::Ordering::Less { -&z } else { z };
            if let Some(err) = exact_check(&zz, &theta, &eps_iv) {
                return Ok(finish(zz, err, &theta, iterations, p));
            }
            let frac = Rational::from(&rem - &Rational::from(a));
            if frac == 0 || iterations > 4 * p as usize {
                break;
            }
            rem = frac.recip();
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
        }
        p *= 2;
    }
    Err(PqfError::PrecisionExhausted { stage: Stage::Relation, bits: p })
}

/// Exact test s^{2d} N(z)^d eps >= 1 where N(z) = |z|^2.
fn above_floor(s: &Integer, n: &RealCycInt, d: u32, eps: &Rational) -> bool {
    let nd = n.pow(d);
    let s2d = s.clone().pow(2 * d);
    let lhs = nd.scale(&(s2d * eps.numer()));
    let a = (lhs.a() - eps.denom()).complete();
    sign_quad(&a, lhs.b(), n.ring().disc()) != std::cmp::Ordering::Less
}

/// Scale z by s = ceil(eps^{-1/(2d)}/|z|) when |z| is below that floor.
pub fn rescale_floor(z: &CycInt, eps: &Eps) -> CycInt {
    let ring = z.ring();
    let d = ring.d() as u32;
    let n = z.norm_sq();
    let e = eps.value();
    if above_floor(&Integer::from(1), &n, d, e) {
        return z.clone();
    }
    let est = (-(eps.to_f64().ln()) / (2.0 * d as f64)).exp() / n.to_f64().sqrt();
    let mut s = Integer::from_f64(est.ceil().max(1.0)).unwrap_or_else(|| Integer::from(1));
    while !above_floor(&s, &n, d, e) {
        s += 1;
    }
    while s > 1 && above_floor(&(&s - 1u32).complete(), &n, d, e) {
        s -= 1;
    }
    z.scale(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(theta: &str, eps: u32) -> PhaseTarget {
        PhaseTarget { theta: Angle::parse(theta).unwrap(), eps: Eps::pow10(eps) }
    }

    #[test]
    fn coeffs_at_zero() {
        let x = relation_coeffs(&Ival::zero(128), Ring::M8);
        let h = 0.5f64.sqrt();
        let want = [0.0, h, 1.0, h];
        for (a, b) in x.iter().zip(want) {
            assert!((a.to_f64() - b).abs() < 1e-15);
        }
        let x = relation_coeffs(&Ival::zero(128), Ring::M4);
        assert!(x[0].contains_zero() && (x[1].to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pslq_finds_obvious_relations() {
        let one = Float::with_val(200, 1);
        let out = pslq_find(&[one.clone(), one.clone()], 180, 100, |a, r| {
            r < 1e-40 && a.iter().any(|v| !v.is_zero())
        })
        .unwrap();
        assert_eq!(out.a[0].clone() + &out.a[1], 0);
        let s2 = Float::with_val(300, 2).sqrt();
        let x = [Float::with_val(300, 1), s2.clone(), Float::with_val(300, 2), Float::with_val(300, &s2 * 2u32)];
        let out = pslq_find(&x, 280, 200, |a, r| {
            let dot = Float::with_val(300, &x[0] * &a[0]) + Float::with_val(300, &x[1] * &a[1]) + Float::with_val(300, &x[2] * &a[2]) + Float::with_val(300, &x[3] * &a[3]);
            r < 1e-60 && dot.abs() < 1e-70
        })
        .unwrap();
        let dot = Float::with_val(300, &x[0] * &out.a[0]) + Float::with_val(300, &x[1] * &out.a[1]) + Float::with_val(300, &x[2] * &out.a[2]) + Float::with_val(300, &x[3] * &out.a[3]);
        assert!(dot.abs() < 1e-70);
    }

    #[test]
    fn exact_phases() {
        let a = approx_phase(&target("0", 10), Ring::M8, None).unwrap();
        assert_eq!(a.z, CycInt::one(Ring::M8));
        let z = CycInt::from_i64s(Ring::M8, &[1, 0, 0, -1]);
        let th = Angle::parse("pi/4").unwrap().eval(200);
        assert!(phase_error(&z, &th).unwrap().hi() < &Float::with_val(64, 1e-50));
        let z = CycInt::from_i64s(Ring::M4, &[1, -1]);
        let th = Angle::parse("pi/2").unwrap().eval(200);
        assert!(phase_error(&z, &th).unwrap().hi() < &Float::with_val(64, 1e-50));
        let a = cf_phase(&target("0", 10), None).unwrap();
        assert_eq!(a.z, CycInt::one(Ring::M4));
    }

    #[test]
    fn random_angles_meet_precision() {
        for (i, th) in ["0.1", "-0.3", "0.37", "0.0001", "0.25"].iter().enumerate() {
            for ring in [Ring::M8, Ring::M12, Ring::M4] {
                let t = target(th, 10 + 2 * i as u32);
                let a = approx_phase(&t, ring, None).unwrap();
                assert!(a.achieved_error < t.eps.to_f64());
                let zabs = {
                    let (re, im) = a.z.to_c64();
                    re.hypot(im)
                };
                assert!(2.0 * a.residual.abs() < t.eps.to_f64() * zabs * 1.000001);
            }
        }
    }

    #[test]
    fn rescale_examples() {
        let eps = Eps::pow10(8);
        let z = CycInt::one(Ring::M4);
        assert_eq!(rescale_floor(&z, &eps), CycInt::from_int(Ring::M4, Integer::from(100)));
        let big = CycInt::from_i64s(Ring::M8, &[1000, 3, 0, 1]);
        assert_eq!(rescale_floor(&big, &eps), big);
        let small = CycInt::from_i64s(Ring::M8, &[1, 1, 0, 0]);
        let s = rescale_floor(&small, &Eps::pow10(20));
        let k = s.coeffs()[0].clone();
        assert_eq!(s, small.scale(&k));
        assert!(above_floor(&Integer::from(1), &s.norm_sq(), 4, Eps::pow10(20).value()));
        assert!(!above_floor(&(k - 1u32), &small.norm_sq(), 4, Eps::pow10(20).value()));
    }
}
