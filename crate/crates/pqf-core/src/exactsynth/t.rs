//! Clifford+T synthesis over Z[w8] / sqrt2^L.
//!
//! Progress is measured by s = 2L - v(z), v the valuation at 1 - w8, which
//! equals the smallest denominator exponent of |z|^2 in powers of sqrt2.
//! A syllable is H T^k.

use super::{check_result, eval_circuit, sqrt2, Basis, Circuit, ExactUnitary, Gate};
use crate::error::{PqfError, Result};
use crate::rings::{CycInt, Ring};

/// Unit column (a, c) / sqrt2^l, kept with a and c not both divisible by sqrt2.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Col {
    a: CycInt,
    c: CycInt,
    l: u32,
}

fn delta() -> CycInt {
    CycInt::from_i64s(Ring::M8, &[1, -1, 0, 0])
}

fn valuation(x: &CycInt) -> i64 {
    let d = delta();
    let mut x = x.clone();
    let mut v = 0;
    while let Some(q) = x.div_exact(&d) {
        x = q;
        v += 1;
    }
    v
}

impl Col {
    fn new(a: CycInt, c: CycInt, l: u32) -> Col {
        let (mut a, mut c, mut l) = (a, c, l);
        let r = sqrt2();
        while l > 0 {
            match (a.div_exact(&r), c.div_exact(&r)) {
                (Some(p), Some(q)) => {
                    a = p;
                    c = q;
                    l -= 1;
                }
                _ => break,
            }
        }
        Col { a, c, l }
    }

    fn sde(&self) -> i64 {
        if self.a.is_zero() {
            return i64::MIN / 2;
        }
        2 * self.l as i64 - valuation(&self.a)
    }

    fn syllable(&self, k: i64) -> Col {
        let wc = &CycInt::zeta_pow(Ring::M8, k) * &self.c;
        Col::new(&self.a + &wc, &self.a - &wc, self.l + 1)
    }
}

pub(crate) fn t_power(k: i64) -> &'static [Gate] {
    use Gate::*;
    match k.rem_euclid(8) {
        0 => &[],
        1 => &[T],
        2 => &[S],
        3 => &[S, T],
        4 => &[Z],
        5 => &[Z, T],
        6 => &[Sdg],
        _ => &[Tdg],
    }
}

/// Cheapest syllable sequence of length at most `depth` that lowers the sde.
fn search(col: &Col, depth: usize) -> Option<(Vec<i64>, Col)> {
    let s0 = col.sde();
    let mut best: Option<(usize, i64, Vec<i64>, Col)> = None;
    let mut frontier = vec![(Vec::<i64>::new(), col.clone())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (ks, c) in &frontier {
            for k in 0..8 {
                let n = c.syllable(k);
                let mut ks2 = ks.clone();
                ks2.push(k);
                let s = n.sde();
                if s < s0 {
                    let cost = ks2.iter().filter(|k| *k % 2 == 1).count();
                    if best.as_ref().map_or(true, |b| (cost, s) < (b.0, b.1)) {
                        best = Some((cost, s, ks2.clone(), n.clone()));
                    }
                }
                next.push((ks2, n));
            }
        }
        if best.is_some() {
            break;
        }
        frontier = next;
    }
    best.map(|(_, _, ks, c)| (ks, c))
}

fn fail(msg: &str) -> PqfError {
    PqfError::InternalReductionFailure(msg.to_string())
}

/// Exact Clifford+T word for `u`; the T-count is at most 2L + (l mod 2).
pub fn synth_t(u: &ExactUnitary) -> Result<Circuit> {
    if u.ring() != Ring::M8 {
        return Err(PqfError::InvalidInput("synth_t needs m = 8".into()));
    }
    let mut col = Col::new(u.z().clone(), -&u.y().conj(), u.l());
    let mut c = Circuit::new(Basis::T);
    while col.sde() > 0 {
        let before = col.sde();
        let (ks, next) = search(&col, 4).ok_or_else(|| fail("no syllable lowers the sde"))?;
        for k in ks {
            for &g in t_power(k) {
                c.push(g);
            }
            c.push(Gate::H);
        }
        col = next;
        debug_assert!(col.sde() < before);
    }
    if col.l != 0 {
        return Err(fail("sde reached zero with a nonzero denominator"));
    }
    if col.a.is_zero() {
        c.push(Gate::X);
        std::mem::swap(&mut col.a, &mut col.c);
    }
    let j = (0..8)
        .find(|&j| CycInt::zeta_pow(Ring::M8, j) == col.a)
        .ok_or_else(|| fail("terminal entry is not a root of unity"))?;
    if j != 0 {
        c.push(Gate::Wph(8 - j));
    }
    let rest = u.then(&eval_circuit(&c)?);
    if !(rest.l() == 0 && rest.y().is_zero() && *rest.z() == CycInt::one(Ring::M8)) {
        return Err(fail("reduced matrix is not diagonal"));
    }
    let mut out = Circuit::new(Basis::T);
    for &g in t_power(rest.phase()) {
        out.push(g);
    }
    let out = out.then(&c.inverse());
    check_result(u, &out)?;
    Ok(out)
}
