//! One-dimensional grid problems over Z[sqrt2] and Z[sqrt3].

use rug::{Float, Integer};

use crate::error::{PqfError, Result};
use crate::ival::Ival;
use crate::rings::{RealCycInt, Ring};

fn unit_pow(ring: Ring, k: i64) -> RealCycInt {
    let v = ring.fundamental_unit();
    // v^-1 = -v^bullet for 1 + sqrt2, v^bullet for 2 + sqrt3.
    let inv = match ring {
        Ring::M8 => -&v.bullet(),
        _ => v.bullet(),
    };
    if k >= 0 {
        v.pow(k as u32)
    } else {
        inv.pow((-k) as u32)
    }
}

fn within(v: &Ival, lo: &Float, hi: &Float) -> bool {
    v.lo() >= lo && v.hi() <= hi
}

/// Integers of [lo, hi] by increasing magnitude, positive first on ties.
fn by_magnitude(lo: &Integer, hi: &Integer) -> Vec<Integer> {
    let mut v = Vec::new();
    let mut a = lo.clone();
    while a <= *hi {
        v.push(a.clone());
        a += 1u32;
    }
    v.sort_by(|p, q| p.clone().abs().cmp(&q.clone().abs()).then(q.cmp(p)));
    v
}

/// Some alpha with alpha in [x0, x1] and alpha^bullet in [y0, y1], given
/// (x1 - x0)(y1 - y0) >= v^2 for the fundamental unit v. Candidates are
/// tried by increasing |b|, then increasing |a|.
pub fn grid_point(x0: &Float, x1: &Float, y0: &Float, y1: &Float, ring: Ring) -> Result<RealCycInt> {
    if ring == Ring::M4 {
        return Err(PqfError::InvalidInput("grid problems need m = 8 or 12".into()));
    }
    let prec = [x0, x1, y0, y1].iter().map(|f| f.prec()).max().unwrap_or(64).max(64) + 64;
    let f = |x: &Float| Float::with_val(prec, x);
    let (x0, x1, y0, y1) = (f(x0), f(x1), f(y0), f(y1));
    let dx = Float::with_val(prec, &x1 - &x0);
    let dy = Float::with_val(prec, &y1 - &y0);
    let v = ring.fundamental_unit().eval(prec);
    let v2 = v.sqr();
    let area = Float::with_val(prec, &dx * &dy);
    if !(area >= *v2.hi()) {
        return Err(PqfError::PreconditionViolated(format!(
            "grid area {} below v^2 = {}",
            area.to_f64(),
            v2.to_f64()
        )));
    }
    // Balance the widths with alpha -> v^k alpha when they are far apart.
    let ratio = Float::with_val(prec, &dy / &dx);
    let lv = v.mid().ln();
    let kf = (Float::with_val(prec, ratio.ln()) / lv / 2u32).to_f64().round() as i64;
    let k = if kf.abs() <= 1 { 0 } else { kf };
    let sx = unit_pow(ring, k).eval(prec).mid();
    let sy = unit_pow(ring, k).bullet().eval(prec).mid();
    let mut xs = [Float::with_val(prec, &x0 * &sx), Float::with_val(prec, &x1 * &sx)];
    let mut ys = [Float::with_val(prec, &y0 * &sy), Float::with_val(prec, &y1 * &sy)];
    if xs[0] > xs[1] {
        xs.swap(0, 1);
    }
    if ys[0] > ys[1] {
        ys.swap(0, 1);
    }
    let back = unit_pow(ring, -k);
    let sq = Float::with_val(prec, ring.disc()).sqrt();
    let two_sq = Float::with_val(prec, &sq * 2u32);
    let to_int = |x: Float, up: bool| -> Integer {
        let r = if up { x.ceil() } else { x.floor() };
        r.to_integer().expect("finite grid bound")
    };
    let b_lo = to_int(Float::with_val(prec, &xs[0] - &ys[1]) / &two_sq, false) - 1u32;
    let b_hi = to_int(Float::with_val(prec, &xs[1] - &ys[0]) / &two_sq, true) + 1u32;
    let mut bs_order = Vec::new();
    let mut b = b_lo;
    while b <= b_hi {
        bs_order.push(b.clone());
        b += 1u32;
    }
    bs_order.sort_by(|p, q| p.clone().abs().cmp(&q.clone().abs()).then(q.cmp(p)));
    for b in bs_order {
        let bs = Float::with_val(prec, &sq * &b);
        let lo1 = Float::with_val(prec, &xs[0] - &bs);
        let lo2 = Float::with_val(prec, &ys[0] + &bs);
        let hi1 = Float::with_val(prec, &xs[1] - &bs);
        let hi2 = Float::with_val(prec, &ys[1] + &bs);
        let lo = if lo1 > lo2 { lo1 } else { lo2 };
        let hi = if hi1 < hi2 { hi1 } else { hi2 };
        if lo > Float::with_val(prec, &hi + 2u32) {
            continue;
        }
        let (a_lo, a_hi) = (to_int(lo, true) - 1u32, to_int(hi, false) + 1u32);
        for a in by_magnitude(&a_lo, &a_hi) {
            let cand = RealCycInt::new(ring, a, b.clone())?;
            let alpha = &cand * &back;
            if within(&alpha.eval(prec), &x0, &x1) && within(&alpha.eval_bullet(prec), &y0, &y1) {
                return Ok(alpha);
            }
        }
    }
    Err(PqfError::GridFailure(format!(
        "no grid point in [{}, {}] x [{}, {}]",
        x0.to_f64(),
        x1.to_f64(),
        y0.to_f64(),
        y1.to_f64()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fl(x: f64) -> Float {
        Float::with_val(128, x)
    }

    fn gp(x0: f64, x1: f64, y0: f64, y1: f64, ring: Ring) -> Result<RealCycInt> {
        grid_point(&fl(x0), &fl(x1), &fl(y0), &fl(y1), ring)
    }

    #[test]
    fn examples() {
        assert_eq!(gp(-8.0, 8.0, -8.0, 8.0, Ring::M8).unwrap(), RealCycInt::from_i64s(Ring::M8, 0, 0));
        assert_eq!(gp(6.0, 8.0, -2.0, 2.0, Ring::M8).unwrap(), RealCycInt::from_i64s(Ring::M8, 4, 2));
        assert_eq!(gp(8.0, 12.0, -4.0, 4.0, Ring::M12).unwrap(), RealCycInt::from_i64s(Ring::M12, 5, 2));
        assert!(matches!(gp(6.0, 7.0, -2.0, 2.0, Ring::M8), Err(PqfError::PreconditionViolated(_))));
    }

    /// Oracle: brute-force enumeration of a + b sqrt(d) in a box.
    fn brute_exists(x0: f64, x1: f64, y0: f64, y1: f64, d: f64, bound: i64) -> bool {
        let s = d.sqrt();
        (-bound..=bound).any(|a| {
            (-bound..=bound).any(|b| {
                let (u, w) = (a as f64 + b as f64 * s, a as f64 - b as f64 * s);
                u >= x0 && u <= x1 && w >= y0 && w <= y1
            })
        })
    }

    #[test]
    fn matches_enumeration_on_small_boxes() {
        // The enumeration sees a point whenever the area test passes.
        for (ring, d) in [(Ring::M8, 2.0), (Ring::M12, 3.0)] {
            let v2 = ring.fundamental_unit().to_f64().powi(2);
            for i in 0..40 {
                let x0 = -10.0 + i as f64 * 0.37;
                let w = v2 / 3.0 * 1.001;
                assert!(brute_exists(x0, x0 + 3.0, 1.0, 1.0 + w, d, 40));
                let a = gp(x0, x0 + 3.0, 1.0, 1.0 + w, ring).unwrap();
                assert!(a.to_f64() >= x0 && a.to_f64() <= x0 + 3.0);
            }
        }
    }

    proptest! {
        #[test]
        fn output_lies_in_both_intervals(
            x0 in -1e6f64..1e6, y0 in -1e6f64..1e6,
            lw in -8.0f64..8.0, ring in prop_oneof![Just(Ring::M8), Just(Ring::M12)],
        ) {
            let v2 = ring.fundamental_unit().to_f64().powi(2);
            let dx = 2f64.powf(lw) * 1.001;
            let dy = v2 / 2f64.powf(lw) * 1.001;
            let a = gp(x0, x0 + dx, y0, y0 + dy, ring).unwrap();
            let p = 256;
            prop_assert!(within(&a.eval(p), &fl(x0), &fl(x0 + dx)));
            prop_assert!(within(&a.eval_bullet(p), &fl(y0), &fl(y0 + dy)));
        }
    }
}
