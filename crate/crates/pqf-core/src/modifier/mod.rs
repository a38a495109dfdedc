//! Stage 2: real modifiers r with |rz|^2 / nu^(2 L_r) close to 1 and an
//! easily solvable norm equation |y|^2 = nu^(2 L_r) - |rz|^2.

pub mod grid;

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{PqfError, Result, Stage};
use crate::ival::Ival;
use crate::normeq::{solve_norm_eq, FactorConfig, NormEqStatus};
use crate::rings::{sign_quad, CycInt, RealCycInt, Ring};

pub use grid::grid_point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ModifierConfig {
    pub factor: FactorConfig,
    /// Candidate budget; `None` means 64 L1 (4 L1 for m = 4).
    pub budget: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModifierResult {
    pub r: RealCycInt,
    pub y: CycInt,
    /// r * z.
    pub rz: CycInt,
    pub l_r: i64,
    /// Lower end of a rigorous enclosure of |rz|^2 / nu^(2 L_r).
    pub p_r: f64,
    pub candidates_tried: u32,
    pub l1: i64,
    pub slack: f64,
}

/// nu^2 for the ring: 2, or 5 for m = 4.
pub fn nu_sq(ring: Ring) -> u32 {
    if ring == Ring::M4 {
        5
    } else {
        2
    }
}

/// Sign of n - base^l, exactly.
fn cmp_pow(n: &RealCycInt, base: u32, l: i64) -> Ordering {
    let d = n.ring().disc();
    if l >= 0 {
        let p = Integer::from(base).pow(l as u32);
        sign_quad(&(n.a().clone() - p), n.b(), d)
    } else {
        let p = Integer::from(base).pow((-l) as u32);
        sign_quad(&(n.a().clone() * &p - 1u32), &(n.b().clone() * &p), d)
    }
}

/// Smallest l with base^l >= n, for n > 0.
pub fn ceil_log(n: &RealCycInt, base: u32) -> i64 {
    let est = n.to_f64().log(base as f64);
    let mut l = if est.is_finite() { est.ceil() as i64 } else { 0 };
    while cmp_pow(n, base, l) == Ordering::Greater {
        l += 1;
    }
    while cmp_pow(n, base, l - 1) != Ordering::Greater {
        l -= 1;
    }
    l
}

fn work_prec(n: &RealCycInt) -> u32 {
    let bits = n.a().significant_bits().max(n.b().significant_bits());
    128 + bits
}

/// |rz|^2 / nu^(2 L_r), rigorously enclosed.
pub fn success_probability(rz_norm: &RealCycInt, l_r: i64, ring: Ring) -> Ival {
    let prec = work_prec(rz_norm);
    let n = rz_norm.eval(prec);
    let scale = Ival::from_i64(prec, nu_sq(ring) as i64);
    let mut den = Ival::one(prec);
    for _ in 0..l_r.unsigned_abs() {
        den = den.mul(&scale);
    }
    if l_r >= 0 {
        n.div(&den).expect("positive denominator")
    } else {
        n.mul(&den)
    }
}

/// Positive integers r with frac(log_sqrt5 r) in (lambda - 1/L1, lambda),
/// in increasing order, together with their denominator exponent.
pub struct VCandidates {
    n: Integer,
    l1: i64,
    k: i64,
    lambda: Ival,
    pending: std::vec::IntoIter<Integer>,
    prec: u32,
}

impl VCandidates {
    pub fn l1(&self) -> i64 {
        self.l1
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.to_f64()
    }

    fn exponent(&self, k: i64) -> i64 {
        k + self.l1
    }

    /// Exact test that log_sqrt5 |rz| lies in (L - 1/L1, L).
    fn admissible(&self, r: &Integer, l: i64) -> bool {
        if *r <= 0 || l < 0 {
            return false;
        }
        let v = Integer::from(r * r) * &self.n;
        let top = Integer::from(5).pow(l as u32);
        if v >= top {
            return false;
        }
        let l1 = self.l1 as u32;
        v.pow(l1) * 5u32 > top.pow(l1)
    }

    fn fill(&mut self) {
        let p = self.prec;
        let half_ln5 = Ival::from_i64(p, 5).ln().expect("ln 5").div_u32(2);
        let inv = Ival::one(p).div(&Ival::from_i64(p, self.l1)).expect("L1 > 0");
        loop {
            let k = self.k;
            self.k += 1;
            let t = Ival::from_i64(p, k).add(&self.lambda);
            let hi = t.mul(&half_ln5).exp();
            let lo = t.sub(&inv).mul(&half_ln5).exp();
            let a = lo.lo().clone().floor().to_integer().expect("finite").max(Integer::from(1));
            let b = hi.hi().clone().ceil().to_integer().expect("finite");
            let l = self.exponent(k);
            let mut out = Vec::new();
            let mut r = a;
            while r <= b {
                if self.admissible(&r, l) {
                    out.push(r.clone());
                }
                r += 1u32;
            }
            if !out.is_empty() {
                self.pending = out.into_iter();
                return;
            }
        }
    }
}

impl Iterator for VCandidates {
    type Item = Integer;
    fn next(&mut self) -> Option<Integer> {
        if let Some(r) = self.pending.next() {
            return Some(r);
        }
        self.fill();
        self.pending.next()
    }
}

/// Candidate stream for m = 4.
pub fn enumerate_candidates_v(z: &CycInt) -> Result<VCandidates> {
    if z.ring() != Ring::M4 {
        return Err(PqfError::MixedRing(z.ring().m(), 4));
    }
    if z.is_zero() {
        return Err(PqfError::PreconditionViolated("modifier needs z != 0".into()));
    }
    let n = z.norm_sq();
    let l1 = ceil_log(&n, 5);
    if l1 < 1 {
        return Err(PqfError::PreconditionViolated("|z| too small for a modifier".into()));
    }
    let prec = work_prec(&n);
    let log5 = n.eval(prec).ln().expect("|z|^2 > 0").div(&Ival::from_i64(prec, 5).ln().expect("ln 5")).expect("ln 5 > 0");
    let lambda = Ival::from_i64(prec, l1).sub(&log5);
    let k0 = ceil_log(&RealCycInt::from_i64(Ring::M4, l1 * l1), 5);
    Ok(VCandidates { n: n.a().clone(), l1, k: k0, lambda, pending: Vec::new().into_iter(), prec })
}

fn budget_exhausted(tried: u32) -> PqfError {
    PqfError::AssumptionFailure { stage: Stage::Modifier, tried: tried as usize }
}

fn find_modifier_v(z: &CycInt, config: &ModifierConfig) -> Result<ModifierResult> {
    let stream = enumerate_candidates_v(z)?;
    let l1 = stream.l1();
    let slack = stream.lambda();
    let budget = config.budget.unwrap_or(4 * l1 as u32);
    let n = z.norm_sq();
    let mut tried = 0;
    for r in stream {
        if tried >= budget {
            return Err(budget_exhausted(tried));
        }
        tried += 1;
        let nrz = n.scale(&Integer::from(&r * &r));
        let l_r = ceil_log(&nrz, 5);
        let xi = RealCycInt::from_int(Ring::M4, Integer::from(5).pow(l_r as u32) - nrz.a());
        let out = solve_norm_eq(&xi, &config.factor)?;
        if let NormEqStatus::Solved(y) = out.status {
            let p = success_probability(&nrz, l_r, Ring::M4);
            let r = RealCycInt::from_int(Ring::M4, r);
            let rz = z * &r.to_cyc();
            return Ok(ModifierResult { r, y, rz, l_r, p_r: p.lo().to_f64(), candidates_tried: tried, l1, slack });
        }
    }
    Err(budget_exhausted(tried))
}

/// Window bounds of the modifier scan.
#[derive(Clone, Debug)]
pub struct WindowPlan {
    pub l1: i64,
    pub slack: f64,
    pub r0: i64,
    pub x_min: Float,
    pub x_max: Float,
    pub delta: Float,
    /// Bound on |r^bullet|.
    pub y_bound: Float,
}

impl WindowPlan {
    /// The 2^level windows of width delta tiling [2^level x_min, 2^level x_max].
    pub fn windows(&self, level: u32) -> impl Iterator<Item = (Float, Float)> + '_ {
        let prec = self.x_max.prec();
        let base = Float::with_val(prec, &self.x_min << level);
        (0u64..1u64 << level).map(move |j| {
            let x0 = Float::with_val(prec, &base + Float::with_val(prec, &self.delta * j));
            let x1 = Float::with_val(prec, &base + Float::with_val(prec, &self.delta * (j + 1)));
            (x0, x1)
        })
    }
}

/// L1, slack, R0 and the first window for m = 8, 12.
pub fn window_plan(z: &CycInt) -> Result<WindowPlan> {
    let ring = z.ring();
    let n = z.norm_sq();
    let l1 = ceil_log(&n, 2);
    if l1 < 1 {
        return Err(PqfError::PreconditionViolated("|z| too small for a modifier".into()));
    }
    let prec = work_prec(&n);
    let nz = n.eval(prec);
    let nb = n.eval_bullet(prec);
    let slack = Ival::from_i64(prec, l1).sub(&nz.log2().expect("|z|^2 > 0"));
    let ratio = nb.div(&nz).expect("|z| > 0").sqrt();
    let v2 = ring.fundamental_unit().eval(prec).sqr();
    let arg = ratio.mul(&v2).mul_int(&Integer::from(l1));
    let r0l = arg.log2().ok_or(PqfError::PrecisionExhausted { stage: Stage::Modifier, bits: prec })?;
    let r0 = r0l.hi().clone().ceil().to_f64() as i64;
    let e = slack.add(&Ival::from_i64(prec, r0)).div_u32(2).exp2();
    let x_max = e.mid();
    let shrink = Float::with_val(prec, 1) - Float::with_val(prec, 1) / Float::with_val(prec, 2 * l1);
    let x_min = Float::with_val(prec, &x_max * &shrink);
    let delta = Float::with_val(prec, &x_max - &x_min);
    let y_bound = Float::with_val(prec, &x_max / &ratio.mid());
    Ok(WindowPlan { l1, slack: slack.to_f64(), r0, x_min, x_max, delta, y_bound })
}

fn find_modifier_grid(z: &CycInt, config: &ModifierConfig) -> Result<ModifierResult> {
    let ring = z.ring();
    let plan = window_plan(z)?;
    let l1 = plan.l1;
    let budget = config.budget.unwrap_or(64 * l1 as u32);
    let n = z.norm_sq();
    let prec = plan.x_max.prec();
    let floor_p = Ival::one(prec).sub(&Ival::one(prec).div(&Ival::from_i64(prec, l1)).expect("L1 > 0"));
    let y0 = Float::with_val(prec, -&plan.y_bound);
    let y1 = plan.y_bound.clone();
    let mut tried = 0u32;
    for level in 0u32.. {
        for (x0, x1) in plan.windows(level) {
            if tried >= budget {
                return Err(budget_exhausted(tried));
            }
            tried += 1;
            if let Some(res) = try_window(z, &n, &x0, &x1, &y0, &y1, &floor_p, ring, &config.factor)? {
                return Ok(ModifierResult { candidates_tried: tried, l1, slack: plan.slack, ..res });
            }
        }
    }
    unreachable!("window levels are unbounded")
}

#[allow(clippy::too_many_arguments)]
fn try_window(
    z: &CycInt,
    n: &RealCycInt,
    x0: &Float,
    x1: &Float,
    y0: &Float,
    y1: &Float,
    floor_p: &Ival,
    ring: Ring,
    factor: &FactorConfig,
) -> Result<Option<ModifierResult>> {
    let r = match grid_point(x0, x1, y0, y1, ring) {
        Ok(r) => r,
        Err(PqfError::PreconditionViolated(_)) | Err(PqfError::GridFailure(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if r.is_zero() {
        return Ok(None);
    }
    let nrz = n * &(&r * &r);
    let l_r = ceil_log(&nrz, 2);
    let p = success_probability(&nrz, l_r, ring);
    if floor_p.lt(&p) != Some(true) {
        return Ok(None);
    }
    let xi = &RealCycInt::from_int(ring, Integer::from(1) << l_r as u32) - &nrz;
    if xi.sign_bullet() == Ordering::Less {
        return Ok(None);
    }
    let out = solve_norm_eq(&xi, factor)?;
    match out.status {
        NormEqStatus::Solved(y) => {
            let rz = z * &r.to_cyc();
            Ok(Some(ModifierResult { r, y, rz, l_r, p_r: p.lo().to_f64(), candidates_tried: 0, l1: 0, slack: 0.0 }))
        }
        _ => Ok(None),
    }
}

/// Stage 2 entry point.
pub fn find_modifier(z: &CycInt, config: &ModifierConfig) -> Result<ModifierResult> {
    if z.is_zero() {
        return Err(PqfError::PreconditionViolated("modifier needs z != 0".into()));
    }
    let res = match z.ring() {
        Ring::M4 => find_modifier_v(z, config)?,
        _ => find_modifier_grid(z, config)?,
    };
    let ring = z.ring();
    let total = Integer::from(nu_sq(ring)).pow(res.l_r as u32);
    let lhs = &res.y.norm_sq() + &res.rz.norm_sq();
    if lhs != RealCycInt::from_int(ring, total) {
        return Err(PqfError::Verification("modifier result is not unitary".into()));
    }
    Ok(res)
}
