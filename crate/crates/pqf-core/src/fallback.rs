//! Deterministic fallback: a unitary eps-approximation of diag(1, e^{i theta})
//! from feasible candidates u / nu^k with an easily solvable norm equation.
//!
//! Distances are global-phase invariant operator norms. For 2x2 unitaries
//! min_phi ||A - phi B|| = sqrt(2 - |tr(B^dagger A)|), so a candidate with
//! Re(u e^{i theta/2}) >= (1 - e^2) nu^k lands within sqrt2 e of the target.
//! Candidates are therefore tested with e = eps / sqrt2.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::integer::Order;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::angle::{Angle, Eps};
use crate::error::{PqfError, Result, Stage};
use crate::exactsynth::{eval_circuit, lambda_word, synth, Basis, Circuit, ExactUnitary, Gate};
use crate::ival::Ival;
use crate::modifier::grid::grid_point;
use crate::normeq::{solve_norm_eq, FactorConfig, NormEqStatus};
use crate::rings::{CIval, CycInt, RealCycInt, Ring};

/// Rigorous enclosure of min_phi ||u - phi diag(1, e^{i theta})||.
pub fn operator_distance(u: &ExactUnitary, theta: &Ival) -> Ival {
    let prec = theta.prec();
    let ring = u.ring();
    let z = u.z().eval(prec);
    let w = CycInt::zeta_pow(ring, u.phase()).eval(prec);
    let tr = z.add(&z.conj().mul(&w).mul(&CIval::expi(&theta.neg())));
    let nu_l = Ival::sqrt_int(prec, crate::exactsynth::nu_sq(ring)).pow_u(u.l());
    let t = tr.abs().div(&nu_l).expect("nu^L > 0");
    let d2 = Ival::from_i64(prec, 2).sub(&t);
    let zero = Float::with_val(prec, 0);
    let lo = if *d2.lo() < 0 { zero.clone() } else { d2.lo().clone() };
    let hi = if *d2.hi() < 0 { zero } else { d2.hi().clone() };
    Ival::from_bounds(lo, hi).sqrt()
}

/// Upper bound on the distance from the circuit to diag(1, e^{i theta}).
pub fn phase_distance(c: &Circuit, theta: &Angle, prec: u32) -> Result<f64> {
    let u = eval_circuit(c)?;
    Ok(operator_distance(&u, &theta.eval(prec)).hi().to_f64())
}

/// Definition-style feasible candidate u / nu^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibleCandidate {
    pub u: CycInt,
    pub k: u32,
    /// Strip index for m = 8, 12; lattice-point index for m = 4.
    pub index: Integer,
}

#[derive(Clone, Debug)]
pub struct FallbackConfig {
    pub factor: FactorConfig,
    /// Candidates allowed per unit of k before giving up.
    pub budget_per_level: u32,
    pub seed: u64,
}

impl Default for FallbackConfig {
    fn default() -> Self {
        FallbackConfig { factor: FactorConfig::default(), budget_per_level: 16, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct FallbackResult {
    pub circuit: Circuit,
    pub unitary: ExactUnitary,
    pub k: u32,
    pub candidates_tried: usize,
    pub skipped: usize,
    /// Rigorous upper bound on the operator distance.
    pub distance: f64,
}

/// Per-basis ceiling on fallback cost.
pub fn cost_ceiling(basis: Basis, eps: &Eps) -> usize {
    let l2 = eps.log2_inv();
    let c = match basis {
        Basis::Pi12 => 2.0 * l2 + 7.0,
        Basis::T => 4.0 * l2 + 16.0,
        Basis::V => 3.0 * l2 / 5f64.log2() + 16.0,
    };
    c.floor() as usize
}

fn cmp_ok(x: Option<bool>) -> bool {
    x == Some(true)
}

struct Geometry {
    prec: u32,
    /// e = eps / sqrt2
    e: Ival,
    /// nu^k
    r: Ival,
    half: Ival,
    cos: Ival,
    sin: Ival,
}

impl Geometry {
    fn new(theta: &Ival, eps: &Eps, ring: Ring, k: u32, prec: u32) -> Geometry {
        let e = eps.ival(prec).div(&Ival::sqrt_int(prec, 2)).expect("sqrt2 > 0");
        let r = Ival::sqrt_int(prec, crate::exactsynth::nu_sq(ring)).pow_u(k);
        let half = theta.div_u32(2);
        Geometry { prec, cos: half.cos(), sin: half.sin(), e, r, half }
    }

    /// (1 - e^2) nu^k.
    fn chord(&self) -> Ival {
        Ival::one(self.prec).sub(&self.e.sqr()).mul(&self.r)
    }

    /// Exact feasibility test of u / nu^k.
    fn feasible(&self, u: &CycInt, k: u32) -> bool {
        let ring = u.ring();
        let xi = RealCycInt::from_int(ring, Integer::from(crate::exactsynth::nu_sq(ring)).pow(k));
        let xi = &xi - &u.norm_sq();
        if !xi.is_totally_nonneg() {
            return false;
        }
        let ue = u.eval(self.prec).mul(&CIval::expi(&self.half));
        cmp_ok(self.chord().le(&ue.re))
    }

    /// x-range of the meniscus on the horizontal line Im u = y, midpoint values.
    fn row(&self, y: &Float) -> Option<(Float, Float)> {
        let p = self.prec;
        let yi = Ival::from_float(p, y);
        let rr = self.r.sqr().sub(&yi.sqr());
        if rr.hi().is_sign_negative() {
            return None;
        }
        let right = if rr.lo().is_sign_negative() { Float::with_val(p, 0) } else { rr.sqrt().mid() };
        let left = self.chord().add(&yi.mul(&self.sin)).div(&self.cos)?.mid();
        (left < right).then_some((left, right))
    }
}

fn random_below<R: Rng>(n: &Integer, rng: &mut R) -> Integer {
    let words = (n.significant_bits() as usize) / 64 + 2;
    let digits: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
    Integer::from_digits(&digits, Order::Lsf) % n
}

/// Strip sampler over Z[rho][i] for m = 8, 12.
pub struct StripSampler {
    ring: Ring,
    k: u32,
    geo: Geometry,
    y_min: Float,
    step: Float,
    strip: Float,
    n: Integer,
    used: HashSet<Integer>,
    rng: ChaCha8Rng,
}

/// Smallest k with 2^k >= sqrt2 v^2 / e^2, e = eps / sqrt2.
pub fn min_round_exponent(eps: &Eps, ring: Ring) -> u32 {
    match ring {
        Ring::M4 => {
            // Lattice-point count of the meniscus ~ (4 sqrt2 / 3) 5^k e^3 >= 24.
            let e = eps.to_f64() / 2f64.sqrt();
            let need = 24.0 * 3.0 / (4.0 * 2f64.sqrt()) / e.powi(3);
            need.log(5.0).ceil().max(1.0) as u32
        }
        _ => {
            let v = ring.fundamental_unit().to_f64();
            let c = 0.5 + 2.0 * v.log2();
            (c + 2.0 * (2f64.sqrt() / eps.to_f64()).log2()).ceil() as u32
        }
    }
}

impl StripSampler {
    pub fn new(theta: &Angle, eps: &Eps, ring: Ring, k: u32, seed: u64) -> Result<StripSampler> {
        if ring == Ring::M4 {
            return Err(PqfError::InvalidInput("strip sampler needs m = 8 or 12".into()));
        }
        if k < min_round_exponent(eps, ring) {
            return Err(PqfError::PreconditionViolated(format!("round exponent {k} below the feasibility bound")));
        }
        let prec = eps.default_prec() + k + 64;
        let th = theta.eval(prec);
        if !cmp_ok(th.abs().le(&Ival::pi(prec).div_u32(2))) {
            return Err(PqfError::PreconditionViolated("fallback angle must satisfy |theta| <= pi/2".into()));
        }
        let geo = Geometry::new(&th, eps, ring, k, prec);
        let strip = geo.e.sqr().mul(&geo.r).div_u32(2).mid();
        // Extent of the meniscus and the central part with rows of length >= strip.
        let phi0 = geo.e.mul(&Ival::sqrt_int(prec, 2)).mid();
        let centre = Float::with_val(prec, -geo.r.mid() * Float::with_val(prec, th.mid() / 2u32).sin());
        let long_enough = |y: &Float| geo.row(y).is_some_and(|(a, b)| Float::with_val(prec, &b - &a) >= strip);
        if !long_enough(&centre) {
            return Err(PqfError::PreconditionViolated("meniscus thinner than one strip".into()));
        }
        let span = Float::with_val(prec, geo.r.mid() * &phi0) * 2u32;
        let edge = |dir: i32| -> Float {
            let (mut inside, mut outside) = (centre.clone(), Float::with_val(prec, &centre + Float::with_val(prec, &span * dir)));
            for _ in 0..(prec as usize) {
                let mid = Float::with_val(prec, &inside + &outside) / 2u32;
                if long_enough(&mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        let (y_min, y_max) = (edge(-1), edge(1));
        let len = Float::with_val(prec, &y_max - &y_min);
        let theorem_n = Float::with_val(prec, Float::with_val(prec, 8u32).sqrt() / geo.e.mid()).floor();
        let fit = Float::with_val(prec, &len / &strip).floor();
        let n = if theorem_n < fit { theorem_n } else { fit };
        let n = n.to_integer().expect("finite strip count");
        if n < 1 {
            return Err(PqfError::PreconditionViolated("no strips fit the meniscus".into()));
        }
        let step = Float::with_val(prec, &len / &n);
        Ok(StripSampler {
            ring,
            k,
            geo,
            y_min,
            step,
            strip,
            n,
            used: HashSet::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn strips(&self) -> &Integer {
        &self.n
    }

    /// Candidate of strip j, or None when a grid search misses.
    pub fn candidate(&self, j: &Integer) -> Option<FeasibleCandidate> {
        let p = self.geo.prec;
        let yj = Float::with_val(p, &self.y_min + Float::with_val(p, &self.step * j));
        let y1 = Float::with_val(p, &yj + &self.strip);
        let b = Ival::sqrt_int(p, 2).pow_u(self.k.saturating_sub(1)).mid();
        let nb = Float::with_val(p, -&b);
        let beta = grid_point(&yj, &y1, &nb, &b, self.ring).ok()?;
        let (x0, x1) = self.geo.row(&beta.eval(p).mid())?;
        let alpha = grid_point(&x0, &x1, &nb, &b, self.ring).ok()?;
        let u = &alpha.to_cyc() + &(&CycInt::imag_unit(self.ring) * &beta.to_cyc());
        self.geo.feasible(&u, self.k).then(|| FeasibleCandidate { u, k: self.k, index: j.clone() })
    }

    /// Next unused strip index, or None once all are used.
    pub fn next_index(&mut self) -> Option<Integer> {
        if Integer::from(self.used.len()) >= self.n {
            return None;
        }
        loop {
            let j = random_below(&self.n, &mut self.rng);
            if self.used.insert(j.clone()) {
                return Some(j);
            }
        }
    }
}

/// Gaussian integers of the meniscus for m = 4, found by enumerating a
/// Lagrange-reduced basis over the bounding rectangle.
pub fn lattice_candidates(theta: &Angle, eps: &Eps, k: u32) -> Result<Vec<FeasibleCandidate>> {
    let prec = eps.default_prec() + 4 * k + 128;
    let th = theta.eval(prec);
    let geo = Geometry::new(&th, eps, Ring::M4, k, prec);
    let f = |x: Ival| x.mid();
    let (r, c) = (f(geo.r.clone()), f(geo.chord()));
    let depth = Float::with_val(prec, &r - &c);
    let h = Float::with_val(prec, &r * f(geo.e.mul(&Ival::sqrt_int(prec, 2))));
    let lam = Float::with_val(prec, &h / &depth).sqrt();
    let (co, si) = (f(geo.cos.clone()), f(geo.sin.clone()));
    // Radial coordinate Re(u e^{i theta/2}) scaled by lam, tangential by 1/lam.
    let img = |x: &Integer, y: &Integer| -> [Float; 2] {
        let rad = Float::with_val(prec, Float::with_val(prec, &co * x) - Float::with_val(prec, &si * y));
        let tan = Float::with_val(prec, Float::with_val(prec, &si * x) + Float::with_val(prec, &co * y));
        [Float::with_val(prec, rad * &lam), Float::with_val(prec, tan / &lam)]
    };
    let dot = |a: &[Float; 2], b: &[Float; 2]| -> Float {
        Float::with_val(prec, Float::with_val(prec, &a[0] * &b[0]) + Float::with_val(prec, &a[1] * &b[1]))
    };
    let mut basis = [
        ([Integer::from(1), Integer::from(0)], img(&Integer::from(1), &Integer::from(0))),
        ([Integer::from(0), Integer::from(1)], img(&Integer::from(0), &Integer::from(1))),
    ];
    loop {
        if dot(&basis[0].1, &basis[0].1) > dot(&basis[1].1, &basis[1].1) {
            basis.swap(0, 1);
        }
        let mu = Float::with_val(prec, dot(&basis[0].1, &basis[1].1) / dot(&basis[0].1, &basis[0].1)).round();
        let q = mu.to_integer().expect("finite reduction step");
        if q == 0 {
            break;
        }
        let (b0, b1) = (basis[0].0.clone(), basis[1].0.clone());
        let nx = Integer::from(&b1[0] - Integer::from(&q * &b0[0]));
        let ny = Integer::from(&b1[1] - Integer::from(&q * &b0[1]));
        basis[1] = ([nx.clone(), ny.clone()], img(&nx, &ny));
    }
    let box_lo = [Float::with_val(prec, &c * &lam), Float::with_val(prec, Float::with_val(prec, -&h) / &lam)];
    let box_hi = [Float::with_val(prec, &r * &lam), Float::with_val(prec, &h / &lam)];
    let (b0, b1) = (&basis[0].1, &basis[1].1);
    let perp = [Float::with_val(prec, -&b0[1]), b0[0].clone()];
    let scale = dot(b1, &perp);
    let mut proj = Vec::new();
    for cx in [&box_lo[0], &box_hi[0]] {
        for cy in [&box_lo[1], &box_hi[1]] {
            proj.push(Float::with_val(prec, dot(&[cx.clone(), cy.clone()], &perp) / &scale));
        }
    }
    let min = proj.iter().min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap().clone();
    let max = proj.iter().max_by(|a, b| a.partial_cmp(b).unwrap()).unwrap().clone();
    let (j_lo, j_hi) = (min.floor().to_integer().unwrap(), max.ceil().to_integer().unwrap());
    let mut out = Vec::new();
    let mut j = j_lo;
    while j <= j_hi {
        let base = [Float::with_val(prec, &b1[0] * &j), Float::with_val(prec, &b1[1] * &j)];
        // i range from both coordinate slabs.
        let mut lo = Float::with_val(prec, f64::NEG_INFINITY);
        let mut hi = Float::with_val(prec, f64::INFINITY);
        let mut empty = false;
        for d in 0..2 {
            let (a, b) = (Float::with_val(prec, &box_lo[d] - &base[d]), Float::with_val(prec, &box_hi[d] - &base[d]));
            if b0[d].is_zero() {
                empty |= a > 0 || b < 0;
                continue;
            }
            let (mut p, mut q) = (Float::with_val(prec, &a / &b0[d]), Float::with_val(prec, &b / &b0[d]));
            if p > q {
                std::mem::swap(&mut p, &mut q);
            }
            if p > lo {
                lo = p;
            }
            if q < hi {
                hi = q;
            }
        }
        if !empty && lo <= hi {
            let mut i = lo.floor().to_integer().unwrap();
            let ih = hi.ceil().to_integer().unwrap();
            while i <= ih {
                let x = Integer::from(&i * &basis[0].0[0]) + Integer::from(&j * &basis[1].0[0]);
                let y = Integer::from(&i * &basis[0].0[1]) + Integer::from(&j * &basis[1].0[1]);
                let u = CycInt::new(Ring::M4, vec![x, y])?;
                if geo.feasible(&u, k) {
                    out.push(FeasibleCandidate { u, k, index: Integer::from(out.len()) });
                }
                i += 1;
            }
        }
        j += 1;
    }
    Ok(out)
}

/// Exact short cut for diag(1, w^j) targets.
fn exact_diagonal(theta: &Angle, basis: Basis) -> Option<Circuit> {
    if !theta.is_rational_pi() {
        return None;
    }
    let m = basis.ring().m();
    let steps = rug::Rational::from(theta.pi_mult() * m) / 2u32;
    if *steps.denom() != 1 {
        return None;
    }
    Some(lambda_word(basis, steps.numer().mod_u(m) as i64))
}

/// Fallback circuit for diag(1, e^{i theta}) at operator distance <= eps.
pub fn fallback_approx(theta: &Angle, eps: &Eps, basis: Basis, config: &FallbackConfig) -> Result<FallbackResult> {
    let ring = basis.ring();
    if let Some(c) = exact_diagonal(theta, basis) {
        let unitary = eval_circuit(&c)?;
        return Ok(FallbackResult { circuit: c, unitary, k: 0, candidates_tried: 0, skipped: 0, distance: 0.0 });
    }
    // diag(1, e^{i theta}) = Z diag(1, e^{i (theta - j pi)}) for odd j.
    let t = theta.eval(128);
    let j = Float::with_val(128, t.mid() / Float::with_val(128, rug::float::Constant::Pi)).round().to_f64() as i64;
    let reduced = theta.add_pi(&rug::Rational::from(-j));
    let ceiling = cost_ceiling(basis, eps);
    let k0 = min_round_exponent(eps, ring);
    let budget = config.budget_per_level as usize * (k0 as usize + 4);
    let mut tried = 0usize;
    let mut skipped = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let prec = eps.default_prec() + 64;
    let target = theta.eval(prec);
    let mut k = k0;
    while tried < budget {
        let mut cands: Box<dyn Iterator<Item = Option<FeasibleCandidate>>> = match ring {
            Ring::M4 => {
                let mut v = lattice_candidates(&reduced, eps, k)?;
                v.shuffle(&mut rng);
                Box::new(v.into_iter().map(Some))
            }
            _ => {
                let mut s = match StripSampler::new(&reduced, eps, ring, k, rng.gen()) {
                    Ok(s) => s,
                    Err(PqfError::PreconditionViolated(_)) => {
                        k += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                Box::new(std::iter::from_fn(move || s.next_index().map(|j| s.candidate(&j))))
            }
        };
        for cand in cands.by_ref() {
            if tried >= budget {
                break;
            }
            let Some(cand) = cand else {
                skipped += 1;
                continue;
            };
            tried += 1;
            let xi = RealCycInt::from_int(ring, Integer::from(crate::exactsynth::nu_sq(ring)).pow(k));
            let xi = &xi - &cand.u.norm_sq();
            let outcome = solve_norm_eq(&xi, &config.factor)?;
            let NormEqStatus::Solved(y) = outcome.status else { continue };
            let unitary = ExactUnitary::new(cand.u.clone(), y, k, 0)?;
            let mut circuit = synth(&unitary)?;
            if j % 2 != 0 {
                circuit.push(Gate::Z);
            }
            if circuit.cost() > ceiling {
                continue;
            }
            let unitary = eval_circuit(&circuit)?;
            let d = operator_distance(&unitary, &target);
            if !cmp_ok(d.le(&eps.ival(prec))) {
                return Err(PqfError::Verification(format!("fallback distance {} exceeds eps", d.to_f64())));
            }
            return Ok(FallbackResult { circuit, unitary, k, candidates_tried: tried, skipped, distance: d.hi().to_f64() });
        }
        k += 1;
    }
    Err(PqfError::AssumptionFailure { stage: Stage::Fallback, tried })
}
