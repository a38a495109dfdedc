//! Full protocols: k probabilistic rounds chained through their failure
//! angles, closed by a deterministic fallback.
//!
//! A round embeds the exact unitary V = (1/nu^L)[[z, y w^l], [-y*, z* w^l]]
//! as U = CNOT (I x V) CNOT with the primary qubit as control and a fresh
//! ancilla as target. Measuring the ancilla in 0 applies diag(z, z* w^l),
//! i.e. Lambda(z*/z) up to phase; measuring 1 applies diag(-y*, y w^l).

pub mod euler;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::angle::{Angle, Eps};
use crate::error::{PqfError, Result, Stage};
use crate::exactsynth::{eval_circuit, lambda_word, nu_sq, synth, Basis, Circuit, ExactUnitary};
use crate::fallback::{fallback_approx, FallbackConfig};
use crate::ival::Ival;
use crate::modifier::{find_modifier, ModifierConfig};
use crate::relation::{approx_phase, rescale_floor, PhaseTarget};
use crate::rings::{CIval, CycInt};

pub use euler::{euler_decompose, reconstruct, EulerAngles};

#[derive(Clone, Debug, Default)]
pub struct ProtocolConfig {
    pub modifier: ModifierConfig,
    pub fallback: FallbackConfig,
    /// Working precision override for stage 1.
    pub prec: Option<u32>,
}

/// Diagnostics gathered while building a round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub pslq_iterations: usize,
    /// |z| straight out of stage 1, before any rescaling.
    pub stage1_abs: f64,
    pub modifier_candidates: u32,
    pub l1: i64,
}

#[derive(Clone, Debug)]
pub struct Round {
    /// Angle this round is asked to implement.
    pub target: Angle,
    /// Quarter turns split off the target; applied as a Clifford on the primary qubit.
    pub shift: i64,
    pub pre: Circuit,
    pub unitary: ExactUnitary,
    /// Word for the single-qubit part V.
    pub circuit: Circuit,
    pub p_success: f64,
    /// Angle left to implement after this round fails.
    pub failure_phase: Angle,
    pub cost: usize,
    pub stats: Option<RoundStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FallbackStats {
    pub candidates_tried: usize,
    pub k: u32,
}

#[derive(Clone, Debug)]
pub struct PqfProtocol {
    pub basis: Basis,
    pub theta: Angle,
    pub eps: Eps,
    /// Exact diagonal applied up front; nonempty only for exactly representable targets.
    pub prefix: Circuit,
    pub rounds: Vec<Round>,
    /// `None` when some round succeeds with certainty.
    pub fallback: Option<Circuit>,
    pub fallback_stats: Option<FallbackStats>,
    pub expected_cost: f64,
    pub cost_variance: f64,
}

fn quarter(basis: Basis) -> i64 {
    basis.ring().m() as i64 / 4
}

/// theta = reduced + j (2 pi / m), with the exact word for diag(1, w^j).
pub fn reduce_angle(theta: &Angle, basis: Basis) -> (Angle, Circuit) {
    let m = basis.ring().m();
    let j = theta.nearest_step(m);
    let reduced = theta.add_pi(&Rational::from((-2 * j, m as i64)));
    (reduced, lambda_word(basis, j))
}

fn work_prec(eps: &Eps) -> u32 {
    eps.default_prec() + 64
}

fn clamp_sqrt(d2: Ival) -> Ival {
    let zero = Float::with_val(d2.prec(), 0);
    let lo = if *d2.lo() < 0 { zero.clone() } else { d2.lo().clone() };
    let hi = if *d2.hi() < 0 { zero } else { d2.hi().clone() };
    Ival::from_bounds(lo, hi).sqrt()
}

/// Phase-invariant distance from diag(a, b) (|a| = |b|) to diag(1, e^{i theta}).
fn diag_distance(a: &CIval, b: &CIval, theta: &Ival) -> Ival {
    let p = theta.prec();
    let tr = a.add(&b.mul(&CIval::expi(&theta.neg())));
    let t = tr.abs().div(&a.abs()).expect("nonzero diagonal");
    clamp_sqrt(Ival::from_i64(p, 2).sub(&t))
}

/// Distance from the composite diag(a, b) F to diag(1, e^{i theta}).
fn fallback_distance(a: &CIval, b: &CIval, f: &ExactUnitary, theta: &Ival) -> Ival {
    let e = f.eval(theta.prec());
    diag_distance(&a.mul(&e[0]), &b.mul(&e[3]), theta)
}

fn zeta(u: &ExactUnitary, prec: u32) -> CIval {
    CycInt::zeta_pow(u.ring(), u.phase()).eval(prec)
}

/// |z|^2 / nu^{2L}.
fn success_probability(u: &ExactUnitary) -> f64 {
    let n = u.z().norm_sq().to_f64();
    n / (nu_sq(u.ring()) as f64).powi(u.l() as i32)
}

impl Round {
    /// Everything about a round follows from its target and the word for V.
    pub fn assemble(target: Angle, circuit: Circuit, stats: Option<RoundStats>) -> Result<Round> {
        let basis = circuit.basis;
        let m = basis.ring().m() as i64;
        let shift = target.nearest_step(4);
        let pre = lambda_word(basis, shift * quarter(basis));
        let reduced = target.add_pi(&Rational::from((-shift, 2)));
        let unitary = eval_circuit(&circuit)?;
        if unitary.z().is_zero() {
            return Err(PqfError::Verification("round never succeeds (z = 0)".into()));
        }
        // Outcome 1 applies Lambda(-y w^l / y*), arg = pi + 2 arg(y) + 2 pi l / m.
        let failure_phase = if unitary.y().is_zero() {
            reduced.clone()
        } else {
            reduced.add_pi(&Rational::from((-m - 2 * unitary.phase(), m))).add_arg(-2, unitary.y())
        };
        let cost = circuit.cost() + pre.cost();
        Ok(Round { target, shift, pre, p_success: success_probability(&unitary), unitary, circuit, failure_phase, cost, stats })
    }

    pub fn can_fail(&self) -> bool {
        !self.unitary.y().is_zero()
    }

    /// Rigorous distance of the outcome-0 operator to diag(1, e^{i target}).
    pub fn success_distance(&self, prec: u32) -> Ival {
        let theta = self.target.eval(prec);
        let (a, b) = self.start_diag(prec);
        let (za, zb) = self.success_diag(prec);
        diag_distance(&a.mul(&za), &b.mul(&zb), &theta)
    }

    fn start_diag(&self, prec: u32) -> (CIval, CIval) {
        let s = eval_circuit(&self.pre).expect("clifford prefix");
        let e = s.eval(prec);
        (e[0].clone(), e[3].clone())
    }

    fn success_diag(&self, prec: u32) -> (CIval, CIval) {
        let z = self.unitary.z().eval(prec);
        let w = zeta(&self.unitary, prec);
        (z.clone(), z.conj().mul(&w))
    }

    fn failure_diag(&self, prec: u32) -> (CIval, CIval) {
        let y = self.unitary.y().eval(prec);
        let w = zeta(&self.unitary, prec);
        (CIval::new(y.re.neg(), y.im.clone()), y.mul(&w))
    }
}

/// Exact unitary for one probabilistic round on the target angle.
pub fn build_round(theta: &Angle, eps: &Eps, basis: Basis, config: &ProtocolConfig) -> Result<Round> {
    if *eps.value() > Rational::from((1, 100)) {
        return Err(PqfError::InvalidInput("rounds need eps <= 1e-2".into()));
    }
    let shift = theta.nearest_step(4);
    let reduced = theta.add_pi(&Rational::from((-shift, 2)));
    let ring = basis.ring();
    let target = PhaseTarget { theta: reduced, eps: eps.clone() };
    let a = approx_phase(&target, ring, config.prec)?;
    let (re, im) = a.z.to_c64();
    let z = rescale_floor(&a.z, eps);
    let md = find_modifier(&z, &config.modifier)?;
    let l = u32::try_from(md.l_r).map_err(|_| PqfError::InternalReductionFailure("negative L_r".into()))?;
    let u = ExactUnitary::new(md.rz.clone(), md.y.clone(), l, 0)?;
    let circuit = synth(&u)?;
    let stats = RoundStats { pslq_iterations: a.iterations, stage1_abs: re.hypot(im), modifier_candidates: md.candidates_tried, l1: md.l1 };
    let round = Round::assemble(theta.clone(), circuit, Some(stats))?;
    let prec = work_prec(eps);
    if round.success_distance(prec).lt(&eps.ival(prec)) != Some(true) {
        return Err(PqfError::Verification("outcome-0 operator is not within eps".into()));
    }
    Ok(round)
}

/// theta - arg(-y/y*) for a round, as a float in (-pi, pi].
pub fn failure_angle(round: &Round) -> f64 {
    wrap(round.failure_phase.to_f64())
}

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = x - t * (x / t).round();
    if r <= -std::f64::consts::PI {
        r + t
    } else {
        r
    }
}

/// First moment and variance of the cost of a chain of (p, cost) rounds
/// ending in a fallback of cost `c_f`, by backward recursion.
pub fn chain_moments(rounds: &[(f64, f64)], c_f: f64) -> (f64, f64) {
    let (mut e, mut m2) = (c_f, c_f * c_f);
    for &(p, c) in rounds.iter().rev() {
        let q = 1.0 - p;
        let ne = c + q * e;
        m2 = c * c + 2.0 * c * q * e + q * m2;
        e = ne;
    }
    (e, (m2 - e * e).max(0.0))
}

/// Limits C_P/p and C_P^2 q/p^2 of the uniform chain.
pub fn uniform_limits(p: f64, c_p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    (c_p / p, c_p * c_p * q / (p * p))
}

/// Bounds on |E - C_P/p| and |Var - C_P^2 q/p^2| for k uniform rounds.
///
/// Both chains agree outside the event that the first k rounds fail, which
/// has probability q^k.
pub fn uniform_remainders(p: f64, c_p: f64, c_f: f64, k: u32) -> (f64, f64) {
    let q = 1.0 - p;
    let qk = q.powi(k as i32);
    let kf = k as f64;
    let r_e = qk * (c_f - c_p / p).abs();
    let tail_x = (c_p * kf + c_f).powi(2);
    let tail_y = c_p * c_p * (kf * kf + 2.0 * kf / p + (1.0 + q) / (p * p));
    let mean_gap = c_f + c_p * (kf + 1.0 / p);
    let (e_inf, _) = uniform_limits(p, c_p);
    let e_fin = e_inf + r_e;
    let r_v = qk * (tail_x + tail_y + mean_gap * (e_inf + e_fin));
    (r_e, r_v)
}

impl PqfProtocol {
    fn finish(basis: Basis, theta: Angle, eps: Eps, prefix: Circuit, rounds: Vec<Round>, fallback: Option<Circuit>, fallback_stats: Option<FallbackStats>) -> PqfProtocol {
        let chain: Vec<(f64, f64)> = rounds.iter().map(|r| (r.p_success, r.cost as f64)).collect();
        let c_f = fallback.as_ref().map_or(0.0, |f| f.cost() as f64);
        let (e, var) = chain_moments(&chain, c_f);
        PqfProtocol { basis, theta, eps, expected_cost: e + prefix.cost() as f64, cost_variance: var, prefix, rounds, fallback, fallback_stats }
    }

    pub fn k(&self) -> usize {
        self.rounds.len()
    }

    /// Angle the fallback implements.
    pub fn residual_angle(&self) -> Angle {
        match self.rounds.last() {
            Some(r) => r.failure_phase.clone(),
            None => reduce_angle(&self.theta, self.basis).0,
        }
    }

    /// Cost and rigorous distance for each trajectory: success in round 1..k,
    /// then the all-fail branch through the fallback.
    pub fn trajectories(&self, prec: u32) -> Result<Vec<(usize, Ival)>> {
        let theta = self.theta.eval(prec);
        let p = eval_circuit(&self.prefix)?.eval(prec);
        let (mut a, mut b) = (p[0].clone(), p[3].clone());
        let mut cost = self.prefix.cost();
        let mut out = Vec::new();
        for r in &self.rounds {
            let (sa, sb) = r.start_diag(prec);
            a = a.mul(&sa);
            b = b.mul(&sb);
            cost += r.cost;
            let (za, zb) = r.success_diag(prec);
            out.push((cost, diag_distance(&a.mul(&za), &b.mul(&zb), &theta)));
            if !r.can_fail() {
                return Ok(out);
            }
            let (fa, fb) = r.failure_diag(prec);
            let inv = Ival::one(prec).div(&fa.abs()).expect("y != 0");
            a = a.mul(&fa).scale(&inv);
            b = b.mul(&fb).scale(&inv);
        }
        let f = self.fallback.as_ref().ok_or_else(|| PqfError::Verification("missing fallback".into()))?;
        let fu = eval_circuit(f)?;
        out.push((cost + f.cost(), fallback_distance(&a, &b, &fu, &theta)));
        Ok(out)
    }

    /// Every trajectory within eps, certified by interval arithmetic.
    pub fn verify(&self) -> Result<Vec<f64>> {
        let prec = work_prec(&self.eps);
        let eps = self.eps.ival(prec);
        let mut ds = Vec::new();
        for (j, (_, d)) in self.trajectories(prec)?.into_iter().enumerate() {
            if d.lt(&eps) != Some(true) {
                return Err(PqfError::Verification(format!("trajectory {j} lands at distance {} > eps", d.to_f64())));
            }
            ds.push(d.hi().to_f64());
        }
        Ok(ds)
    }

    pub fn to_json(&self) -> ProtocolJson {
        ProtocolJson {
            basis: self.basis,
            theta: self.theta.exact_repr().unwrap_or_else(|| format!("{:e}", self.theta.to_f64())),
            eps: self.eps.exact_repr(),
            prefix_gate: self.prefix.to_string(),
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundJson { l: r.unitary.l(), p_success: r.p_success, failure_phase: failure_angle(r), cost: r.cost, circuit: r.circuit.to_string() })
                .collect(),
            fallback: self.fallback.as_ref().map(|f| FallbackJson { cost: f.cost(), circuit: f.to_string() }),
            expected_cost: self.expected_cost,
            cost_variance: self.cost_variance,
        }
    }

    /// Rebuilds a protocol from its serialized form, recomputing every
    /// derived field from the circuits and checking it against the record.
    pub fn from_json(j: &ProtocolJson) -> Result<PqfProtocol> {
        let bad = |m: String| PqfError::Verification(m);
        let theta = Angle::parse(&j.theta)?;
        let eps = Eps::parse(&j.eps)?;
        let prefix = Circuit::parse(j.basis, &j.prefix_gate)?;
        let mut target = theta.clone();
        if !prefix.is_empty() {
            let (reduced, word) = reduce_angle(&theta, j.basis);
            if word != prefix || !reduced.is_zero() {
                return Err(bad("prefix gate does not match the target".into()));
            }
            target = reduced;
        }
        let mut rounds = Vec::new();
        for (i, rj) in j.rounds.iter().enumerate() {
            let c = Circuit::parse(j.basis, &rj.circuit)?;
            let r = Round::assemble(target.clone(), c, None)?;
            if r.unitary.l() != rj.l || r.cost != rj.cost {
                return Err(bad(format!("round {} record does not match its circuit", i + 1)));
            }
            if (r.p_success - rj.p_success).abs() > 1e-12 {
                return Err(bad(format!("round {} success probability mismatch", i + 1)));
            }
            if (wrap(failure_angle(&r) - rj.failure_phase)).abs() > 1e-9 {
                return Err(bad(format!("round {} failure phase mismatch", i + 1)));
            }
            target = r.failure_phase.clone();
            rounds.push(r);
        }
        let fallback = match &j.fallback {
            Some(f) => {
                let c = Circuit::parse(j.basis, &f.circuit)?;
                if c.cost() != f.cost {
                    return Err(bad("fallback cost mismatch".into()));
                }
                Some(c)
            }
            None => None,
        };
        let p = PqfProtocol::finish(j.basis, theta, eps, prefix, rounds, fallback, None);
        if (p.expected_cost - j.expected_cost).abs() > 1e-9 * p.expected_cost.max(1.0) || (p.cost_variance - j.cost_variance).abs() > 1e-9 * p.cost_variance.max(1.0) {
            return Err(bad("cost statistics do not match the rounds".into()));
        }
        p.verify()?;
        Ok(p)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("plain data")
    }

    pub fn from_json_str(s: &str) -> Result<PqfProtocol> {
        let j: ProtocolJson = serde_json::from_str(s).map_err(|e| PqfError::InvalidInput(format!("protocol JSON: {e}")))?;
        PqfProtocol::from_json(&j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundJson {
    #[serde(rename = "L")]
    pub l: u32,
    pub p_success: f64,
    pub failure_phase: f64,
    pub cost: usize,
    pub circuit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FallbackJson {
    pub cost: usize,
    pub circuit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub basis: Basis,
    pub theta: String,
    pub eps: String,
    pub rounds: Vec<RoundJson>,
    pub fallback: Option<FallbackJson>,
    pub expected_cost: f64,
    pub cost_variance: f64,
    pub prefix_gate: String,
}

/// PQF(theta, eps, k): k rounds on successive failure angles, then a fallback.
pub fn build_pqf(theta: &Angle, eps: &Eps, k: usize, basis: Basis, config: &ProtocolConfig) -> Result<PqfProtocol> {
    let (reduced, word) = reduce_angle(theta, basis);
    if reduced.is_zero() {
        return Ok(PqfProtocol::finish(basis, theta.clone(), eps.clone(), word, Vec::new(), Some(Circuit::new(basis)), None));
    }
    let mut rounds: Vec<Round> = Vec::new();
    let mut target = theta.clone();
    for _ in 0..k {
        let r = build_round(&target, eps, basis, config)?;
        target = r.failure_phase.clone();
        let done = !r.can_fail();
        rounds.push(r);
        if done {
            let p = PqfProtocol::finish(basis, theta.clone(), eps.clone(), Circuit::new(basis), rounds, None, None);
            p.verify()?;
            return Ok(p);
        }
    }
    let f = fallback_approx(&target, eps, basis, &config.fallback)?;
    let stats = FallbackStats { candidates_tried: f.candidates_tried, k: f.k };
    let p = PqfProtocol::finish(basis, theta.clone(), eps.clone(), Circuit::new(basis), rounds, Some(f.circuit), Some(stats));
    p.verify().map_err(|e| match e {
        PqfError::Verification(m) => PqfError::Verification(format!("{}: {m}", Stage::Protocol)),
        e => e,
    })?;
    Ok(p)
}

/// Exact 4x4 form of CNOT (I x V) CNOT over the ring, entries over nu^L.
/// Basis index is 2 * primary + ancilla.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoQubit {
    pub e: [[CycInt; 4]; 4],
    pub l: u32,
}

pub fn two_qubit_form(u: &ExactUnitary) -> TwoQubit {
    let m = u.mat();
    let [a, b, c, d] = m.e.clone();
    let zero = CycInt::zero(u.ring());
    let mut e: [[CycInt; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    // Primary 0: V on the ancilla.
    e[0][0] = a.clone();
    e[0][1] = b.clone();
    e[1][0] = c.clone();
    e[1][1] = d.clone();
    // Primary 1: X V X.
    e[2][2] = d;
    e[2][3] = c;
    e[3][2] = b;
    e[3][3] = a;
    TwoQubit { e, l: m.l }
}

impl TwoQubit {
    /// Operator on the primary qubit for ancilla prepared in 0 and measured
    /// in `outcome`, unnormalized (entries over nu^L).
    pub fn branch(&self, outcome: usize) -> [[CycInt; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.e[2 * i + outcome][2 * j].clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub seed: u64,
    /// Trials that reached round j.
    pub reached: Vec<u64>,
    pub successes: Vec<u64>,
    pub success_frequency: Vec<f64>,
    pub fallback_runs: u64,
    pub mean_cost: f64,
    pub cost_variance: f64,
    pub mean_stderr: f64,
    pub expected_cost: f64,
    pub expected_variance: f64,
    pub max_distance: f64,
    pub max_segments: usize,
}

/// Outcome counts of a Monte-Carlo walk on a chain of success probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSample {
    /// Walks that entered round j.
    pub reached: Vec<u64>,
    pub successes: Vec<u64>,
    /// Walks ending with success in round j; the last entry counts the
    /// fallback.
    pub hits: Vec<u64>,
}

pub fn sample_chain(ps: &[f64], trials: u64, seed: u64) -> ChainSample {
    let k = ps.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reached = vec![0u64; k];
    let mut successes = vec![0u64; k];
    let mut hits = vec![0u64; k + 1];
    for _ in 0..trials {
        let mut end = k;
        for (j, &p) in ps.iter().enumerate() {
            reached[j] += 1;
            if rng.gen::<f64>() < p {
                successes[j] += 1;
                end = j;
                break;
            }
        }
        hits[end] += 1;
    }
    ChainSample { reached, successes, hits }
}

/// Monte-Carlo walk on the absorbing chain of the protocol.
pub fn simulate(p: &PqfProtocol, trials: u64, seed: u64) -> Result<SimReport> {
    if trials == 0 {
        return Err(PqfError::InvalidInput("trials must be positive".into()));
    }
    let prec = work_prec(&p.eps);
    let traj = p.trajectories(prec)?;
    let k = p.rounds.len();
    let ps: Vec<f64> = p.rounds.iter().map(|r| r.p_success).collect();
    let s = sample_chain(&ps, trials, seed);
    let (reached, successes, hits) = (s.reached, s.successes, s.hits);
    let max_segments = hits.iter().rposition(|&h| h > 0).map_or(0, |i| i + 1);
    let n = trials as f64;
    let mean = hits.iter().zip(&traj).map(|(&h, (c, _))| h as f64 * *c as f64).sum::<f64>() / n;
    let m2 = hits.iter().zip(&traj).map(|(&h, (c, _))| h as f64 * (*c as f64).powi(2)).sum::<f64>() / n;
    let var = if trials > 1 { (m2 - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 };
    let max_distance = hits.iter().zip(&traj).filter(|(&h, _)| h > 0).map(|(_, (_, d))| d.hi().to_f64()).fold(0.0, f64::max);
    Ok(SimReport {
        trials,
        seed,
        success_frequency: successes.iter().zip(&reached).map(|(&s, &r)| if r == 0 { 0.0 } else { s as f64 / r as f64 }).collect(),
        reached,
        successes,
        fallback_runs: hits[k],
        mean_cost: mean,
        cost_variance: var,
        mean_stderr: (var / n).sqrt(),
        expected_cost: p.expected_cost,
        expected_variance: p.cost_variance,
        max_distance,
        max_segments,
    })
}
