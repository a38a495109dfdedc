//! Exact unitaries over Z[zeta_m] / nu^L and their synthesis into gate words.
//!
//! Matrix convention: an `ExactUnitary` stands for
//!
//! ```text
//!   1/nu^L [[ z, y w^l ], [ -y*, z* w^l ]]
//! ```
//!
//! with w = zeta_m. Circuits list gates in application order, so the word
//! `A B` evaluates to the matrix product B A.

mod pi12;
mod t;
mod v;

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{PqfError, Result};
use crate::rings::{CIval, CycInt, RealCycInt, Ring};

pub use pi12::{case_coverage, reduce_column_pi12, reduce_column_pi12_traced, synth_pi12, ColumnCase};
pub use t::synth_t;
pub use v::synth_v;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "pi12")]
    Pi12,
    #[serde(rename = "V")]
    V,
}

impl Basis {
    pub fn ring(self) -> Ring {
        match self {
            Basis::T => Ring::M8,
            Basis::Pi12 => Ring::M12,
            Basis::V => Ring::M4,
        }
    }

    pub fn from_ring(ring: Ring) -> Basis {
        match ring {
            Ring::M8 => Basis::T,
            Ring::M12 => Basis::Pi12,
            Ring::M4 => Basis::V,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::T => "T",
            Basis::Pi12 => "pi12",
            Basis::V => "V",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Basis {
    type Err = PqfError;
    fn from_str(s: &str) -> Result<Basis> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "clifford+t" => Ok(Basis::T),
            "pi12" | "pi/12" | "k" | "clifford+pi12" => Ok(Basis::Pi12),
            "v" | "clifford+v" => Ok(Basis::V),
            _ => Err(PqfError::InvalidInput(format!("unknown basis '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    T,
    Tdg,
    S,
    Sdg,
    X,
    Y,
    Z,
    /// diag(1, w^k) in the pi/12 basis.
    K(i64),
    VX,
    VXdg,
    VY,
    VYdg,
    VZ,
    VZdg,
    /// Global phase w^j.
    Wph(i64),
    /// Global phase i^g.
    Gph(i64),
}

impl Gate {
    fn allowed(self, basis: Basis) -> bool {
        use Gate::*;
        match basis {
            Basis::T => matches!(self, H | T | Tdg | S | Sdg | X | Y | Z | Wph(0..=7)),
            Basis::Pi12 => matches!(self, H | X | Y | Z | K(-5..=6) | Wph(0..=11)),
            Basis::V => matches!(self, H | S | X | Y | Z | VX | VXdg | VY | VYdg | VZ | VZdg | Gph(0..=3)),
        }
    }

    fn cost(self, basis: Basis) -> usize {
        use Gate::*;
        match (basis, self) {
            (Basis::T, T | Tdg) => 1,
            (Basis::Pi12, K(k)) => (k.rem_euclid(3) != 0) as usize,
            (Basis::V, VX | VXdg | VY | VYdg | VZ | VZdg) => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Gate::*;
        match self {
            H => f.write_str("H"),
            T => f.write_str("T"),
            Tdg => f.write_str("Tdg"),
            S => f.write_str("S"),
            Sdg => f.write_str("Sdg"),
            X => f.write_str("X"),
            Y => f.write_str("Y"),
            Z => f.write_str("Z"),
            K(k) => write!(f, "K({k})"),
            VX => f.write_str("VX"),
            VXdg => f.write_str("VXdg"),
            VY => f.write_str("VY"),
            VYdg => f.write_str("VYdg"),
            VZ => f.write_str("VZ"),
            VZdg => f.write_str("VZdg"),
            Wph(j) => write!(f, "Wph({j})"),
            Gph(g) => write!(f, "Gph({g})"),
        }
    }
}

fn parse_gate(tok: &str) -> Option<Gate> {
    use Gate::*;
    let arg = |name: &str| -> Option<i64> {
        tok.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?.parse().ok()
    };
    Some(match tok {
        "H" => H,
        "T" => T,
        "Tdg" => Tdg,
        "S" => S,
        "Sdg" => Sdg,
        "X" => X,
        "Y" => Y,
        "Z" => Z,
        "VX" => VX,
        "VXdg" => VXdg,
        "VY" => VY,
        "VYdg" => VYdg,
        "VZ" => VZ,
        "VZdg" => VZdg,
        _ => {
            if let Some(k) = arg("K") {
                K(k)
            } else if let Some(j) = arg("Wph") {
                Wph(j)
            } else {
                Gph(arg("Gph")?)
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub basis: Basis,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(basis: Basis) -> Circuit {
        Circuit { basis, gates: Vec::new() }
    }

    pub fn from_gates(basis: Basis, gates: Vec<Gate>) -> Result<Circuit> {
        if let Some(g) = gates.iter().find(|g| !g.allowed(basis)) {
            return Err(PqfError::InvalidInput(format!("gate {g} is not in the {basis} alphabet")));
        }
        Ok(Circuit { basis, gates })
    }

    /// Strict parse of the whitespace-separated text format.
    pub fn parse(basis: Basis, text: &str) -> Result<Circuit> {
        let gates = text
            .split_whitespace()
            .map(|t| parse_gate(t).ok_or_else(|| PqfError::InvalidInput(format!("unknown token '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        Circuit::from_gates(basis, gates)
    }

    /// Non-Clifford count for the basis.
    pub fn cost(&self) -> usize {
        self.gates.iter().map(|g| g.cost(self.basis)).sum()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.allowed(self.basis), "{g} outside {}", self.basis);
        self.gates.push(g);
    }

    /// `self` followed by `o`.
    pub fn then(&self, o: &Circuit) -> Circuit {
        let mut c = self.clone();
        c.gates.extend_from_slice(&o.gates);
        c
    }

    /// Word for the inverse unitary.
    pub fn inverse(&self) -> Circuit {
        let m = self.basis.ring().m() as i64;
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| {
                use Gate::*;
                match *g {
                    T => Tdg,
                    Tdg => T,
                    S if self.basis == Basis::V => S,
                    S => Sdg,
                    Sdg => S,
                    K(k) => K(norm_k(-k)),
                    VX => VXdg,
                    VXdg => VX,
                    VY => VYdg,
                    VYdg => VY,
                    VZ => VZdg,
                    VZdg => VZ,
                    Wph(j) => Wph((-j).rem_euclid(m)),
                    Gph(j) => Gph((-j).rem_euclid(4)),
                    g => g,
                }
            })
            .collect::<Vec<_>>();
        let mut out = Circuit::new(self.basis);
        for g in gates {
            if self.basis == Basis::V && g == Gate::S {
                // S^-1 = Z S in the V alphabet.
                out.gates.extend([Gate::S, Gate::Z]);
            } else {
                out.gates.push(g);
            }
        }
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// k mod 12 in -5..=6.
pub(crate) fn norm_k(k: i64) -> i64 {
    let r = k.rem_euclid(12);
    if r > 6 {
        r - 12
    } else {
        r
    }
}

/// 2x2 matrix of numerators over nu^l.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Mat2 {
    pub e: [CycInt; 4],
    pub l: u32,
}

impl Mat2 {
    pub fn identity(ring: Ring) -> Mat2 {
        let (o, z) = (CycInt::one(ring), CycInt::zero(ring));
        Mat2 { e: [o.clone(), z.clone(), z, o], l: 0 }
    }

    pub fn scalar(c: CycInt, l: u32) -> Mat2 {
        let z = CycInt::zero(c.ring());
        Mat2 { e: [c.clone(), z.clone(), z, c], l }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let [a, b, c, d] = &self.e;
        let [p, q, r, s] = &o.e;
        let e = [&(a * p) + &(b * r), &(a * q) + &(b * s), &(c * p) + &(d * r), &(c * q) + &(d * s)];
        Mat2 { e, l: self.l + o.l }.canonical()
    }

    /// Strip common factors of nu (nu^2 where nu is not in the ring).
    pub fn canonical(mut self) -> Mat2 {
        let ring = self.e[0].ring();
        if self.e.iter().all(|x| x.is_zero()) {
            return self;
        }
        loop {
            let (div, step) = match ring {
                Ring::M8 => (sqrt2(), 1),
                Ring::M12 => (CycInt::from_i64s(ring, &[2, 0, 0, 0]), 2),
                Ring::M4 => (CycInt::from_i64s(ring, &[5, 0]), 2),
            };
            if self.l < step {
                return self;
            }
            let q: Option<Vec<CycInt>> = self.e.iter().map(|x| x.div_exact(&div)).collect();
            match q {
                Some(q) => {
                    self.e = [q[0].clone(), q[1].clone(), q[2].clone(), q[3].clone()];
                    self.l -= step;
                }
                None => return self,
            }
        }
    }
}

pub(crate) fn sqrt2() -> CycInt {
    CycInt::from_i64s(Ring::M8, &[0, 1, 0, -1])
}

fn gate_matrix(g: Gate, ring: Ring) -> Result<Mat2> {
    use Gate::*;
    let c = |v: &[i64]| CycInt::from_i64s(ring, v);
    let w = |k: i64| CycInt::zeta_pow(ring, k);
    let zero = CycInt::zero(ring);
    let one = CycInt::one(ring);
    let i = CycInt::imag_unit(ring);
    let diag = |a: CycInt, d: CycInt| Mat2 { e: [a, zero.clone(), zero.clone(), d], l: 0 };
    let m = ring.m() as i64;
    let out = match g {
        H => {
            if ring == Ring::M4 {
                return Err(PqfError::InvalidInput("H has no exact form over Z[i] / sqrt5^L".into()));
            }
            Mat2 { e: [one.clone(), one.clone(), one.clone(), -&one], l: 1 }
        }
        T => diag(one, w(1)),
        Tdg => diag(one, w(-1)),
        S => diag(one, i),
        Sdg => diag(one, -&i),
        X => Mat2 { e: [zero.clone(), one.clone(), one, zero], l: 0 },
        Y => Mat2 { e: [zero.clone(), -&i, i, zero], l: 0 },
        Z => diag(one.clone(), -&one),
        K(k) => diag(one, w(k)),
        Wph(j) => Mat2::scalar(w(j.rem_euclid(m)), 0),
        Gph(j) => Mat2::scalar(CycInt::imag_unit(ring).pow(j.rem_euclid(4) as u32), 0),
        VX | VXdg | VY | VYdg | VZ | VZdg => {
            if ring != Ring::M4 {
                return Err(PqfError::InvalidInput(format!("{g} needs the V basis")));
            }
            let s: i64 = if matches!(g, VX | VY | VZ) { 2 } else { -2 };
            let e = match g {
                VX | VXdg => [c(&[1, 0]), c(&[0, s]), c(&[0, s]), c(&[1, 0])],
                VY | VYdg => [c(&[1, 0]), c(&[s, 0]), c(&[-s, 0]), c(&[1, 0])],
                _ => [c(&[1, s]), zero.clone(), zero, c(&[1, -s])],
            };
            Mat2 { e, l: 1 }
        }
    };
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactUnitary {
    ring: Ring,
    z: CycInt,
    y: CycInt,
    l: u32,
    phase: i64,
}

impl fmt::Display for ExactUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={} l={} z=[{}] y=[{}]", self.l, self.phase, self.z, self.y)
    }
}

/// nu^2 as an integer: 2, or 5 for m = 4.
pub fn nu_sq(ring: Ring) -> u32 {
    if ring == Ring::M4 {
        5
    } else {
        2
    }
}

impl ExactUnitary {
    pub fn new(z: CycInt, y: CycInt, l: u32, phase: i64) -> Result<ExactUnitary> {
        let ring = z.ring();
        if y.ring() != ring {
            return Err(PqfError::MixedRing(ring.m(), y.ring().m()));
        }
        let total = RealCycInt::from_int(ring, Integer::from(nu_sq(ring)).pow(l));
        if &z.norm_sq() + &y.norm_sq() != total {
            return Err(PqfError::PreconditionViolated(format!("|z|^2 + |y|^2 != nu^{}", 2 * l)));
        }
        let phase = phase.rem_euclid(ring.m() as i64);
        let m = Mat2 {
            e: [z.clone(), &y * &CycInt::zeta_pow(ring, phase), -&y.conj(), &z.conj() * &CycInt::zeta_pow(ring, phase)],
            l,
        }
        .canonical();
        Ok(ExactUnitary::from_canonical(m).expect("well-formed unitary"))
    }

    pub fn identity(ring: Ring) -> ExactUnitary {
        ExactUnitary { ring, z: CycInt::one(ring), y: CycInt::zero(ring), l: 0, phase: 0 }
    }

    fn from_canonical(m: Mat2) -> Option<ExactUnitary> {
        let ring = m.e[0].ring();
        let [a, b, c, d] = m.e;
        let y = -&c.conj();
        let mm = ring.m() as i64;
        let phase = (0..mm).find(|&k| {
            let w = CycInt::zeta_pow(ring, k);
            &y * &w == b && &a.conj() * &w == d
        })?;
        Some(ExactUnitary { ring, z: a, y, l: m.l, phase })
    }

    pub(crate) fn from_mat(m: Mat2) -> Result<ExactUnitary> {
        let m = m.canonical();
        let total = RealCycInt::from_int(m.e[0].ring(), Integer::from(nu_sq(m.e[0].ring())).pow(m.l));
        if &m.e[0].norm_sq() + &m.e[2].norm_sq() != total {
            return Err(PqfError::Verification("matrix is not unitary".into()));
        }
        ExactUnitary::from_canonical(m).ok_or_else(|| PqfError::Verification("matrix is not unitary".into()))
    }

    pub(crate) fn mat(&self) -> Mat2 {
        let w = CycInt::zeta_pow(self.ring, self.phase);
        Mat2 { e: [self.z.clone(), &self.y * &w, -&self.y.conj(), &self.z.conj() * &w], l: self.l }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn z(&self) -> &CycInt {
        &self.z
    }

    pub fn y(&self) -> &CycInt {
        &self.y
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn phase(&self) -> i64 {
        self.phase
    }

    /// self followed by o, i.e. the product o * self.
    pub fn then(&self, o: &ExactUnitary) -> ExactUnitary {
        ExactUnitary::from_mat(o.mat().mul(&self.mat())).expect("unitary product")
    }

    pub fn adjoint(&self) -> ExactUnitary {
        let [a, b, c, d] = &self.mat().e;
        ExactUnitary::from_mat(Mat2 { e: [a.conj(), c.conj(), b.conj(), d.conj()], l: self.l }).expect("unitary adjoint")
    }

    /// Equality as operators up to a global phase.
    pub fn eq_up_to_phase(&self, o: &ExactUnitary) -> bool {
        let (p, q) = (self.mat().e, o.mat().e);
        (0..4).all(|i| (0..4).all(|j| &p[i] * &q[j] == &p[j] * &q[i]))
    }

    /// Entries as complex intervals.
    pub fn eval(&self, prec: u32) -> [CIval; 4] {
        let m = self.mat();
        let nu = crate::ival::Ival::sqrt_int(prec, nu_sq(self.ring));
        let mut den = crate::ival::Ival::one(prec);
        for _ in 0..self.l {
            den = den.mul(&nu);
        }
        let inv = crate::ival::Ival::one(prec).div(&den).expect("nu^L > 0");
        m.e.map(|x| x.eval(prec).scale(&inv))
    }
}

/// Exact evaluation of a circuit.
pub fn eval_circuit(c: &Circuit) -> Result<ExactUnitary> {
    let ring = c.basis.ring();
    let mut m = Mat2::identity(ring);
    for g in &c.gates {
        if !g.allowed(c.basis) {
            return Err(PqfError::InvalidInput(format!("gate {g} is not in the {} alphabet", c.basis)));
        }
        m = gate_matrix(*g, ring)?.mul(&m);
    }
    ExactUnitary::from_mat(m)
}

/// Word for diag(1, w^j), w = zeta_m of the basis ring.
pub fn lambda_word(basis: Basis, j: i64) -> Circuit {
    use Gate::*;
    let m = basis.ring().m() as i64;
    let j = j.rem_euclid(m);
    let gates = match basis {
        Basis::T => t::t_power(j).to_vec(),
        Basis::Pi12 if j == 0 => vec![],
        Basis::Pi12 => vec![K(norm_k(j))],
        Basis::V => match j {
            0 => vec![],
            1 => vec![S],
            2 => vec![Z],
            _ => vec![S, Z],
        },
    };
    Circuit { basis, gates }
}

/// Synthesis for whichever basis matches the unitary's ring.
pub fn synth(u: &ExactUnitary) -> Result<Circuit> {
    match u.ring() {
        Ring::M8 => synth_t(u),
        Ring::M12 => synth_pi12(u),
        Ring::M4 => synth_v(u),
    }
}

/// Upper bound on the non-Clifford count that synthesis guarantees.
pub fn cost_bound(u: &ExactUnitary) -> usize {
    let l = u.l() as usize;
    match u.ring() {
        Ring::M8 => 2 * l + (u.phase() % 2) as usize,
        Ring::M12 => l + 2,
        Ring::M4 => l,
    }
}

pub(crate) fn check_result(u: &ExactUnitary, c: &Circuit) -> Result<()> {
    let got = eval_circuit(c)?;
    if got != *u {
        return Err(PqfError::InternalReductionFailure(format!("synthesized word evaluates to {got}, expected {u}")));
    }
    if c.cost() > cost_bound(u) {
        return Err(PqfError::InternalReductionFailure(format!(
            "cost {} exceeds bound {} for L={}",
            c.cost(),
            cost_bound(u),
            u.l()
        )));
    }
    Ok(())
}

/// Random exact unitaries for fuzzing, built from words.
pub mod testutil {
    use super::*;
    use rand::Rng;

    /// Random word of `n` non-Clifford syllables with Clifford padding.
    pub fn random_word<R: Rng>(basis: Basis, n: usize, rng: &mut R) -> Circuit {
        use Gate::*;
        let mut c = Circuit::new(basis);
        for _ in 0..n {
            match basis {
                Basis::T => {
                    c.push([T, Tdg][rng.gen_range(0..2)]);
                    if rng.gen_bool(0.3) {
                        c.push([S, Sdg, X, Z][rng.gen_range(0..4)]);
                    }
                    c.push(H);
                }
                Basis::Pi12 => {
                    c.push(K([1, 2, -1, -2, 4, 5][rng.gen_range(0..6)]));
                    c.push(H);
                    if rng.gen_bool(0.3) {
                        c.push(K([0, 3, 6, -3][rng.gen_range(0..4)]));
                        c.push(H);
                    }
                }
                Basis::V => {
                    c.push([VX, VXdg, VY, VYdg, VZ, VZdg][rng.gen_range(0..6)]);
                    if rng.gen_bool(0.3) {
                        c.push([S, X, Y, Z][rng.gen_range(0..4)]);
                    }
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_identity() {
        for b in [Basis::T, Basis::Pi12, Basis::V] {
            let u = eval_circuit(&Circuit::new(b)).unwrap();
            assert_eq!(u, ExactUnitary::identity(b.ring()));
        }
    }

    #[test]
    fn hadamard_form() {
        let u = eval_circuit(&Circuit::parse(Basis::T, "H").unwrap()).unwrap();
        let one = CycInt::one(Ring::M8);
        assert_eq!((u.z().clone(), u.y().clone(), u.l()), (one.clone(), -&one, 1));
        assert_eq!(u.phase(), 4);
        let hh = eval_circuit(&Circuit::parse(Basis::Pi12, "H H").unwrap()).unwrap();
        assert_eq!(hh, ExactUnitary::identity(Ring::M12));
    }

    #[test]
    fn parse_is_strict() {
        assert!(Circuit::parse(Basis::T, "H T Tdg S Sdg X Y Z Wph(3)").is_ok());
        assert!(Circuit::parse(Basis::T, "K(1)").is_err());
        assert!(Circuit::parse(Basis::T, "Wph(8)").is_err());
        assert!(Circuit::parse(Basis::Pi12, "K(-5) K(6) H Wph(11)").is_ok());
        assert!(Circuit::parse(Basis::Pi12, "K(7)").is_err());
        assert!(Circuit::parse(Basis::Pi12, "T").is_err());
        assert!(Circuit::parse(Basis::V, "VX VXdg VY VYdg VZ VZdg S Gph(3)").is_ok());
        assert!(Circuit::parse(Basis::V, "Sdg").is_err());
        assert!(Circuit::parse(Basis::T, "h").is_err());
        let c = Circuit::parse(Basis::Pi12, "K(1) H K(3) H K(-2)").unwrap();
        assert_eq!(c.cost(), 2);
        assert_eq!(Circuit::parse(Basis::Pi12, &c.to_string()).unwrap(), c);
    }

    #[test]
    fn gate_identities() {
        let ev = |b, s| eval_circuit(&Circuit::parse(b, s).unwrap()).unwrap();
        assert_eq!(ev(Basis::T, "T T"), ev(Basis::T, "S"));
        assert_eq!(ev(Basis::T, "H Z H"), ev(Basis::T, "X"));
        // (SH)^3 is the global phase w8.
        assert_eq!(ev(Basis::T, "H S H S H S"), ev(Basis::T, "Wph(1)"));
        assert_eq!(ev(Basis::Pi12, "K(3) K(3)"), ev(Basis::Pi12, "Z"));
        assert_eq!(ev(Basis::V, "VX VXdg"), ExactUnitary::identity(Ring::M4));
        assert_eq!(ev(Basis::V, "S S"), ev(Basis::V, "Z"));
        assert!(eval_circuit(&Circuit { basis: Basis::V, gates: vec![Gate::H] }).is_err());
    }

    #[test]
    fn inverse_words() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for b in [Basis::T, Basis::Pi12, Basis::V] {
            for _ in 0..20 {
                let c = testutil::random_word(b, 8, &mut rng);
                let u = eval_circuit(&c.then(&c.inverse())).unwrap();
                assert_eq!(u, ExactUnitary::identity(b.ring()));
            }
        }
    }

    #[test]
    fn lambda_words() {
        for b in [Basis::T, Basis::Pi12, Basis::V] {
            let m = b.ring().m() as i64;
            for j in -m..2 * m {
                let u = eval_circuit(&lambda_word(b, j)).unwrap();
                let w = CycInt::zeta_pow(b.ring(), j.rem_euclid(m));
                assert_eq!(u, ExactUnitary::new(CycInt::one(b.ring()), CycInt::zero(b.ring()), 0, j.rem_euclid(m)).unwrap());
                assert_eq!(u.mat().e[3], w);
            }
        }
    }

    #[test]
    fn adjoint_and_phase_equivalence() {
        let u = eval_circuit(&Circuit::parse(Basis::T, "T H S H T").unwrap()).unwrap();
        assert_eq!(u.then(&u.adjoint()), ExactUnitary::identity(Ring::M8));
        let v = u.then(&eval_circuit(&Circuit::parse(Basis::T, "Wph(3)").unwrap()).unwrap());
        assert_ne!(u, v);
        assert!(u.eq_up_to_phase(&v));
    }
}
