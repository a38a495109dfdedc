//! Clifford+V synthesis over Z[i] / sqrt5^L by generator peeling.

use super::{check_result, gate_matrix, Basis, Circuit, ExactUnitary, Gate, Mat2};
use crate::error::{PqfError, Result};
use crate::rings::{CycInt, Ring};

const GENERATORS: [Gate; 6] = [Gate::VX, Gate::VXdg, Gate::VY, Gate::VYdg, Gate::VZ, Gate::VZdg];

fn dagger(g: Gate) -> Gate {
    match g {
        Gate::VX => Gate::VXdg,
        Gate::VXdg => Gate::VX,
        Gate::VY => Gate::VYdg,
        Gate::VYdg => Gate::VY,
        Gate::VZ => Gate::VZdg,
        _ => Gate::VZ,
    }
}

fn fail(msg: &str) -> PqfError {
    PqfError::InternalReductionFailure(msg.to_string())
}

fn gaussian_log(x: &CycInt) -> Option<i64> {
    (0..4).find(|&g| CycInt::zeta_pow(Ring::M4, g) == *x)
}

/// Word for a monomial matrix with Gaussian-unit entries.
fn monomial_word(m: &Mat2) -> Result<Vec<Gate>> {
    let [a, b, c, d] = &m.e;
    let mut out = Vec::new();
    let (u, v) = if b.is_zero() && c.is_zero() {
        (a, d)
    } else if a.is_zero() && d.is_zero() {
        out.push(Gate::X);
        (b, c)
    } else {
        return Err(fail("terminal matrix is not monomial"));
    };
    let gu = gaussian_log(u).ok_or_else(|| fail("terminal entry is not a unit"))?;
    let gv = gaussian_log(v).ok_or_else(|| fail("terminal entry is not a unit"))?;
    match (gv - gu).rem_euclid(4) {
        1 => out.push(Gate::S),
        2 => out.push(Gate::Z),
        3 => out.extend([Gate::S, Gate::Z]),
        _ => {}
    }
    if gu != 0 {
        out.push(Gate::Gph(gu));
    }
    Ok(out)
}

/// Exact Clifford+V word for `u` with V-count at most L.
pub fn synth_v(u: &ExactUnitary) -> Result<Circuit> {
    if u.ring() != Ring::M4 {
        return Err(PqfError::InvalidInput("synth_v needs m = 4".into()));
    }
    let mut m = u.mat().canonical();
    let mut peeled = Vec::new();
    while m.l > 0 {
        let before = m.l;
        let (g, next) = GENERATORS
            .iter()
            .find_map(|&g| {
                let n = gate_matrix(dagger(g), Ring::M4).expect("V generator").mul(&m);
                (n.l + 1 == before).then_some((g, n))
            })
            .ok_or_else(|| fail("no generator lowers the denominator"))?;
        peeled.push(g);
        m = next;
    }
    let mut gates = monomial_word(&m)?;
    gates.extend(peeled.into_iter().rev());
    let out = Circuit::from_gates(Basis::V, gates)?;
    check_result(u, &out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactsynth::eval_circuit;
    use crate::exactsynth::testutil::random_word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_empty() {
        assert!(synth_v(&ExactUnitary::identity(Ring::M4)).unwrap().is_empty());
    }

    #[test]
    fn diagonal_example() {
        let z = CycInt::from_i64s(Ring::M4, &[2, 1]);
        let u = ExactUnitary::new(z, CycInt::zero(Ring::M4), 1, 0).unwrap();
        let c = synth_v(&u).unwrap();
        assert_eq!(c.cost(), 1);
        assert_eq!(eval_circuit(&c).unwrap(), u);
    }

    /// Oracle: the cheapest word for diag(2+i, 2-i)/sqrt5 among one generator
    /// composed with every monomial Clifford and phase.
    #[test]
    fn diagonal_example_is_optimal() {
        let z = CycInt::from_i64s(Ring::M4, &[2, 1]);
        let u = ExactUnitary::new(z, CycInt::zero(Ring::M4), 1, 0).unwrap();
        let mut cliffords = Vec::new();
        for x in [false, true] {
            for s in 0..4 {
                for g in 0..4 {
                    let mut w = Vec::new();
                    if x {
                        w.push(Gate::X);
                    }
                    w.extend(std::iter::repeat(Gate::S).take(s));
                    w.push(Gate::Gph(g));
                    cliffords.push(w);
                }
            }
        }
        let found = GENERATORS.iter().any(|&g| {
            cliffords.iter().any(|w| {
                let mut gates = w.clone();
                gates.push(g);
                eval_circuit(&Circuit::from_gates(Basis::V, gates).unwrap()).unwrap() == u
            })
        });
        assert!(found);
        assert!(!u.eq_up_to_phase(&ExactUnitary::identity(Ring::M4)));
    }

    #[test]
    fn random_words_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let w = random_word(Basis::V, 40, &mut rng);
            let u = eval_circuit(&w).unwrap();
            let c = synth_v(&u).unwrap();
            assert_eq!(eval_circuit(&c).unwrap(), u);
            assert!(c.cost() <= 40);
            assert!(c.cost() <= u.l() as usize);
        }
    }
}
