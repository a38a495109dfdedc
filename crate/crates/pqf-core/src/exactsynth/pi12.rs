//! Clifford+pi/12 synthesis by column reduction over Z[w12] / sqrt2^L.

use std::sync::atomic::{AtomicUsize, Ordering};

use rug::Integer;

use super::{check_result, eval_circuit, norm_k, Basis, Circuit, ExactUnitary, Gate};
use crate::error::{PqfError, Result};
use crate::rings::parity::{align_exponent, parity_mu, Orbit};
use crate::rings::{CycInt, Ring};

/// Residue pair of the column entries mod 2, by parity orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnCase {
    /// Both entries divisible by 2.
    Zero,
    O1,
    O2,
    /// Both entries in the three-element orbit.
    O3O3,
    /// One entry in the three-element orbit, the other divisible by 2.
    O3O0,
}

impl ColumnCase {
    fn index(self) -> usize {
        self as usize
    }
}

static COVERAGE: [AtomicUsize; 5] = [const { AtomicUsize::new(0) }; 5];

/// Process-wide hit counts for (Zero, O1, O2, O3O3, O3O0).
pub fn case_coverage() -> [usize; 5] {
    std::array::from_fn(|i| COVERAGE[i].load(Ordering::Relaxed))
}

fn two() -> CycInt {
    CycInt::from_i64s(Ring::M12, &[2, 0, 0, 0])
}

/// (1 + i) in Z[w12].
fn one_plus_i() -> CycInt {
    CycInt::from_i64s(Ring::M12, &[1, 0, 0, 1])
}

/// Word for the scalar e^{i pi/4} = (SH)^3 with S = K(3).
fn eighth_root_word() -> [Gate; 6] {
    [Gate::H, Gate::K(3), Gate::H, Gate::K(3), Gate::H, Gate::K(3)]
}

fn fail(msg: &str) -> PqfError {
    PqfError::InternalReductionFailure(msg.to_string())
}

/// Reduction of a unit column to (1, 0), with the case hit at each step.
pub fn reduce_column_pi12_traced(z: &CycInt, y: &CycInt, l: u32) -> Result<(Circuit, Vec<ColumnCase>)> {
    if z.ring() != Ring::M12 || y.ring() != Ring::M12 {
        return Err(PqfError::InvalidInput("column reduction needs m = 12".into()));
    }
    let total = crate::rings::RealCycInt::from_int(Ring::M12, Integer::from(1) << l);
    if &z.norm_sq() + &y.norm_sq() != total {
        return Err(PqfError::PreconditionViolated("column is not a unit vector".into()));
    }
    let (mut z, mut y, mut l) = (z.clone(), y.clone(), l);
    let mut c = Circuit::new(Basis::Pi12);
    let mut trace = Vec::new();
    while l > 0 {
        let (pz, py) = (parity_mu(&z).expect("m = 12"), parity_mu(&y).expect("m = 12"));
        let case = match (pz.orbit, py.orbit) {
            (Orbit::O0, Orbit::O0) => ColumnCase::Zero,
            (Orbit::O1, Orbit::O1) => ColumnCase::O1,
            (Orbit::O2, Orbit::O2) => ColumnCase::O2,
            (Orbit::O3, Orbit::O3) => ColumnCase::O3O3,
            (Orbit::O3, Orbit::O0) | (Orbit::O0, Orbit::O3) => ColumnCase::O3O0,
            _ => return Err(fail("column residues violate the norm condition")),
        };
        COVERAGE[case.index()].fetch_add(1, Ordering::Relaxed);
        trace.push(case);
        let before = l;
        match case {
            ColumnCase::Zero => {
                z = z.div_exact(&two()).ok_or_else(|| fail("(0,0) entry not even"))?;
                y = y.div_exact(&two()).ok_or_else(|| fail("(0,0) entry not even"))?;
                l = l.checked_sub(2).ok_or_else(|| fail("(0,0) case at L = 1"))?;
            }
            ColumnCase::O3O0 => {
                // Multiply by the scalar w^k (1 + i) / sqrt2 with mu(w^k x) = 1 + i.
                let odd = if pz.orbit == Orbit::O3 { pz.residue } else { py.residue };
                let k = align_exponent(crate::rings::parity::residue(&one_plus_i()), odd)
                    .ok_or_else(|| fail("no phase aligns the (3,0) column"))?;
                let f = &one_plus_i() * &CycInt::zeta_pow(Ring::M12, k);
                z = (&f * &z).div_exact(&two()).ok_or_else(|| fail("(3,0) phase did not clear 2"))?;
                y = (&f * &y).div_exact(&two()).ok_or_else(|| fail("(3,0) phase did not clear 2"))?;
                l -= 1;
                c.push(Gate::Wph(k));
                for g in eighth_root_word() {
                    c.push(g);
                }
            }
            _ => {
                let k = align_exponent(pz.residue, py.residue).ok_or_else(|| fail("orbit alignment failed"))?;
                let wy = &CycInt::zeta_pow(Ring::M12, k) * &y;
                let nz = (&z + &wy).div_exact(&two()).ok_or_else(|| fail("sum not even"))?;
                let ny = (&z - &wy).div_exact(&two()).ok_or_else(|| fail("difference not even"))?;
                z = nz;
                y = ny;
                l -= 1;
                c.push(Gate::K(norm_k(k)));
                c.push(Gate::H);
            }
        }
        debug_assert!(l < before);
    }
    // L = 0: one entry is a root of unity and the other vanishes.
    if z.is_zero() {
        c.push(Gate::X);
        std::mem::swap(&mut z, &mut y);
    }
    let j = (0..12)
        .find(|&j| CycInt::zeta_pow(Ring::M12, j) == z)
        .ok_or_else(|| fail("terminal entry is not a root of unity"))?;
    if j != 0 {
        c.push(Gate::Wph((12 - j) % 12));
    }
    Ok((c, trace))
}

/// Word c with c (z, y)^T / sqrt2^L = (1, 0)^T and K-count at most L + 1.
pub fn reduce_column_pi12(z: &CycInt, y: &CycInt, l: u32) -> Result<Circuit> {
    let (c, _) = reduce_column_pi12_traced(z, y, l)?;
    if c.cost() > l as usize + 1 {
        return Err(fail("column reduction exceeded L + 1"));
    }
    Ok(c)
}

/// Exact Clifford+pi/12 word for `u` with K-count at most L + 2.
pub fn synth_pi12(u: &ExactUnitary) -> Result<Circuit> {
    if u.ring() != Ring::M12 {
        return Err(PqfError::InvalidInput("synth_pi12 needs m = 12".into()));
    }
    let col = reduce_column_pi12(u.z(), &-&u.y().conj(), u.l())?;
    let rest = u.then(&eval_circuit(&col)?);
    if !(rest.l() == 0 && rest.y().is_zero() && *rest.z() == CycInt::one(Ring::M12)) {
        return Err(fail("reduced matrix is not diagonal"));
    }
    let mut out = Circuit::new(Basis::Pi12);
    if rest.phase() != 0 {
        out.push(Gate::K(norm_k(rest.phase())));
    }
    let out = out.then(&col.inverse());
    check_result(u, &out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactsynth::testutil::random_word;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_empty() {
        let c = synth_pi12(&ExactUnitary::identity(Ring::M12)).unwrap();
        assert!(c.is_empty());
        let one = CycInt::one(Ring::M12);
        assert!(reduce_column_pi12(&one, &CycInt::zero(Ring::M12), 0).unwrap().is_empty());
    }

    #[test]
    fn level_zero_inputs() {
        for j in 0..12 {
            for k in 0..12 {
                let u = ExactUnitary::new(CycInt::zeta_pow(Ring::M12, j), CycInt::zero(Ring::M12), 0, k).unwrap();
                let c = synth_pi12(&u).unwrap();
                assert!(c.cost() <= 1);
                let u = ExactUnitary::new(CycInt::zero(Ring::M12), CycInt::zeta_pow(Ring::M12, j), 0, k).unwrap();
                assert!(synth_pi12(&u).unwrap().cost() <= 1);
            }
            let c = reduce_column_pi12(&CycInt::zeta_pow(Ring::M12, j), &CycInt::zero(Ring::M12), 0).unwrap();
            assert!(c.cost() <= 1);
        }
    }

    #[test]
    fn random_words_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.gen_range(1..=50);
            let mut w = random_word(Basis::Pi12, n, &mut rng);
            w.push(Gate::Wph(rng.gen_range(0..12)));
            let u = eval_circuit(&w).unwrap();
            let c = synth_pi12(&u).unwrap();
            assert_eq!(eval_circuit(&c).unwrap(), u);
            assert!(c.cost() <= u.l() as usize + 2);
        }
    }

    #[test]
    fn steps_track_denominator_drops() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut seen_l30 = false;
        for _ in 0..400 {
            let u = eval_circuit(&random_word(Basis::Pi12, 40, &mut rng)).unwrap();
            let (z, y, l) = (u.z().clone(), -&u.y().conj(), u.l());
            let (c, trace) = reduce_column_pi12_traced(&z, &y, l).unwrap();
            let drops: u32 = trace.iter().map(|&k| if k == ColumnCase::Zero { 2 } else { 1 }).sum();
            assert_eq!(drops, l);
            assert!(c.cost() <= l as usize + 1);
            seen_l30 |= l >= 30;
        }
        assert!(seen_l30);
    }

    #[test]
    fn all_cases_are_exercised() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut local = [0usize; 5];
        for _ in 0..300 {
            let u = eval_circuit(&random_word(Basis::Pi12, 20, &mut rng)).unwrap();
            // Columns scaled by 2 hit the (0,0) case first.
            let two = two();
            let (z, y) = (&u.z().clone() * &two, &-&u.y().conj() * &two);
            let (_, trace) = reduce_column_pi12_traced(&z, &y, u.l() + 2).unwrap();
            for t in trace {
                local[t.index()] += 1;
            }
            // A global e^{i pi/4} puts one entry in the three-element orbit.
            let r = u.then(&eval_circuit(&Circuit::from_gates(Basis::Pi12, eighth_root_word().to_vec()).unwrap()).unwrap());
            let (_, trace) = reduce_column_pi12_traced(r.z(), &-&r.y().conj(), r.l()).unwrap();
            for t in trace {
                local[t.index()] += 1;
            }
        }
        // Diagonal columns times e^{i pi/4}.
        for j in 0..12 {
            let x = &one_plus_i() * &CycInt::zeta_pow(Ring::M12, j);
            let zero = CycInt::zero(Ring::M12);
            for (z, y) in [(x.clone(), zero.clone()), (zero, x)] {
                let (c, trace) = reduce_column_pi12_traced(&z, &y, 1).unwrap();
                assert_eq!(c.cost(), 0);
                for t in trace {
                    local[t.index()] += 1;
                }
            }
        }
        assert!(local.iter().all(|&n| n > 0), "{local:?}");
        assert!(case_coverage().iter().all(|&n| n > 0));
    }

    #[test]
    fn rejects_non_unit_column() {
        let one = CycInt::one(Ring::M12);
        assert!(matches!(reduce_column_pi12(&one, &one, 0), Err(PqfError::PreconditionViolated(_))));
    }
}
