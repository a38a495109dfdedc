//! V = e^{i delta} Rz(alpha) H Rz(beta) H Rz(gamma) for a general 2x2
//! unitary, with Rz(t) = diag(e^{-it/2}, e^{it/2}).

use rug::float::Constant;
use rug::Float;

use super::{build_pqf, PqfProtocol, ProtocolConfig};
use crate::angle::{Angle, Eps};
use crate::error::{PqfError, Result};
use crate::exactsynth::Basis;

/// Complex number as (re, im).
pub type C = (Float, Float);

#[derive(Clone, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: Float,
    pub beta: Float,
    pub gamma: Float,
    pub delta: Float,
    /// Input was diagonal; only alpha (and delta) carry information.
    pub degenerate: bool,
}

fn f(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

fn arg(z: &C) -> Float {
    Float::with_val(z.1.prec(), z.1.atan2_ref(&z.0))
}

fn abs(z: &C) -> Float {
    Float::with_val(z.0.prec(), z.0.hypot_ref(&z.1))
}

fn mul(a: &C, b: &C) -> C {
    let p = a.0.prec();
    let re = Float::with_val(p, &a.0 * &b.0) - Float::with_val(p, &a.1 * &b.1);
    let im = Float::with_val(p, &a.0 * &b.1) + Float::with_val(p, &a.1 * &b.0);
    (re, im)
}

fn expi(t: &Float) -> C {
    let (s, c) = t.clone().sin_cos(Float::new(t.prec()));
    (c, s)
}

fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Euler angles of `u`, given row-major with entries as (re, im).
pub fn euler_decompose(u: &[C; 4], prec: u32) -> Result<EulerAngles> {
    let tiny = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let (a00, a01, a10) = (abs(&u[0]), abs(&u[1]), abs(&u[2]));
    let det = {
        let x = mul(&u[0], &u[3]);
        let y = mul(&u[1], &u[2]);
        (x.0 - y.0, x.1 - y.1)
    };
    if (abs(&det) - f(prec, 1.0)).abs() > 1e-6 {
        return Err(PqfError::InvalidInput("matrix is not unitary".into()));
    }
    let beta = Float::with_val(prec, a01.atan2_ref(&a00)) * 2u32;
    let degenerate = a01 < tiny;
    let (alpha, gamma) = if degenerate {
        (arg(&u[3]) - arg(&u[0]), f(prec, 0.0))
    } else if a00 < tiny {
        (arg(&u[2]) - arg(&u[1]), f(prec, 0.0))
    } else {
        let sum = arg(&u[3]) - arg(&u[0]);
        let diff = arg(&u[2]) - arg(&u[1]);
        (Float::with_val(prec, &sum + &diff) / 2u32, Float::with_val(prec, &sum - &diff) / 2u32)
    };
    // u00 = e^{i delta} cos(beta/2) e^{-i (alpha + gamma)/2},
    // u10 = -i e^{i delta} sin(beta/2) e^{i (alpha - gamma)/2}.
    let delta = if a00 >= a10 {
        arg(&u[0]) + Float::with_val(prec, &alpha + &gamma) / 2u32
    } else {
        arg(&u[2]) + pi(prec) / 2u32 - Float::with_val(prec, &alpha - &gamma) / 2u32
    };
    let e = EulerAngles { alpha, beta, gamma, delta, degenerate };
    // alpha + gamma and alpha - gamma are known mod 2 pi only, so (alpha, gamma)
    // may come out shifted by (pi, pi), which flips the sign of beta.
    let mut flip = e.clone();
    flip.alpha += pi(prec);
    flip.gamma += pi(prec);
    flip.delta = if a00 >= a10 {
        arg(&u[0]) + Float::with_val(prec, &flip.alpha + &flip.gamma) / 2u32
    } else {
        arg(&u[2]) + pi(prec) / 2u32 - Float::with_val(prec, &flip.alpha - &flip.gamma) / 2u32
    };
    if max_diff(&reconstruct(&flip, prec), u) < max_diff(&reconstruct(&e, prec), u) {
        return Ok(flip);
    }
    Ok(e)
}

/// e^{i delta} Rz(alpha) Rx(beta) Rz(gamma), since H Rz(b) H = Rx(b).
pub fn reconstruct(e: &EulerAngles, prec: u32) -> [C; 4] {
    let half = |x: &Float| Float::with_val(prec, x) / 2u32;
    let (s, c) = half(&e.beta).sin_cos(Float::new(prec));
    let p = Float::with_val(prec, &e.alpha + &e.gamma) / 2u32;
    let m = Float::with_val(prec, &e.alpha - &e.gamma) / 2u32;
    let ph = expi(&e.delta);
    let scale = |z: C, r: &Float| (Float::with_val(prec, &z.0 * r), Float::with_val(prec, &z.1 * r));
    let minus_i = (f(prec, 0.0), f(prec, -1.0));
    let u00 = scale(mul(&ph, &expi(&-p.clone())), &c);
    let u11 = scale(mul(&ph, &expi(&p)), &c);
    let u01 = scale(mul(&mul(&ph, &minus_i), &expi(&-m.clone())), &s);
    let u10 = scale(mul(&mul(&ph, &minus_i), &expi(&m)), &s);
    [u00, u01, u10, u11]
}

/// Largest entrywise modulus of a - b.
pub fn max_diff(a: &[C; 4], b: &[C; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (Float::with_val(x.0.prec(), &x.0 - &y.0), Float::with_val(x.0.prec(), &x.1 - &y.1));
            abs(&d).to_f64()
        })
        .fold(0.0, f64::max)
}

fn angle_of(x: &Float) -> Angle {
    Angle::radians(x.to_rational().expect("finite angle"))
}

/// Compiles each axial factor diag(1, e^{i t}) at eps/3. Diagonal inputs
/// give a single protocol.
pub fn compile_unitary(u: &[C; 4], eps: &Eps, basis: Basis, k: usize, config: &ProtocolConfig) -> Result<(EulerAngles, Vec<PqfProtocol>)> {
    if basis == Basis::V {
        return Err(PqfError::InvalidInput("the Clifford+V alphabet has no H".into()));
    }
    let prec = eps.default_prec() + 64;
    let e = euler_decompose(u, prec)?;
    let third = Eps::new(rug::Rational::from(eps.value() / 3u32))?;
    let axes: Vec<&Float> = if e.degenerate { vec![&e.alpha] } else { vec![&e.gamma, &e.beta, &e.alpha] };
    let ps = axes.into_iter().map(|t| build_pqf(&angle_of(t), &third, k, basis, config)).collect::<Result<Vec<_>>>()?;
    Ok((e, ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 128;

    fn c(re: f64, im: f64) -> C {
        (f(P, re), f(P, im))
    }

    fn hadamard() -> [C; 4] {
        let r = Float::with_val(P, 2).sqrt().recip();
        let z = f(P, 0.0);
        [(r.clone(), z.clone()), (r.clone(), z.clone()), (r.clone(), z.clone()), (-r, z)]
    }

    #[test]
    fn rz_is_a_single_axis() {
        let t = f(P, 0.7);
        let h = Float::with_val(P, &t / 2u32);
        let u = [expi(&-h.clone()), c(0.0, 0.0), c(0.0, 0.0), expi(&h)];
        let e = euler_decompose(&u, P).unwrap();
        assert!(e.degenerate);
        assert!((e.alpha.to_f64() - 0.7).abs() < 1e-30 && e.beta.to_f64().abs() < 1e-30);
        assert!(e.delta.to_f64().abs() < 1e-30);
        assert!(max_diff(&reconstruct(&e, P), &u) < 1e-30);
    }

    #[test]
    fn hadamard_reconstructs() {
        let u = hadamard();
        let e = euler_decompose(&u, P).unwrap();
        assert!(max_diff(&reconstruct(&e, P), &u) < 1e-30);
        assert!((e.beta.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn random_unitaries_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e0 = EulerAngles {
                alpha: f(P, rng.gen_range(-3.0..3.0)),
                beta: f(P, rng.gen_range(0.0..3.1)),
                gamma: f(P, rng.gen_range(-3.0..3.0)),
                delta: f(P, rng.gen_range(-3.0..3.0)),
                degenerate: false,
            };
            let u = reconstruct(&e0, P);
            let e = euler_decompose(&u, P).unwrap();
            let d = max_diff(&reconstruct(&e, P), &u);
            assert!(d < 2f64.powi(-60), "{d} {e0:?}");
        }
        let anti = [c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)];
        let e = euler_decompose(&anti, P).unwrap();
        assert!(max_diff(&reconstruct(&e, P), &anti) < 1e-30);
    }

    #[test]
    fn rejects_non_unitary() {
        let u = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(euler_decompose(&u, P).is_ok());
        let u = [c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(euler_decompose(&u, P).is_err());
    }

    #[test]
    fn hadamard_compiles_in_three_axes() {
        let (e, ps) = compile_unitary(&hadamard(), &Eps::pow10(10), Basis::T, 1, &ProtocolConfig::default()).unwrap();
        assert!(!e.degenerate);
        assert_eq!(ps.len(), 3);
        for p in &ps {
            assert!(p.verify().unwrap().iter().all(|&d| d < 1e-10 / 3.0));
        }
        assert!(compile_unitary(&hadamard(), &Eps::pow10(10), Basis::V, 1, &ProtocolConfig::default()).is_err());
    }
}
