//! Desk-scale oracle checks behind `pqf selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};

use pqf_core::angle::{Angle, Eps};
use pqf_core::exactsynth::testutil::random_word;
use pqf_core::exactsynth::{cost_bound, eval_circuit, synth, Basis};
use pqf_core::modifier::grid_point;
use pqf_core::normeq::{limited_factor, solve_norm_eq, solve_two_squares, FactorConfig, NormEqStatus};
use pqf_core::protocol::{build_pqf, ProtocolConfig};
use pqf_core::rings::parity::orbit_table;
use pqf_core::{CycInt, RealCycInt, Ring};

type Check = fn() -> Result<(), String>;

fn orbits() -> Result<(), String> {
    let mut s = orbit_table().to_vec();
    s.sort();
    (s == [1, 3, 6, 6]).then_some(()).ok_or(format!("orbit sizes {s:?}"))
}

/// Every y in Z[w8] with |y|^2 = a + b sqrt2 has squared coefficients summing to a.
fn brute_m8(a: i64, b: i64) -> bool {
    let r = (a as f64).sqrt() as i64;
    let xi = RealCycInt::from_i64s(Ring::M8, a, b);
    let range = || -r..=r;
    range().any(|c0| range().any(|c1| range().any(|c2| range().any(|c3| c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3 == a && CycInt::from_i64s(Ring::M8, &[c0, c1, c2, c3]).norm_sq() == xi))))
}

fn norm_equations() -> Result<(), String> {
    let cfg = FactorConfig::default();
    for a in 0..=10i64 {
        for b in -10..=10i64 {
            let xi = RealCycInt::from_i64s(Ring::M8, a, b);
            if xi.sign() == std::cmp::Ordering::Less || xi.bullet().sign() == std::cmp::Ordering::Less {
                continue;
            }
            let got = solve_norm_eq(&xi, &cfg).map_err(|e| e.to_string())?;
            let truth = brute_m8(a, b);
            match got.status {
                NormEqStatus::Solved(y) if y.norm_sq() == xi && truth => {}
                NormEqStatus::ProvablyUnsolvable if !truth => {}
                NormEqStatus::NotEasy => {}
                s => return Err(format!("xi = {a} + {b} sqrt2: {s:?}, brute force says {truth}")),
            }
        }
    }
    for n in 0..=500i64 {
        let truth = (0..=23).any(|x: i64| (0..=23).any(|y: i64| x * x + y * y == n));
        if solve_two_squares(&Integer::from(n)).is_some() != truth {
            return Err(format!("two squares n = {n}"));
        }
    }
    Ok(())
}

fn mixed_factorization() -> Result<(), String> {
    let xi = RealCycInt::new(Ring::M8, Integer::from(1270080), Integer::from(211680)).map_err(|e| e.to_string())?;
    let lf = limited_factor(&xi, &FactorConfig::default()).map_err(|e| e.to_string())?;
    if !lf.is_complete() || lf.product() != xi {
        return Err("factorization does not multiply back".into());
    }
    let mut norms: Vec<(i64, u32)> = lf.factors.iter().map(|(p, e)| (p.abs_norm().to_i64().unwrap_or(0), *e)).collect();
    norms.sort();
    (norms == [(2, 11), (7, 2), (7, 2), (9, 3), (17, 1), (25, 1)]).then_some(()).ok_or(format!("factors by norm {norms:?}"))
}

fn grid() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for ring in [Ring::M8, Ring::M12] {
        let v2 = ring.fundamental_unit().to_f64().powi(2);
        for _ in 0..200 {
            let x0: f64 = rng.gen_range(-50.0..50.0);
            let y0: f64 = rng.gen_range(-50.0..50.0);
            let dx: f64 = rng.gen_range(0.05..20.0);
            let dy = v2 * 1.0001 / dx;
            let f = |x: f64| Float::with_val(64, x);
            let p = grid_point(&f(x0), &f(x0 + dx), &f(y0), &f(y0 + dy), ring).map_err(|e| e.to_string())?;
            let (x, y) = (p.to_f64(), p.bullet().to_f64());
            if !(x >= x0 - 1e-9 && x <= x0 + dx + 1e-9 && y >= y0 - 1e-9 && y <= y0 + dy + 1e-9) {
                return Err(format!("grid point {p} outside its box"));
            }
        }
    }
    Ok(())
}

fn round_trips() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for basis in [Basis::T, Basis::Pi12, Basis::V] {
        for _ in 0..100 {
            let n = rng.gen_range(1..40);
            let u = eval_circuit(&random_word(basis, n, &mut rng)).map_err(|e| e.to_string())?;
            let c = synth(&u).map_err(|e| e.to_string())?;
            if eval_circuit(&c).map_err(|e| e.to_string())? != u || c.cost() > cost_bound(&u) {
                return Err(format!("{basis}: synthesis of {u} failed its bound"));
            }
        }
    }
    Ok(())
}

fn protocols() -> Result<(), String> {
    for basis in [Basis::T, Basis::Pi12, Basis::V] {
        let p = build_pqf(&Angle::from_f64(0.3), &Eps::pow10(10), 1, basis, &ProtocolConfig::default()).map_err(|e| e.to_string())?;
        p.verify().map_err(|e| e.to_string())?;
    }
    Ok(())
}

pub fn run() -> bool {
    let checks: [(&str, Check); 6] = [
        ("orbit table", orbits),
        ("norm equations", norm_equations),
        ("mixed factorization", mixed_factorization),
        ("grid enumeration", grid),
        ("round-trip synthesis", round_trips),
        ("protocols", protocols),
    ];
    let mut ok = true;
    for (name, f) in checks {
        match f() {
            Ok(()) => println!("selftest {name}: pass"),
            Err(e) => {
                ok = false;
                println!("selftest {name}: FAIL ({e})");
            }
        }
    }
    ok
}
