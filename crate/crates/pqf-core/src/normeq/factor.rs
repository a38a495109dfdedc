//! Rational-integer helpers: small-prime sieve, Miller-Rabin, Pollard-Brent
//! rho under a work budget, Tonelli-Shanks and Cornacchia.

use std::sync::OnceLock;

use rug::integer::IsPrime;
use rug::{Complete, Integer};

/// All primes below 1000.
pub fn small_primes() -> &'static [u32] {
    static P: OnceLock<Vec<u32>> = OnceLock::new();
    P.get_or_init(|| {
        let n = 1000usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < n {
            if sieve[i] {
                let mut j = i * i;
                while j < n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

/// Miller-Rabin with the first `rounds` primes as bases.
pub fn is_prime_mr(n: &Integer, rounds: usize) -> bool {
    if *n < 2 {
        return false;
    }
    for &p in small_primes().iter().take(rounds.max(1)) {
        if *n == p {
            return true;
        }
        if n.is_divisible_u(p) {
            return false;
        }
    }
    let nm1 = (n - 1u32).complete();
    let s = nm1.find_one(0).unwrap_or(0);
    let d = (&nm1 >> s).complete();
    'bases: for &b in small_primes().iter().take(rounds) {
        let mut x = Integer::from(b).pow_mod(&d, n).expect("positive exponent");
        if x == 1 || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.square() % n;
            if x == nm1 {
                continue 'bases;
            }
            if x == 1 {
                return false;
            }
        }
        return false;
    }
    true
}

/// Full-strength primality test used throughout.
pub fn is_prime(n: &Integer) -> bool {
    is_prime_mr(n, 64)
}

/// Pollard-Brent rho. Returns a nontrivial factor of the odd composite `n`,
/// charging iterations to `budget`.
pub fn pollard_brent(n: &Integer, budget: &mut u64) -> Option<Integer> {
    if n.is_even() {
        return Some(Integer::from(2));
    }
    for c in 1u32..=8 {
        let f = |x: &Integer| -> Integer { (x.square_ref().complete() + c) % n };
        let mut y = Integer::from(2);
        let mut r: u64 = 1;
        let mut q = Integer::from(1);
        let mut g = Integer::from(1);
        let mut x = Integer::new();
        let mut ys = Integer::new();
        let m: u64 = 128;
        while g == 1 {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y.clone();
                let steps = m.min(r - k);
                if *budget < steps {
                    return None;
                }
                *budget -= steps;
                for _ in 0..steps {
                    y = f(&y);
                    q = (q * (&x - &y).complete().abs()) % n;
                }
                g = q.gcd_ref(n).complete();
                k += steps;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).complete().abs().gcd(n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != *n && g > 1 {
            return Some(g);
        }
    }
    None
}

/// Prime factorization of |n| within the rho budget. The second value is
/// the unfactored composite remainder (1 when complete).
pub fn factor_limited(n: &Integer, budget: &mut u64) -> (Vec<(Integer, u32)>, Integer) {
    let mut n = n.clone().abs();
    let mut out: Vec<(Integer, u32)> = Vec::new();
    if n.is_zero() {
        return (out, n);
    }
    for &p in small_primes() {
        if n < 2 {
            break;
        }
        let mut e = 0;
        while n.is_divisible_u(p) {
            n.div_exact_u_mut(p);
            e += 1;
        }
        if e > 0 {
            out.push((Integer::from(p), e));
        }
    }
    let mut rest = Integer::from(1);
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(&m) {
            push_prime(&mut out, m, 1);
            continue;
        }
        if m.is_perfect_square() {
            let r = m.clone().sqrt();
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        match pollard_brent(&m, budget) {
            Some(f) => {
                let g = (&m / &f).complete();
                stack.push(f);
                stack.push(g);
            }
            None => rest *= m,
        }
    }
    out.sort();
    (out, rest)
}

fn push_prime(out: &mut Vec<(Integer, u32)>, p: Integer, e: u32) {
    if let Some(slot) = out.iter_mut().find(|(q, _)| *q == p) {
        slot.1 += e;
    } else {
        out.push((p, e));
    }
}

/// Square root of `a` modulo the odd prime `p`, if `a` is a residue.
pub fn sqrt_mod(a: &Integer, p: &Integer) -> Option<Integer> {
    let a = a.clone().pow_mod(&Integer::from(1), p).ok()?;
    if a.is_zero() {
        return Some(Integer::new());
    }
    if a.legendre(p) != 1 {
        return None;
    }
    let pm1 = (p - 1u32).complete();
    let s = pm1.find_one(0).unwrap_or(0);
    let q = (&pm1 >> s).complete();
    let mut z = Integer::from(2);
    while z.legendre(p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.pow_mod(&q, p).ok()?;
    let mut t = a.clone().pow_mod(&q, p).ok()?;
    let mut r = a.pow_mod(&((&q + 1u32).complete() >> 1), p).ok()?;
    while t != 1 {
        let mut i = 0;
        let mut t2 = t.clone();
        while t2 != 1 {
            t2 = t2.square() % p;
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = c.clone().pow_mod(&(Integer::from(1) << (m - i - 1)), p).ok()?;
        m = i;
        c = b.clone().square() % p;
        t = (t * &c) % p;
        r = (r * b) % p;
    }
    Some(r)
}

/// Cornacchia: (x, y) with x^2 + y^2 = p for a prime p = 2 or p = 1 mod 4.
pub fn cornacchia(p: &Integer) -> Option<(Integer, Integer)> {
    if *p == 2 {
        return Some((Integer::from(1), Integer::from(1)));
    }
    let mut r0 = sqrt_mod(&Integer::from(-1), p)?;
    let half = (p - &r0).complete();
    if half < r0 {
        r0 = half;
    }
    let mut a = p.clone();
    let mut b = r0;
    let lim = p.clone().sqrt();
    while b > lim {
        let r = (&a % &b).complete();
        a = b;
        b = r;
    }
    let rest = Integer::from(p - b.square_ref());
    if rest.is_perfect_square() {
        Some((b, rest.sqrt()))
    } else {
        None
    }
}

/// Oracle hook used in tests: GMP's probabilistic primality test.
pub fn gmp_is_prime(n: &Integer) -> bool {
    n.is_probably_prime(40) != IsPrime::No
}
