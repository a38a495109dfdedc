//! Parity morphism Z[omega_12] -> Z_2[omega] and its orbit structure under
//! multiplication by powers of omega.

use std::sync::OnceLock;

use super::{CycInt, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orbit {
    O0,
    O1,
    O2,
    O3,
}

/// Value of N2 = mu(|x|^2) on an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum N2Value {
    Zero,
    One,
    OmegaCubed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParityClass {
    /// Bit j holds coefficient j mod 2.
    pub residue: u8,
    pub orbit: Orbit,
    pub n2: N2Value,
}

fn to_cyc(bits: u8) -> CycInt {
    let c: Vec<i64> = (0..4).map(|j| ((bits >> j) & 1) as i64).collect();
    CycInt::from_i64s(Ring::M12, &c)
}

pub fn residue(z: &CycInt) -> u8 {
    z.coeffs().iter().enumerate().fold(0u8, |acc, (j, a)| acc | ((a.is_odd() as u8) << j))
}

/// omega^k * x in Z_2[omega].
pub fn mul_omega_mod2(bits: u8, k: i64) -> u8 {
    residue(&(&to_cyc(bits) * &CycInt::zeta_pow(Ring::M12, k)))
}

struct Table {
    orbit: [Orbit; 16],
    n2: [N2Value; 16],
    sizes: [usize; 4],
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let mut label: [Option<usize>; 16] = [None; 16];
        let mut next = 0;
        for x in 0..16u8 {
            if label[x as usize].is_some() {
                continue;
            }
            for k in 0..12 {
                label[mul_omega_mod2(x, k) as usize] = Some(next);
            }
            next += 1;
        }
        assert_eq!(next, 4, "Z_2[omega] must split into four orbits");
        let named = [(0u8, Orbit::O0), (0b0001, Orbit::O1), (0b0011, Orbit::O2), (0b1001, Orbit::O3)];
        let mut by_label = [Orbit::O0; 4];
        for (rep, o) in named {
            by_label[label[rep as usize].unwrap()] = o;
        }
        let mut orbit = [Orbit::O0; 16];
        let mut n2 = [N2Value::Zero; 16];
        let mut sizes = [0usize; 4];
        for x in 0..16u8 {
            let o = by_label[label[x as usize].unwrap()];
            orbit[x as usize] = o;
            sizes[o as usize] += 1;
            let v = residue(&to_cyc(x).norm_sq().to_cyc());
            n2[x as usize] = match v {
                0 => N2Value::Zero,
                1 => N2Value::One,
                8 => N2Value::OmegaCubed,
                other => panic!("unexpected N2 residue {other:#06b}"),
            };
        }
        Table { orbit, n2, sizes }
    })
}

/// Orbit sizes indexed by O0..O3.
pub fn orbit_table() -> [usize; 4] {
    table().sizes
}

/// Parity class of an element of Z[omega_12]; `None` for other rings.
pub fn parity_mu(z: &CycInt) -> Option<ParityClass> {
    if z.ring() != Ring::M12 {
        return None;
    }
    let r = residue(z);
    let t = table();
    Some(ParityClass { residue: r, orbit: t.orbit[r as usize], n2: t.n2[r as usize] })
}

/// Some k with mu(z) = omega^k mu(y), if one exists.
pub fn align_exponent(z: u8, y: u8) -> Option<i64> {
    (0..6).find(|&k| mul_omega_mod2(y, k) == z)
}
