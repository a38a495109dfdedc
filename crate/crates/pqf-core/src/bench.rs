//! Batch benchmarking over random angles and least-squares cost fits.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{Angle, Eps};
use crate::exactsynth::Basis;
use crate::protocol::{build_pqf, PqfProtocol, ProtocolConfig};

/// One benchmarked target. Failed targets keep `error` and zeroed metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub index: usize,
    pub basis: Basis,
    pub theta: f64,
    pub eps: String,
    pub log_inv_eps: f64,
    pub expected_cost: f64,
    pub cost_variance: f64,
    pub p_success: f64,
    pub l_r: u32,
    pub round_cost: usize,
    pub fallback_cost: usize,
    pub candidates_tried: u32,
    pub pslq_iterations: usize,
    pub stage1_abs: f64,
    pub max_distance: f64,
    pub wall_time: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub const HEADER: &'static str = "index,basis,theta,eps,expected_cost,cost_variance,p_success,L_r,round_cost,fallback_cost,candidates_tried,pslq_iterations,stage1_abs,max_distance,wall_time,error";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{:.17},{},{:.6},{:.6},{:.9},{},{},{},{},{},{:.6},{:.3e},{:.4},{}",
            self.index,
            self.basis.name(),
            self.theta,
            self.eps,
            self.expected_cost,
            self.cost_variance,
            self.p_success,
            self.l_r,
            self.round_cost,
            self.fallback_cost,
            self.candidates_tried,
            self.pslq_iterations,
            self.stage1_abs,
            self.max_distance,
            self.wall_time,
            self.error.as_deref().unwrap_or("").replace(',', ";")
        )
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Angles drawn uniformly from (0, pi/2).
pub fn random_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)).collect()
}

/// Log base of the cost metric: 5 for Clifford+V, 2 otherwise.
pub fn log_base(basis: Basis) -> f64 {
    if basis == Basis::V {
        5.0
    } else {
        2.0
    }
}

fn row_of(index: usize, basis: Basis, theta: f64, eps: &Eps, r: Result<PqfProtocol, crate::PqfError>, t: f64) -> BenchRow {
    let mut row = BenchRow {
        index,
        basis,
        theta,
        eps: eps.exact_repr(),
        log_inv_eps: eps.log2_inv() / log_base(basis).log2(),
        expected_cost: 0.0,
        cost_variance: 0.0,
        p_success: 0.0,
        l_r: 0,
        round_cost: 0,
        fallback_cost: 0,
        candidates_tried: 0,
        pslq_iterations: 0,
        stage1_abs: 0.0,
        max_distance: 0.0,
        wall_time: t,
        error: None,
    };
    let p = match r.and_then(|p| p.verify().map(|d| (p, d))) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let (p, ds) = p;
    row.expected_cost = p.expected_cost;
    row.cost_variance = p.cost_variance;
    row.max_distance = ds.iter().cloned().fold(0.0, f64::max);
    row.fallback_cost = p.fallback.as_ref().map_or(0, |f| f.cost());
    if let Some(r) = p.rounds.first() {
        row.p_success = r.p_success;
        row.l_r = r.unitary.l();
        row.round_cost = r.cost;
        if let Some(s) = &r.stats {
            row.candidates_tried = s.modifier_candidates;
            row.pslq_iterations = s.pslq_iterations;
            row.stage1_abs = s.stage1_abs;
        }
    }
    row
}

/// Synthesizes and verifies every (angle, eps) pair; rows come back in
/// input order.
pub fn run(basis: Basis, angles: &[f64], eps_list: &[Eps], rounds: usize, config: &ProtocolConfig) -> Vec<BenchRow> {
    let jobs: Vec<(usize, f64, &Eps)> = eps_list.iter().flat_map(|e| angles.iter().map(move |&t| (t, e))).enumerate().map(|(i, (t, e))| (i, t, e)).collect();
    jobs.par_iter()
        .map(|&(i, theta, eps)| {
            let t0 = Instant::now();
            let r = build_pqf(&Angle::from_f64(theta), eps, rounds, basis, config);
            row_of(i, basis, theta, eps, r, t0.elapsed().as_secs_f64())
        })
        .collect()
}

/// Model a x + c log_b(x) + d with x = log_b(1/eps).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub a: f64,
    pub c: f64,
    pub d: f64,
}

impl Fit {
    pub fn eval(&self, x: f64, base: f64) -> f64 {
        self.a * x + self.c * x.ln() / base.ln() + self.d
    }
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = v[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..4 {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Least-squares fit of (x, cost) points with all three coefficients free.
pub fn fit(points: &[(f64, f64)], base: f64) -> Option<Fit> {
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for &(x, y) in points {
        let f = [x, x.ln() / base.ln(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += f[i] * f[j];
            }
            v[i] += f[i] * y;
        }
    }
    let [a, c, d] = solve3(m, v)?;
    Some(Fit { a, c, d })
}

/// Least-squares fit with the log-log coefficient held at `c`.
pub fn fit_fixed_c(points: &[(f64, f64)], base: f64, c: f64) -> Option<Fit> {
    let n = points.len() as f64;
    if n < 2.0 {
        return None;
    }
    let ys: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, y - c * x.ln() / base.ln())).collect();
    let mx = ys.iter().map(|p| p.0).sum::<f64>() / n;
    let my = ys.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = ys.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = ys.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    Some(Fit { a, c, d: my - a * mx })
}

/// Published fit of mean expected cost against x = log_b(1/eps).
pub fn reference_fit(basis: Basis) -> Fit {
    match basis {
        Basis::T => Fit { a: 1.0, c: 4.0, d: 1.187 },
        Basis::Pi12 => Fit { a: 0.5, c: 2.0, d: 3.48 },
        Basis::V => Fit { a: 1.0, c: 0.95, d: 7.26 },
    }
}

/// Mean expected cost per eps, in input order of first appearance.
pub fn means_by_eps(rows: &[BenchRow]) -> Vec<(String, f64, f64, usize)> {
    let mut out: Vec<(String, f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.ok()) {
        match out.iter_mut().find(|e| e.0 == r.eps) {
            Some(e) => {
                e.2 += r.expected_cost;
                e.3 += 1;
            }
            None => out.push((r.eps.clone(), r.log_inv_eps, r.expected_cost, 1)),
        }
    }
    for e in &mut out {
        e.2 /= e.3 as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_model() {
        let truth = Fit { a: 1.0, c: 4.0, d: 1.187 };
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 33.0, 50.0, 66.0, 80.0].iter().map(|&x| (x, truth.eval(x, 2.0))).collect();
        let f = fit(&pts, 2.0).unwrap();
        assert!((f.a - 1.0).abs() < 1e-8 && (f.c - 4.0).abs() < 1e-6 && (f.d - 1.187).abs() < 1e-6);
        let g = fit_fixed_c(&pts, 2.0, 4.0).unwrap();
        assert!((g.a - 1.0).abs() < 1e-10 && (g.d - 1.187).abs() < 1e-8);
    }

    #[test]
    fn angles_are_reproducible() {
        let a = random_angles(5, 9);
        assert_eq!(a, random_angles(5, 9));
        assert!(a.iter().all(|&t| t > 0.0 && t < std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn rows_keep_input_order() {
        let rows = run(Basis::T, &random_angles(3, 1), &[Eps::pow10(8)], 1, &ProtocolConfig::default());
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(rows.iter().all(|r| r.ok() && r.max_distance < 1e-8));
        let m = means_by_eps(&rows);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].3, 3);
    }
}
