//! Shared random-field generators for the integration suites.
//!
//! Everything is driven by a seeded ChaCha8 stream so failures replay
//! exactly.

// Each test target compiles its own copy; not every suite uses every
// generator.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jet_extend::{Site, TaylorField1};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distinct locations in [-2, 2]^dim. The pairwise gap adapts to the
/// count so 1D scatters of 20 sites stay reachable.
pub fn scatter(rng: &mut ChaCha8Rng, dim: usize, count: usize, min_gap: f64) -> Vec<Vec<f64>> {
    let gap = min_gap.min(2.0 / count as f64 * dim as f64).max(0.05);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if out.iter().all(|q| dist(q, &p) >= gap) {
            out.push(p);
        }
    }
    out
}

/// Trace of g(x) = (a/2)|x - x0|^2 + <c, x> + b with a in [0.3, 3]:
/// always convex-feasible, smallest modulus exactly a.
pub fn quadratic_trace(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> (TaylorField1, f64) {
    let a = rng.gen_range(0.3..3.0);
    let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = rng.gen_range(-1.0..1.0);
    let sites = scatter(rng, dim, count, 0.15)
        .into_iter()
        .map(|s| {
            let d: Vec<f64> = s.iter().zip(&x0).map(|(si, xi)| si - xi).collect();
            let value = 0.5 * a * d.iter().map(|t| t * t).sum::<f64>()
                + c.iter().zip(&s).map(|(ci, si)| ci * si).sum::<f64>()
                + b;
            let grad = d.iter().zip(&c).map(|(di, ci)| a * di + ci).collect();
            Site::new(s, value, grad)
        })
        .collect();
    (TaylorField1::new(dim, sites).unwrap(), a)
}

/// Arbitrary valid field: the trace of a random (possibly indefinite)
/// quadratic, jittered per site so it is the trace of nothing smooth.
pub fn general_field(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> TaylorField1 {
    let q: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sites = scatter(rng, dim, count, 0.3)
        .into_iter()
        .map(|s| {
            // Symmetrized quadratic form: value s^T (Q + Q^T)/2 s / 2.
            let qs: Vec<f64> = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| 0.5 * (q[i][j] + q[j][i]) * s[j])
                        .sum::<f64>()
                })
                .collect();
            let value = 0.5 * qs.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>()
                + c.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>()
                + rng.gen_range(-0.05..0.05);
            let grad = qs
                .iter()
                .zip(&c)
                .map(|(a, b)| a + b + rng.gen_range(-0.05..0.05))
                .collect();
            Site::new(s, value, grad)
        })
        .collect();
    TaylorField1::new(dim, sites).unwrap()
}

pub fn point_in(rng: &mut ChaCha8Rng, dim: usize, halfwidth: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-halfwidth..halfwidth)).collect()
}

/// The running example: trace of x^2 on S = {-1, 1}.
pub fn parabola_trace() -> TaylorField1 {
    TaylorField1::new(
        1,
        vec![
            Site::new(vec![-1.0], 1.0, vec![-2.0]),
            Site::new(vec![1.0], 1.0, vec![2.0]),
        ],
    )
    .unwrap()
}

/// Two-site field on {0, 1} with a value spike at the origin: K1 = a,
/// K2 = 0.
pub fn spike_field(a: f64) -> TaylorField1 {
    TaylorField1::new(
        1,
        vec![
            Site::new(vec![0.0], a, vec![0.0]),
            Site::new(vec![1.0], 0.0, vec![0.0]),
        ],
    )
    .unwrap()
}

/// Opposed transverse gradients at (-1, 0) and (1, 0): K1 = 0, K2 = a.
pub fn shear_field(a: f64) -> TaylorField1 {
    TaylorField1::new(
        2,
        vec![
            Site::new(vec![-1.0, 0.0], 0.0, vec![0.0, -a]),
            Site::new(vec![1.0, 0.0], 0.0, vec![0.0, a]),
        ],
    )
    .unwrap()
}
