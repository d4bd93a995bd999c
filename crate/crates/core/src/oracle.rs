//! Brute-force reference implementations for the test suites.
//!
//! Everything here trades speed for independence: grid scans for the
//! sup/inf convolutions, central differences for gradients, and sampled
//! pairwise estimators for Lipschitz constants and the Gamma1 functional.
//! Restricted to dimensions 1 and 2 (grids) and intended for test-time
//! use only; the production path never calls into this module.

use crate::error::Error;
use crate::linalg;
use crate::BoundingBox;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform lattice over a box in R^1 or R^2.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points_per_axis: usize) -> Result<Self, Error> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::OracleDimension(lo.len()));
        }
        if points_per_axis < 100 {
            return Err(Error::InvalidBox {
                reason: format!("need at least 100 points per axis, got {points_per_axis}"),
            });
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidBox {
                    reason: format!("need lo < hi componentwise, got [{a}, {b}]"),
                });
            }
        }
        Ok(Self {
            lo,
            hi,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let n = self.points_per_axis;
        let axis = |k: usize| -> Vec<f64> {
            let step = (self.hi[k] - self.lo[k]) / (n - 1) as f64;
            (0..n).map(|i| self.lo[k] + step * i as f64).collect()
        };
        match self.dim() {
            1 => axis(0).into_iter().map(|x| vec![x]).collect(),
            2 => {
                let (xs, ys) = (axis(0), axis(1));
                let mut out = Vec::with_capacity(n * n);
                for &x in &xs {
                    for &y in &ys {
                        out.push(vec![x, y]);
                    }
                }
                out
            }
            _ => unreachable!("validated at construction"),
        }
    }
}

/// `sup_y { f(y) - |y - x|^2 / (2 eps) }` over the grid nodes.
pub fn grid_supconv<F: Fn(&[f64]) -> f64>(f: F, eps: f64, grid: &GridSpec, x: &[f64]) -> f64 {
    grid.nodes()
        .iter()
        .map(|y| f(y) - linalg::dist_sq(y, x) / (2.0 * eps))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `inf_y { f(y) + |y - x|^2 / (2 eps) }` over the grid nodes.
pub fn grid_infconv<F: Fn(&[f64]) -> f64>(f: F, eps: f64, grid: &GridSpec, x: &[f64]) -> f64 {
    grid.nodes()
        .iter()
        .map(|y| f(y) + linalg::dist_sq(y, x) / (2.0 * eps))
        .fold(f64::INFINITY, f64::min)
}

/// Central-difference gradient, one coordinate at a time.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0);
    (0..x.len())
        .map(|k| {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[k] += h;
            lo[k] -= h;
            (f(&hi) - f(&lo)) / (2.0 * h)
        })
        .collect()
}

/// Seeded uniform sampler over a box.
pub struct BoxSampler {
    bounds: BoundingBox,
    rng: ChaCha8Rng,
}

impl BoxSampler {
    pub fn new(bounds: BoundingBox, seed: u64) -> Self {
        Self {
            bounds,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> Vec<f64> {
        self.bounds.sample(&mut self.rng)
    }
}

/// `max |grad(x) - grad(y)| / |x - y|` over `pairs` sampled point pairs.
/// A lower estimate of the true Lipschitz constant of the gradient.
pub fn sampled_lip_grad<G: Fn(&[f64]) -> Vec<f64>>(
    grad: G,
    sampler: &mut BoxSampler,
    pairs: usize,
) -> f64 {
    assert!(pairs >= 1);
    let mut best = 0.0_f64;
    let mut drawn = 0;
    while drawn < pairs {
        let x = sampler.sample();
        let y = sampler.sample();
        let d = linalg::dist(&x, &y);
        if d < 1e-9 {
            continue;
        }
        drawn += 1;
        best = best.max(linalg::dist(&grad(&x), &grad(&y)) / d);
    }
    best
}

/// Gamma1 functional restricted to `n` sampled 1-jets `(f(x), grad(x))`.
/// For a C^{1,1} function this converges to `Lip(grad f)` from below.
pub fn sampled_gamma1<F, G>(f: F, grad: G, sampler: &mut BoxSampler, n: usize) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    assert!(n >= 2);
    let points: Vec<Vec<f64>> = (0..n).map(|_| sampler.sample()).collect();
    gamma1_of_jets(
        &points,
        &points.iter().map(|x| f(x)).collect::<Vec<_>>(),
        &points.iter().map(|x| grad(x)).collect::<Vec<_>>(),
    )
}

/// Gamma1 over an explicit finite list of jets.
pub fn gamma1_of_jets(points: &[Vec<f64>], values: &[f64], gradients: &[Vec<f64>]) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2 = linalg::dist_sq(&points[i], &points[j]);
            if d2 < 1e-18 {
                continue;
            }
            let mut num = 2.0 * (values[i] - values[j]);
            for k in 0..points[i].len() {
                num += (gradients[i][k] + gradients[j][k]) * (points[j][k] - points[i][k]);
            }
            let a = num / d2;
            let b_sq = linalg::dist_sq(&gradients[i], &gradients[j]) / d2;
            best = best.max((a * a + b_sq).sqrt() + a.abs());
        }
    }
    best
}
