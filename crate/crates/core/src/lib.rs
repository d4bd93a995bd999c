//! Explicit C^{1,1} extensions of finite 1-jets.
//!
//! A 1-jet (or 1-Taylor field) prescribes a value and a gradient at each
//! site of a finite set in R^n. This crate evaluates, at arbitrary query
//! points, the explicit sup-inf convolution formulas that extend such a
//! field to a C^{1,1} function on all of R^n:
//!
//! * [`convex`] — the convex case: the piecewise-affine floor `f`, its
//!   closed-form sup-convolution, and the Lasry-Lions double regularization
//!   `(f^eps)_eps` evaluated exactly through a simplex-constrained QP.
//! * [`whitney`] — the general case: tilt the field by a quadratic to make
//!   it convex-feasible, run the convex engine, subtract the tilt. The
//!   resulting extension is almost minimal: its gradient Lipschitz constant
//!   is within a universal factor of the best possible one.
//! * [`holder`] — a numerical demonstrator showing that the same sup-inf
//!   route breaks down for C^{1,theta} regularity, theta < 1.
//! * [`oracle`] — brute-force grid and sampling reference implementations,
//!   used by the test suites to cross-check every closed form.
//!
//! With the default `parallel` feature, batch evaluation, certification
//! sampling, pairwise constants on large fields, and the Hölder grid
//! convolution run on rayon; disabling the feature yields a sequential
//! build with identical results.

pub mod convex;
mod error;
pub mod field;
pub mod holder;
mod linalg;
pub mod oracle;
pub mod simplex;
pub mod whitney;

pub use error::Error;
pub use field::{FieldConstants, Modulus, Site, TaylorField1};

/// Universal almost-minimality factor `(5 + sqrt(29)) / 2`.
pub fn almost_minimality_factor() -> f64 {
    (5.0 + 29.0_f64.sqrt()) / 2.0
}

/// Axis-aligned box in R^n, used for sampling and grid evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, Error> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidBox {
                reason: "corner dimensions differ or are empty".into(),
            });
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::InvalidBox {
                    reason: format!("need lo < hi componentwise, got [{a}, {b}]"),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(xi, (a, b))| xi >= a && xi <= b)
    }

    /// Smallest box containing all site locations, inflated by `margin`.
    pub fn around_sites(field: &TaylorField1, margin: f64) -> Self {
        let n = field.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for site in field.sites() {
            for (k, &c) in site.location.iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        for k in 0..n {
            lo[k] -= margin;
            hi[k] += margin;
        }
        Self { lo, hi }
    }

    pub(crate) fn sample(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| rng.gen_range(a..b))
            .collect()
    }
}
