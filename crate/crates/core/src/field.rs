//! Finite 1-Taylor fields and their pairwise compatibility constants.
//!
//! A field prescribes, at each site `s` of a finite subset of R^n, a value
//! `alpha(s)` and a gradient `v(s)`. Three pairwise constants govern
//! extendability:
//!
//! * `K1` — quadratic compatibility of values with gradients,
//! * `K2` — Lipschitz quotient of the gradients,
//! * `Gamma1` — Le Gruyer's functional `sqrt(A^2 + |B|^2) + |A|`, whose
//!   value is the minimal `Lip(grad F)` over all C^{1,1} extensions `F`.
//!
//! The smallest convexity modulus `M*` decides whether a *convex* C^{1,1}
//! extension exists at all; infeasibility is a value, not an error.

use crate::error::Error;
use crate::linalg;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One site of a 1-Taylor field: a location with a prescribed value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub location: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl Site {
    pub fn new(location: Vec<f64>, value: f64, gradient: Vec<f64>) -> Self {
        Self {
            location,
            value,
            gradient,
        }
    }

    /// The affine function `alpha(s) + <v(s), x - s>` carried by this site.
    pub fn affine(&self, x: &[f64]) -> f64 {
        self.value + linalg::dot_diff(&self.gradient, x, &self.location)
    }
}

/// A finite 1-Taylor field: pairwise-distinct sites in R^n with one jet each.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorField1 {
    dim: usize,
    sites: Vec<Site>,
}

/// Smallest modulus `M*` for the convex extension inequality, or a witness
/// pair proving no convex C^{1,1} extension exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    /// The smallest admissible modulus; `0.0` means any `M > 0` works
    /// (the field is the trace of a single affine function).
    Feasible(f64),
    /// Sites `(s1, s2)` violate the inequality by `defect`.
    Infeasible { s1: usize, s2: usize, defect: f64 },
}

impl Modulus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Modulus::Feasible(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Modulus::Feasible(m) => Some(*m),
            Modulus::Infeasible { .. } => None,
        }
    }
}

/// All pairwise constants of a field, computed in one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConstants {
    pub k1: f64,
    pub k2: f64,
    pub gamma1: f64,
    pub modulus: Modulus,
}

/// Self-check of the two inequalities relating `K1`, `K2`, and `Gamma1`.
/// Both must hold for every valid field.
#[derive(Debug, Clone, Copy)]
pub struct LemmaBoundsReport {
    pub k2_bound_ok: bool,
    pub k1_bound_ok: bool,
    /// `(gamma1 - K2, gamma1 - (4 K1 - 2 K2))`.
    pub slack: (f64, f64),
}

/// Sites closer than this (relative to the coordinate scale) are rejected:
/// the pairwise quotients blow up and the field is over-determined.
const DUPLICATE_REL_TOL: f64 = 1e-12;

/// Below this site count the pairwise sweeps run sequentially.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 64;

impl TaylorField1 {
    pub fn new(dim: usize, sites: Vec<Site>) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if sites.is_empty() {
            return Err(Error::EmptyField);
        }
        let mut max_coord = 0.0_f64;
        for (index, site) in sites.iter().enumerate() {
            if site.location.len() != dim || site.gradient.len() != dim {
                return Err(Error::DimensionMismatch { index, dim });
            }
            let finite = site.value.is_finite()
                && site.location.iter().all(|c| c.is_finite())
                && site.gradient.iter().all(|c| c.is_finite());
            if !finite {
                return Err(Error::NonFinite { index });
            }
            for &c in &site.location {
                max_coord = max_coord.max(c.abs());
            }
        }
        let threshold = DUPLICATE_REL_TOL * (1.0 + max_coord);
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                let d = linalg::dist(&sites[i].location, &sites[j].location);
                if d <= threshold {
                    return Err(Error::DuplicateSites {
                        first: i,
                        second: j,
                        distance: d,
                        threshold,
                    });
                }
            }
        }
        Ok(Self { dim, sites })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one site
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<(), Error> {
        if x.len() != self.dim {
            return Err(Error::PointDimension {
                got: x.len(),
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// `max |alpha(s2) - alpha(s1) - <v(s1), s2 - s1>| / |s1 - s2|^2` over
    /// ordered pairs; 0 for a single site.
    pub fn k1(&self) -> f64 {
        self.pairwise_max(|a, b| {
            let d2 = linalg::dist_sq(&a.location, &b.location);
            (b.value - a.value - linalg::dot_diff(&a.gradient, &b.location, &a.location)).abs() / d2
        })
    }

    /// `max |v(s1) - v(s2)| / |s1 - s2|` over pairs; 0 for a single site.
    pub fn k2(&self) -> f64 {
        self.pairwise_max(|a, b| {
            let d2 = linalg::dist_sq(&a.location, &b.location);
            (linalg::dist_sq(&a.gradient, &b.gradient) / d2).sqrt()
        })
    }

    /// Le Gruyer's pairwise functional; 0 for a single site.
    pub fn gamma1(&self) -> f64 {
        self.pairwise_max(|a, b| {
            let d2 = linalg::dist_sq(&a.location, &b.location);
            let mut num = 2.0 * (a.value - b.value);
            for k in 0..a.location.len() {
                num += (a.gradient[k] + b.gradient[k]) * (b.location[k] - a.location[k]);
            }
            let big_a = num / d2;
            let big_b_sq = linalg::dist_sq(&a.gradient, &b.gradient) / d2;
            (big_a * big_a + big_b_sq).sqrt() + big_a.abs()
        })
    }

    /// Smallest `M > 0` such that
    /// `alpha(s2) >= alpha(s1) + <v(s1), s2 - s1> + |v(s1) - v(s2)|^2 / (2M)`
    /// holds for every ordered pair.
    ///
    /// A pair with negative chord defect `D12`, or `D12 = 0` with distinct
    /// gradients, rules out every modulus. All gradients equal with `D12 >= 0`
    /// everywhere gives `Modulus::Feasible(0.0)`: any positive modulus works.
    pub fn convexity_modulus(&self) -> Modulus {
        let eval = |i: usize, j: usize| -> PairModulus {
            let a = &self.sites[i];
            let b = &self.sites[j];
            let defect =
                b.value - a.value - linalg::dot_diff(&a.gradient, &b.location, &a.location);
            let grad_gap_sq = linalg::dist_sq(&a.gradient, &b.gradient);
            if defect < 0.0 || (defect == 0.0 && grad_gap_sq > 0.0) {
                PairModulus::Infeasible {
                    s1: i,
                    s2: j,
                    defect,
                }
            } else if grad_gap_sq == 0.0 {
                PairModulus::Ratio(0.0)
            } else {
                PairModulus::Ratio(grad_gap_sq / (2.0 * defect))
            }
        };
        let combined = self.pairwise_reduce(PairModulus::Ratio(0.0), eval, PairModulus::combine);
        match combined {
            PairModulus::Ratio(m) => Modulus::Feasible(m),
            PairModulus::Infeasible { s1, s2, defect } => Modulus::Infeasible { s1, s2, defect },
        }
    }

    /// All constants in one call.
    pub fn constants(&self) -> FieldConstants {
        FieldConstants {
            k1: self.k1(),
            k2: self.k2(),
            gamma1: self.gamma1(),
            modulus: self.convexity_modulus(),
        }
    }

    /// Checks `K2 <= Gamma1` and `4 K1 - 2 K2 <= Gamma1` with a relative
    /// slack of 1e-12 on the comparisons.
    pub fn lemma_bounds_report(&self) -> LemmaBoundsReport {
        let k1 = self.k1();
        let k2 = self.k2();
        let gamma1 = self.gamma1();
        let tol = 1e-12 * (1.0 + gamma1.abs());
        LemmaBoundsReport {
            k2_bound_ok: k2 <= gamma1 + tol,
            k1_bound_ok: 4.0 * k1 - 2.0 * k2 <= gamma1 + tol,
            slack: (gamma1 - k2, gamma1 - (4.0 * k1 - 2.0 * k2)),
        }
    }

    /// Max of `f` over ordered pairs of distinct sites; empty sup is 0.
    fn pairwise_max<F>(&self, f: F) -> f64
    where
        F: Fn(&Site, &Site) -> f64 + Sync,
    {
        self.pairwise_reduce(
            0.0_f64,
            |i, j| f(&self.sites[i], &self.sites[j]),
            f64::max,
        )
    }

    fn pairwise_reduce<T, F, C>(&self, identity: T, f: F, combine: C) -> T
    where
        T: Clone + Send + Sync,
        F: Fn(usize, usize) -> T + Sync,
        C: Fn(T, T) -> T + Sync + Send,
    {
        let n = self.sites.len();
        let row = |i: usize| {
            let mut acc = identity.clone();
            for j in 0..n {
                if j != i {
                    acc = combine(acc, f(i, j));
                }
            }
            acc
        };
        #[cfg(feature = "parallel")]
        if n >= PAR_THRESHOLD {
            return (0..n)
                .into_par_iter()
                .map(row)
                .reduce(|| identity.clone(), &combine);
        }
        (0..n).map(row).fold(identity.clone(), &combine)
    }
}

#[derive(Clone)]
enum PairModulus {
    Ratio(f64),
    Infeasible { s1: usize, s2: usize, defect: f64 },
}

impl PairModulus {
    /// Infeasibility dominates; among witnesses the lexicographically
    /// smallest pair wins so parallel reductions stay deterministic.
    fn combine(a: Self, b: Self) -> Self {
        match (a, b) {
            (PairModulus::Ratio(x), PairModulus::Ratio(y)) => PairModulus::Ratio(x.max(y)),
            (w @ PairModulus::Infeasible { .. }, PairModulus::Ratio(_)) => w,
            (PairModulus::Ratio(_), w @ PairModulus::Infeasible { .. }) => w,
            (
                PairModulus::Infeasible { s1, s2, defect },
                PairModulus::Infeasible {
                    s1: t1,
                    s2: t2,
                    defect: d2,
                },
            ) => {
                if (s1, s2) <= (t1, t2) {
                    PairModulus::Infeasible { s1, s2, defect }
                } else {
                    PairModulus::Infeasible {
                        s1: t1,
                        s2: t2,
                        defect: d2,
                    }
                }
            }
        }
    }
}
