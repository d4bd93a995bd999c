//! Convex C^{1,1} extension of a convex-feasible 1-Taylor field.
//!
//! The piecewise-affine floor `f(x) = max_s { alpha(s) + <v(s), x - s> }`
//! is the smallest continuous convex extension. Its sup-convolution has the
//! closed form `f^eps = max_s { l_s + (eps/2) |v(s)|^2 }`, and the
//! Lasry-Lions value `(f^eps)_eps(x)` equals, by a compact-simplex minimax
//! exchange, the maximum over simplex weights `lambda` of
//!
//! ```text
//!   sum_s lambda_s (l_s(x) + (eps/2) |v(s)|^2)  -  (eps/2) |sum_s lambda_s v(s)|^2
//! ```
//!
//! with inner minimizer `z_bar = x - eps V lambda*` and gradient
//! `V lambda*`. The extension itself is the monotone limit `eps -> 1/M`;
//! we evaluate at `eps = eps_fraction / M`, a certified lower
//! approximation whose honest gradient Lipschitz bound is `1/eps`.

use crate::error::Error;
use crate::field::{Modulus, TaylorField1};
use crate::linalg;
use crate::simplex::{self, SimplexQuadraticProblem};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `max_s { alpha(s) + <v(s), x - s> }`: the smallest continuous convex
/// extension of a convex-feasible field (well-defined for any field).
pub fn affine_max(field: &TaylorField1, x: &[f64]) -> Result<f64, Error> {
    field.check_point(x)?;
    Ok(field
        .sites()
        .iter()
        .map(|s| s.affine(x))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Closed-form sup-convolution of `affine_max`:
/// `max_s { alpha(s) + <v(s), x - s> + (eps/2) |v(s)|^2 }`.
pub fn affine_max_supconv(field: &TaylorField1, eps: f64, x: &[f64]) -> Result<f64, Error> {
    field.check_point(x)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::EpsOutOfRange {
            eps,
            modulus: f64::INFINITY,
        });
    }
    Ok(field
        .sites()
        .iter()
        .map(|s| s.affine(x) + 0.5 * eps * linalg::norm_sq(&s.gradient))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Sup-convolution of the quadratic
/// `q(x) = alpha + <v, x - s> + (M/2)|x - s|^2`, valid for `eps < 1/M`:
/// `q^eps(x) = alpha + (1 - eps M)^{-1} [ (M/2)|x-s|^2 + <v, x-s> + (eps/2)|v|^2 ]`.
pub fn quad_supconv(
    alpha: f64,
    v: &[f64],
    s: &[f64],
    modulus: f64,
    eps: f64,
    x: &[f64],
) -> Result<f64, Error> {
    if !(modulus > 0.0 && modulus.is_finite()) {
        return Err(Error::NonPositiveModulus(modulus));
    }
    if !(eps > 0.0 && eps * modulus < 1.0) {
        return Err(Error::EpsOutOfRange { eps, modulus });
    }
    let bracket = 0.5 * modulus * linalg::dist_sq(x, s)
        + linalg::dot_diff(v, x, s)
        + 0.5 * eps * linalg::norm_sq(v);
    Ok(alpha + bracket / (1.0 - eps * modulus))
}

/// Inf-convolution of the same quadratic, valid for any `eps > 0`:
/// `q_eps(x) = alpha + (1 + eps M)^{-1} [ (M/2)|x-s|^2 + <v, x-s> - (eps/2)|v|^2 ]`.
pub fn quad_infconv(
    alpha: f64,
    v: &[f64],
    s: &[f64],
    modulus: f64,
    eps: f64,
    x: &[f64],
) -> Result<f64, Error> {
    if !(modulus > 0.0 && modulus.is_finite()) {
        return Err(Error::NonPositiveModulus(modulus));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::EpsOutOfRange { eps, modulus });
    }
    let bracket = 0.5 * modulus * linalg::dist_sq(x, s) + linalg::dot_diff(v, x, s)
        - 0.5 * eps * linalg::norm_sq(v);
    Ok(alpha + bracket / (1.0 + eps * modulus))
}

/// One pointwise Lasry-Lions evaluation.
#[derive(Debug, Clone)]
pub struct LasryLionsEvaluation {
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Minimizer of the inner inf-convolution: `x - eps * gradient`.
    pub inner_minimizer: Vec<f64>,
    /// Optimal simplex weights over the sites.
    pub weights: Vec<f64>,
}

/// Extension value with the honest finite-`eps` regularity bound.
#[derive(Debug, Clone)]
pub struct ExtensionValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// `1/eps = M / eps_fraction`: gradient Lipschitz bound at finite `eps`.
    pub lip_bound: f64,
}

/// A convex-feasible field together with a modulus `M >= M*` and the
/// fraction of `1/M` at which the sup-inf convolution is evaluated.
///
/// Immutable; evaluation methods are pure and freely concurrent.
#[derive(Debug, Clone)]
pub struct ConvexExtensionSpec {
    field: TaylorField1,
    modulus: f64,
    eps_fraction: f64,
    /// Trace of a single affine function: the formulas degenerate and the
    /// QP is bypassed.
    affine: bool,
}

pub const DEFAULT_EPS_FRACTION: f64 = 1.0 - 1e-6;

impl ConvexExtensionSpec {
    /// `modulus = None` selects the smallest feasible modulus `M*`
    /// (or 1.0 for an affine-consistent field, where it is arbitrary).
    pub fn new(
        field: TaylorField1,
        modulus: Option<f64>,
        eps_fraction: f64,
    ) -> Result<Self, Error> {
        if !(eps_fraction > 0.0 && eps_fraction < 1.0) {
            return Err(Error::InvalidEpsFraction(eps_fraction));
        }
        let m_star = match field.convexity_modulus() {
            Modulus::Feasible(m) => m,
            Modulus::Infeasible { s1, s2, defect } => {
                return Err(Error::Infeasible { s1, s2, defect });
            }
        };
        let affine = m_star == 0.0;
        let modulus = match modulus {
            None => {
                if affine {
                    1.0
                } else {
                    m_star
                }
            }
            Some(m) => {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(Error::NonPositiveModulus(m));
                }
                if m < m_star - 1e-9 * (1.0 + m_star) {
                    return Err(Error::ModulusTooSmall {
                        given: m,
                        required: m_star,
                    });
                }
                m
            }
        };
        Ok(Self {
            field,
            modulus,
            eps_fraction,
            affine,
        })
    }

    pub fn field(&self) -> &TaylorField1 {
        &self.field
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn eps_fraction(&self) -> f64 {
        self.eps_fraction
    }

    /// The convolution parameter `eps = eps_fraction / M`.
    pub fn eps(&self) -> f64 {
        self.eps_fraction / self.modulus
    }

    /// `(f^eps)_eps(x)` with gradient, inner minimizer, and site weights.
    pub fn evaluate(&self, x: &[f64]) -> Result<LasryLionsEvaluation, Error> {
        self.field.check_point(x)?;
        let eps = self.eps();
        if self.affine {
            let site = &self.field.sites()[0];
            let gradient = site.gradient.clone();
            let inner_minimizer: Vec<f64> =
                x.iter().zip(&gradient).map(|(xi, g)| xi - eps * g).collect();
            let mut weights = vec![0.0; self.field.len()];
            weights[0] = 1.0;
            return Ok(LasryLionsEvaluation {
                point: x.to_vec(),
                value: site.affine(x),
                gradient,
                inner_minimizer,
                weights,
            });
        }
        let sites = self.field.sites();
        let linear: Vec<f64> = sites
            .iter()
            .map(|s| s.affine(x) + 0.5 * eps * linalg::norm_sq(&s.gradient))
            .collect();
        let columns: Vec<Vec<f64>> = sites.iter().map(|s| s.gradient.clone()).collect();
        let problem = SimplexQuadraticProblem::new(linear, columns, eps)?;
        let c_inf = problem
            .linear
            .iter()
            .fold(0.0_f64, |a, &c| a.max(c.abs()));
        let sol = simplex::solve(&problem, 1e-12 * (1.0 + c_inf))?;
        let inner_minimizer: Vec<f64> = x
            .iter()
            .zip(&sol.combined)
            .map(|(xi, w)| xi - eps * w)
            .collect();
        Ok(LasryLionsEvaluation {
            point: x.to_vec(),
            value: sol.value,
            gradient: sol.combined,
            inner_minimizer,
            weights: sol.weights,
        })
    }

    /// The extension value at `eps = eps_fraction / M`: a certified lower
    /// approximation of the limit extension, exact on the sites.
    pub fn extension(&self, x: &[f64]) -> Result<ExtensionValue, Error> {
        let eval = self.evaluate(x)?;
        Ok(ExtensionValue {
            value: eval.value,
            gradient: eval.gradient,
            lip_bound: self.modulus / self.eps_fraction,
        })
    }

    /// Batch evaluation; parallel with the `parallel` feature, with
    /// deterministic per-point results in input order either way.
    pub fn extension_batch(&self, points: &[Vec<f64>]) -> Result<Vec<ExtensionValue>, Error> {
        #[cfg(feature = "parallel")]
        {
            points.par_iter().map(|x| self.extension(x)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            points.iter().map(|x| self.extension(x)).collect()
        }
    }
}
