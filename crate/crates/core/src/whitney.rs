//! General (non-convex) C^{1,1} extension by quadratic tilting.
//!
//! Any field with finite `K1`, `K2` becomes convex-feasible after adding
//! the quadratic `(mu/2)|x|^2` to its jets, provided `mu > 2 K1`. The
//! extension is then `G(x) = F(x) - (mu/2)|x|^2` where `F` is the convex
//! engine run on the tilted field with modulus
//! `M~ = (mu + K2)^2 / (mu - 2 K1)`. The closed-form tilt
//! `mu_bar = 2 K1 + K2 + sqrt((2 K1 + K2)^2 + K2^2)` balances the
//! semiconvexity (`mu`) and semiconcavity (`M~ - mu`) budgets, which makes
//! the extension almost minimal: `Lip(grad G) <= mu_bar` is within the
//! universal factor `(5 + sqrt(29))/2` of `Gamma1`, the best possible
//! gradient Lipschitz constant.

use crate::convex::{ConvexExtensionSpec, ExtensionValue};
use crate::error::Error;
use crate::field::{Site, TaylorField1};
use crate::linalg;
use crate::{almost_minimality_factor, BoundingBox};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Optimal tilt `2 K1 + K2 + sqrt((2 K1 + K2)^2 + K2^2)`.
///
/// Equals the minimum over `mu > 2 K1` of
/// `max { mu, (mu + K2)^2 / (mu - 2 K1) - mu }`; at the optimum both
/// branches balance. Zero exactly when `K1 = K2 = 0`.
pub fn mu_bar(k1: f64, k2: f64) -> f64 {
    let p = 2.0 * k1 + k2;
    p + (p * p + k2 * k2).sqrt()
}

/// Per-site replacement `alpha += (mu/2)|s|^2`, `v += mu s`.
/// Locations are unchanged, so validity is preserved.
pub fn tilt(field: &TaylorField1, mu: f64) -> TaylorField1 {
    let sites = field
        .sites()
        .iter()
        .map(|s| {
            Site::new(
                s.location.clone(),
                s.value + 0.5 * mu * linalg::norm_sq(&s.location),
                s.gradient
                    .iter()
                    .zip(&s.location)
                    .map(|(g, c)| g + mu * c)
                    .collect(),
            )
        })
        .collect();
    TaylorField1::new(field.dim(), sites).expect("tilting preserves field validity")
}

enum Engine {
    /// `K1 = K2 = 0`: the field is the trace of one affine function.
    Affine,
    Tilted {
        spec: ConvexExtensionSpec,
        mu_bar: f64,
        m_tilde: f64,
    },
}

/// A built general extension: tilt constants plus the convex engine over
/// the tilted field. Immutable; evaluation is pure.
pub struct WhitneyExtension {
    base: TaylorField1,
    k1: f64,
    k2: f64,
    gamma1: f64,
    eps_fraction: f64,
    engine: Engine,
}

/// Sampled certificate for one built extension. All sampled constants are
/// lower estimates of the corresponding suprema; the pass criteria are
/// one-sided accordingly.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub interp_value_resid: f64,
    pub interp_grad_resid: f64,
    pub lip_grad_sampled: f64,
    pub gamma1: f64,
    /// `lip_grad_sampled / gamma1`, 0 when `gamma1 = 0`. Must stay below
    /// the universal almost-minimality factor.
    pub minimality_ratio: f64,
    pub semiconvex_sampled: f64,
    pub semiconcave_sampled: f64,
    pub pass: bool,
}

impl WhitneyExtension {
    pub fn build(field: TaylorField1, eps_fraction: f64) -> Result<Self, Error> {
        Self::build_with_modulus(field, eps_fraction, None)
    }

    /// `modulus` overrides the closed-form `M~` for the tilted convex
    /// engine (must still dominate the tilted field's smallest modulus).
    pub fn build_with_modulus(
        field: TaylorField1,
        eps_fraction: f64,
        modulus: Option<f64>,
    ) -> Result<Self, Error> {
        if !(eps_fraction > 0.0 && eps_fraction < 1.0) {
            return Err(Error::InvalidEpsFraction(eps_fraction));
        }
        let k1 = field.k1();
        let k2 = field.k2();
        let gamma1 = field.gamma1();
        if k1 == 0.0 && k2 == 0.0 {
            return Ok(Self {
                base: field,
                k1,
                k2,
                gamma1,
                eps_fraction,
                engine: Engine::Affine,
            });
        }
        let mu = mu_bar(k1, k2);
        let m_tilde = (mu + k2) * (mu + k2) / (mu - 2.0 * k1);
        let tilted = tilt(&field, mu);
        Self::check_tilted_feasibility(&tilted, m_tilde)?;
        let engine_modulus = modulus.unwrap_or(m_tilde).max(m_tilde);
        let spec = ConvexExtensionSpec::new(tilted, Some(engine_modulus), eps_fraction)?;
        Ok(Self {
            base: field,
            k1,
            k2,
            gamma1,
            eps_fraction,
            engine: Engine::Tilted {
                spec,
                mu_bar: mu,
                m_tilde: engine_modulus,
            },
        })
    }

    /// The tilted field must satisfy the convex extension inequality with
    /// `M~` by construction; a violation beyond rounding is a bug.
    fn check_tilted_feasibility(tilted: &TaylorField1, m_tilde: f64) -> Result<(), Error> {
        let sites = tilted.sites();
        for (i, a) in sites.iter().enumerate() {
            for (j, b) in sites.iter().enumerate() {
                if i == j {
                    continue;
                }
                let chord =
                    b.value - a.value - linalg::dot_diff(&a.gradient, &b.location, &a.location);
                let need = linalg::dist_sq(&a.gradient, &b.gradient) / (2.0 * m_tilde);
                let scale = 1.0 + a.value.abs() + b.value.abs() + need;
                if chord < need - 1e-9 * scale {
                    return Err(Error::TiltCheckFailed {
                        s1: i,
                        s2: j,
                        defect: need - chord,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn base_field(&self) -> &TaylorField1 {
        &self.base
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn eps_fraction(&self) -> f64 {
        self.eps_fraction
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.engine, Engine::Affine)
    }

    /// Tilt actually applied (0 in the affine case).
    pub fn mu_bar(&self) -> f64 {
        match &self.engine {
            Engine::Affine => 0.0,
            Engine::Tilted { mu_bar, .. } => *mu_bar,
        }
    }

    /// Modulus used by the tilted convex engine, if any.
    pub fn m_tilde(&self) -> Option<f64> {
        match &self.engine {
            Engine::Affine => None,
            Engine::Tilted { m_tilde, .. } => Some(*m_tilde),
        }
    }

    pub fn tilted_spec(&self) -> Option<&ConvexExtensionSpec> {
        match &self.engine {
            Engine::Affine => None,
            Engine::Tilted { spec, .. } => Some(spec),
        }
    }

    /// Gradient Lipschitz budget certified at finite `eps`:
    /// `max { mu_bar, M~ / eps_fraction - mu_bar }`.
    pub fn lip_budget(&self) -> f64 {
        match &self.engine {
            Engine::Affine => 0.0,
            Engine::Tilted { mu_bar, m_tilde, .. } => {
                mu_bar.max(m_tilde / self.eps_fraction - mu_bar)
            }
        }
    }

    /// `G(x) = F~(x) - (mu_bar/2)|x|^2` with gradient.
    pub fn evaluate(&self, x: &[f64]) -> Result<ExtensionValue, Error> {
        self.base.check_point(x)?;
        match &self.engine {
            Engine::Affine => {
                let site = &self.base.sites()[0];
                Ok(ExtensionValue {
                    value: site.affine(x),
                    gradient: site.gradient.clone(),
                    lip_bound: 0.0,
                })
            }
            Engine::Tilted { spec, mu_bar, .. } => {
                let tilted = spec.extension(x)?;
                Ok(ExtensionValue {
                    value: tilted.value - 0.5 * mu_bar * linalg::norm_sq(x),
                    gradient: tilted
                        .gradient
                        .iter()
                        .zip(x)
                        .map(|(g, xi)| g - mu_bar * xi)
                        .collect(),
                    lip_bound: self.lip_budget(),
                })
            }
        }
    }

    pub fn evaluate_batch(&self, points: &[Vec<f64>]) -> Result<Vec<ExtensionValue>, Error> {
        #[cfg(feature = "parallel")]
        {
            points.par_iter().map(|x| self.evaluate(x)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            points.iter().map(|x| self.evaluate(x)).collect()
        }
    }

    /// Sampled certificate over `n_samples` point pairs drawn uniformly in
    /// `sample_box` with a fixed seed. Deterministic for a fixed seed.
    pub fn certify(
        &self,
        n_samples: usize,
        seed: u64,
        sample_box: &BoundingBox,
    ) -> Result<CertificationReport, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Pairs closer than this fraction of the box diameter are skipped:
        // the difference quotients divide by |x - y| (or its square) and
        // would amplify solver rounding, while contributing nothing to a
        // lower estimate of a supremum.
        let min_dist = 1e-3 * sample_box.diameter();
        let mut pairs = Vec::with_capacity(n_samples);
        while pairs.len() < n_samples {
            let x = sample_box.sample(&mut rng);
            let y = sample_box.sample(&mut rng);
            if linalg::dist(&x, &y) >= min_dist {
                pairs.push((x, y));
            }
        }

        let points: Vec<Vec<f64>> = pairs
            .iter()
            .flat_map(|(x, y)| [x.clone(), y.clone()])
            .collect();
        let evals = self.evaluate_batch(&points)?;

        let mut lip = 0.0_f64;
        let mut semiconvex = 0.0_f64;
        let mut semiconcave = 0.0_f64;
        for (k, (x, y)) in pairs.iter().enumerate() {
            let ex = &evals[2 * k];
            let ey = &evals[2 * k + 1];
            let d = linalg::dist(x, y);
            lip = lip.max(linalg::dist(&ex.gradient, &ey.gradient) / d);
            // rho = 2 (G(y) - G(x) - <grad G(x), y - x>) / |y - x|^2:
            // bounded below by -mu_bar (semiconvexity) and above by the
            // semiconcavity constant.
            let rho =
                2.0 * (ey.value - ex.value - linalg::dot_diff(&ex.gradient, y, x)) / (d * d);
            semiconvex = semiconvex.max(-rho);
            semiconcave = semiconcave.max(rho);
        }

        let mut value_resid = 0.0_f64;
        let mut grad_resid = 0.0_f64;
        let mut alpha_scale = 0.0_f64;
        let mut v_scale = 0.0_f64;
        for site in self.base.sites() {
            let e = self.evaluate(&site.location)?;
            value_resid = value_resid.max((e.value - site.value).abs());
            grad_resid = grad_resid.max(linalg::dist(&e.gradient, &site.gradient));
            alpha_scale = alpha_scale.max(site.value.abs());
            v_scale = v_scale.max(linalg::norm(&site.gradient));
        }

        let ratio = if self.gamma1 > 0.0 {
            lip / self.gamma1
        } else {
            0.0
        };
        let semiconvex_budget = self.mu_bar();
        let semiconcave_budget = match &self.engine {
            Engine::Affine => 0.0,
            Engine::Tilted { mu_bar, m_tilde, .. } => m_tilde / self.eps_fraction - mu_bar,
        };
        let semi_tol = 1e-6 * (1.0 + semiconvex_budget.max(semiconcave_budget));
        let pass = value_resid <= 1e-7 * (1.0 + alpha_scale)
            && grad_resid <= 1e-6 * (1.0 + v_scale)
            && ratio <= almost_minimality_factor() + 1e-9
            && semiconvex <= semiconvex_budget + semi_tol
            && semiconcave <= semiconcave_budget + semi_tol;

        Ok(CertificationReport {
            interp_value_resid: value_resid,
            interp_grad_resid: grad_resid,
            lip_grad_sampled: lip,
            gamma1: self.gamma1,
            minimality_ratio: ratio,
            semiconvex_sampled: semiconvex,
            semiconcave_sampled: semiconcave,
            pass,
        })
    }
}
