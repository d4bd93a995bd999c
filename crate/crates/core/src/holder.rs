//! Numerical demonstrator: the sup-inf route fails for C^{1,theta}, theta < 1.
//!
//! With the Hölder kernel `|y - x|^{1+theta} / ((1+theta) eps^theta)` the
//! quadratic round-trip identity breaks: for the one-dimensional model
//! function `q(x) = v x + M/(1+theta) |x|^{1+theta}` the double convolution
//! `(q^eps)_eps(0)` can be strictly positive while `q(0) = 0`, so the
//! regularization is no longer an extension. Two independent routes
//! certify this:
//!
//! * [`grid_sup_inf_conv`] — brute-force evaluation of `(q^eps)_eps(0)` on
//!   a 1D grid, with local refinement around the optimizers and an
//!   a-posteriori error estimate;
//! * [`find_positive_lambda`] — the one-parameter probe `y = lambda y_bar`
//!   whose bracketed factor `psi(lambda) > 0` certifies positivity
//!   analytically (up to the positive prefactor, reported separately).
//!
//! For `theta = 1` both routes must report zero: the quadratic identity is
//! exact there.

use crate::error::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Configuration of the 1D probe. `theta = 1` is admitted for the
/// consistency check only.
#[derive(Debug, Clone)]
pub struct HolderProbeConfig {
    pub theta: f64,
    pub modulus: f64,
    /// The nonzero 1D gradient `v` of the model function.
    pub gradient: f64,
    pub eps: f64,
    pub grid_halfwidth: f64,
    pub grid_points: usize,
}

impl HolderProbeConfig {
    pub fn new(
        theta: f64,
        modulus: f64,
        gradient: f64,
        eps: f64,
        grid_points: usize,
    ) -> Result<Self, Error> {
        let fail = |reason: String| Err(Error::InvalidProbeConfig { reason });
        if !(theta > 0.0 && theta <= 1.0) {
            return fail(format!("theta must lie in (0, 1], got {theta}"));
        }
        if !(modulus > 0.0 && modulus.is_finite()) {
            return fail(format!("modulus must be positive, got {modulus}"));
        }
        if !(gradient != 0.0 && gradient.is_finite()) {
            return fail(format!("gradient must be nonzero, got {gradient}"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return fail(format!("eps must be positive, got {eps}"));
        }
        let gain = modulus * eps.powf(theta);
        if !(gain.is_finite() && gain < 1.0) {
            return fail(format!("need M * eps^theta < 1, got {gain}"));
        }
        if grid_points < 1000 {
            return fail(format!("need at least 1000 grid points, got {grid_points}"));
        }
        let y_bar = eps * gradient.abs().powf(1.0 / theta);
        let grid_halfwidth = 4.0 * y_bar.max(1.0);
        Ok(Self {
            theta,
            modulus,
            gradient,
            eps,
            grid_halfwidth,
            grid_points,
        })
    }

    /// Would-be inner minimizer from the sketch argument:
    /// `y_bar = -eps v |v|^{1/theta - 1}`.
    pub fn y_bar(&self) -> f64 {
        -self.eps * self.gradient * self.gradient.abs().powf(1.0 / self.theta - 1.0)
    }

    fn kernel_denom(&self) -> f64 {
        (1.0 + self.theta) * self.eps.powf(self.theta)
    }

    fn kernel(&self, d: f64) -> f64 {
        d.abs().powf(1.0 + self.theta) / self.kernel_denom()
    }
}

/// The model function `q(x) = v x + M/(1+theta) |x|^{1+theta}` (site and
/// value normalized to the origin).
pub fn q_theta(cfg: &HolderProbeConfig, x: f64) -> f64 {
    cfg.gradient * x + cfg.modulus / (1.0 + cfg.theta) * x.abs().powf(1.0 + cfg.theta)
}

/// Grid value of `(q^eps)_eps(0)` with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy)]
pub struct SupInfResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// Outcome of a probe run. `Positive` demands a margin of three error
/// estimates; marginal results stay `Inconclusive` rather than certifying
/// a strict inequality the grid cannot support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVerdict {
    Positive,
    Zero,
    Inconclusive,
}

pub fn verdict(cfg: &HolderProbeConfig, result: &SupInfResult) -> ProbeVerdict {
    if cfg.theta == 1.0 {
        if result.value.abs() <= result.error_estimate {
            ProbeVerdict::Zero
        } else if result.value > 3.0 * result.error_estimate {
            ProbeVerdict::Positive
        } else {
            ProbeVerdict::Inconclusive
        }
    } else if result.value > 3.0 * result.error_estimate {
        ProbeVerdict::Positive
    } else {
        ProbeVerdict::Inconclusive
    }
}

const REFINE_ROUNDS: usize = 26;
const REFINE_POINTS: usize = 9;

/// Shrinking-window scan for a 1D extremum. Returns the optimizer, the
/// value, and the value after half the rounds (for the error estimate).
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    maximize: bool,
) -> (f64, f64, f64) {
    let mut best_x = 0.5 * (lo + hi);
    let mut best_v = f(best_x);
    let mut half_v = best_v;
    for round in 0..REFINE_ROUNDS {
        let step = (hi - lo) / (REFINE_POINTS - 1) as f64;
        for k in 0..REFINE_POINTS {
            let x = lo + step * k as f64;
            let v = f(x);
            if (maximize && v > best_v) || (!maximize && v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        if round == REFINE_ROUNDS / 2 {
            half_v = best_v;
        }
        lo = best_x - step;
        hi = best_x + step;
    }
    (best_x, best_v, half_v)
}

/// `q^eps(z) = sup_y q(y) - |y - z|^{1+theta} / ((1+theta) eps^theta)`,
/// coarse scan over the grid followed by local refinement around every
/// competing basin. Returns `(value, half_depth_value)`.
///
/// Candidates are the strict local maxima of the coarse scan, not merely
/// the runner-up values: near the outer kink two well-separated basins tie
/// to within the grid ripple, and the runner-up value always sits in the
/// broad basin of the argmax, silently dropping the other one.
fn supconv_at(cfg: &HolderProbeConfig, grid: &[f64], q: &[f64], z: f64) -> (f64, f64) {
    let n = grid.len();
    let h = grid[1] - grid[0];
    let coarse: Vec<f64> = grid
        .iter()
        .zip(q)
        .map(|(&y, &qy)| qy - cfg.kernel(y - z))
        .collect();
    let mut best = 0usize;
    for i in 1..n {
        if coarse[i] > coarse[best] {
            best = i;
        }
    }
    let mut candidates = vec![best];
    for i in 1..n - 1 {
        if coarse[i] >= coarse[i - 1]
            && coarse[i] >= coarse[i + 1]
            && coarse[i] > coarse[best] - 10.0 * h
            && candidates.iter().all(|&c| c.abs_diff(i) > 4)
            && candidates.len() < 6
        {
            candidates.push(i);
        }
    }
    // Endpoints can carry a basin whose interior maximum lies just outside
    // the scanned range.
    for i in [0, n - 1] {
        if coarse[i] > coarse[best] - 10.0 * h && candidates.iter().all(|&c| c.abs_diff(i) > 4) {
            candidates.push(i);
        }
    }

    // The coarse argmax can sit a few cells away from the continuous
    // maximizer, so the refinement window is wider than one cell.
    let w = 4.0 * h;
    let objective = |y: f64| q_theta(cfg, y) - cfg.kernel(y - z);
    let mut val = f64::NEG_INFINITY;
    let mut half = f64::NEG_INFINITY;
    for &c in &candidates {
        let (_, v, hv) = refine(&objective, grid[c] - w, grid[c] + w, true);
        if v > val {
            val = v;
            half = hv;
        }
    }
    (val, half)
}

/// Grid approximation of `(q^eps)_eps(0)`: sup-convolve on the grid, then
/// minimize `q^eps(z) + |z|^{1+theta}/((1+theta) eps^theta)` over `z`,
/// refining locally around every candidate basin.
///
/// The error estimate combines the improvement seen in the last half of
/// each refinement (scaled by 4) with a resolution floor; the verdict
/// logic in [`verdict`] demands a 3x margin against it.
pub fn grid_sup_inf_conv(cfg: &HolderProbeConfig) -> SupInfResult {
    let n = cfg.grid_points;
    let hw = cfg.grid_halfwidth;
    let h = 2.0 * hw / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| -hw + h * i as f64).collect();
    let q: Vec<f64> = grid.iter().map(|&y| q_theta(cfg, y)).collect();

    // Kernel depends only on the index distance on a uniform grid.
    let denom = cfg.kernel_denom();
    let pow_table: Vec<f64> = (0..n)
        .map(|d| (h * d as f64).powf(1.0 + cfg.theta) / denom)
        .collect();

    let coarse_outer = |zi: usize| -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (yi, &qy) in q.iter().enumerate() {
            let v = qy - pow_table[yi.abs_diff(zi)];
            if v > m {
                m = v;
            }
        }
        m + cfg.kernel(grid[zi])
    };
    #[cfg(feature = "parallel")]
    let outer: Vec<f64> = (0..n).into_par_iter().map(coarse_outer).collect();
    #[cfg(not(feature = "parallel"))]
    let outer: Vec<f64> = (0..n).map(coarse_outer).collect();

    // Candidate basins: the global minimum plus every strict local minimum
    // within a small margin of it.
    let global = outer
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, &v)| {
            if v < acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    let mut candidates = vec![global.0];
    for i in 1..n - 1 {
        if outer[i] <= outer[i - 1]
            && outer[i] <= outer[i + 1]
            && outer[i] <= global.1 + 100.0 * h
            && candidates.iter().all(|&c| c.abs_diff(i) > 2)
            && candidates.len() < 6
        {
            candidates.push(i);
        }
    }

    let objective = |z: f64| {
        let (inner, _) = supconv_at(cfg, &grid, &q, z);
        inner + cfg.kernel(z)
    };
    let mut value = f64::INFINITY;
    let mut outer_gap = 0.0;
    let mut z_star = grid[global.0];
    for &c in &candidates {
        // The coarse outer landscape carries O(h^2) grid-alignment ripple
        // from the inner sup, which near a flat minimum can displace the
        // detected basin by several cells; the window absorbs that.
        let lo = grid[c] - 24.0 * h;
        let hi = grid[c] + 24.0 * h;
        let (z, v, v_half) = refine(&objective, lo, hi, false);
        if v < value {
            value = v;
            outer_gap = (v_half - v).abs();
            z_star = z;
        }
    }

    let (inner_full, inner_half) = supconv_at(cfg, &grid, &q, z_star);
    let inner_gap = (inner_full - inner_half).abs();
    let scale = 1.0 + value.abs() + q_theta(cfg, hw).abs();
    let error_estimate = 4.0 * (outer_gap + inner_gap) + 1e-10 * scale;

    SupInfResult {
        value,
        error_estimate,
    }
}

/// The bracketed factor of the sketch probe at `y = lambda y_bar`:
/// `psi(lambda) = M eps^theta lambda^{1+theta} - (1+theta) lambda
///                - (1-lambda)^{1+theta} + 1`.
/// A positive value certifies `(q^eps)_eps(0) > 0 = q(0)`.
pub fn lambda_probe(cfg: &HolderProbeConfig, lambda: f64) -> f64 {
    let t = cfg.theta;
    cfg.modulus * cfg.eps.powf(t) * lambda.abs().powf(1.0 + t) - (1.0 + t) * lambda
        - (1.0 - lambda).abs().powf(1.0 + t)
        + 1.0
}

#[derive(Debug, Clone, Copy)]
pub struct LambdaProbe {
    pub lambda_star: f64,
    pub psi_star: f64,
    pub y_bar: f64,
    /// Positive prefactor `|y_bar|^{1+theta} / ((1+theta) eps^theta)`:
    /// `prefactor * psi_star` lower-bounds the sup over the probe line.
    pub prefactor: f64,
}

/// Scans `lambda` over a logarithmic grid in (0, 1/2] and returns the
/// maximizer; fails if no positive value is found. Defined for theta < 1
/// only (at theta = 1, `psi <= 0` identically under `M eps < 1`).
pub fn find_positive_lambda(cfg: &HolderProbeConfig) -> Result<LambdaProbe, Error> {
    if cfg.theta >= 1.0 {
        return Err(Error::InvalidProbeConfig {
            reason: format!("lambda probe requires theta < 1, got {}", cfg.theta),
        });
    }
    let n = 4001;
    let lo = -8.0_f64;
    let hi = 0.5_f64.log10();
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let lambda = 10.0_f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64);
        let psi = lambda_probe(cfg, lambda);
        if psi > best.1 {
            best = (lambda, psi);
        }
    }
    if best.1 <= 0.0 {
        return Err(Error::NoPositiveLambda { theta: cfg.theta });
    }
    let y_bar = cfg.y_bar();
    Ok(LambdaProbe {
        lambda_star: best.0,
        psi_star: best.1,
        y_bar,
        prefactor: y_bar.abs().powf(1.0 + cfg.theta) / cfg.kernel_denom(),
    })
}
