//! Concave quadratic maximization over the probability simplex.
//!
//! Each pointwise evaluation of the Lasry-Lions regularization of a
//! max-of-affine function reduces to
//!
//! ```text
//!   maximize  Phi(lambda) = <c, lambda> - (eps/2) |V lambda|^2
//!   subject to  lambda in the probability simplex
//! ```
//!
//! where the columns of `V` are the site gradients. The solver is a
//! fully corrective Frank-Wolfe method, which keeps the iterates sparse
//! and terminates with a duality-gap certificate: for any feasible
//! `lambda`, `Phi(lambda*) >= Phi(lambda) - gap`.

use crate::error::Error;
use crate::linalg;

/// Problem data. `columns` is column-major: one length-`n` gradient per vertex.
#[derive(Debug, Clone)]
pub struct SimplexQuadraticProblem {
    pub linear: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
    pub eps: f64,
}

impl SimplexQuadraticProblem {
    pub fn new(linear: Vec<f64>, columns: Vec<Vec<f64>>, eps: f64) -> Result<Self, Error> {
        if linear.is_empty() || linear.len() != columns.len() {
            return Err(Error::InvalidQp {
                reason: format!(
                    "need one payoff per column, got {} payoffs and {} columns",
                    linear.len(),
                    columns.len()
                ),
            });
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidQp {
                reason: format!("eps must be positive and finite, got {eps}"),
            });
        }
        let n = columns[0].len();
        for (i, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidQp {
                    reason: format!("column {i} has length {}, expected {n}", col.len()),
                });
            }
            if !col.iter().all(|x| x.is_finite()) || !linear[i].is_finite() {
                return Err(Error::InvalidQp {
                    reason: format!("non-finite entry in column or payoff {i}"),
                });
            }
        }
        Ok(Self {
            linear,
            columns,
            eps,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.linear.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns[0].len()
    }

    /// Default stopping tolerance, scaled to the payoff magnitude.
    pub fn default_tolerance(&self) -> f64 {
        let c_inf = self.linear.iter().fold(0.0_f64, |a, &c| a.max(c.abs()));
        1e-10 * (1.0 + c_inf)
    }

    /// `V lambda`.
    pub fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.ambient_dim()];
        for (l, col) in lambda.iter().zip(&self.columns) {
            if *l != 0.0 {
                for (wk, ck) in w.iter_mut().zip(col) {
                    *wk += l * ck;
                }
            }
        }
        w
    }

    pub fn objective(&self, lambda: &[f64]) -> f64 {
        let w = self.combine(lambda);
        linalg::dot(&self.linear, lambda) - 0.5 * self.eps * linalg::norm_sq(&w)
    }

    /// `grad Phi = c - eps V^T (V lambda)` given `w = V lambda`.
    fn gradient_at(&self, w: &[f64]) -> Vec<f64> {
        self.linear
            .iter()
            .zip(&self.columns)
            .map(|(c, col)| c - self.eps * linalg::dot(col, w))
            .collect()
    }
}

/// Certified solution: `gap` bounds the suboptimality of `value`.
#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub weights: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    /// `V lambda*`; unique even when the weights are not.
    pub combined: Vec<f64>,
    pub iterations: usize,
}

/// Fully corrective Frank-Wolfe.
///
/// Each outer iteration adds the best-gradient vertex (lowest index on
/// ties, for determinism) to the working support and then re-solves the
/// restricted problem on that support exactly, Wolfe style: the bordered
/// KKT system gives the affine-hull optimum, and weights that would turn
/// negative are driven to zero one at a time along the segment toward it.
/// The iterates stay sparse (support size is bounded by the ambient
/// dimension plus one at the optimum) and termination is finite.
///
/// Fails with the best iterate attached if the gap is still above `tol`
/// after `50 m + 2000` iterations.
pub fn solve(p: &SimplexQuadraticProblem, tol: f64) -> Result<SimplexSolution, Error> {
    assert!(tol > 0.0, "tolerance must be positive");
    let m = p.num_vertices();
    if m == 1 {
        let w = p.columns[0].clone();
        return Ok(SimplexSolution {
            weights: vec![1.0],
            value: p.linear[0] - 0.5 * p.eps * linalg::norm_sq(&w),
            gap: 0.0,
            combined: w,
            iterations: 0,
        });
    }

    // Start from the best pure vertex.
    let start = (0..m)
        .map(|i| p.linear[i] - 0.5 * p.eps * linalg::norm_sq(&p.columns[i]))
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0;
    let mut support = vec![start];
    let mut weights = vec![1.0_f64];

    let budget = 50 * m + 2000;
    let mut last_gap = f64::INFINITY;
    for iter in 0..budget {
        let lambda = scatter(m, &support, &weights);
        let w = p.combine(&lambda);
        let grad = p.gradient_at(&w);
        let gl = linalg::dot(&grad, &lambda);

        let mut fw = 0;
        for i in 1..m {
            if grad[i] > grad[fw] {
                fw = i;
            }
        }
        let fw_gap = grad[fw] - gl;
        last_gap = fw_gap;
        if fw_gap <= tol {
            return Ok(SimplexSolution {
                weights: lambda.clone(),
                value: linalg::dot(&p.linear, &lambda) - 0.5 * p.eps * linalg::norm_sq(&w),
                gap: fw_gap.max(0.0),
                combined: w,
                iterations: iter,
            });
        }

        if !support.contains(&fw) {
            support.push(fw);
            weights.push(0.0);
        }
        correct(p, &mut support, &mut weights);
    }

    let lambda = scatter(m, &support, &weights);
    let w = p.combine(&lambda);
    Err(Error::QpNoConvergence {
        iterations: budget,
        gap: last_gap,
        tolerance: tol,
        best_weights: lambda.clone(),
        best_value: linalg::dot(&p.linear, &lambda) - 0.5 * p.eps * linalg::norm_sq(&w),
    })
}

fn scatter(m: usize, support: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut lambda = vec![0.0; m];
    for (&i, &w) in support.iter().zip(weights) {
        lambda[i] = w;
    }
    lambda
}

/// Exactly maximize the restricted problem over the convex hull of the
/// support, shrinking the support when weights hit zero. The objective is
/// nondecreasing throughout (concavity along each segment toward an
/// affine-hull maximizer), so outer iterations make monotone progress.
fn correct(p: &SimplexQuadraticProblem, support: &mut Vec<usize>, weights: &mut Vec<f64>) {
    loop {
        let k = support.len();
        if k == 1 {
            weights[0] = 1.0;
            return;
        }
        let Some(target) = affine_optimum(p, support) else {
            // Degenerate KKT system: nudge toward the affine optimum is
            // unavailable; keep the current feasible point.
            return;
        };
        // Largest t in [0, 1] keeping weights + t (target - weights) >= 0.
        let mut t = 1.0_f64;
        let mut blocker = None;
        for (idx, (&wi, &yi)) in weights.iter().zip(&target).enumerate() {
            if yi < 0.0 && wi > yi {
                let ti = wi / (wi - yi);
                if ti < t {
                    t = ti;
                    blocker = Some(idx);
                }
            }
        }
        for (wi, &yi) in weights.iter_mut().zip(&target) {
            *wi += t * (yi - *wi);
        }
        match blocker {
            None => {
                // Interior optimum reached; clean tiny negatives from
                // rounding and renormalize.
                let mut total = 0.0;
                for wi in weights.iter_mut() {
                    *wi = wi.max(0.0);
                    total += *wi;
                }
                for wi in weights.iter_mut() {
                    *wi /= total;
                }
                let mut idx = 0;
                while idx < support.len() {
                    if weights[idx] == 0.0 {
                        support.remove(idx);
                        weights.remove(idx);
                    } else {
                        idx += 1;
                    }
                }
                return;
            }
            Some(idx) => {
                support.remove(idx);
                weights.remove(idx);
                let total: f64 = weights.iter().sum();
                for wi in weights.iter_mut() {
                    *wi /= total;
                }
            }
        }
    }
}

/// Maximizer of the restricted objective over the affine hull of the
/// support (sum of weights = 1, signs free): bordered KKT system
/// `[eps G, 1; 1^T, 0] [y; nu] = [c_S; 1]` with `G` the Gram matrix of
/// the support columns. Returns `None` when the system is numerically
/// singular.
fn affine_optimum(p: &SimplexQuadraticProblem, support: &[usize]) -> Option<Vec<f64>> {
    // Affinely dependent columns make the plain system singular; the tiny
    // ridge regularizes it while moving the hull optimum by O(ridge).
    solve_kkt(p, support, 0.0).or_else(|| {
        let scale = support
            .iter()
            .map(|&i| p.eps * linalg::norm_sq(&p.columns[i]))
            .fold(0.0_f64, f64::max);
        solve_kkt(p, support, 1e-9 * (1.0 + scale))
    })
}

fn solve_kkt(p: &SimplexQuadraticProblem, support: &[usize], ridge: f64) -> Option<Vec<f64>> {
    let k = support.len();
    let n = k + 1;
    let mut a = vec![vec![0.0_f64; n + 1]; n];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[r][c] = p.eps * linalg::dot(&p.columns[i], &p.columns[j]);
        }
        a[r][r] += ridge;
        a[r][k] = 1.0;
        a[r][n] = p.linear[i];
    }
    a[k][..k].fill(1.0);
    a[k][n] = 1.0;

    // Gaussian elimination with partial pivoting.
    let scale = a
        .iter()
        .flat_map(|row| row[..n].iter())
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let pivot_floor = 1e-13 * (1.0 + scale);
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= pivot_floor {
            return None;
        }
        a.swap(col, piv);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut().take(n - col - 1) {
            let factor = row[col] / pivot_row[col];
            if factor != 0.0 {
                for (entry, &p_entry) in row[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                    *entry -= factor * p_entry;
                }
            }
        }
    }
    let mut sol = vec![0.0_f64; n];
    for r in (0..n).rev() {
        let mut acc = a[r][n];
        for c in (r + 1)..n {
            acc -= a[r][c] * sol[c];
        }
        sol[r] = acc / a[r][r];
    }
    sol.truncate(k);
    Some(sol)
}
