//! Damped Newton root finding with finite-difference Jacobians.
//!
//! Small dense systems only (the toolkit needs 2 unknowns for moment
//! matching and N+1 for resonant-network synthesis). Steps are backtracked
//! by halving until the residual norm decreases, which also rejects steps
//! that wander into regions where the residual returns NaN.

use crate::error::{Error, Result};

/// Outcome of a Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonSolution {
    /// Solution estimate.
    pub x: Vec<f64>,
    /// Euclidean norm of the residual at `x`.
    pub residual_norm: f64,
    /// Newton iterations consumed.
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200;
const MAX_BACKTRACKS: usize = 40;

/// Damped Newton on a generic n-dimensional residual.
///
/// Deterministic: identical seed and residual give the identical iterate
/// sequence. Returns `NonConvergence` carrying the best point found when
/// the iteration budget is exhausted.
pub fn newton_system(
    residual: impl Fn(&[f64]) -> Vec<f64>,
    seed: &[f64],
    tol: f64,
) -> Result<NewtonSolution> {
    let n = seed.len();
    let mut x = seed.to_vec();
    let mut r = residual(&x);
    assert_eq!(r.len(), n, "residual dimension must match unknowns");
    let mut rnorm = norm(&r);

    for iter in 0..MAX_ITERATIONS {
        if rnorm < tol {
            return Ok(NewtonSolution {
                x,
                residual_norm: rnorm,
                iterations: iter,
            });
        }
        // Forward-difference Jacobian, column j = (r(x + h eⱼ) − r(x))/h.
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual(&xp);
            for i in 0..n {
                jac[i][j] = (rp[i] - r[i]) / h;
            }
        }
        let mut step = solve_dense(&mut jac, &r).ok_or_else(|| Error::NonConvergence {
            context: "Newton: singular Jacobian".into(),
            iterations: iter,
            residual: rnorm,
        })?;
        for s in &mut step {
            *s = -*s;
        }
        // Backtracking line search.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let xt: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + lambda * si).collect();
            let rt = residual(&xt);
            let rtnorm = norm(&rt);
            if rtnorm.is_finite() && rtnorm < rnorm {
                x = xt;
                r = rt;
                rnorm = rtnorm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled: either done to rounding level or genuinely stuck.
            if rnorm < tol {
                break;
            }
            return Err(Error::NonConvergence {
                context: "Newton: line search stalled".into(),
                iterations: iter + 1,
                residual: rnorm,
            });
        }
    }
    if rnorm < tol {
        Ok(NewtonSolution {
            x,
            residual_norm: rnorm,
            iterations: MAX_ITERATIONS,
        })
    } else {
        Err(Error::NonConvergence {
            context: "Newton: iteration budget exhausted".into(),
            iterations: MAX_ITERATIONS,
            residual: rnorm,
        })
    }
}

/// Two-unknown convenience wrapper around [`newton_system`].
pub fn solve_2x2_nonlinear(
    residual: impl Fn(f64, f64) -> (f64, f64),
    seed: [f64; 2],
    tol: f64,
) -> Result<NewtonSolution> {
    newton_system(
        |x| {
            let (a, b) = residual(x[0], x[1]);
            vec![a, b]
        },
        &seed,
        tol,
    )
}

/// Gaussian elimination with partial pivoting; consumes the matrix.
/// Returns `None` for a numerically singular system.
fn solve_dense(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= a[col][col];
        for row in 0..col {
            x[row] -= a[row][col] * x[col];
        }
    }
    Some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
