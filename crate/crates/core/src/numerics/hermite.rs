//! Gauss-Hermite quadrature for the physicists' weight e^(−x²).
//!
//! Nodes are the zeros of Hₙ; with weights bᵢ the rule satisfies
//!
//! ```text
//! ∫ f(x) e^(−x²) dx ≈ Σ bᵢ f(cᵢ),    Σ bᵢ = √π,
//! ```
//!
//! exact for polynomials of degree ≤ 2n−1.
//!
//! Construction: Golub-Welsch. The Jacobi matrix of the orthonormal
//! Hermite family is symmetric tridiagonal with zero diagonal and
//! off-diagonal β_k = √(k/2); its eigenvalues are the nodes. Each
//! eigenvalue is then polished with Newton steps on the orthonormal
//! three-term recurrence and the weight recovered from the Christoffel
//! function, bᵢ = 1/Σ_{k<n} p_k(cᵢ)².
//!
//! At order 500 the recurrence values span hundreds of orders of magnitude
//! outside the oscillatory region, so the recurrence runs with an explicit
//! decimal scaling exponent instead of raw doubles.

use crate::error::{Error, Result};

/// Nodes and weights of a Gauss-Hermite rule (physicists' convention).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Nodes cᵢ, ascending, exactly symmetric about 0.
    pub nodes: Vec<f64>,
    /// Weights bᵢ > 0 matching `nodes`. For orders ≳ 400 the extreme-tail
    /// weights fall below the smallest subnormal double and flush to 0.
    pub weights: Vec<f64>,
    /// Number of points.
    pub order: usize,
}

impl QuadratureRule {
    /// Σ bᵢ f(cᵢ): the quadrature approximation of ∫ f e^(−x²) dx.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&c, &b)| b * f(c))
            .sum()
    }
}

/// Largest supported rule order.
pub const MAX_ORDER: usize = 2000;

/// Decimal scale block for the recurrence: values carry a factor
/// 10^(280·blocks).
const BLOCK_LOG10: f64 = 280.0;
const RECURRENCE_LIMIT: f64 = 1e140;
const RECURRENCE_RESCALE: f64 = 1e-280;

/// Build the Gauss-Hermite rule of the given order (1 ≤ order ≤ 2000).
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Validation(format!(
            "quadrature order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![sqrt_pi],
            order,
        });
    }

    // Eigenvalues of the Jacobi matrix: diag 0, off-diag sqrt(k/2).
    let offdiag: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut eig = symmetric_tridiagonal_eigenvalues(vec![0.0; order], offdiag)?;
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Polish the positive half and mirror, so symmetry is exact.
    let half = order / 2;
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..half {
        let raw = 0.5 * (eig[order - 1 - i] - eig[i]); // symmetrized estimate
        let x = newton_polish(order, raw)?;
        let w = christoffel_weight(order, x);
        nodes[order - 1 - i] = x;
        nodes[i] = -x;
        weights[order - 1 - i] = w;
        weights[i] = w;
    }
    if order % 2 == 1 {
        nodes[half] = 0.0;
        weights[half] = christoffel_weight(order, 0.0);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
    })
}

/// Orthonormal Hermite values (p_{n-1}(x), p_n(x)), both multiplied by the
/// same (unreported) scale factor. Only scale-invariant ratios of the pair
/// are meaningful to callers.
fn scaled_pair(order: usize, x: f64) -> (f64, f64) {
    let mut pk_minus = 0.0f64;
    let mut pk = std::f64::consts::PI.powf(-0.25);
    for k in 0..order {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * pk - (kf / (kf + 1.0)).sqrt() * pk_minus;
        pk_minus = pk;
        pk = next;
        if pk.abs() > RECURRENCE_LIMIT || pk_minus.abs() > RECURRENCE_LIMIT {
            pk *= RECURRENCE_RESCALE;
            pk_minus *= RECURRENCE_RESCALE;
        }
    }
    (pk_minus, pk)
}

/// Newton refinement of a node estimate on p_n(x) = 0, using
/// p_n'(x) = √(2n)·p_{n-1}(x). The update ratio is scale-invariant.
fn newton_polish(order: usize, mut x: f64) -> Result<f64> {
    let dn = (2.0 * order as f64).sqrt();
    for _ in 0..50 {
        let (pnm1, pn) = scaled_pair(order, x);
        if pnm1 == 0.0 {
            break;
        }
        let step = pn / (dn * pnm1);
        x -= step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    let (pnm1, pn) = scaled_pair(order, x);
    if pn.abs() <= 1e-10 * dn * pnm1.abs() {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            context: format!("Gauss-Hermite Newton polish at order {order}"),
            iterations: 50,
            residual: (pn / (dn * pnm1)).abs(),
        })
    }
}

/// Weight from the Christoffel function: 1/Σ_{k=0}^{n-1} p_k(x)².
///
/// The partial sums can exceed the double range even when the final weight
/// is representable, so the sum carries a decimal block exponent. Central
/// nodes never rescale and take the exact 1/sum path.
fn christoffel_weight(order: usize, x: f64) -> f64 {
    let mut pk_minus = 0.0f64;
    let mut pk = std::f64::consts::PI.powf(-0.25);
    let mut p_blocks: i64 = 0; // p values carry 10^(280·p_blocks)
    let mut sum = pk * pk;
    let mut sum_blocks: i64 = 0; // sum carries 10^(560·sum_blocks)

    for k in 0..order - 1 {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * pk - (kf / (kf + 1.0)).sqrt() * pk_minus;
        pk_minus = pk;
        pk = next;
        if pk.abs() > RECURRENCE_LIMIT || pk_minus.abs() > RECURRENCE_LIMIT {
            pk *= RECURRENCE_RESCALE;
            pk_minus *= RECURRENCE_RESCALE;
            p_blocks += 1;
        }
        let delta = p_blocks - sum_blocks;
        if delta > 0 {
            // the running sum is negligible at the new scale
            sum *= 10f64.powf(-2.0 * BLOCK_LOG10 * delta as f64);
            sum_blocks = p_blocks;
            sum += pk * pk;
        } else {
            let down = 2.0 * BLOCK_LOG10 * (-delta) as f64;
            if down < 320.0 {
                sum += pk * pk * 10f64.powf(-down);
            }
        }
    }
    if sum_blocks == 0 {
        1.0 / sum
    } else {
        let log10_w = -(sum.log10() + 2.0 * BLOCK_LOG10 * sum_blocks as f64);
        if log10_w < -320.0 {
            0.0
        } else {
            10f64.powf(log10_w)
        }
    }
}

/// All eigenvalues of a symmetric tridiagonal matrix (diagonal `d`,
/// off-diagonal `e`) by the implicit-shift QL algorithm, eigenvalues only.
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    debug_assert_eq!(e.len(), n - 1);
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        'outer: loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::NonConvergence {
                    context: "tridiagonal QL eigenvalue iteration".into(),
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            // Wilkinson shift
            let gg = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let rr = gg.hypot(1.0);
            let mut g = d[m] - d[l] + e[l] / (gg + if gg >= 0.0 { rr } else { -rr });
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                let r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    continue 'outer;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}
