//! Statistical distances and one-dimensional adaptive quadrature.

use crate::error::{Error, Result};

/// Kolmogorov-Smirnov statistic: sup |F_emp(x) − F(x)| against a reference
/// CDF. Sorts a copy of the samples.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Validation(
            "KS statistic needs at least one sample".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN sample in KS input"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = ((i + 1) as f64 / n - f).abs();
        let lo = (f - i as f64 / n).abs();
        d = d.max(hi).max(lo);
    }
    Ok(d.min(1.0))
}

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Recursion depth is bounded; the worst panel's estimate is used
/// if the bound is hit (integrands here are smooth, so this is not
/// reached in practice).
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fb, fm, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1)
            + simpson_recurse(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::normal_cdf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_rejects_empty_input() {
        assert!(ks_statistic(&[], |_| 0.5).is_err());
    }

    #[test]
    fn ks_of_constant_samples() {
        // All mass at c against a continuous CDF: D = max(F(c), 1 − F(c)).
        let c = 0.3f64;
        let cdf = |x: f64| normal_cdf(x);
        let d = ks_statistic(&vec![c; 100], cdf).unwrap();
        let expect = normal_cdf(c).max(1.0 - normal_cdf(c));
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn ks_self_consistency_at_1e5_samples() {
        // Samples drawn from the reference law itself: √n·D exceeds 1.95
        // with probability ≈ 1e-3 (Kolmogorov distribution).
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let n = 100_000usize;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let d = ks_statistic(&samples, normal_cdf).unwrap();
        assert!(d < 1.95 / (n as f64).sqrt(), "KS = {d}");
    }

    #[test]
    fn simpson_matches_closed_forms() {
        let got = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((got - 2.0).abs() < 1e-11);
        let got = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 30.0, 1e-13);
        assert!((got - (1.0 - (-30.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn simpson_craig_integral_matches_erfc_form() {
        // (1/π)∫₀^{π/2} exp(−s²/(2sin²x)) dx = Q(s)
        use crate::numerics::special::craig_q;
        for &s in &[0.1, 1.0, 3.0] {
            let integral = adaptive_simpson(
                &|x: f64| {
                    let sn = x.sin();
                    if sn == 0.0 {
                        0.0
                    } else {
                        (-s * s / (2.0 * sn * sn)).exp()
                    }
                },
                0.0,
                std::f64::consts::FRAC_PI_2,
                1e-13,
            ) / std::f64::consts::PI;
            assert!(
                (integral - craig_q(s)).abs() < 1e-10,
                "s={s}: {integral} vs {}",
                craig_q(s)
            );
        }
    }
}
