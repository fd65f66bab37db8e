//! Random path composition and the lognormal diverse-medium fading law.
//!
//! The path from transmitter to receiver crosses W random-length segments
//! of catalog materials. Each segment attenuates the field by
//! exp(−Δr/δ(f)), so the total eddy-loss factor is
//!
//! ```text
//! G(f) = exp(−Σᵢ Δrᵢ/δᵢ(f)).
//! ```
//!
//! With independent segment lengths of mean Eᵢ and variance Dᵢ, the
//! central limit theorem makes ln G(f) asymptotically normal with
//!
//! ```text
//! mean  Ē(f) = −Σᵢ Eᵢ/δᵢ(f),     variance  D̄(f) = Σᵢ Dᵢ/δᵢ²(f),
//! ```
//!
//! regardless of the per-segment length distribution. Combining with the
//! deterministic gain parts: ln|H| ~ N(H̃ + Ē, D̄), the phase is the fixed
//! θ, and ln|H|² ~ N(H̄ + 2Ē, 4D̄).
//!
//! Sampling uses one counter-based stream per (user, band, draw) so
//! parallel Monte Carlo is reproducible under a single seed.

use crate::circuit::GainParts;
use crate::error::{Error, Result};
use crate::media::{skin_depth, Medium};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-segment length distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthDistribution {
    /// Uniform on [E − √(3D), E + √(3D)].
    Uniform,
    /// Normal(E, D) rejected to non-negative values.
    GaussianTruncated,
    /// Exponential with mean E (which forces D = E²).
    Exponential,
}

/// One random-length segment of a single material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub medium: Medium,
    /// E, m.
    pub mean_length: f64,
    /// D, m².
    pub length_variance: f64,
    pub distribution: LengthDistribution,
}

impl PathSegment {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_length > 0.0) {
            return Err(Error::Validation(format!(
                "segment '{}': mean length must be positive",
                self.medium.name
            )));
        }
        if !(self.length_variance >= 0.0) {
            return Err(Error::Validation(format!(
                "segment '{}': length variance must be non-negative",
                self.medium.name
            )));
        }
        match self.distribution {
            LengthDistribution::Uniform => {
                // keep the support positive
                if (3.0 * self.length_variance).sqrt() >= self.mean_length {
                    return Err(Error::Validation(format!(
                        "segment '{}': uniform half-width √(3D) = {} must stay below the mean {}",
                        self.medium.name,
                        (3.0 * self.length_variance).sqrt(),
                        self.mean_length
                    )));
                }
            }
            LengthDistribution::Exponential => {
                let implied = self.mean_length * self.mean_length;
                if ((self.length_variance - implied) / implied).abs() > 1e-6 {
                    return Err(Error::Validation(format!(
                        "segment '{}': exponential lengths force D = E² = {implied}, got {}",
                        self.medium.name, self.length_variance
                    )));
                }
            }
            LengthDistribution::GaussianTruncated => {}
        }
        Ok(())
    }
}

/// Ordered random segments between transmitter and one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathModel {
    pub segments: Vec<PathSegment>,
    /// Global permeability used for every skin-depth evaluation, H/m.
    pub permeability: f64,
}

impl PathModel {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Validation("path needs at least one segment".into()));
        }
        for s in &self.segments {
            s.validate()?;
        }
        Ok(())
    }

    /// Σ Eᵢ, m.
    pub fn total_mean_length(&self) -> f64 {
        self.segments.iter().map(|s| s.mean_length).sum()
    }

    /// Rescale all segment means (and variances, quadratically) so the
    /// means sum to `distance`.
    pub fn normalized_to_distance(&self, distance: f64) -> Result<PathModel> {
        if !(distance > 0.0) {
            return Err(Error::Validation("distance must be positive".into()));
        }
        let scale = distance / self.total_mean_length();
        let segments = self
            .segments
            .iter()
            .map(|s| PathSegment {
                mean_length: s.mean_length * scale,
                length_variance: s.length_variance * scale * scale,
                ..s.clone()
            })
            .collect();
        Ok(PathModel {
            segments,
            permeability: self.permeability,
        })
    }

    fn skin_depths(&self, f_hz: f64) -> Result<Vec<f64>> {
        self.segments
            .iter()
            .map(|s| Ok(skin_depth(&s.medium, f_hz, self.permeability)?.meters))
            .collect()
    }
}

/// Mean/variance pair of a natural-log-domain Gaussian; the universal
/// fading descriptor for G, |H|, |H|², the SNR, and the matched sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    /// Mean of the log, natural-log units.
    pub mu: f64,
    /// Variance of the log, squared natural-log units; ≥ 0.
    pub sigma2: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma2: f64) -> Result<LognormalParams> {
        if sigma2 < 0.0 || !mu.is_finite() || !sigma2.is_finite() {
            return Err(Error::Validation(format!(
                "invalid lognormal parameters mu={mu}, sigma2={sigma2}"
            )));
        }
        Ok(LognormalParams { mu, sigma2 })
    }

    /// PDF of X = exp(Z): 1/(x√(2πD))·exp(−(ln x − E)²/(2D)) for x > 0.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.sigma2 == 0.0 {
            return if x == self.mu.exp() { f64::INFINITY } else { 0.0 };
        }
        let z = x.ln() - self.mu;
        (-z * z / (2.0 * self.sigma2)).exp()
            / (x * (2.0 * std::f64::consts::PI * self.sigma2).sqrt())
    }

    /// CDF of X = exp(Z), evaluated as erfc(−·/√2)/2 so the deep lower
    /// tail keeps full relative accuracy.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.sigma2 == 0.0 {
            return if x >= self.mu.exp() { 1.0 } else { 0.0 };
        }
        crate::numerics::special::normal_cdf((x.ln() - self.mu) / self.sigma2.sqrt())
    }

    /// Mean of X: exp(E + D/2).
    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma2).exp()
    }

    /// Variance of X: (exp(D) − 1)·exp(2E + D).
    pub fn variance(&self) -> f64 {
        self.sigma2.exp_m1() * (2.0 * self.mu + self.sigma2).exp()
    }

    /// Median of X: exp(E).
    pub fn median(&self) -> f64 {
        self.mu.exp()
    }
}

/// Lognormal law of the eddy-loss factor G at frequency f:
/// mu = −Σ Eᵢ/δᵢ(f), sigma2 = Σ Dᵢ/δᵢ²(f).
pub fn gain_log_params(path: &PathModel, f_hz: f64) -> Result<LognormalParams> {
    let deltas = path.skin_depths(f_hz)?;
    let mut mu = 0.0;
    let mut sigma2 = 0.0;
    for (s, d) in path.segments.iter().zip(&deltas) {
        mu -= s.mean_length / d;
        sigma2 += s.length_variance / (d * d);
    }
    LognormalParams::new(mu, sigma2)
}

/// Complete stochastic channel law at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLaw {
    /// ln|H| ~ N(H̃ + Ē, D̄).
    pub amplitude: LognormalParams,
    /// arg H, fixed across realizations.
    pub phase: f64,
    /// ln|H|² ~ N(H̄ + 2Ē, 4D̄).
    pub power: LognormalParams,
}

/// Combine the deterministic gain parts with the path fading law.
pub fn channel_log_params(path: &PathModel, f_hz: f64, det: &GainParts) -> Result<ChannelLaw> {
    let g = gain_log_params(path, f_hz)?;
    let amplitude = LognormalParams {
        mu: det.log_amplitude + g.mu,
        sigma2: g.sigma2,
    };
    let power = LognormalParams {
        mu: det.log_power + 2.0 * g.mu,
        sigma2: 4.0 * g.sigma2,
    };
    Ok(ChannelLaw {
        amplitude,
        phase: det.phase,
        power,
    })
}

/// Covariance of ln G between two frequencies under shared segment draws:
/// Σ Dᵢ/(δᵢ(f₁)·δᵢ(f₂)).
pub fn cross_band_covariance(path: &PathModel, f1_hz: f64, f2_hz: f64) -> Result<f64> {
    let d1 = path.skin_depths(f1_hz)?;
    let d2 = path.skin_depths(f2_hz)?;
    Ok(path
        .segments
        .iter()
        .zip(d1.iter().zip(&d2))
        .map(|(s, (a, b))| s.length_variance / (a * b))
        .sum())
}

/// Correlation coefficient of ln G between two frequencies, in [0, 1].
pub fn cross_band_correlation(path: &PathModel, f1_hz: f64, f2_hz: f64) -> Result<f64> {
    let cov = cross_band_covariance(path, f1_hz, f2_hz)?;
    let v1 = gain_log_params(path, f1_hz)?.sigma2;
    let v2 = gain_log_params(path, f2_hz)?.sigma2;
    if v1 == 0.0 || v2 == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (v1 * v2).sqrt()).clamp(0.0, 1.0))
}

/// Stream id for the shared (band-independent) draw of a sample.
pub const SHARED_BAND_STREAM: u8 = 0xFF;

/// Counter-based generator for one (user, band, draw) triple. Each triple
/// is an independent ChaCha stream of the master seed.
pub fn draw_rng(seed: u64, user: u8, band: u8, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    debug_assert!(draw < (1 << 48));
    rng.set_stream(((user as u64) << 56) | ((band as u64) << 48) | (draw & 0xFFFF_FFFF_FFFF));
    rng
}

const TRUNCATED_GAUSSIAN_ATTEMPTS: usize = 1000;

fn draw_length(segment: &PathSegment, rng: &mut impl RngCore) -> Result<f64> {
    let e = segment.mean_length;
    let d = segment.length_variance;
    match segment.distribution {
        LengthDistribution::Uniform => {
            let half = (3.0 * d).sqrt();
            let u: f64 = rng.gen();
            Ok(e - half + 2.0 * half * u)
        }
        LengthDistribution::GaussianTruncated => {
            let sd = d.sqrt();
            if sd == 0.0 {
                return Ok(e);
            }
            for _ in 0..TRUNCATED_GAUSSIAN_ATTEMPTS {
                // Box-Muller; explicit so the stream layout is stable.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen();
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                let v = e + sd * z;
                if v >= 0.0 {
                    return Ok(v);
                }
            }
            Err(Error::Sampling(format!(
                "truncated Gaussian for segment '{}' rejected {TRUNCATED_GAUSSIAN_ATTEMPTS} draws in a row",
                segment.medium.name
            )))
        }
        LengthDistribution::Exponential => {
            let u: f64 = rng.gen();
            Ok(-e * (1.0 - u).ln())
        }
    }
}

/// One length draw per segment from its declared distribution;
/// deterministic for a given generator state.
pub fn sample_path_lengths(path: &PathModel, rng: &mut impl RngCore) -> Result<Vec<f64>> {
    path.segments.iter().map(|s| draw_length(s, rng)).collect()
}

/// Seeded convenience wrapper for a single draw index.
pub fn sample_path_lengths_seeded(path: &PathModel, seed: u64, draw: u64) -> Result<Vec<f64>> {
    let mut rng = draw_rng(seed, 0, SHARED_BAND_STREAM, draw);
    sample_path_lengths(path, &mut rng)
}

/// Exact eddy-loss factor G = exp(−Σ Δrᵢ/δᵢ(f)) for concrete segment
/// lengths (the product form, not the lognormal approximation).
pub fn sample_gain(path: &PathModel, f_hz: f64, lengths: &[f64]) -> Result<f64> {
    if lengths.len() != path.segments.len() {
        return Err(Error::Validation(format!(
            "got {} lengths for {} segments",
            lengths.len(),
            path.segments.len()
        )));
    }
    let deltas = path.skin_depths(f_hz)?;
    let exponent: f64 = lengths
        .iter()
        .zip(&deltas)
        .map(|(dr, delta)| dr / delta)
        .sum();
    Ok((-exponent).exp())
}

/// How per-band draws relate across bands of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// One physical path per sample, shared by every band.
    SharedPath,
    /// Fresh segment draws per band (the independence the closed-form
    /// diversity analysis assumes).
    IndependentPerBand,
}

/// Sample per-band squared channel magnitudes |H(fₙ)|².
///
/// Returns `out[band][sample]`. `dets` must align with `freqs`.
pub fn sample_channel_matrix(
    path: &PathModel,
    freqs: &[f64],
    dets: &[GainParts],
    mode: SamplingMode,
    seed: u64,
    samples: usize,
) -> Result<Vec<Vec<f64>>> {
    if freqs.len() != dets.len() || freqs.is_empty() {
        return Err(Error::Validation(
            "need matching, non-empty frequency and gain-part lists".into(),
        ));
    }
    if freqs.len() >= SHARED_BAND_STREAM as usize {
        return Err(Error::Validation("too many bands for the stream layout".into()));
    }
    let deltas: Vec<Vec<f64>> = freqs
        .iter()
        .map(|&f| path.skin_depths(f))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; samples]; freqs.len()];
    for draw in 0..samples {
        match mode {
            SamplingMode::SharedPath => {
                let mut rng = draw_rng(seed, 0, SHARED_BAND_STREAM, draw as u64);
                let lengths = sample_path_lengths(path, &mut rng)?;
                for (b, det) in dets.iter().enumerate() {
                    let expo: f64 = lengths
                        .iter()
                        .zip(&deltas[b])
                        .map(|(dr, delta)| dr / delta)
                        .sum();
                    out[b][draw] = (det.log_power - 2.0 * expo).exp();
                }
            }
            SamplingMode::IndependentPerBand => {
                for (b, det) in dets.iter().enumerate() {
                    let mut rng = draw_rng(seed, 0, b as u8, draw as u64);
                    let lengths = sample_path_lengths(path, &mut rng)?;
                    let expo: f64 = lengths
                        .iter()
                        .zip(&deltas[b])
                        .map(|(dr, delta)| dr / delta)
                        .sum();
                    out[b][draw] = (det.log_power - 2.0 * expo).exp();
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::MediumCatalog;
    use crate::numerics::{ks_statistic, special::normal_cdf};
    use proptest::prelude::*;

    const MU: f64 = crate::media::VACUUM_PERMEABILITY;

    fn segment(name: &str, e: f64, d: f64) -> PathSegment {
        let cat = MediumCatalog::builtin();
        PathSegment {
            medium: cat.get(name).unwrap().clone(),
            mean_length: e,
            length_variance: d,
            distribution: LengthDistribution::Uniform,
        }
    }

    fn path(segments: Vec<PathSegment>) -> PathModel {
        PathModel {
            segments,
            permeability: MU,
        }
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
            sab += (x - ma) * (y - mb);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn degenerate_variance_gives_deterministic_gain() {
        let p = path(vec![segment("soil", 3.0, 0.0), segment("water", 1.0, 0.0)]);
        let lp = gain_log_params(&p, 50e3).unwrap();
        assert_eq!(lp.sigma2, 0.0);
        let lengths = sample_path_lengths_seeded(&p, 9, 0).unwrap();
        assert_eq!(lengths, vec![3.0, 1.0]);
        let g = sample_gain(&p, 50e3, &lengths).unwrap();
        assert!(((g - lp.mu.exp()) / g).abs() < 1e-14);
    }

    #[test]
    fn unit_cancellation_single_segment() {
        // E = δ(f), D = δ²(f) would break the uniform-support invariant,
        // so declare the segment Gaussian-truncated.
        let cat = MediumCatalog::builtin();
        let water = cat.get("water").unwrap().clone();
        let delta = skin_depth(&water, 50e3, MU).unwrap().meters;
        let p = path(vec![PathSegment {
            medium: water,
            mean_length: delta,
            length_variance: delta * delta,
            distribution: LengthDistribution::GaussianTruncated,
        }]);
        let lp = gain_log_params(&p, 50e3).unwrap();
        assert!((lp.mu + 1.0).abs() < 1e-14);
        assert!((lp.sigma2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_segment_moments_match_direct_sums() {
        let cat = MediumCatalog::builtin();
        let p = path(vec![segment("soil", 5.0, 0.25), segment("copper", 2e-4, 4e-10)]);
        let lp = gain_log_params(&p, 50e3).unwrap();
        let d_soil = skin_depth(cat.get("soil").unwrap(), 50e3, MU).unwrap().meters;
        let d_cu = skin_depth(cat.get("copper").unwrap(), 50e3, MU).unwrap().meters;
        let want_mu = -(5.0 / d_soil + 2e-4 / d_cu);
        let want_s2 = 0.25 / (d_soil * d_soil) + 4e-10 / (d_cu * d_cu);
        assert!(((lp.mu - want_mu) / want_mu).abs() < 1e-14);
        assert!(((lp.sigma2 - want_s2) / want_s2).abs() < 1e-14);
    }

    #[test]
    fn lemma_parameters_are_additive_under_concatenation() {
        let a = path(vec![segment("soil", 4.0, 0.5), segment("water", 1.5, 0.05)]);
        let b = path(vec![segment("titanium", 2e-3, 1e-8)]);
        let mut joined = a.clone();
        joined.segments.extend(b.segments.clone());
        for f in [20e3, 50e3, 90e3] {
            let pa = gain_log_params(&a, f).unwrap();
            let pb = gain_log_params(&b, f).unwrap();
            let pj = gain_log_params(&joined, f).unwrap();
            assert!(((pj.mu - (pa.mu + pb.mu)) / pj.mu).abs() < 1e-13);
            assert!(((pj.sigma2 - (pa.sigma2 + pb.sigma2)) / pj.sigma2).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_draws_stay_in_support() {
        let s = segment("soil", 2.0, 0.12);
        let p = path(vec![s.clone()]);
        let half = (3.0 * s.length_variance).sqrt();
        for draw in 0..2000 {
            let l = sample_path_lengths_seeded(&p, 7, draw).unwrap()[0];
            assert!(l >= s.mean_length - half && l <= s.mean_length + half);
        }
    }

    #[test]
    fn law_of_large_numbers_for_each_distribution() {
        let cat = MediumCatalog::builtin();
        let n = 400_000usize;
        for (dist, e, d) in [
            (LengthDistribution::Uniform, 2.0, 0.3),
            (LengthDistribution::GaussianTruncated, 5.0, 0.4),
            (LengthDistribution::Exponential, 1.5, 2.25),
        ] {
            let p = path(vec![PathSegment {
                medium: cat.get("soil").unwrap().clone(),
                mean_length: e,
                length_variance: d,
                distribution: dist,
            }]);
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for draw in 0..n {
                let l = sample_path_lengths_seeded(&p, 11, draw as u64).unwrap()[0];
                sum += l;
                sum2 += l * l;
            }
            let mean = sum / n as f64;
            let var = sum2 / n as f64 - mean * mean;
            let se_mean = (d / n as f64).sqrt();
            assert!(
                (mean - e).abs() < 4.0 * se_mean,
                "{dist:?}: mean {mean} vs {e} (4·SE = {})",
                4.0 * se_mean
            );
            assert!(
                ((var - d) / d).abs() < 0.02,
                "{dist:?}: variance {var} vs {d}"
            );
        }
    }

    #[test]
    fn zero_lengths_give_unit_gain_and_one_skin_depth_gives_inverse_e() {
        let p = path(vec![segment("water", 3.0, 0.1)]);
        assert_eq!(sample_gain(&p, 50e3, &[0.0]).unwrap(), 1.0);
        let cat = MediumCatalog::builtin();
        let delta = skin_depth(cat.get("water").unwrap(), 50e3, MU).unwrap().meters;
        let g = sample_gain(&p, 50e3, &[delta]).unwrap();
        assert!(((g - (-1.0f64).exp()) / g).abs() < 1e-14);
    }

    #[test]
    fn gain_samples_pass_normality_check_at_w50() {
        // 50 comparable segments, 1e5 samples: KS of ln G against the
        // analytic normal law stays below the 0.02 toolkit tolerance.
        let segs: Vec<PathSegment> = (0..50)
            .map(|i| segment("water", 0.4 + 0.004 * i as f64, 0.01))
            .collect();
        let p = path(segs);
        let lp = gain_log_params(&p, 50e3).unwrap();
        let n = 100_000usize;
        let mut logs = Vec::with_capacity(n);
        for draw in 0..n {
            let lengths = sample_path_lengths_seeded(&p, 20_260_501, draw as u64).unwrap();
            let g = sample_gain(&p, 50e3, &lengths).unwrap();
            logs.push(g.ln());
        }
        let sd = lp.sigma2.sqrt();
        let ks = ks_statistic(&logs, |x| normal_cdf((x - lp.mu) / sd)).unwrap();
        assert!(ks < 0.02, "KS = {ks}");
    }

    #[test]
    fn normality_improves_with_segment_count() {
        // Fixed per-segment statistics, growing segment count: the KS
        // distance to the limiting normal law shrinks. Exponential segment
        // lengths (skewness 2) keep the convergence signal well above the
        // Monte Carlo noise floor. Deterministic under the committed seed.
        let cat = MediumCatalog::builtin();
        let n = 400_000usize;
        let mut last = f64::INFINITY;
        for w in [5usize, 20, 50] {
            let p = path(
                (0..w)
                    .map(|_| PathSegment {
                        medium: cat.get("water").unwrap().clone(),
                        mean_length: 0.5,
                        length_variance: 0.25,
                        distribution: LengthDistribution::Exponential,
                    })
                    .collect(),
            );
            let lp = gain_log_params(&p, 50e3).unwrap();
            let sd = lp.sigma2.sqrt();
            let mut logs = Vec::with_capacity(n);
            for draw in 0..n {
                let lengths = sample_path_lengths_seeded(&p, 40, draw as u64).unwrap();
                logs.push(sample_gain(&p, 50e3, &lengths).unwrap().ln());
            }
            let ks = ks_statistic(&logs, |x| normal_cdf((x - lp.mu) / sd)).unwrap();
            assert!(ks < last, "KS({w}) = {ks} did not improve on {last}");
            last = ks;
        }
    }

    #[test]
    fn covariance_collapses_to_variance_at_equal_frequencies() {
        let p = path(vec![segment("water", 2.0, 0.2), segment("lead", 1e-3, 1e-8)]);
        let c = cross_band_covariance(&p, 50e3, 50e3).unwrap();
        let v = gain_log_params(&p, 50e3).unwrap().sigma2;
        assert!(((c - v) / v).abs() < 1e-14);
    }

    #[test]
    fn all_metal_path_is_perfectly_correlated_across_bands() {
        // Good-conductor skin depths all scale as f^(-1/2), so ln G at two
        // frequencies are exactly proportional.
        let p = path(vec![
            segment("copper", 1e-4, 1e-10),
            segment("titanium", 1e-3, 1e-8),
            segment("zinc", 3e-4, 2e-9),
        ]);
        let rho = cross_band_correlation(&p, 40e3, 60e3).unwrap();
        assert!((rho - 1.0).abs() < 1e-12, "rho = {rho}");
    }

    #[test]
    fn mixed_path_covariance_matches_monte_carlo() {
        let p = path(vec![segment("water", 3.0, 0.5), segment("copper", 2e-4, 1e-9)]);
        let (f1, f2) = (40e3, 60e3);
        let want = cross_band_covariance(&p, f1, f2).unwrap();
        let n = 1_000_000usize;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        for draw in 0..n {
            let lengths = sample_path_lengths_seeded(&p, 5, draw as u64).unwrap();
            let x = sample_gain(&p, f1, &lengths).unwrap().ln();
            let y = sample_gain(&p, f2, &lengths).unwrap().ln();
            s1 += x;
            s2 += y;
            s12 += x * y;
        }
        let nf = n as f64;
        let cov = s12 / nf - (s1 / nf) * (s2 / nf);
        let v1 = gain_log_params(&p, f1).unwrap().sigma2;
        let v2 = gain_log_params(&p, f2).unwrap().sigma2;
        let se = ((v1 * v2 + want * want) / nf).sqrt();
        assert!(
            (cov - want).abs() < 3.0 * se,
            "cov {cov:e} vs {want:e}, 3·SE = {:e}",
            3.0 * se
        );
    }

    #[test]
    fn channel_law_scaling_and_phase_invariance() {
        let det = GainParts {
            log_amplitude: -6.7,
            phase: std::f64::consts::FRAC_PI_2,
            log_power: -13.4,
        };
        let p = path(vec![segment("water", 2.5, 0.3)]);
        let law = channel_log_params(&p, 50e3, &det).unwrap();
        assert_eq!(law.power.mu, 2.0 * law.amplitude.mu);
        assert_eq!(law.power.sigma2, 4.0 * law.amplitude.sigma2);
        assert_eq!(law.phase, det.phase);
        // D̄ = 0 path: |H| deterministic at exp(H̃ + Ē)
        let p0 = path(vec![segment("water", 2.5, 0.0)]);
        let law0 = channel_log_params(&p0, 50e3, &det).unwrap();
        assert_eq!(law0.amplitude.sigma2, 0.0);
        let g = gain_log_params(&p0, 50e3).unwrap();
        assert_eq!(law0.amplitude.mu, det.log_amplitude + g.mu);
    }

    #[test]
    fn shared_path_metal_bands_have_rank_correlation_one() {
        let p = path(vec![segment("copper", 2e-4, 1e-9), segment("tin", 5e-4, 1e-8)]);
        let det = GainParts {
            log_amplitude: -5.0,
            phase: 0.0,
            log_power: -10.0,
        };
        let m = sample_channel_matrix(
            &p,
            &[40e3, 60e3],
            &[det, det],
            SamplingMode::SharedPath,
            3,
            4000,
        )
        .unwrap();
        let a: Vec<f64> = m[0].iter().map(|x| x.ln()).collect();
        let b: Vec<f64> = m[1].iter().map(|x| x.ln()).collect();
        let corr = pearson(&a, &b);
        assert!((corr - 1.0).abs() < 1e-10, "corr = {corr}");
    }

    #[test]
    fn independent_mode_decorrelates_bands() {
        let p = path(vec![segment("copper", 2e-4, 1e-9), segment("tin", 5e-4, 1e-8)]);
        let det = GainParts {
            log_amplitude: -5.0,
            phase: 0.0,
            log_power: -10.0,
        };
        let n = 40_000usize;
        let m = sample_channel_matrix(
            &p,
            &[40e3, 60e3],
            &[det, det],
            SamplingMode::IndependentPerBand,
            3,
            n,
        )
        .unwrap();
        let a: Vec<f64> = m[0].iter().map(|x| x.ln()).collect();
        let b: Vec<f64> = m[1].iter().map(|x| x.ln()).collect();
        let corr = pearson(&a, &b);
        assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn single_band_modes_agree_statistically() {
        let p = path(vec![segment("water", 2.0, 0.2)]);
        let det = GainParts {
            log_amplitude: -4.0,
            phase: 0.1,
            log_power: -8.0,
        };
        let n = 50_000usize;
        let shared =
            sample_channel_matrix(&p, &[50e3], &[det], SamplingMode::SharedPath, 21, n).unwrap();
        let indep =
            sample_channel_matrix(&p, &[50e3], &[det], SamplingMode::IndependentPerBand, 21, n)
                .unwrap();
        let mean = |v: &[f64]| v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64;
        let law = channel_log_params(&p, 50e3, &det).unwrap().power;
        let se = (law.sigma2 / n as f64).sqrt();
        assert!((mean(&shared[0]) - law.mu).abs() < 4.0 * se);
        assert!((mean(&indep[0]) - law.mu).abs() < 4.0 * se);
    }

    #[test]
    fn exponential_variance_mismatch_rejected() {
        let cat = MediumCatalog::builtin();
        let s = PathSegment {
            medium: cat.get("soil").unwrap().clone(),
            mean_length: 2.0,
            length_variance: 1.0, // must be 4
            distribution: LengthDistribution::Exponential,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn uniform_support_invariant_rejected_when_too_wide() {
        let cat = MediumCatalog::builtin();
        let s = PathSegment {
            medium: cat.get("soil").unwrap().clone(),
            mean_length: 1.0,
            length_variance: 0.34, // √(3·0.34) > 1
            distribution: LengthDistribution::Uniform,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn normalization_rescales_means_to_distance() {
        let p = path(vec![segment("soil", 6.0, 0.25), segment("water", 2.0, 0.04)]);
        let q = p.normalized_to_distance(20.0).unwrap();
        assert!((q.total_mean_length() - 20.0).abs() < 1e-12);
        // variances scale with the square of the mean scale (20/8 = 2.5)
        assert!((q.segments[0].length_variance - 0.25 * 6.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gain_bounded_by_one_for_nonnegative_lengths(
            l1 in 0.0f64..10.0,
            l2 in 0.0f64..5.0,
            f in 5e3f64..5e5,
        ) {
            let p = path(vec![segment("water", 3.0, 0.1), segment("soil", 4.0, 0.2)]);
            let g = sample_gain(&p, f, &[l1, l2]).unwrap();
            prop_assert!(g > 0.0 && g <= 1.0);
        }

        #[test]
        fn monotone_in_segment_statistics(
            e in 0.5f64..5.0,
            bump in 0.01f64..2.0,
            f in 1e4f64..1e5,
        ) {
            let base = path(vec![segment("water", e, 0.01)]);
            let more_mean = path(vec![segment("water", e + bump, 0.01)]);
            let more_var = path(vec![segment("water", e, 0.01 + bump / 100.0)]);
            let p0 = gain_log_params(&base, f).unwrap();
            let p1 = gain_log_params(&more_mean, f).unwrap();
            let p2 = gain_log_params(&more_var, f).unwrap();
            prop_assert!(p1.mu < p0.mu);
            prop_assert!(p2.sigma2 > p0.sigma2);
        }
    }
}
