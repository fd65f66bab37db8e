//! Closed-form link performance under lognormal fading: per-band SNR laws,
//! ergodic capacity, average BER, outage, and the lognormal-sum matching
//! that powers the diversity analysis.
//!
//! Capacity fast path: with ln γ ~ N(E, D) and z the log-SNR,
//!
//! ```text
//! C/B = E[ln(1 + e^z)] = E[max(z, 0)] + Σᵢ aᵢ E[e^(−i|z|)]
//! ```
//!
//! whose pieces are exact Gaussian integrals:
//!
//! ```text
//! E[max(z,0)]  = √(D/2π)·e^(−E²/2D) + (E/2)·erfc(−E/√(2D))
//! E[e^(−i|z|)] = ½·e^(−E²/2D)·[erfcx((iD+E)/√(2D)) + erfcx((iD−E)/√(2D))]
//! ```
//!
//! Each erfcx term is rewritten through the reflection identity whenever
//! its argument is negative, so nothing overflows for any (E, D).
//!
//! Average BER uses the Craig-form reduction to a finite integral of the
//! SNR's moment generating function, with the MGF evaluated by the
//! Gauss-Hermite series
//!
//! ```text
//! M(s) = Σᵢ (bᵢ/√π)·exp(−s·exp(cᵢ√(2D) + E)).
//! ```

use crate::error::{Error, Result};
use crate::fading::LognormalParams;
use crate::numerics::generated::CAPACITY_FIT_COEFFICIENTS;
use crate::numerics::special::{erfc, erfcx, normal_cdf, softplus};
use crate::numerics::stats::adaptive_simpson;
use crate::numerics::{gauss_hermite_rule, solve_2x2_nonlinear, QuadratureRule};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Series length for the lognormal MGF evaluation.
pub const DEFAULT_MGF_ORDER: usize = 500;

/// Shared order-500 Gauss-Hermite rule, built once.
pub fn default_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite_rule(DEFAULT_MGF_ORDER).expect("default rule must build"))
}

/// Per-user power/noise bookkeeping for one band plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// P per band, W (one user's allocation).
    pub band_powers: Vec<f64>,
    /// Band widths, Hz.
    pub bandwidths: Vec<f64>,
    /// N₀, W/Hz.
    pub noise_density: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if self.band_powers.len() != self.bandwidths.len() || self.band_powers.is_empty() {
            return Err(Error::Validation(
                "budget needs matching, non-empty power and bandwidth lists".into(),
            ));
        }
        if !(self.noise_density > 0.0) {
            return Err(Error::Validation("noise density must be positive".into()));
        }
        if self
            .band_powers
            .iter()
            .chain(&self.bandwidths)
            .any(|&v| !(v > 0.0))
        {
            return Err(Error::Validation(
                "band powers and bandwidths must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which analysis produced an SNR distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    Multiplexing,
    Diversity,
}

impl std::fmt::Display for AnalysisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalysisMode::Multiplexing => write!(f, "multiplexing"),
            AnalysisMode::Diversity => write!(f, "diversity"),
        }
    }
}

/// Lognormal SNR law for one band (or for the combined diversity SNR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrDistribution {
    pub params: LognormalParams,
    /// Band index; `None` for the combined diversity law.
    pub band: Option<usize>,
    pub mode: AnalysisMode,
}

impl SnrDistribution {
    pub fn pdf(&self, x: f64) -> f64 {
        self.params.pdf(x)
    }
    pub fn cdf(&self, x: f64) -> f64 {
        self.params.cdf(x)
    }
    /// Linear-scale mean exp(E + D/2).
    pub fn mean(&self) -> f64 {
        self.params.mean()
    }
    /// Linear-scale variance (e^D − 1)e^(2E+D).
    pub fn variance(&self) -> f64 {
        self.params.variance()
    }
    pub fn median(&self) -> f64 {
        self.params.median()
    }
}

/// Craig-form modulation parameters: BER = α·E[Q(√(β·γ))].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationScheme {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
}

impl ModulationScheme {
    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.beta > 0.0 {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "modulation '{}' needs positive alpha/beta, got ({}, {})",
                self.name, self.alpha, self.beta
            )))
        }
    }

    pub fn bpsk() -> Self {
        ModulationScheme {
            name: "bpsk".into(),
            alpha: 1.0,
            beta: 2.0,
        }
    }

    /// Gray-coded QPSK, per-bit (same Craig parameters as BPSK).
    pub fn qpsk() -> Self {
        ModulationScheme {
            name: "qpsk".into(),
            alpha: 1.0,
            beta: 2.0,
        }
    }

    /// 4-PAM with the textbook Craig-form parameters.
    pub fn pam4() -> Self {
        ModulationScheme {
            name: "4pam".into(),
            alpha: 0.75,
            beta: 0.4,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" => Ok(Self::qpsk()),
            "4pam" => Ok(Self::pam4()),
            other => Err(Error::Schema(format!("unknown modulation '{other}'"))),
        }
    }
}

/// SNR law of one multiplexing band: E_γ = E_pow + ln(P/(N₀B)), D_γ = D_pow.
pub fn snr_params_multiplexing(
    power_law: &LognormalParams,
    budget: &LinkBudget,
    band: usize,
) -> Result<SnrDistribution> {
    budget.validate()?;
    if band >= budget.band_powers.len() {
        return Err(Error::Validation(format!(
            "band index {band} out of range for {}-band budget",
            budget.band_powers.len()
        )));
    }
    let offset =
        (budget.band_powers[band] / (budget.noise_density * budget.bandwidths[band])).ln();
    Ok(SnrDistribution {
        params: LognormalParams {
            mu: power_law.mu + offset,
            sigma2: power_law.sigma2,
        },
        band: Some(band),
        mode: AnalysisMode::Multiplexing,
    })
}

/// One exponential-piece expectation E[e^(−i|z|)], z ~ N(E, D), evaluated
/// without overflow for arguments of either sign.
fn exp_abs_moment(i: f64, e: f64, d: f64) -> f64 {
    let root = (2.0 * d).sqrt();
    let gauss = (-e * e / (2.0 * d)).exp();
    let half = |b: f64, a: f64| -> f64 {
        if b >= 0.0 {
            0.5 * gauss * erfcx(b)
        } else {
            a.exp() - 0.5 * gauss * erfcx(-b)
        }
    };
    half((i * d + e) / root, i * i * d / 2.0 + i * e)
        + half((i * d - e) / root, i * i * d / 2.0 - i * e)
}

/// Ergodic capacity of one band, nat/s, via the erfcx closed form with the
/// fitted exponential-sum coefficients. Degenerate D = 0 reduces to
/// B·ln(1 + e^E).
pub fn ergodic_capacity_band(snr: &SnrDistribution, bandwidth_hz: f64) -> f64 {
    let e = snr.params.mu;
    let d = snr.params.sigma2;
    if d == 0.0 {
        return bandwidth_hz * softplus(e);
    }
    let mut acc = 0.0;
    for (idx, a) in CAPACITY_FIT_COEFFICIENTS.iter().enumerate() {
        acc += a * exp_abs_moment((idx + 1) as f64, e, d);
    }
    let ramp = (d / (2.0 * PI)).sqrt() * (-e * e / (2.0 * d)).exp()
        + 0.5 * e * erfc(-e / (2.0 * d).sqrt());
    (bandwidth_hz * (acc + ramp)).max(0.0)
}

/// Ergodic capacity by direct Gauss-Hermite quadrature of
/// B·E[ln(1 + e^z)]; the independent oracle for the closed form.
pub fn ergodic_capacity_quadrature(
    snr: &SnrDistribution,
    bandwidth_hz: f64,
    rule: &QuadratureRule,
) -> f64 {
    let e = snr.params.mu;
    let d = snr.params.sigma2;
    if d == 0.0 {
        return bandwidth_hz * softplus(e);
    }
    let scale = (2.0 * d).sqrt();
    bandwidth_hz * rule.integrate(|c| softplus(scale * c + e)) / PI.sqrt()
}

/// Lognormal MGF E[e^(−sX)] by the Gauss-Hermite series. Exact
/// exp(−s·e^E) when D = 0.
pub fn lognormal_mgf(params: &LognormalParams, s: f64, rule: &QuadratureRule) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Validation(format!(
            "MGF argument must be non-negative, got {s}"
        )));
    }
    if params.sigma2 == 0.0 {
        return Ok((-s * params.mu.exp()).exp());
    }
    let scale = (2.0 * params.sigma2).sqrt();
    Ok(rule.integrate(|c| (-s * (scale * c + params.mu).exp()).exp()) / PI.sqrt())
}

/// Average BER α/π · ∫₀^{π/2} M(β/(2sin²x)) dx by adaptive quadrature over
/// the finite interval.
pub fn average_ber_band(
    snr: &SnrDistribution,
    modulation: &ModulationScheme,
    rule: &QuadratureRule,
) -> Result<f64> {
    modulation.validate()?;
    let params = snr.params;
    let beta = modulation.beta;
    let integrand = |x: f64| -> f64 {
        let sn = x.sin();
        if sn == 0.0 {
            return 0.0; // M(∞) = 0
        }
        lognormal_mgf(&params, beta / (2.0 * sn * sn), rule).unwrap_or(0.0)
    };
    let integral = adaptive_simpson(&integrand, 0.0, PI / 2.0, 1e-12);
    let ber = modulation.alpha / PI * integral;
    Ok(ber.clamp(0.0, modulation.alpha / 2.0))
}

/// Outage P[γ < γ_th] = ½·erfc(−(ln γ_th − E)/√(2D)): the lognormal CDF,
/// kept in erfc form so deep-tail outages stay representable.
pub fn outage_band(snr: &SnrDistribution, gamma_th: f64) -> Result<f64> {
    if !(gamma_th > 0.0) {
        return Err(Error::Validation(format!(
            "outage threshold must be positive, got {gamma_th}"
        )));
    }
    if snr.params.sigma2 == 0.0 {
        return Ok(if gamma_th > snr.params.median() {
            1.0
        } else {
            0.0
        });
    }
    Ok(normal_cdf(
        (gamma_th.ln() - snr.params.mu) / snr.params.sigma2.sqrt(),
    ))
}

/// Per-(user, band) analytic metrics. `band = None` marks a combined
/// diversity row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandMetrics {
    pub user: usize,
    pub band: Option<usize>,
    pub snr: SnrDistribution,
    pub bandwidth_hz: f64,
    pub capacity_nat_s: f64,
    pub ber: f64,
    pub outage: f64,
}

/// Network-level report: per-entry metrics plus the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub mode: AnalysisMode,
    pub num_users: usize,
    pub num_bands: usize,
    pub gamma_th: f64,
    pub entries: Vec<BandMetrics>,
    /// C = Σ capacities / (K+1), nat/s.
    pub network_capacity_nat_s: f64,
    /// Plain average of the per-entry BERs.
    pub network_ber: f64,
    /// Product of all per-entry outages.
    pub network_outage: f64,
}

impl PerformanceReport {
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(0.0..=0.5 + 1e-12).contains(&e.ber) {
                return Err(Error::Validation(format!("BER {} out of range", e.ber)));
            }
            if !(0.0..=1.0).contains(&e.outage) {
                return Err(Error::Validation(format!(
                    "outage {} out of range",
                    e.outage
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.network_outage) {
            return Err(Error::Validation("network outage out of range".into()));
        }
        let min_entry = self
            .entries
            .iter()
            .map(|e| e.outage)
            .fold(f64::INFINITY, f64::min);
        if self.network_outage > min_entry + 1e-15 {
            return Err(Error::Validation(
                "network outage exceeds a per-band outage".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregate per-(user, band) multiplexing metrics into the network
/// report: capacity sum over all entries divided by the user count, BER
/// averaged uniformly, outage as the all-entries product.
pub fn network_multiplexing(
    entries: Vec<BandMetrics>,
    num_users: usize,
    num_bands: usize,
    gamma_th: f64,
) -> Result<PerformanceReport> {
    if entries.len() != num_users * num_bands {
        return Err(Error::Validation(format!(
            "expected {} entries for {num_users} users × {num_bands} bands, got {}",
            num_users * num_bands,
            entries.len()
        )));
    }
    let capacity: f64 = entries.iter().map(|e| e.capacity_nat_s).sum::<f64>() / num_users as f64;
    let ber: f64 = entries.iter().map(|e| e.ber).sum::<f64>() / entries.len() as f64;
    let outage: f64 = entries.iter().map(|e| e.outage).product();
    let report = PerformanceReport {
        mode: AnalysisMode::Multiplexing,
        num_users,
        num_bands,
        gamma_th,
        entries,
        network_capacity_nat_s: capacity,
        network_ber: ber,
        network_outage: outage,
    };
    report.validate()?;
    Ok(report)
}

/// Result of matching a lognormal sum by a single lognormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedSum {
    pub params: LognormalParams,
    /// MGF probe points used.
    pub probes: [f64; 2],
    /// |matched − target| at the two probes.
    pub residuals: [f64; 2],
    /// True when the solver failed and `params` is the moment-matching
    /// fallback instead.
    pub degraded: bool,
}

/// Moment-matching (Fenton-Wilkinson) parameters of a sum of independent
/// lognormals: matches the exact first two moments.
pub fn fenton_wilkinson(addends: &[LognormalParams]) -> Result<LognormalParams> {
    if addends.is_empty() {
        return Err(Error::Validation("need at least one addend".into()));
    }
    let m1: f64 = addends.iter().map(|p| p.mean()).sum();
    let var: f64 = addends.iter().map(|p| p.variance()).sum();
    let sigma2 = (var / (m1 * m1)).ln_1p();
    Ok(LognormalParams {
        mu: m1.ln() - sigma2 / 2.0,
        sigma2,
    })
}

/// Solver tolerance on the probe residuals.
const MGF_MATCH_TOL: f64 = 1e-12;

/// Match a single lognormal to the sum of independent lognormal addends by
/// equating MGFs at two probe points (0.5/m₁ and 2/m₁, with m₁ the exact
/// first moment of the sum), Newton-seeded from the moment match.
///
/// If Newton fails, the moment-matching parameters are returned with
/// `degraded` set instead of an error, so callers can still produce a
/// (flagged) report.
pub fn mgf_match_lognormal_sum(
    addends: &[LognormalParams],
    rule: &QuadratureRule,
) -> Result<MatchedSum> {
    if addends.is_empty() {
        return Err(Error::Validation("need at least one addend".into()));
    }
    let m1: f64 = addends.iter().map(|p| p.mean()).sum();
    if !(m1 > 0.0) || !m1.is_finite() {
        return Err(Error::Validation(format!(
            "sum of addend means must be positive and finite, got {m1}"
        )));
    }
    let probes = [0.5 / m1, 2.0 / m1];
    let mut targets = [1.0f64; 2];
    for (t, &s) in targets.iter_mut().zip(&probes) {
        let mut prod = 1.0;
        for p in addends {
            prod *= lognormal_mgf(p, s, rule)?;
        }
        *t = prod;
    }
    let seed = fenton_wilkinson(addends)?;
    let residual = |e: f64, d: f64| -> (f64, f64) {
        let params = LognormalParams {
            mu: e,
            sigma2: d.abs(),
        };
        (
            lognormal_mgf(&params, probes[0], rule).unwrap_or(f64::NAN) - targets[0],
            lognormal_mgf(&params, probes[1], rule).unwrap_or(f64::NAN) - targets[1],
        )
    };
    match solve_2x2_nonlinear(residual, [seed.mu, seed.sigma2], MGF_MATCH_TOL) {
        Ok(sol) => {
            let params = LognormalParams {
                mu: sol.x[0],
                sigma2: sol.x[1].abs(),
            };
            let (r1, r2) = residual(sol.x[0], sol.x[1]);
            Ok(MatchedSum {
                params,
                probes,
                residuals: [r1.abs(), r2.abs()],
                degraded: false,
            })
        }
        Err(_) => {
            let (r1, r2) = residual(seed.mu, seed.sigma2);
            Ok(MatchedSum {
                params: seed,
                probes,
                residuals: [r1.abs(), r2.abs()],
                degraded: true,
            })
        }
    }
}

/// Diversity SNR law: E_γd = E_Λ + ln(P_b/(B_b·N₀)), variance D_Λ.
pub fn snr_params_diversity(
    matched: &LognormalParams,
    base_power: f64,
    base_bandwidth: f64,
    noise_density: f64,
) -> Result<SnrDistribution> {
    if !(base_power > 0.0 && base_bandwidth > 0.0 && noise_density > 0.0) {
        return Err(Error::Validation(
            "diversity budget values must be positive".into(),
        ));
    }
    Ok(SnrDistribution {
        params: LognormalParams {
            mu: matched.mu + (base_power / (base_bandwidth * noise_density)).ln(),
            sigma2: matched.sigma2,
        },
        band: None,
        mode: AnalysisMode::Diversity,
    })
}

/// Build the network diversity report from per-user combined SNR laws.
pub fn diversity_report(
    per_user_snr: &[SnrDistribution],
    base_bandwidth: f64,
    modulation: &ModulationScheme,
    gamma_th: f64,
    num_bands: usize,
    rule: &QuadratureRule,
) -> Result<PerformanceReport> {
    if per_user_snr.is_empty() {
        return Err(Error::Validation("need at least one user".into()));
    }
    let mut entries = Vec::with_capacity(per_user_snr.len());
    for (k, snr) in per_user_snr.iter().enumerate() {
        let capacity = ergodic_capacity_band(snr, base_bandwidth);
        let ber = average_ber_band(snr, modulation, rule)?;
        let outage = outage_band(snr, gamma_th)?;
        entries.push(BandMetrics {
            user: k,
            band: None,
            snr: *snr,
            bandwidth_hz: base_bandwidth,
            capacity_nat_s: capacity,
            ber,
            outage,
        });
    }
    let num_users = entries.len();
    let capacity: f64 = entries.iter().map(|e| e.capacity_nat_s).sum::<f64>() / num_users as f64;
    let ber: f64 = entries.iter().map(|e| e.ber).sum::<f64>() / num_users as f64;
    let outage: f64 = entries.iter().map(|e| e.outage).product();
    let report = PerformanceReport {
        mode: AnalysisMode::Diversity,
        num_users,
        num_bands,
        gamma_th,
        entries,
        network_capacity_nat_s: capacity,
        network_ber: ber,
        network_outage: outage,
    };
    report.validate()?;
    Ok(report)
}
