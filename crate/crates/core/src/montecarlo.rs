//! Monte Carlo harness: samples the physical model end-to-end (segment
//! draws → exact eddy-loss product → SNR) and estimates every metric the
//! closed forms predict, with standard errors, so the two routes can be
//! compared mechanically.
//!
//! Work is partitioned into fixed blocks of draw indices. Blocks are
//! processed in parallel but merged in block order, and every (user, band,
//! draw) triple owns an independent counter-based generator stream, so the
//! result is byte-identical for any worker count.

use crate::analytics::{ModulationScheme, PerformanceReport, SnrDistribution};
use crate::error::{Error, Result};
use crate::fading::{sample_path_lengths, SamplingMode, SHARED_BAND_STREAM};
use crate::media::skin_depth;
use crate::numerics::special::{craig_q, softplus};
use crate::numerics::stats::ks_statistic;
use crate::pipeline::ScenarioChannel;
use rayon::prelude::*;
use serde::Serialize;

/// Fixed number of draws per work block.
const BLOCK: usize = 8192;
/// Retain raw log-SNR samples (for exact KS) up to this many draws.
const RETAIN_LIMIT: usize = 1_000_000;
/// Points in the streaming CDF grid.
const CDF_GRID_POINTS: usize = 512;
/// KS acceptance threshold for log-SNR normality, a toolkit constant.
pub const KS_TOLERANCE: f64 = 0.02;

/// Simulation controls.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Draws per (user, band); at least 1000.
    pub sample_count: usize,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Worker threads; 0 uses the process default.
    pub workers: usize,
    /// Pass/fail gate in units of the standard error.
    pub se_multiplier: f64,
}

impl SimulationConfig {
    pub fn new(sample_count: usize, seed: u64, mode: SamplingMode) -> SimulationConfig {
        SimulationConfig {
            sample_count,
            seed,
            mode,
            workers: 0,
            se_multiplier: 3.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sample_count < 1000 {
            return Err(Error::Validation(format!(
                "statistical outputs need at least 1000 samples, got {}",
                self.sample_count
            )));
        }
        if !(self.se_multiplier > 0.0) {
            return Err(Error::Validation("se_multiplier must be positive".into()));
        }
        Ok(())
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// One point of the streaming CDF comparison grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CdfPoint {
    pub snr: f64,
    pub empirical: f64,
    pub analytic: f64,
}

/// Empirical summary of one SNR stream (a band, or the combined diversity
/// SNR when `band` is `None`).
#[derive(Debug, Clone, Serialize)]
pub struct BandSummary {
    pub user: usize,
    pub band: Option<usize>,
    pub count: usize,
    pub capacity_nat_s: MetricEstimate,
    pub ber: MetricEstimate,
    pub outage: MetricEstimate,
    pub log_snr_mean: f64,
    pub log_snr_var: f64,
    /// Exact KS distance of ln γ against the analytic normal law; present
    /// when raw samples were retained.
    pub ks_log_snr: Option<f64>,
    pub cdf_grid: Vec<CdfPoint>,
}

/// Full simulation output.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub sample_count: usize,
    pub seed: u64,
    pub mode: SamplingMode,
    pub gamma_th: f64,
    /// Per-(user, band) multiplexing streams.
    pub mux: Vec<BandSummary>,
    /// Per-user combined (maximum-ratio) streams.
    pub diversity: Vec<BandSummary>,
    /// Fraction of draws with every (user, band) SNR below γ_th.
    pub joint_outage_mux: MetricEstimate,
    /// Fraction of draws with every user's combined SNR below γ_th.
    pub joint_outage_div: MetricEstimate,
}

#[derive(Clone)]
struct Accum {
    n: u64,
    sum_ln: f64,
    sum_ln2: f64,
    sum_cap: f64,
    sum_cap2: f64,
    sum_ber: f64,
    sum_ber2: f64,
    out_count: u64,
    grid_counts: Vec<u64>,
    samples: Vec<f64>,
}

impl Accum {
    fn new(retain: bool, block_len: usize) -> Accum {
        Accum {
            n: 0,
            sum_ln: 0.0,
            sum_ln2: 0.0,
            sum_cap: 0.0,
            sum_cap2: 0.0,
            sum_ber: 0.0,
            sum_ber2: 0.0,
            out_count: 0,
            grid_counts: vec![0; CDF_GRID_POINTS],
            samples: if retain {
                Vec::with_capacity(block_len)
            } else {
                Vec::new()
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        ln_snr: f64,
        bandwidth: f64,
        modulation: &ModulationScheme,
        ln_gamma_th: f64,
        grid: &[f64],
        retain: bool,
    ) {
        self.n += 1;
        self.sum_ln += ln_snr;
        self.sum_ln2 += ln_snr * ln_snr;
        let cap = bandwidth * softplus(ln_snr);
        self.sum_cap += cap;
        self.sum_cap2 += cap * cap;
        let ber = if ln_snr > 700.0 {
            0.0
        } else {
            modulation.alpha * craig_q((modulation.beta * ln_snr.exp()).sqrt())
        };
        self.sum_ber += ber;
        self.sum_ber2 += ber * ber;
        if ln_snr < ln_gamma_th {
            self.out_count += 1;
        }
        // first grid index with ln(grid) >= ln_snr: count sample into all
        // points at or above it (done at finalize via suffix trick: store
        // the partition index histogram instead)
        let idx = grid.partition_point(|&g| g < ln_snr);
        if idx < CDF_GRID_POINTS {
            self.grid_counts[idx] += 1;
        }
        if retain {
            self.samples.push(ln_snr);
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.n += other.n;
        self.sum_ln += other.sum_ln;
        self.sum_ln2 += other.sum_ln2;
        self.sum_cap += other.sum_cap;
        self.sum_cap2 += other.sum_cap2;
        self.sum_ber += other.sum_ber;
        self.sum_ber2 += other.sum_ber2;
        self.out_count += other.out_count;
        for (a, b) in self.grid_counts.iter_mut().zip(&other.grid_counts) {
            *a += b;
        }
        self.samples.extend_from_slice(&other.samples);
    }

    fn mean_se(sum: f64, sum2: f64, n: f64) -> MetricEstimate {
        let mean = sum / n;
        let var = (sum2 / n - mean * mean).max(0.0);
        MetricEstimate {
            value: mean,
            std_error: (var / n).sqrt(),
        }
    }

    fn finalize(
        self,
        user: usize,
        band: Option<usize>,
        law: Option<&SnrDistribution>,
        grid_ln: &[f64],
    ) -> BandSummary {
        let n = self.n as f64;
        let capacity = Self::mean_se(self.sum_cap, self.sum_cap2, n);
        let ber = Self::mean_se(self.sum_ber, self.sum_ber2, n);
        let p = self.out_count as f64 / n;
        let outage = MetricEstimate {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        };
        let log_mean = self.sum_ln / n;
        let log_var = (self.sum_ln2 / n - log_mean * log_mean).max(0.0);
        // cumulative grid: empirical CDF at each grid point
        let mut cum = 0u64;
        let cdf_grid: Vec<CdfPoint> = grid_ln
            .iter()
            .zip(&self.grid_counts)
            .map(|(&g_ln, &c)| {
                cum += c;
                let snr = g_ln.exp();
                CdfPoint {
                    snr,
                    // count of samples with ln γ < next grid point; the
                    // partition index places a sample at the first grid
                    // point ≥ it, so the running sum through g is
                    // P[γ ≤ g].
                    empirical: cum as f64 / n,
                    analytic: law.map_or(f64::NAN, |l| l.cdf(snr)),
                }
            })
            .collect();
        let ks_log_snr = if !self.samples.is_empty() {
            law.map(|l| {
                let mu = l.params.mu;
                let sd = l.params.sigma2.sqrt();
                if sd == 0.0 {
                    // degenerate law: all mass at mu
                    if self.samples.iter().all(|&x| (x - mu).abs() < 1e-12) {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    ks_statistic(&self.samples, |x| {
                        crate::numerics::special::normal_cdf((x - mu) / sd)
                    })
                    .unwrap_or(1.0)
                }
            })
        } else {
            None
        };
        BandSummary {
            user,
            band,
            count: self.n as usize,
            capacity_nat_s: capacity,
            ber,
            outage,
            log_snr_mean: log_mean,
            log_snr_var: log_var,
            ks_log_snr,
            cdf_grid,
        }
    }
}

struct BlockOutput {
    mux: Vec<Accum>,
    div: Vec<Accum>,
    joint_mux: u64,
    joint_div: u64,
}

/// Analytic-law-based log-SNR grid, 512 points over E ± 6σ.
fn make_grid(law: &SnrDistribution) -> Vec<f64> {
    let e = law.params.mu;
    let sd = law.params.sigma2.sqrt();
    let (lo, hi) = if sd == 0.0 {
        (e - std::f64::consts::LN_2, e + std::f64::consts::LN_2)
    } else {
        (e - 6.0 * sd, e + 6.0 * sd)
    };
    (0..CDF_GRID_POINTS)
        .map(|j| lo + (hi - lo) * j as f64 / (CDF_GRID_POINTS - 1) as f64)
        .collect()
}

/// Run the simulation for one resolved channel.
///
/// `div_law` is the matched analytic diversity law, used only to anchor
/// the diversity CDF grid and KS comparison (sampling itself never touches
/// it).
pub fn simulate(
    channel: &ScenarioChannel,
    div_law: Option<&SnrDistribution>,
    config: &SimulationConfig,
) -> Result<SimulationResult> {
    config.validate()?;
    let num_users = channel.num_users;
    let num_bands = channel.num_bands();
    if num_users == 0 || num_users > 250 {
        return Err(Error::Validation(format!(
            "user count {num_users} outside the supported 1..=250"
        )));
    }
    if num_bands >= SHARED_BAND_STREAM as usize {
        return Err(Error::Validation("too many bands for the stream layout".into()));
    }

    // Per-band constants.
    let deltas: Vec<Vec<f64>> = channel
        .bands
        .iter()
        .map(|b| {
            channel
                .path
                .segments
                .iter()
                .map(|s| Ok(skin_depth(&s.medium, b.center_hz, channel.path.permeability)?.meters))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    // ln SNR = H̄ + 2 ln G + ln(P/(N₀B))
    let offsets: Vec<f64> = channel
        .bands
        .iter()
        .enumerate()
        .map(|(n, b)| {
            b.det.log_power
                + (channel.budget.band_powers[n]
                    / (channel.budget.noise_density * channel.budget.bandwidths[n]))
                    .ln()
        })
        .collect();
    let div_offset = (channel.budget.band_powers[0]
        / (channel.budget.noise_density * channel.budget.bandwidths[0]))
        .ln();
    let bandwidths = &channel.budget.bandwidths;
    let ln_gamma_th = channel.gamma_th.ln();
    let retain = config.sample_count <= RETAIN_LIMIT;

    let mux_grids: Vec<Vec<f64>> = channel.bands.iter().map(|b| make_grid(&b.snr)).collect();
    let div_grid: Vec<f64> = div_law.map(make_grid).unwrap_or_else(|| {
        // fall back to the first band's law shifted by the MRC offset
        make_grid(&channel.bands[0].snr)
    });

    let n_blocks = config.sample_count.div_ceil(BLOCK);
    let run_blocks = || -> Result<Vec<BlockOutput>> {
        (0..n_blocks)
            .into_par_iter()
            .map(|blk| -> Result<BlockOutput> {
                let start = blk * BLOCK;
                let end = ((blk + 1) * BLOCK).min(config.sample_count);
                let mut out = BlockOutput {
                    mux: vec![Accum::new(retain, end - start); num_users * num_bands],
                    div: vec![Accum::new(retain, end - start); num_users],
                    joint_mux: 0,
                    joint_div: 0,
                };
                let mut ln_g = vec![0.0f64; num_bands];
                for draw in start..end {
                    let mut all_mux_out = true;
                    let mut all_div_out = true;
                    for user in 0..num_users {
                        match config.mode {
                            SamplingMode::SharedPath => {
                                let mut rng = crate::fading::draw_rng(
                                    config.seed,
                                    user as u8,
                                    SHARED_BAND_STREAM,
                                    draw as u64,
                                );
                                let lengths = sample_path_lengths(&channel.path, &mut rng)?;
                                for (b, lg) in ln_g.iter_mut().enumerate() {
                                    let expo: f64 = lengths
                                        .iter()
                                        .zip(&deltas[b])
                                        .map(|(dr, d)| dr / d)
                                        .sum();
                                    *lg = -expo;
                                }
                            }
                            SamplingMode::IndependentPerBand => {
                                for (b, lg) in ln_g.iter_mut().enumerate() {
                                    let mut rng = crate::fading::draw_rng(
                                        config.seed,
                                        user as u8,
                                        b as u8,
                                        draw as u64,
                                    );
                                    let lengths = sample_path_lengths(&channel.path, &mut rng)?;
                                    let expo: f64 = lengths
                                        .iter()
                                        .zip(&deltas[b])
                                        .map(|(dr, d)| dr / d)
                                        .sum();
                                    *lg = -expo;
                                }
                            }
                        }
                        let mut h2_sum = 0.0f64;
                        for b in 0..num_bands {
                            let ln_snr = offsets[b] + 2.0 * ln_g[b];
                            h2_sum += (channel.bands[b].det.log_power + 2.0 * ln_g[b]).exp();
                            if ln_snr >= ln_gamma_th {
                                all_mux_out = false;
                            }
                            out.mux[user * num_bands + b].push(
                                ln_snr,
                                bandwidths[b],
                                &channel.modulation,
                                ln_gamma_th,
                                &mux_grids[b],
                                retain,
                            );
                        }
                        let ln_snr_div = h2_sum.ln() + div_offset;
                        if ln_snr_div >= ln_gamma_th {
                            all_div_out = false;
                        }
                        out.div[user].push(
                            ln_snr_div,
                            bandwidths[0],
                            &channel.modulation,
                            ln_gamma_th,
                            &div_grid,
                            retain,
                        );
                    }
                    if all_mux_out {
                        out.joint_mux += 1;
                    }
                    if all_div_out {
                        out.joint_div += 1;
                    }
                }
                Ok(out)
            })
            .collect()
    };

    let blocks: Vec<BlockOutput> = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?;
        pool.install(run_blocks)?
    } else {
        run_blocks()?
    };

    // Ordered merge, independent of which worker produced which block.
    let mut mux_acc: Vec<Accum> = vec![Accum::new(retain, 0); num_users * num_bands];
    let mut div_acc: Vec<Accum> = vec![Accum::new(retain, 0); num_users];
    let mut joint_mux = 0u64;
    let mut joint_div = 0u64;
    for b in &blocks {
        for (a, x) in mux_acc.iter_mut().zip(&b.mux) {
            a.merge(x);
        }
        for (a, x) in div_acc.iter_mut().zip(&b.div) {
            a.merge(x);
        }
        joint_mux += b.joint_mux;
        joint_div += b.joint_div;
    }

    let n = config.sample_count as f64;
    let binom = |count: u64| -> MetricEstimate {
        let p = count as f64 / n;
        MetricEstimate {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        }
    };

    let mut mux = Vec::with_capacity(num_users * num_bands);
    for (i, acc) in mux_acc.into_iter().enumerate() {
        let user = i / num_bands;
        let band = i % num_bands;
        mux.push(acc.finalize(
            user,
            Some(band),
            Some(&channel.bands[band].snr),
            &mux_grids[band],
        ));
    }
    let diversity: Vec<BandSummary> = div_acc
        .into_iter()
        .enumerate()
        .map(|(user, acc)| acc.finalize(user, None, div_law, &div_grid))
        .collect();

    Ok(SimulationResult {
        sample_count: config.sample_count,
        seed: config.seed,
        mode: config.mode,
        gamma_th: channel.gamma_th,
        mux,
        diversity,
        joint_outage_mux: binom(joint_mux),
        joint_outage_div: binom(joint_div),
    })
}

/// Mean of B·ln(1+γ) over linear-SNR samples, with its standard error.
pub fn empirical_capacity(samples: &[f64], bandwidth_hz: f64) -> MetricEstimate {
    let n = samples.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for &g in samples {
        let c = bandwidth_hz * g.ln_1p();
        s += c;
        s2 += c * c;
    }
    Accum::mean_se(s, s2, n)
}

/// Mean of α·Q(√(βγ)) over linear-SNR samples, with its standard error.
pub fn empirical_ber(samples: &[f64], modulation: &ModulationScheme) -> MetricEstimate {
    let n = samples.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for &g in samples {
        let b = modulation.alpha * craig_q((modulation.beta * g).sqrt());
        s += b;
        s2 += b * b;
    }
    Accum::mean_se(s, s2, n)
}

/// Fraction of samples below γ_th, with the binomial standard error.
pub fn empirical_outage(samples: &[f64], gamma_th: f64) -> MetricEstimate {
    let n = samples.len() as f64;
    let count = samples.iter().filter(|&&g| g < gamma_th).count() as f64;
    let p = count / n;
    MetricEstimate {
        value: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
    }
}

/// Verdict of one analytic-vs-empirical comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareFlag {
    Pass,
    Fail,
    /// Reported without a verdict: the analytic route assumes cross-band
    /// independence that shared-path sampling deliberately violates.
    NotApplicable,
}

impl std::fmt::Display for CompareFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompareFlag::Pass => write!(f, "pass"),
            CompareFlag::Fail => write!(f, "fail"),
            CompareFlag::NotApplicable => write!(f, "n/a"),
        }
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub user: Option<usize>,
    pub band: Option<usize>,
    pub mode: String,
    pub analytic: f64,
    pub empirical: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub std_error: f64,
    pub flag: CompareFlag,
}

/// Comparison of a simulation run against analytic reports.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

fn row(
    metric: &str,
    user: Option<usize>,
    band: Option<usize>,
    mode: &str,
    analytic: f64,
    est: MetricEstimate,
    gate: Option<f64>,
) -> ComparisonRow {
    // gate == Some(limit): pass iff |analytic − empirical| ≤ limit
    let abs_gap = (analytic - est.value).abs();
    let rel_gap = if analytic != 0.0 {
        abs_gap / analytic.abs()
    } else {
        f64::NAN
    };
    let flag = match gate {
        None => CompareFlag::NotApplicable,
        Some(limit) => {
            if abs_gap <= limit {
                CompareFlag::Pass
            } else {
                CompareFlag::Fail
            }
        }
    };
    ComparisonRow {
        metric: metric.into(),
        user,
        band,
        mode: mode.into(),
        analytic,
        empirical: est.value,
        abs_gap,
        rel_gap,
        std_error: est.std_error,
        flag,
    }
}

/// Build the per-metric comparison table. Multiplexing rows are gated at
/// `se_multiplier` standard errors. Diversity rows get a verdict only when
/// the sampling mode matches the independence the analytic route assumes;
/// under shared-path sampling the gap is reported without pass/fail.
pub fn compare(
    result: &SimulationResult,
    mux_report: &PerformanceReport,
    div_report: Option<&PerformanceReport>,
    se_multiplier: f64,
) -> ComparisonTable {
    let mut rows = Vec::new();
    let mode = match result.mode {
        SamplingMode::SharedPath => "shared_path",
        SamplingMode::IndependentPerBand => "independent_per_band",
    };
    let floor = 1.0 / result.sample_count as f64;
    for s in &result.mux {
        let analytic = mux_report
            .entries
            .iter()
            .find(|e| e.user == s.user && e.band == s.band);
        let Some(a) = analytic else { continue };
        let gate = |se: f64| Some(se_multiplier * se.max(floor));
        rows.push(row(
            "capacity_nat_s",
            Some(s.user),
            s.band,
            mode,
            a.capacity_nat_s,
            s.capacity_nat_s,
            gate(s.capacity_nat_s.std_error),
        ));
        rows.push(row(
            "ber",
            Some(s.user),
            s.band,
            mode,
            a.ber,
            s.ber,
            gate(s.ber.std_error),
        ));
        rows.push(row(
            "outage",
            Some(s.user),
            s.band,
            mode,
            a.outage,
            s.outage,
            gate(s.outage.std_error),
        ));
        if let Some(ks) = s.ks_log_snr {
            rows.push(row(
                "ks_log_snr",
                Some(s.user),
                s.band,
                mode,
                0.0,
                MetricEstimate {
                    value: ks,
                    std_error: f64::NAN,
                },
                Some(KS_TOLERANCE),
            ));
        }
    }
    rows.push(row(
        "network_outage",
        None,
        None,
        mode,
        mux_report.network_outage,
        result.joint_outage_mux,
        match result.mode {
            SamplingMode::IndependentPerBand => {
                Some(se_multiplier * result.joint_outage_mux.std_error.max(floor))
            }
            SamplingMode::SharedPath => None,
        },
    ));
    if let Some(div) = div_report {
        let div_gate = |se: f64| match result.mode {
            SamplingMode::IndependentPerBand => Some(se_multiplier * se.max(floor)),
            SamplingMode::SharedPath => None,
        };
        for s in &result.diversity {
            let Some(a) = div.entries.iter().find(|e| e.user == s.user) else {
                continue;
            };
            rows.push(row(
                "div_capacity_nat_s",
                Some(s.user),
                None,
                mode,
                a.capacity_nat_s,
                s.capacity_nat_s,
                div_gate(s.capacity_nat_s.std_error),
            ));
            rows.push(row(
                "div_ber",
                Some(s.user),
                None,
                mode,
                a.ber,
                s.ber,
                div_gate(s.ber.std_error),
            ));
            rows.push(row(
                "div_outage",
                Some(s.user),
                None,
                mode,
                a.outage,
                s.outage,
                div_gate(s.outage.std_error),
            ));
        }
        rows.push(row(
            "div_network_outage",
            None,
            None,
            mode,
            div.network_outage,
            result.joint_outage_div,
            div_gate(result.joint_outage_div.std_error),
        ));
    }
    ComparisonTable { rows }
}
