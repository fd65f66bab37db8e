//! Coil impedance, multi-resonant network synthesis, mutual inductance,
//! tri-directional combining, and the deterministic part of the channel
//! gain.
//!
//! A coil is compensated by a series capacitor C₀ plus N parallel-LC
//! branches in series, giving the reactance
//!
//! ```text
//! X(f) = (4π²f²L₀C₀ − 1)/(2πfC₀) + Σₙ 2πfLₙ/(1 − 4π²f²LₙCₙ)
//! ```
//!
//! which vanishes at the N+1 designed resonances and has a pole strictly
//! between each adjacent pair. Synthesis places pole n at the geometric
//! mean of resonances n−1 and n (fixing each LₙCₙ product) and solves the
//! remaining unknowns (C₀ and the Lₙ) by damped Newton on the N+1
//! conditions X(fₘ) = 0.

use crate::error::{Error, Result};
use crate::numerics::solver::newton_system;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical description of one unidirectional coil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilSpec {
    /// Loop radius, m.
    pub radius: f64,
    /// Number of turns.
    pub turns: u32,
    /// Coil self-resistance, Ω.
    pub self_resistance: f64,
    /// Uncompensated self-inductance L₀, H.
    pub base_self_inductance: f64,
    /// Load resistance, Ω; receivers only.
    pub load_resistance: Option<f64>,
}

impl CoilSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.radius > 0.0
            && self.turns >= 1
            && self.self_resistance > 0.0
            && self.base_self_inductance > 0.0
            && self.load_resistance.map_or(true, |r| r > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid coil spec: {self:?}")))
        }
    }
}

/// Single-layer loop estimate L ≈ μN²a(ln(8a/r_w) − 2) used when a coil's
/// self-inductance is not given explicitly.
pub fn loop_self_inductance(mu: f64, turns: u32, radius: f64, wire_radius: f64) -> f64 {
    mu * (turns as f64).powi(2) * radius * ((8.0 * radius / wire_radius).ln() - 2.0)
}

/// One parallel-LC branch of the compensation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcBranch {
    pub inductance: f64,
    pub capacitance: f64,
}

impl LcBranch {
    /// Branch pole frequency 1/(2π√(LC)), Hz.
    pub fn pole_hz(&self) -> f64 {
        1.0 / (2.0 * PI * (self.inductance * self.capacitance).sqrt())
    }
}

/// Synthesized multi-resonant compensation network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MurecNetwork {
    /// Series capacitance C₀, F.
    pub series_capacitance: f64,
    /// Parallel-LC branches, pole frequencies ascending.
    pub branches: Vec<LcBranch>,
}

impl MurecNetwork {
    /// Component positivity plus strict pole interleaving between the
    /// adjacent target resonances.
    pub fn validate_against_targets(&self, targets: &[f64]) -> Result<()> {
        if !(self.series_capacitance > 0.0) {
            return Err(Error::Validation(
                "series capacitance must be positive".into(),
            ));
        }
        if self.branches.len() + 1 != targets.len() {
            return Err(Error::Validation(format!(
                "{} branches cannot interleave {} resonances",
                self.branches.len(),
                targets.len()
            )));
        }
        for (n, b) in self.branches.iter().enumerate() {
            if !(b.inductance > 0.0 && b.capacitance > 0.0) {
                return Err(Error::Validation(format!(
                    "branch {n} has non-positive components"
                )));
            }
            let pole = b.pole_hz();
            if !(targets[n] < pole && pole < targets[n + 1]) {
                return Err(Error::Validation(format!(
                    "branch {n} pole {pole} Hz does not lie strictly between {} and {} Hz",
                    targets[n],
                    targets[n + 1]
                )));
            }
        }
        Ok(())
    }
}

/// Which side of the link a coil sits on; selects the resistive part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoilSide {
    Transmit,
    Receive,
}

/// Relative pole-distance below which impedance evaluation is refused.
pub const POLE_GUARD: f64 = 1e-12;

/// Reactance of the compensated coil at frequency f.
fn reactance(l0: f64, network: &MurecNetwork, f: f64) -> f64 {
    let omega = 2.0 * PI * f;
    let c0 = network.series_capacitance;
    let mut x = (omega * omega * l0 * c0 - 1.0) / (omega * c0);
    for b in &network.branches {
        x += omega * b.inductance / (1.0 - omega * omega * b.inductance * b.capacitance);
    }
    x
}

/// Complex impedance of a compensated coil.
///
/// Real part: self-resistance on the transmit side, self + load on the
/// receive side. Evaluation within relative distance 1e-12 of a branch
/// pole is an error.
pub fn coil_impedance(
    coil: &CoilSpec,
    network: &MurecNetwork,
    f: f64,
    side: CoilSide,
) -> Result<Complex64> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::Validation(format!(
            "impedance frequency must be positive, got {f}"
        )));
    }
    for b in &network.branches {
        let pole = b.pole_hz();
        let rel = ((f - pole) / pole).abs();
        if rel < POLE_GUARD {
            return Err(Error::PoleProximity {
                f_hz: f,
                pole_hz: pole,
                rel,
            });
        }
    }
    let r = match side {
        CoilSide::Transmit => coil.self_resistance,
        CoilSide::Receive => {
            coil.self_resistance
                + coil.load_resistance.ok_or_else(|| {
                    Error::Validation("receive coil needs a load resistance".into())
                })?
        }
    };
    Ok(Complex64::new(r, reactance(coil.base_self_inductance, network, f)))
}

/// Residual target for synthesis, as a fraction of the coil resistance.
const SYNTHESIS_TOL_FACTOR: f64 = 1e-8;

/// Synthesize a compensation network resonating at every target frequency.
///
/// Targets must be ascending and pairwise distinct. The result satisfies
/// |X(fₘ)| < 1e-6·R at every target (typically ≪ that), with exactly one
/// branch pole strictly between each adjacent pair.
pub fn design_murec(targets: &[f64], coil: &CoilSpec) -> Result<MurecNetwork> {
    coil.validate()?;
    if targets.is_empty() {
        return Err(Error::Validation("need at least one target frequency".into()));
    }
    for w in targets.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Validation(format!(
                "target frequencies must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(targets[0] > 0.0) {
        return Err(Error::Validation("target frequencies must be positive".into()));
    }

    let l0 = coil.base_self_inductance;
    let single_c0 = |f: f64| 1.0 / (4.0 * PI * PI * f * f * l0);
    if targets.len() == 1 {
        return Ok(MurecNetwork {
            series_capacitance: single_c0(targets[0]),
            branches: Vec::new(),
        });
    }

    let n_branches = targets.len() - 1;
    // Pole placement: geometric mean of each adjacent resonance pair.
    let poles: Vec<f64> = targets.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();

    // Unknowns scaled to O(1): u[0] = C0/C0_seed, u[1..] = Lₙ/L_seed.
    let geo_center = (targets[0] * targets[targets.len() - 1]).sqrt();
    let c0_seed = single_c0(geo_center);
    let l_seed = l0 / (8.0 * targets.len() as f64);
    let build = |u: &[f64]| -> MurecNetwork {
        let branches = (0..n_branches)
            .map(|n| {
                let l = u[n + 1] * l_seed;
                let omega_p = 2.0 * PI * poles[n];
                LcBranch {
                    inductance: l,
                    capacitance: 1.0 / (omega_p * omega_p * l),
                }
            })
            .collect();
        MurecNetwork {
            series_capacitance: u[0] * c0_seed,
            branches,
        }
    };
    let residual = |u: &[f64]| -> Vec<f64> {
        let net = build(u);
        targets.iter().map(|&f| reactance(l0, &net, f)).collect()
    };

    let mut seed = vec![1.0; targets.len()];
    seed[0] = single_c0(targets[0]) / c0_seed;
    let tol = SYNTHESIS_TOL_FACTOR * coil.self_resistance * (targets.len() as f64).sqrt();
    let sol = newton_system(residual, &seed, tol).map_err(|e| match e {
        Error::NonConvergence {
            iterations,
            residual,
            ..
        } => Error::Synthesis {
            iterations,
            residual,
            target: tol,
        },
        other => other,
    })?;

    let net = build(&sol.x);
    net.validate_against_targets(targets)?;
    Ok(net)
}

/// Geometry of one transmitter-receiver link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Distance d, m.
    pub distance: f64,
    /// Angular misalignment factors J_pq, |J| ≤ 1.
    pub misalignment: [[f64; 3]; 3],
    /// Receiver coil.
    pub rx_coil: CoilSpec,
    /// When set, the eddy-current loss factor is pinned to 1 (test aid).
    #[serde(default)]
    pub eddy_free: bool,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(Error::Validation(format!(
                "link distance must be positive, got {}",
                self.distance
            )));
        }
        for row in &self.misalignment {
            for &j in row {
                if !(j.abs() <= 1.0) {
                    return Err(Error::Validation(format!(
                        "misalignment factor {j} outside [-1, 1]"
                    )));
                }
            }
        }
        self.rx_coil.validate()
    }

    /// Identity alignment (coaxial coil triads).
    pub fn aligned(distance: f64, rx_coil: CoilSpec) -> LinkGeometry {
        LinkGeometry {
            distance,
            misalignment: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            rx_coil,
            eddy_free: false,
        }
    }
}

/// Eddy-free mutual-inductance matrix: M̄_pq = μπNₜNᵣaₜ²aᵣ²J_pq/(4d³), H.
pub fn static_mutual_inductance(
    geometry: &LinkGeometry,
    tx_coil: &CoilSpec,
    mu: f64,
) -> Result<[[f64; 3]; 3]> {
    geometry.validate()?;
    tx_coil.validate()?;
    let scale = mu
        * PI
        * (tx_coil.turns as f64)
        * (geometry.rx_coil.turns as f64)
        * tx_coil.radius.powi(2)
        * geometry.rx_coil.radius.powi(2)
        / (4.0 * geometry.distance.powi(3));
    let mut m = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            m[p][q] = scale * geometry.misalignment[p][q];
        }
    }
    Ok(m)
}

/// Equal-gain combining of the 3×3 coupling matrix with o = [1,1,1]/√3:
/// o·M̄·oᵀ = (1/3)·Σ_pq M̄_pq.
pub fn combined_coupling(mbar: &[[f64; 3]; 3]) -> f64 {
    mbar.iter().flatten().sum::<f64>() / 3.0
}

/// Deterministic (eddy-free) part of the end-to-end gain at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParts {
    /// ln |j2πf·R_L·(o M̄ oᵀ)/(Z_rx·Z_tx)|.
    pub log_amplitude: f64,
    /// Phase of the same quantity, rad.
    pub phase: f64,
    /// Log of the squared magnitude; equals 2·log_amplitude identically.
    pub log_power: f64,
}

/// Split the deterministic channel gain into log-amplitude, phase, and
/// log-power. The log-power is produced as exactly twice the
/// log-amplitude, so the algebraic identity survives rounding.
pub fn deterministic_gain_parts(
    f: f64,
    mbar: &[[f64; 3]; 3],
    z_tx: Complex64,
    z_rx: Complex64,
    load_resistance: f64,
) -> Result<GainParts> {
    if z_tx.norm() == 0.0 || z_rx.norm() == 0.0 {
        return Err(Error::Validation("impedances must be non-zero".into()));
    }
    let coupling = combined_coupling(mbar);
    if coupling == 0.0 {
        return Err(Error::DegenerateLink);
    }
    let log_amplitude = (2.0 * PI * f * load_resistance * coupling.abs()).ln()
        - z_rx.norm().ln()
        - z_tx.norm().ln();
    let numerator = Complex64::new(0.0, 2.0 * PI * f * load_resistance * coupling);
    let phase = (numerator / (z_rx * z_tx)).arg();
    Ok(GainParts {
        log_amplitude,
        phase,
        log_power: 2.0 * log_amplitude,
    })
}

/// Transmit-power bound 3/(2R_a(K+1))·ΣΣ P_{k,n} for the flattened
/// per-(user, band) power matrix.
pub fn transmit_power_bound(band_powers: &[f64], r_a: f64, num_users: usize) -> f64 {
    3.0 / (2.0 * r_a * num_users as f64) * band_powers.iter().sum::<f64>()
}

/// Per-(user, band) power that saturates the bound for a total budget
/// `p_total` split equally: inverting the bound with equality gives
/// 2·R_a·P_t/(3·(N+1)), independent of the user count.
pub fn equal_split_band_power(p_total: f64, r_a: f64, num_bands: usize) -> f64 {
    2.0 * r_a * p_total / (3.0 * num_bands as f64)
}

/// Multi-band frequency plan shared by every user of a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPlan {
    /// Center frequencies, Hz, ascending.
    pub centers_hz: Vec<f64>,
    /// Bandwidths, Hz, same length as `centers_hz`.
    pub bandwidths_hz: Vec<f64>,
    /// K+1, the number of time-multiplexed users.
    pub num_users: usize,
}

impl BandPlan {
    pub fn num_bands(&self) -> usize {
        self.centers_hz.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers_hz.is_empty() || self.centers_hz.len() != self.bandwidths_hz.len() {
            return Err(Error::Validation(
                "band plan needs matching, non-empty center and bandwidth lists".into(),
            ));
        }
        if self.num_users == 0 {
            return Err(Error::Validation("band plan needs at least one user".into()));
        }
        for (&f, &b) in self.centers_hz.iter().zip(&self.bandwidths_hz) {
            if !(f > 0.0 && b > 0.0) {
                return Err(Error::Validation(format!(
                    "band centers and widths must be positive, got ({f}, {b})"
                )));
            }
        }
        for i in 0..self.centers_hz.len() - 1 {
            let hi_edge = self.centers_hz[i] + self.bandwidths_hz[i] / 2.0;
            let lo_edge = self.centers_hz[i + 1] - self.bandwidths_hz[i + 1] / 2.0;
            if !(hi_edge < lo_edge) {
                return Err(Error::Validation(format!(
                    "bands {i} and {} overlap or touch ({hi_edge} Hz vs {lo_edge} Hz)",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}
