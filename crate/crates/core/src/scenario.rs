//! Scenario configuration: the on-disk description of one link (coils,
//! geometry, band plan, budget, path composition) plus the committed
//! default setup and the standard band-plan presets.
//!
//! Scenario files are TOML with a versioned schema; all numeric values
//! round-trip exactly through serialization.

use crate::analytics::ModulationScheme;
use crate::circuit::{loop_self_inductance, BandPlan, CoilSpec, LinkGeometry};
use crate::error::{Error, Result};
use crate::fading::{LengthDistribution, PathModel, PathSegment};
use crate::media::MediumCatalog;
use serde::{Deserialize, Serialize};

/// Current scenario schema version.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// One coil as configured on disk. The self-inductance may be given
/// explicitly or derived from the single-layer loop estimate using the
/// wire radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilConfig {
    pub radius_m: f64,
    pub turns: u32,
    pub self_resistance_ohm: f64,
    #[serde(default = "default_wire_radius")]
    pub wire_radius_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_self_inductance_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_resistance_ohm: Option<f64>,
}

fn default_wire_radius() -> f64 {
    1e-3
}

impl CoilConfig {
    /// Materialize with the self-inductance resolved.
    pub fn to_spec(&self, permeability: f64) -> CoilSpec {
        let l0 = self.base_self_inductance_h.unwrap_or_else(|| {
            loop_self_inductance(permeability, self.turns, self.radius_m, self.wire_radius_m)
        });
        CoilSpec {
            radius: self.radius_m,
            turns: self.turns,
            self_resistance: self.self_resistance_ohm,
            base_self_inductance: l0,
            load_resistance: self.load_resistance_ohm,
        }
    }
}

/// Link geometry block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub distance_m: f64,
    /// When set, segment means are rescaled at load so they sum to the
    /// link distance.
    #[serde(default)]
    pub normalize_path: bool,
    pub tx_coil: CoilConfig,
    pub rx_coil: CoilConfig,
    #[serde(default = "identity_misalignment")]
    pub misalignment: [[f64; 3]; 3],
}

fn identity_misalignment() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Power and noise budget, in the dB units the link is usually quoted in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub total_power_dbw: f64,
    pub noise_density_dbw_per_hz: f64,
}

impl BudgetConfig {
    pub fn total_power_w(&self) -> f64 {
        10f64.powf(self.total_power_dbw / 10.0)
    }
    pub fn noise_density_w_per_hz(&self) -> f64 {
        10f64.powf(self.noise_density_dbw_per_hz / 10.0)
    }
}

/// Analysis knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Outage threshold, dB (linear γ_th = 10^(dB/10)).
    pub gamma_th_db: f64,
    /// Gauss-Hermite series length for MGF evaluations.
    #[serde(default = "default_mgf_order")]
    pub mgf_order: usize,
}

fn default_mgf_order() -> usize {
    crate::analytics::DEFAULT_MGF_ORDER
}

impl AnalysisConfig {
    pub fn gamma_th(&self) -> f64 {
        10f64.powf(self.gamma_th_db / 10.0)
    }
}

/// One path segment as configured on disk (medium by catalog name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub medium: String,
    pub mean_length_m: f64,
    pub length_variance_m2: f64,
    pub distribution: LengthDistribution,
}

/// Complete scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub link: LinkConfig,
    pub bands: BandPlan,
    pub budget: BudgetConfig,
    pub modulation: ModulationScheme,
    pub analysis: AnalysisConfig,
    pub segments: Vec<SegmentConfig>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let sc: Scenario =
            toml::from_str(text).map_err(|e| Error::Schema(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported scenario schema version {} (expected {SCENARIO_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.bands.validate()?;
        self.modulation.validate()?;
        if !(self.link.distance_m > 0.0) {
            return Err(Error::Validation("link distance must be positive".into()));
        }
        if self.segments.is_empty() {
            return Err(Error::Validation("scenario needs at least one segment".into()));
        }
        if !(self.analysis.mgf_order >= 1
            && self.analysis.mgf_order <= crate::numerics::MAX_ORDER)
        {
            return Err(Error::Validation(format!(
                "mgf_order {} out of range",
                self.analysis.mgf_order
            )));
        }
        Ok(())
    }

    /// Resolve the segment list against a catalog into a sampleable path.
    pub fn path_model(&self, catalog: &MediumCatalog) -> Result<PathModel> {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                Ok(PathSegment {
                    medium: catalog.get(&s.medium)?.clone(),
                    mean_length: s.mean_length_m,
                    length_variance: s.length_variance_m2,
                    distribution: s.distribution,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = PathModel {
            segments,
            permeability: catalog.permeability,
        };
        path.validate()?;
        if self.link.normalize_path {
            path.normalized_to_distance(self.link.distance_m)
        } else {
            Ok(path)
        }
    }

    /// Link geometry with the rx coil resolved.
    pub fn link_geometry(&self, catalog: &MediumCatalog) -> LinkGeometry {
        LinkGeometry {
            distance: self.link.distance_m,
            misalignment: self.link.misalignment,
            rx_coil: self.link.rx_coil.to_spec(catalog.permeability),
            eddy_free: false,
        }
    }

    /// Replace the band plan (used by the figure presets).
    pub fn with_bands(&self, bands: BandPlan) -> Scenario {
        Scenario {
            bands,
            ..self.clone()
        }
    }

    /// Replace the total power, dBW.
    pub fn with_power_dbw(&self, p: f64) -> Scenario {
        let mut s = self.clone();
        s.budget.total_power_dbw = p;
        s
    }

    /// The committed default scenario: a 20 m rubble path of 50 segments
    /// drawn proportionally from the 13-material catalog (11 materials ×4,
    /// silver and gold ×3). Poor conductors carry the bulk of the length;
    /// metal debris enters as thin foils around a third of a skin depth
    /// thick, so thirty comparable segments share the fading variance and
    /// the lognormal limit is well developed. Every length standard
    /// deviation is 10% of its mean.
    pub fn paper_default() -> Scenario {
        let catalog = MediumCatalog::builtin();
        let mu = catalog.permeability;
        let f0 = 50e3;
        // (name, count, foil thickness in units of δ(50 kHz))
        let metals: [(&str, usize, f64); 8] = [
            ("copper", 4, 0.34),
            ("aluminum", 4, 0.36),
            ("silver", 3, 0.33),
            ("gold", 3, 0.35),
            ("lead", 4, 0.38),
            ("zinc", 4, 0.37),
            ("tin", 4, 0.39),
            ("titanium", 4, 0.35),
        ];
        let poors: [(&str, f64); 5] = [
            ("soil", 3.25),
            ("water", 0.9),
            ("concrete", 0.55),
            ("wood", 0.2),
            ("air", 0.1),
        ];

        let mut metal_segments: Vec<(String, f64)> = Vec::new();
        for (name, count, factor) in metals {
            let delta = crate::media::skin_depth(catalog.get(name).unwrap(), f0, mu)
                .unwrap()
                .meters;
            for _ in 0..count {
                metal_segments.push((name.to_string(), factor * delta));
            }
        }
        let metal_total: f64 = metal_segments.iter().map(|(_, l)| l).sum();
        let poor_raw: f64 = poors.iter().map(|(_, l)| 4.0 * l).sum();
        let scale = (20.0 - metal_total) / poor_raw;

        let mut segments = Vec::with_capacity(50);
        let mut push = |name: &str, length: f64| {
            segments.push(SegmentConfig {
                medium: name.to_string(),
                mean_length_m: length,
                length_variance_m2: (0.1 * length) * (0.1 * length),
                distribution: LengthDistribution::Uniform,
            });
        };
        for (name, base) in poors {
            for _ in 0..4 {
                push(name, base * scale);
            }
        }
        for (name, length) in &metal_segments {
            push(name, *length);
        }

        Scenario {
            schema_version: SCENARIO_SCHEMA_VERSION,
            name: "paper-v".into(),
            link: LinkConfig {
                distance_m: 20.0,
                normalize_path: false,
                tx_coil: CoilConfig {
                    radius_m: 0.6,
                    turns: 200,
                    self_resistance_ohm: 2.2619,
                    wire_radius_m: 1e-3,
                    base_self_inductance_h: None,
                    load_resistance_ohm: None,
                },
                rx_coil: CoilConfig {
                    radius_m: 0.2,
                    turns: 50,
                    self_resistance_ohm: 0.1885,
                    wire_radius_m: 1e-3,
                    base_self_inductance_h: None,
                    load_resistance_ohm: Some(0.1885),
                },
                misalignment: identity_misalignment(),
            },
            bands: BandPlan {
                centers_hz: vec![50e3],
                bandwidths_hz: vec![1e3],
                num_users: 4,
            },
            budget: BudgetConfig {
                total_power_dbw: 7.0,
                noise_density_dbw_per_hz: -185.0,
            },
            modulation: ModulationScheme::bpsk(),
            analysis: AnalysisConfig {
                gamma_th_db: 4.8,
                mgf_order: crate::analytics::DEFAULT_MGF_ORDER,
            },
            segments,
        }
    }
}

/// The standard multi-band plans: 1, 2, 4, or 8 bands splitting a 1 kHz
/// total bandwidth around 50 kHz.
pub fn standard_band_plan(num_bands: usize, num_users: usize) -> Result<BandPlan> {
    let centers_khz: Vec<f64> = match num_bands {
        1 => vec![50.0],
        2 => vec![40.0, 60.0],
        4 => vec![35.0, 45.0, 55.0, 65.0],
        8 => (0..8).map(|i| 32.5 + 5.0 * i as f64).collect(),
        other => {
            return Err(Error::Validation(format!(
                "standard plans exist for 1, 2, 4, or 8 bands, not {other}"
            )))
        }
    };
    let width = 1000.0 / num_bands as f64;
    let plan = BandPlan {
        centers_hz: centers_khz.iter().map(|c| c * 1e3).collect(),
        bandwidths_hz: vec![width; num_bands],
        num_users,
    };
    plan.validate()?;
    Ok(plan)
}

/// Two bands at 50 kHz ∓ Δf/2, each 500 Hz wide.
pub fn delta_f_band_plan(delta_f_hz: f64, num_users: usize) -> Result<BandPlan> {
    let plan = BandPlan {
        centers_hz: vec![50e3 - delta_f_hz / 2.0, 50e3 + delta_f_hz / 2.0],
        bandwidths_hz: vec![500.0, 500.0],
        num_users,
    };
    plan.validate()?;
    Ok(plan)
}
