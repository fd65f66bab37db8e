//! Propagation-medium catalog and frequency-dependent skin depth.
//!
//! Two skin-depth formulas are used, selected by the stored conductor
//! class of each material:
//!
//! ```text
//! general:        δ(f) = 1 / (2πf √( (μ ε / 2)(√(1 + (σ/(2πf ε))²) − 1) ))
//! good conductor: δ(f) = 1 / √(π f μ σ)
//! ```
//!
//! with ε the absolute permittivity ε_r·ε₀. For loss tangents
//! σ/(2πf ε) ≫ 1 the general form converges to the good-conductor one.
//! For very small loss tangents t the bracket √(1+t²) − 1 cancels
//! catastrophically in doubles, so a binomial-series branch takes over
//! below t = 1e-2.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// Free-space permeability 4π·10⁻⁷, H/m (also the catalog default).
pub const VACUUM_PERMEABILITY: f64 = 1.2566370614359172e-6;

/// Which skin-depth formula applies to a material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductorClass {
    /// Full lossy-dielectric expression.
    General,
    /// High-loss limit, valid for metals.
    GoodConductor,
}

/// Which branch actually produced a skin-depth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkinDepthBranch {
    General,
    GoodConductor,
}

impl std::fmt::Display for SkinDepthBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkinDepthBranch::General => write!(f, "general"),
            SkinDepthBranch::GoodConductor => write!(f, "good_conductor"),
        }
    }
}

/// Skin depth together with the formula branch that computed it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinDepth {
    pub meters: f64,
    pub branch: SkinDepthBranch,
}

/// One propagation material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub name: String,
    /// ε_r ≥ 1, dimensionless.
    pub relative_permittivity: f64,
    /// σ > 0, S/m.
    #[serde(rename = "conductivity_s_per_m")]
    pub conductivity: f64,
    pub conductor_class: ConductorClass,
}

impl Medium {
    /// Absolute permittivity ε_r·ε₀, F/m.
    pub fn permittivity(&self) -> f64 {
        self.relative_permittivity * VACUUM_PERMITTIVITY
    }

    /// Loss tangent σ/(2πf ε).
    pub fn loss_tangent(&self, f_hz: f64) -> f64 {
        self.conductivity / (2.0 * std::f64::consts::PI * f_hz * self.permittivity())
    }

    fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("medium name must be non-empty".into()));
        }
        if !(self.relative_permittivity >= 1.0) {
            return Err(Error::Validation(format!(
                "medium '{}': relative permittivity must be >= 1, got {}",
                self.name, self.relative_permittivity
            )));
        }
        if !(self.conductivity > 0.0) {
            return Err(Error::Validation(format!(
                "medium '{}': conductivity must be positive, got {}",
                self.name, self.conductivity
            )));
        }
        // Guard against assigning the high-loss formula to a material that
        // is not actually a good conductor at the band of interest.
        if self.conductor_class == ConductorClass::GoodConductor
            && self.loss_tangent(10_000.0) <= 1e3
        {
            return Err(Error::Validation(format!(
                "medium '{}': loss tangent at 10 kHz is {:.3e}, too low for the good-conductor formula",
                self.name,
                self.loss_tangent(10_000.0)
            )));
        }
        Ok(())
    }
}

/// Named collection of media plus the global permeability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediumCatalog {
    pub schema_version: u32,
    /// Global μ, H/m; all §-catalog materials are non-magnetic.
    #[serde(rename = "permeability_h_per_m")]
    pub permeability: f64,
    pub media: Vec<Medium>,
}

/// The built-in catalog file, embedded at compile time.
pub const BUILTIN_CATALOG_TOML: &str = include_str!("../data/media.toml");

impl MediumCatalog {
    /// The built-in thirteen-material catalog.
    pub fn builtin() -> MediumCatalog {
        Self::from_toml(BUILTIN_CATALOG_TOML).expect("embedded catalog must parse")
    }

    /// Parse and validate a catalog from TOML text.
    pub fn from_toml(text: &str) -> Result<MediumCatalog> {
        let cat: MediumCatalog =
            toml::from_str(text).map_err(|e| Error::Schema(format!("medium catalog: {e}")))?;
        cat.validate()?;
        Ok(cat)
    }

    /// Load a catalog from a file path.
    pub fn from_file(path: &std::path::Path) -> Result<MediumCatalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    /// Serialize back to TOML (round-trips all values exactly).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("catalog serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Schema(format!(
                "unsupported catalog schema version {}",
                self.schema_version
            )));
        }
        if !(self.permeability > 0.0) {
            return Err(Error::Validation("permeability must be positive".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.media {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate medium name '{}'",
                    m.name
                )));
            }
        }
        Ok(())
    }

    /// Look a medium up by name.
    pub fn get(&self, name: &str) -> Result<&Medium> {
        self.media
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown medium '{name}'")))
    }
}

fn check_frequency(f_hz: f64) -> Result<()> {
    if !(f_hz > 0.0) || !f_hz.is_finite() {
        return Err(Error::Validation(format!(
            "frequency must be positive and finite, got {f_hz}"
        )));
    }
    Ok(())
}

/// Skin depth from the full lossy-dielectric expression.
pub fn skin_depth_general(medium: &Medium, f_hz: f64, mu: f64) -> Result<f64> {
    check_frequency(f_hz)?;
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    let eps = medium.permittivity();
    let t = medium.conductivity / (omega * eps);
    // bracket = √(1 + t²) − 1, series below t = 1e-2 to avoid cancellation
    let bracket = if t < 1e-2 {
        let t2 = t * t;
        t2 / 2.0 * (1.0 - t2 / 4.0 + t2 * t2 / 8.0 - 5.0 * t2 * t2 * t2 / 64.0)
    } else {
        (1.0 + t * t).sqrt() - 1.0
    };
    let delta = 1.0 / (omega * (mu * eps / 2.0 * bracket).sqrt());
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Validation(format!(
            "skin depth for '{}' at {f_hz} Hz is not finite-positive",
            medium.name
        )));
    }
    Ok(delta)
}

/// Skin depth in the good-conductor (high-loss) limit: (π f μ σ)^(−1/2).
pub fn skin_depth_good_conductor(medium: &Medium, f_hz: f64, mu: f64) -> Result<f64> {
    check_frequency(f_hz)?;
    Ok(1.0 / (std::f64::consts::PI * f_hz * mu * medium.conductivity).sqrt())
}

/// Skin depth dispatched on the medium's conductor class; reports which
/// branch fired.
pub fn skin_depth(medium: &Medium, f_hz: f64, mu: f64) -> Result<SkinDepth> {
    match medium.conductor_class {
        ConductorClass::General => Ok(SkinDepth {
            meters: skin_depth_general(medium, f_hz, mu)?,
            branch: SkinDepthBranch::General,
        }),
        ConductorClass::GoodConductor => Ok(SkinDepth {
            meters: skin_depth_good_conductor(medium, f_hz, mu)?,
            branch: SkinDepthBranch::GoodConductor,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: f64 = VACUUM_PERMEABILITY;

    fn medium(name: &str, er: f64, sigma: f64, class: ConductorClass) -> Medium {
        Medium {
            name: name.into(),
            relative_permittivity: er,
            conductivity: sigma,
            conductor_class: class,
        }
    }

    #[test]
    fn builtin_catalog_has_exactly_the_thirteen_materials() {
        let cat = MediumCatalog::builtin();
        assert_eq!(cat.media.len(), 13);
        assert!((cat.permeability - 4.0e-7 * std::f64::consts::PI).abs() < 1e-22);
        // value snapshot
        let expect: &[(&str, f64, f64)] = &[
            ("soil", 5.0, 1e-6),
            ("water", 80.0, 5e-3),
            ("concrete", 4.0, 1e-5),
            ("wood", 2.0, 1e-8),
            ("air", 1.0, 3e-15),
            ("copper", 1.0, 5.8e7),
            ("aluminum", 1.0, 3.5e7),
            ("silver", 1.0, 6.3e7),
            ("gold", 1.0, 4.5e7),
            ("lead", 1.0, 5e6),
            ("zinc", 1.0, 1.6e7),
            ("tin", 1.0, 9e6),
            ("titanium", 1.0, 2.3e6),
        ];
        for (name, er, sigma) in expect {
            let m = cat.get(name).unwrap();
            assert_eq!(m.relative_permittivity, *er, "{name} permittivity");
            assert_eq!(m.conductivity, *sigma, "{name} conductivity");
        }
    }

    #[test]
    fn catalog_round_trips_through_toml() {
        let cat = MediumCatalog::builtin();
        let text = cat.to_toml();
        let back = MediumCatalog::from_toml(&text).unwrap();
        assert_eq!(cat.media, back.media);
        assert_eq!(cat.permeability, back.permeability);
    }

    #[test]
    fn soil_skin_depth_matches_pinned_reference() {
        // 50-digit evaluation of the general formula: 11878.580169702783 m
        let cat = MediumCatalog::builtin();
        let d = skin_depth_general(cat.get("soil").unwrap(), 50e3, MU).unwrap();
        assert!(
            ((d - 11878.580169702783) / 11878.580169702783).abs() < 1e-13,
            "soil δ = {d}"
        );
    }

    #[test]
    fn air_skin_depth_matches_low_loss_asymptote() {
        // Low-loss limit δ → (2/σ)√(ε/μ); agreement within 1e-6 relative.
        let cat = MediumCatalog::builtin();
        let air = cat.get("air").unwrap();
        let d = skin_depth_general(air, 50e3, MU).unwrap();
        let asym = (2.0 / air.conductivity) * (air.permittivity() / MU).sqrt();
        assert!(((d - asym) / asym).abs() < 1e-6, "δ={d:e} asym={asym:e}");
        // pinned 50-digit value
        assert!(((d - 1.7696124858103427e12) / 1.7696124858103427e12).abs() < 1e-12);
    }

    #[test]
    fn copper_good_conductor_value() {
        let cat = MediumCatalog::builtin();
        let d = skin_depth_good_conductor(cat.get("copper").unwrap(), 50e3, MU).unwrap();
        assert!(((d - 2.955433097999895e-4) / 2.955433097999895e-4).abs() < 1e-13);
    }

    #[test]
    fn frequency_scaling_inverse_square_root() {
        let cat = MediumCatalog::builtin();
        let cu = cat.get("copper").unwrap();
        let d1 = skin_depth_good_conductor(cu, 50e3, MU).unwrap();
        let d4 = skin_depth_good_conductor(cu, 200e3, MU).unwrap();
        assert!(((d4 - d1 / 2.0) / d1).abs() < 1e-14);
    }

    #[test]
    fn silver_thinner_than_copper() {
        let cat = MediumCatalog::builtin();
        let cu = skin_depth(cat.get("copper").unwrap(), 50e3, MU).unwrap();
        let ag = skin_depth(cat.get("silver").unwrap(), 50e3, MU).unwrap();
        assert!(ag.meters < cu.meters);
    }

    #[test]
    fn general_formula_converges_to_good_conductor_limit() {
        // As σ/(2πfε) → ∞ the general expression approaches (πfμσ)^(-1/2).
        let m = medium("very_lossy", 1.0, 1e9, ConductorClass::General);
        let g = skin_depth_general(&m, 50e3, MU).unwrap();
        let gc = skin_depth_good_conductor(&m, 50e3, MU).unwrap();
        assert!(((g - gc) / gc).abs() < 1e-9);
    }

    #[test]
    fn exactness_crossover_for_lossy_catalog_media() {
        // Every catalog medium with loss tangent > 1e4 at f agrees between
        // the two formulas to better than 1%.
        let cat = MediumCatalog::builtin();
        for f in [1e3, 10e3, 50e3, 1e6] {
            for m in &cat.media {
                if m.loss_tangent(f) > 1e4 {
                    let g = skin_depth_general(m, f, MU).unwrap();
                    let gc = skin_depth_good_conductor(m, f, MU).unwrap();
                    assert!(
                        ((g - gc) / gc).abs() < 0.01,
                        "{} at {f} Hz: {g:e} vs {gc:e}",
                        m.name
                    );
                }
            }
        }
    }

    #[test]
    fn skin_depth_strictly_decreasing_in_frequency() {
        // Strict decrease over [1 kHz, 1 MHz]. For quasi-lossless media the
        // low-loss limit (2/σ)√(ε/μ) is frequency-free and the true
        // decrement (relative ~t²/8 ≲ 1e-16) underflows doubles, so
        // equality is tolerated only there.
        let cat = MediumCatalog::builtin();
        for m in &cat.media {
            let mut prev = f64::INFINITY;
            let mut f = 1e3;
            while f <= 1e6 {
                let d = skin_depth(m, f, MU).unwrap().meters;
                if m.loss_tangent(f) < 1e-7 {
                    assert!(
                        d <= prev * (1.0 + 1e-14),
                        "{} increased at {f} Hz beyond rounding",
                        m.name
                    );
                } else {
                    assert!(d < prev, "{} not decreasing at {f} Hz", m.name);
                }
                prev = d;
                f *= 1.25;
            }
        }
    }

    #[test]
    fn dispatch_branches() {
        let cat = MediumCatalog::builtin();
        assert_eq!(
            skin_depth(cat.get("copper").unwrap(), 50e3, MU)
                .unwrap()
                .branch,
            SkinDepthBranch::GoodConductor
        );
        assert_eq!(
            skin_depth(cat.get("soil").unwrap(), 50e3, MU).unwrap().branch,
            SkinDepthBranch::General
        );
    }

    #[test]
    fn non_positive_frequency_rejected() {
        let cat = MediumCatalog::builtin();
        let soil = cat.get("soil").unwrap();
        assert!(skin_depth_general(soil, 0.0, MU).is_err());
        assert!(skin_depth_general(soil, -5.0, MU).is_err());
        assert!(skin_depth_good_conductor(soil, f64::NAN, MU).is_err());
    }

    #[test]
    fn misclassified_conductor_rejected() {
        // Soil's loss tangent at 10 kHz is ~0.36, far below the 1e3 gate.
        let m = medium("bogus", 5.0, 1e-6, ConductorClass::GoodConductor);
        assert!(m.validate().is_err());
    }

    #[test]
    fn unknown_medium_name_is_schema_error() {
        let cat = MediumCatalog::builtin();
        assert!(matches!(cat.get("unobtainium"), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_conductor_class_rejected_at_parse() {
        let text = r#"
schema_version = 1
permeability_h_per_m = 1.2566370614359172e-6
[[media]]
name = "mystery"
relative_permittivity = 1.0
conductivity_s_per_m = 1.0
conductor_class = "superconductor"
"#;
        assert!(matches!(
            MediumCatalog::from_toml(text),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut cat = MediumCatalog::builtin();
        let dup = cat.media[0].clone();
        cat.media.push(dup);
        assert!(cat.validate().is_err());
    }
}
