//! Run configuration: a versioned TOML schema shared by the command-line
//! tool and the library drivers. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iga::GaConfig;
use crate::lattice::{HexAperture, LatticeError};
use crate::pattern::{ElementPattern, ExcitationSet, MaskShape, PowerMask};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    SchemaVersion(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("reference file error: {0}")]
    ReferenceFile(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub aperture: ApertureSection,
    #[serde(default)]
    pub mask: MaskSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ApertureSection {
    pub rings: u32,
    pub cell_side: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MaskSection {
    pub center_u: f64,
    pub center_v: f64,
    pub width_u: f64,
    pub width_v: f64,
    pub floor_db: f64,
    pub shape: MaskShape,
}

impl Default for MaskSection {
    fn default() -> Self {
        Self {
            center_u: 0.0,
            center_v: 0.0,
            width_u: 0.9,
            width_v: 0.9,
            floor_db: -26.0,
            shape: MaskShape::Rectangle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Uniform,
    Cosine,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    pub kind: ReferenceKind,
    /// Cosine taper exponent.
    pub power: f64,
    /// Excitation CSV path for `kind = "file"`.
    pub path: Option<String>,
    /// Steering added to the reference phases.
    pub steer_theta_deg: f64,
    pub steer_phi_deg: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self {
            kind: ReferenceKind::Uniform,
            power: 1.0,
            path: None,
            steer_theta_deg: 0.0,
            steer_phi_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub resolution: usize,
    /// Element pattern exponent: absent means isotropic elements.
    pub element_cos_exponent: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            resolution: 201,
            element_cos_exponent: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population: usize,
    pub max_iterations: u32,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub stagnation_window: u32,
    pub stagnation_threshold: f64,
    pub diversity_threshold: f64,
}

impl Default for GaSection {
    fn default() -> Self {
        let d = GaConfig::default();
        Self {
            population: d.population,
            max_iterations: d.max_iterations,
            crossover_prob: d.crossover_prob,
            mutation_prob: d.mutation_prob,
            stagnation_window: d.stagnation_window,
            stagnation_threshold: d.stagnation_threshold,
            diversity_threshold: d.diversity_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion(self.schema_version));
        }
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.aperture.rings == 0 {
            return invalid("aperture.rings must be at least 1");
        }
        if !self.aperture.cell_side.is_finite() || self.aperture.cell_side <= 0.0 {
            return invalid("aperture.cell_side must be positive");
        }
        if !(self.mask.width_u > 0.0 && self.mask.width_v > 0.0) {
            return invalid("mask widths must be positive");
        }
        if self.grid.resolution < 2 {
            return invalid("grid.resolution must be at least 2");
        }
        if self.reference.kind == ReferenceKind::File && self.reference.path.is_none() {
            return invalid("reference.path is required when reference.kind = \"file\"");
        }
        self.ga_config(None)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn build_aperture(&self) -> Result<HexAperture, ConfigError> {
        Ok(HexAperture::new(
            self.aperture.rings,
            self.aperture.cell_side,
        )?)
    }

    pub fn power_mask(&self) -> PowerMask {
        PowerMask {
            center: (self.mask.center_u, self.mask.center_v),
            width_u: self.mask.width_u,
            width_v: self.mask.width_v,
            floor_db: self.mask.floor_db,
            shape: self.mask.shape,
        }
    }

    pub fn element_pattern(&self) -> ElementPattern {
        match self.grid.element_cos_exponent {
            Some(exponent) => ElementPattern::CosTheta { exponent },
            None => ElementPattern::Isotropic,
        }
    }

    pub fn ga_config(&self, seed_override: Option<u64>) -> GaConfig {
        GaConfig {
            population: self.ga.population,
            max_iterations: self.ga.max_iterations,
            crossover_prob: self.ga.crossover_prob,
            mutation_prob: self.ga.mutation_prob,
            stagnation_window: self.ga.stagnation_window,
            stagnation_threshold: self.ga.stagnation_threshold,
            diversity_threshold: self.ga.diversity_threshold,
            seed: seed_override.unwrap_or(self.seed),
        }
    }

    /// Builds the reference excitations, reading the excitation file when
    /// configured, and applies the configured steering.
    pub fn reference(&self, ap: &HexAperture) -> Result<ExcitationSet, ConfigError> {
        let mut set = match self.reference.kind {
            ReferenceKind::Uniform => ExcitationSet::uniform(ap),
            ReferenceKind::Cosine => ExcitationSet::cosine_taper(ap, self.reference.power),
            ReferenceKind::File => {
                let path = self.reference.path.as_ref().expect("validated");
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::ReferenceFile(format!("{path}: {e}")))?;
                crate::formats::read_excitations(&text, ap)
                    .map_err(|e| ConfigError::ReferenceFile(format!("{path}: {e}")))?
            }
        };
        if self.reference.steer_theta_deg != 0.0 || self.reference.steer_phi_deg != 0.0 {
            set.steer(ap, self.reference.steer_theta_deg, self.reference.steer_phi_deg);
        }
        Ok(set)
    }

    /// Stable 64-bit FNV-1a hash of the canonical JSON form, stored in every
    /// output so runs can be traced back to their exact configuration. The
    /// output section is excluded: where results land does not change what
    /// they are, and runs that differ only in destination stay byte-identical.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let canonical = value.to_string();
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in canonical.as_bytes() {
            h ^= *byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\n[aperture]\nrings = 2\ncell_side = 0.5\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.grid.resolution, 201);
        assert_eq!(c.mask.floor_db, -26.0);
        assert_eq!(c.ga.population, 542);
        assert_eq!(c.output.directory, "out");
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[mask]\nwidht_u = 0.9\n");
        assert!(matches!(
            RunConfig::from_toml_str(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = format!("{MINIMAL}\nbogus_top_level = 3\n");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let text = "schema_version = 9\n[aperture]\nrings = 2\ncell_side = 0.5\n";
        assert!(matches!(
            RunConfig::from_toml_str(text),
            Err(ConfigError::SchemaVersion(9))
        ));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = "schema_version = 1\n[aperture]\nrings = 0\ncell_side = 0.5\n";
        assert!(matches!(
            RunConfig::from_toml_str(text),
            Err(ConfigError::Invalid(_))
        ));
        let text = format!("{MINIMAL}\n[reference]\nkind = \"file\"\n");
        assert!(matches!(
            RunConfig::from_toml_str(&text),
            Err(ConfigError::Invalid(_))
        ));
        let text = format!("{MINIMAL}\n[ga]\npopulation = 1\n");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_toml_str(MINIMAL).unwrap();
        let b = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_toml_str(
            "schema_version = 1\nseed = 5\n[aperture]\nrings = 2\ncell_side = 0.5\n",
        )
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn round_trips_through_toml() {
        let a = RunConfig::from_toml_str(MINIMAL).unwrap();
        let b = RunConfig::from_toml_str(&a.to_toml_string()).unwrap();
        assert_eq!(a, b);
    }
}
