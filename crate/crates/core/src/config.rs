//! Run configuration: a TOML file naming the domain, the field, tolerances,
//! mesh resolutions, the norms file, the output directory and the seed.
//!
//! Relative paths inside the file are resolved against the directory that
//! holds it, so a run does not depend on the working directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::Var;
use crate::flow::{FieldSpec, Flow, ImplicitDomain, Metric, Tolerances};
use crate::stratification::AtlasConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("reading {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("parsing config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Coordinate names, e.g. `["x", "y"]`.
    pub vars: Vec<String>,
    /// Boundary function; the domain is `z <= 0`.
    pub z: String,
    /// One `[lo, hi]` pair per coordinate.
    pub bbox: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub g11: String,
    pub g12: String,
    pub g22: String,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            g11: "1".into(),
            g12: "0".into(),
            g22: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    /// Geodesic flow on the unit tangent bundle of a planar domain.
    Geodesic {
        #[serde(default)]
        metric: MetricConfig,
    },
    /// One component per domain coordinate.
    Explicit { components: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    /// Number of random entries fed to the scattering map.
    pub entries: usize,
    /// Also write the trajectory cache and its JSON-lines mirror.
    pub cache: bool,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            entries: 10_000,
            cache: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationConfig {
    /// Registry id of the manifold the bounds are stated for.
    pub manifold: String,
    /// Registry id of its double.
    pub double: String,
    #[serde(default = "default_max_degree")]
    pub max_degree: u32,
}

fn default_max_degree() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MhoConfig {
    /// Shipped synthetic models to build; empty means none.
    pub models: Vec<String>,
    /// Also build cell models from a sampled atlas.
    pub heuristic: bool,
    /// Mesh of that atlas. Every node becomes a top cell and the homology
    /// engine works with dense matrices, so this stays coarse.
    pub heuristic_mesh: AtlasConfig,
}

impl Default for MhoConfig {
    fn default() -> Self {
        MhoConfig {
            models: Vec::new(),
            heuristic: true,
            heuristic_mesh: AtlasConfig {
                samples_per_unit: 1.0,
                angle_steps: 6,
                ..AtlasConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Norm annotations file.
    #[serde(default)]
    pub norms: Option<PathBuf>,
    pub domain: DomainConfig,
    pub field: FieldConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mesh: AtlasConfig,
    #[serde(default)]
    pub scatter: ScatterConfig,
    #[serde(default)]
    pub annotations: Option<AnnotationConfig>,
    #[serde(default)]
    pub mho: MhoConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates; relative paths stay relative.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output_dir = base.join(&cfg.output_dir);
        cfg.norms = cfg.norms.map(|n| base.join(n));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        positive("tol_boundary", t.tol_boundary)?;
        positive("tol_event", t.tol_event)?;
        positive("tol_mult", t.tol_mult)?;
        positive("rtol", t.rtol)?;
        positive("atol", t.atol)?;
        if let Some(v) = t.t_max {
            positive("t_max", v)?;
        }
        if let Some(v) = t.h_max {
            positive("h_max", v)?;
        }
        if t.k_max == 0 {
            return Err(ConfigError::Invalid("k_max must be at least 1".into()));
        }
        for m in [&self.mesh, &self.mho.heuristic_mesh] {
            positive("samples_per_unit", m.samples_per_unit)?;
            positive("jump_fraction", m.jump_fraction)?;
            if m.angle_steps < 2 || m.seed_grid < 4 {
                return Err(ConfigError::Invalid(
                    "mesh needs angle_steps >= 2 and seed_grid >= 4".into(),
                ));
            }
        }
        self.vars()?;
        if self.domain.bbox.len() != self.domain.vars.len() {
            return Err(ConfigError::Invalid("bbox needs one interval per variable".into()));
        }
        if let Some(&[lo, hi]) = self.domain.bbox.iter().find(|[lo, hi]| !(lo < hi)) {
            return Err(ConfigError::Invalid(format!("empty bbox interval [{lo}, {hi}]")));
        }
        if let FieldConfig::Explicit { components } = &self.field {
            if components.len() != self.domain.vars.len() {
                return Err(ConfigError::Invalid(
                    "explicit field needs one component per domain variable".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> Result<Vec<Var>, ConfigError> {
        self.domain
            .vars
            .iter()
            .map(|v| v.parse().map_err(|_| ConfigError::Invalid(format!("unknown variable `{v}`"))))
            .collect()
    }

    pub fn build_domain(&self) -> Result<ImplicitDomain, ConfigError> {
        let bbox = self.domain.bbox.iter().map(|[a, b]| (*a, *b)).collect();
        ImplicitDomain::parse(self.vars()?, &self.domain.z, bbox)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_field(&self) -> Result<FieldSpec, ConfigError> {
        let invalid = |e: crate::flow::FlowError| ConfigError::Invalid(e.to_string());
        match &self.field {
            FieldConfig::Geodesic { metric } => {
                if self.domain.vars != ["x", "y"] {
                    return Err(ConfigError::Invalid(
                        "geodesic fields need a planar domain in x, y".into(),
                    ));
                }
                let m = Metric::parse(&metric.g11, &metric.g12, &metric.g22).map_err(invalid)?;
                Ok(FieldSpec::geodesic(m))
            }
            FieldConfig::Explicit { components } => {
                let comps: Vec<&str> = components.iter().map(String::as_str).collect();
                FieldSpec::parse_explicit(self.vars()?, &comps).map_err(invalid)
            }
        }
    }

    /// Domain and field compiled together; a degenerate metric is a config
    /// error.
    pub fn build_flow(&self) -> Result<Flow, ConfigError> {
        Flow::new(self.build_domain()?, self.build_field()?, self.tolerances.k_max)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex_digest(json.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "disk"
[domain]
vars = ["x", "y"]
z = "x^2 + y^2 - 1"
bbox = [[-1.5, 1.5], [-1.5, 1.5]]
[field]
kind = "geodesic"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.field, FieldConfig::Geodesic { metric: MetricConfig::default() });
        assert!(c.build_flow().is_ok());
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let text = format!("{MINIMAL}[tolerances]\ntol_event = 0.0\n");
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::Invalid(_))));
        let text = format!("{MINIMAL}[tolerances]\nt_max = -1.0\n");
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}colour = 3\n");
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse(MINIMAL).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn degenerate_metric_is_a_config_error() {
        let text = MINIMAL.replace(
            "kind = \"geodesic\"",
            "kind = \"geodesic\"\nmetric = { g11 = \"1\", g12 = \"2\", g22 = \"1\" }",
        );
        let c = RunConfig::parse(&text).unwrap();
        assert!(matches!(c.build_flow(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn explicit_field_arity_checked() {
        let text = MINIMAL.replace(
            "kind = \"geodesic\"",
            "kind = \"explicit\"\ncomponents = [\"1\"]",
        );
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            hex_digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
