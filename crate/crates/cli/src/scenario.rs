//! Scenario configuration files.

use std::path::Path;

use cliffield::dynamics::{ModelKind, ModelParams};
use cliffield::field::{FieldKind, FieldParams};
use cliffield::weyl::Convention;
use cliffield::witt::{Normalization, WittScheme};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::registry::{self, Module, Tolerance};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub spec_version: u32,
    pub name: String,
    pub module: Module,
    pub topic: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub outputs: Outputs,
    pub blade: Option<BladeConfig>,
    pub witt: Option<WittConfig>,
    pub grassmann: Option<GrassmannConfig>,
    pub weyl: Option<WeylConfig>,
    pub dynamics: Option<DynamicsConfig>,
    pub field: Option<FieldConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub tolerance: Option<f64>,
}

/// Artifact file names, relative to the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Trajectory CSV (dynamics).
    pub trajectory: Option<String>,
    /// Gamma-matrix JSON (witt).
    pub gammas: Option<String>,
    /// Spectrum CSV (field).
    pub spectrum: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BladeConfig {
    /// (p, q) pairs.
    pub signatures: Vec<[usize; 2]>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Upper bound on terms per random multivector.
    #[serde(default = "default_terms")]
    pub max_terms: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WittConfig {
    pub signature: [usize; 2],
    pub scheme: WittScheme,
    /// Flag string for the represented ideal; all barred when absent.
    pub vacuum: Option<String>,
    #[serde(default = "unit")]
    pub normalization: Normalization,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrassmannConfig {
    pub signature: [usize; 2],
    pub scheme: WittScheme,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylConfig {
    /// Metric signs g_μμ.
    pub metric: Vec<i8>,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "raw")]
    pub convention: Convention,
    #[serde(default = "default_samples")]
    pub pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    #[serde(default)]
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub duration: f64,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    /// Initial phase-space point; drawn from the seed when absent.
    pub z0: Option<Vec<f64>>,
    pub tau: TauGrid,
    /// Piecewise-constant multiplier schedule.
    #[serde(default)]
    pub segments: Vec<Segment>,
    #[serde(default = "default_small_cutoff")]
    pub cutoff: usize,
    #[serde(default = "raw")]
    pub convention: Convention,
    #[serde(default = "default_pairs")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dims: Vec<usize>,
    #[serde(default = "one")]
    pub spacing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub lattice: LatticeConfig,
    pub kind: FieldKind,
    #[serde(default)]
    pub params: FieldParams,
    /// Vacuum rules: "standard", "conjugate", "split" or a flag string.
    #[serde(default = "default_vacua")]
    pub vacua: Vec<String>,
    /// Largest D for the anticommutator and census checks.
    #[serde(default = "default_census")]
    pub census_modes: usize,
    #[serde(default = "default_small_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_flow_time")]
    pub flow_time: f64,
}

fn default_pairs() -> usize {
    100
}
fn default_terms() -> usize {
    6
}
fn default_samples() -> usize {
    20
}
fn default_cutoff() -> usize {
    12
}
fn default_small_cutoff() -> usize {
    6
}
fn default_census() -> usize {
    4
}
fn default_flow_time() -> f64 {
    1.0
}
fn default_vacua() -> Vec<String> {
    vec!["standard".into(), "conjugate".into(), "split".into()]
}
fn unit() -> Normalization {
    Normalization::Unit
}
fn raw() -> Convention {
    Convention::Raw
}
fn one() -> f64 {
    1.0
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |nl| before[nl + 1..].chars().count()) + 1;
    (line, col)
}

impl Scenario {
    /// Parse and validate a scenario from TOML text.
    pub fn parse(src: &str, origin: &str) -> Result<Scenario> {
        let sc: Scenario = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            CliError::Parse { path: origin.to_string(), line, column, message: e.message().trim().to_string() }
        })?;
        sc.validate(origin)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let src = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Scenario::parse(&src, &path.display().to_string())
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let err = |message: String| CliError::Schema { path: origin.to_string(), message };
        if self.spec_version != SPEC_VERSION {
            return Err(err(format!("spec_version {} not supported (expected {SPEC_VERSION})", self.spec_version)));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(err(format!("scenario name '{}' must be non-empty [A-Za-z0-9_-]", self.name)));
        }
        let topic = registry::find_topic(&self.topic).ok_or_else(|| err(format!("unknown topic '{}'", self.topic)))?;
        if topic.module != self.module {
            return Err(err(format!("topic '{}' belongs to module {}", self.topic, topic.module.name())));
        }
        let present = [
            (Module::Blade, self.blade.is_some()),
            (Module::Witt, self.witt.is_some()),
            (Module::Grassmann, self.grassmann.is_some()),
            (Module::Weyl, self.weyl.is_some()),
            (Module::Dynamics, self.dynamics.is_some()),
            (Module::Field, self.field.is_some()),
        ];
        for (m, has) in present {
            if has != (m == self.module) {
                let msg = if has {
                    format!("table [{}] not allowed in a {} scenario", m.name(), self.module.name())
                } else {
                    format!("missing table [{}]", m.name())
                };
                return Err(err(msg));
            }
        }
        if self.checks.is_empty() {
            return Err(err("at least one check is required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.checks {
            let inv = registry::find_invariant(self.module, &c.name).ok_or_else(|| {
                let valid: Vec<&str> = registry::invariants(self.module).map(|i| i.name).collect();
                err(format!("check '{}' is not registered for {}; valid: {}", c.name, self.module.name(), valid.join(", ")))
            })?;
            if !seen.insert(inv.name) {
                return Err(err(format!("check '{}' listed twice", inv.name)));
            }
            match (inv.tolerance, c.tolerance) {
                (Tolerance::Exact, Some(_)) => return Err(err(format!("check '{}' is exact and takes no tolerance", inv.name))),
                (_, Some(t)) if !(t > 0.0 && t.is_finite()) => {
                    return Err(err(format!("tolerance for '{}' must be positive and finite", inv.name)))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Resolved (invariant, tolerance) pairs in file order.
    pub fn resolved_checks(&self) -> Vec<(&'static registry::Invariant, Option<f64>)> {
        self.checks
            .iter()
            .map(|c| (registry::find_invariant(self.module, &c.name).expect("validated"), c.tolerance))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let src = "spec_version = 1\nname = \"x\"\nmodule = \"blade\"\ntopic = \"geometric_product\"\nbogus = 3\n";
        match Scenario::parse(src, "t.toml") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
