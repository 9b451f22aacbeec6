//! Scoring profiles: named resource spec sets with per-machine-type overrides.
//!
//! A profile is a TOML document. `[[resource]]` tables list the fleet-wide
//! specs; `[[machine_overrides."<type>"]]` tables patch them for one machine
//! type, field by field, so an override can adjust only the target while
//! inheriting everything else. An override naming an unknown resource must be
//! complete enough to stand as a new spec on its own. Overrides can set or
//! add fields but never remove one; a global resource cannot be deleted for a
//! machine type.
//!
//! All validation happens at load time. [`ScoringProfile::resolve`] is
//! infallible afterwards and returns the effective spec list for a machine
//! type, globals first, override-introduced specs appended.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{ClassificationThresholds, ResourceSpec, ScoringError};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile '{path}': {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("profile parse error: {0}")]
    Parse(String),
    #[error("profile invalid: {0}")]
    Invalid(String),
    #[error("profile invalid: {0}")]
    Spec(#[from] ScoringError),
}

/// Partial resource spec used in override lists; absent fields inherit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecPatch {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_weight: Option<f64>,
}

impl SpecPatch {
    fn apply_to(&self, spec: &mut ResourceSpec) {
        if let Some(v) = self.target {
            spec.target = Some(v);
        }
        if let Some(v) = self.range {
            spec.range = Some(v);
        }
        if let Some(v) = self.weight {
            spec.weight = v;
        }
        if let Some(v) = self.resource_max {
            spec.resource_max = Some(v);
        }
        if let Some(v) = self.penalty_weight {
            spec.penalty_weight = v;
        }
    }

    fn as_new_spec(&self) -> ResourceSpec {
        ResourceSpec {
            name: self.name.clone(),
            target: self.target,
            range: self.range,
            weight: self.weight.unwrap_or(1.0),
            resource_max: self.resource_max,
            penalty_weight: self.penalty_weight.unwrap_or(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringProfile {
    pub name: String,
    #[serde(default)]
    pub thresholds: ClassificationThresholds,
    #[serde(rename = "resource")]
    pub global_specs: Vec<ResourceSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub machine_overrides: BTreeMap<String, Vec<SpecPatch>>,
}

impl ScoringProfile {
    /// The profile shipped as `profiles/table1-default.toml`, constructed in
    /// code. The file and this function must stay field-for-field equal; a
    /// fixture test compares them.
    pub fn builtin_default() -> Self {
        ScoringProfile {
            name: "table1-default".to_string(),
            thresholds: ClassificationThresholds::default(),
            global_specs: vec![
                ResourceSpec::target_bearing("cpu/avg", 40.0, 30.0),
                ResourceSpec::target_bearing("cpu/p95", 70.0, 20.0),
                ResourceSpec::target_bearing("ram/avg", 50.0, 20.0).with_limit(90.0),
                ResourceSpec::target_bearing("ram/p95", 70.0, 30.0),
                ResourceSpec::penalty_only("net/avg", 80.0),
            ],
            machine_overrides: BTreeMap::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProfileError> {
        let profile: ScoringProfile =
            toml::from_str(text).map_err(|e| ProfileError::Parse(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.name.is_empty() {
            return Err(ProfileError::Invalid("name must not be empty".to_string()));
        }
        if self.global_specs.is_empty() {
            return Err(ProfileError::Invalid(
                "resource list is empty; nothing to score".to_string(),
            ));
        }
        self.thresholds.validate()?;
        let mut names: Vec<&str> = Vec::new();
        for spec in &self.global_specs {
            spec.validate()?;
            if names.contains(&spec.name.as_str()) {
                return Err(ProfileError::Invalid(format!(
                    "duplicate resource '{}' in resource list",
                    spec.name
                )));
            }
            names.push(&spec.name);
        }
        for (machine_type, patches) in &self.machine_overrides {
            let mut patch_names: Vec<&str> = Vec::new();
            for patch in patches {
                if patch_names.contains(&patch.name.as_str()) {
                    return Err(ProfileError::Invalid(format!(
                        "duplicate resource '{}' in machine_overrides.\"{machine_type}\"",
                        patch.name
                    )));
                }
                patch_names.push(&patch.name);
            }
            // Applying the overrides must yield a fully valid spec set, so
            // resolve never fails later.
            for spec in self.resolve(machine_type) {
                spec.validate().map_err(|e| {
                    ProfileError::Invalid(format!(
                        "machine_overrides.\"{machine_type}\": {e}"
                    ))
                })?;
            }
        }
        Ok(())
    }

    /// Effective spec list for a machine type. Unknown types get the globals
    /// unchanged; an empty override list is the identity.
    pub fn resolve(&self, machine_type: &str) -> Vec<ResourceSpec> {
        let mut specs = self.global_specs.clone();
        if let Some(patches) = self.machine_overrides.get(machine_type) {
            for patch in patches {
                match specs.iter_mut().find(|s| s.name == patch.name) {
                    Some(spec) => patch.apply_to(spec),
                    None => specs.push(patch.as_new_spec()),
                }
            }
        }
        specs
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("profile serializes")
    }
}
