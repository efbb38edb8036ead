//! Scenario files: one schema shared by every subcommand, each command
//! reading the sections it needs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use braidstab::scenario::{
    BraidSection, EntropySection, HamiltonianSpec, IsolationSection, OrbitSection, PerturbationSection,
    TargetSelection,
};
use braidstab::stability::StabilityScenario;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gf2Section {
    pub instances: usize,
    pub max_dim: usize,
}

impl Default for Gf2Section {
    fn default() -> Self {
        Self { instances: 1000, max_dim: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolicSection {
    /// Alphabet sizes whose orbit Q is checked.
    pub m: Vec<usize>,
    /// Alphabet sizes whose template braid gets a growth estimate.
    pub demo_m: Vec<usize>,
    pub iterations: usize,
}

impl Default for SymbolicSection {
    fn default() -> Self {
        Self { m: (3..=12).collect(), demo_m: Vec::new(), iterations: 12 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub hamiltonian: Option<HamiltonianSpec>,
    pub orbits: Option<OrbitSection>,
    pub target: Option<TargetSelection>,
    pub perturbation: Option<PerturbationSection>,
    pub isolation: Option<IsolationSection>,
    pub braid: Option<BraidSection>,
    pub entropy: Option<EntropySection>,
    pub gf2: Option<Gf2Section>,
    pub symbolic: Option<SymbolicSection>,
}

fn missing(section: &str) -> CliError {
    CliError::Schema(format!("missing section [{section}]"))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json).map_err(|e| match e {
            CliError::Schema(m) => CliError::Schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses JSON or TOML, reporting the path of the offending key.
    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            let de = &mut serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema(format!("at `{}`: {}", e.path(), e.inner())))
        } else {
            let de = toml::Deserializer::new(text);
            serde_path_to_error::deserialize(de).map_err(|e| {
                CliError::Schema(format!("at `{}`: {}", e.path(), e.inner().message()))
            })
        }
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "unnamed".into())
    }

    pub fn hamiltonian(&self) -> Result<&HamiltonianSpec, CliError> {
        self.hamiltonian.as_ref().ok_or_else(|| missing("hamiltonian"))
    }

    pub fn orbits(&self) -> Result<&OrbitSection, CliError> {
        self.orbits.as_ref().ok_or_else(|| missing("orbits"))
    }

    pub fn stability(&self) -> Result<StabilityScenario, CliError> {
        Ok(StabilityScenario {
            name: self.name(),
            hamiltonian: self.hamiltonian()?.clone(),
            orbits: self.orbits()?.clone(),
            target: self.target.clone().unwrap_or_default(),
            perturbation: self.perturbation.clone().ok_or_else(|| missing("perturbation"))?,
            isolation: self.isolation.unwrap_or_default(),
            braid: self.braid.unwrap_or_default(),
            entropy: self.entropy.clone().unwrap_or_default(),
        })
    }

    /// Canonical JSON of the parsed scenario, hashed into the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_reports_path() {
        let err = Scenario::parse("[entropy]\niterations = 12\nwords = \"1\"\n", false).unwrap_err();
        match err {
            CliError::Schema(m) => assert!(m.contains("entropy"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(Scenario::parse(r#"{"gf2": {"instances": "many"}}"#, true).is_err());
    }

    #[test]
    fn sections_are_optional() {
        let s = Scenario::parse("name = \"x\"\n[gf2]\ninstances = 5\n", false).unwrap();
        assert_eq!(s.gf2.unwrap().max_dim, 6);
        assert!(s.hamiltonian.is_none());
        assert!(matches!(Scenario::default().stability(), Err(CliError::Schema(_))));
    }
}
