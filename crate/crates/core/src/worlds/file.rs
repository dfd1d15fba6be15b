//! TOML world definitions. Entities are referenced by name; see the README
//! for the full schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grasp, WorldBehaviour, WorldSensing, WorldSkill, WorldSpec};
use crate::error::{Error, Result};

const SCRAMBLE: &str = "*";

fn default_rate() -> f64 {
    1.0
}

fn neutral() -> Grasp {
    Grasp::Neutral
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourEntry {
    pub name: String,
    #[serde(default)]
    pub void: bool,
    /// Next state name for each state in `states` order, `"*"` scrambles.
    pub transitions: Vec<String>,
    #[serde(default = "default_rate")]
    pub success_rate: f64,
    #[serde(default = "neutral")]
    pub grasp: Grasp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingEntry {
    pub name: String,
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<String>>,
    #[serde(default = "neutral")]
    pub grasp_requirement: Grasp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillEntry {
    pub name: String,
    pub basic: String,
    pub success_states: Vec<String>,
    pub preparatory: Vec<String>,
    #[serde(default)]
    pub requires_grasp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub name: String,
    pub states: Vec<String>,
    #[serde(rename = "behaviour")]
    pub behaviours: Vec<BehaviourEntry>,
    pub sensing: Vec<SensingEntry>,
    #[serde(rename = "skill")]
    pub skills: Vec<SkillEntry>,
}

fn lookup(names: &[String], name: &str, kind: &'static str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Unknown {
            kind,
            id: name.to_string(),
        })
}

impl WorldFile {
    pub fn load(path: &Path) -> Result<WorldSpec> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<WorldSpec> {
        let file: WorldFile =
            toml::from_str(text).map_err(|e| Error::InvalidWorld(e.to_string()))?;
        file.into_spec()
    }

    pub fn into_spec(self) -> Result<WorldSpec> {
        let states = self.states;
        let behaviour_names: Vec<String> = self.behaviours.iter().map(|b| b.name.clone()).collect();

        let behaviours = self
            .behaviours
            .into_iter()
            .map(|b| {
                let transitions = b
                    .transitions
                    .iter()
                    .map(|t| {
                        if t == SCRAMBLE {
                            Ok(None)
                        } else {
                            lookup(&states, t, "state").map(Some)
                        }
                    })
                    .collect::<Result<_>>()?;
                Ok(WorldBehaviour {
                    name: b.name,
                    void: b.void,
                    transitions,
                    success_rate: b.success_rate,
                    grasp: b.grasp,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let sensing = self
            .sensing
            .into_iter()
            .map(|s| {
                let truth = match &s.truth {
                    Some(t) => t
                        .iter()
                        .map(|l| lookup(&s.labels, l, "label"))
                        .collect::<Result<_>>()?,
                    None if s.labels.len() == states.len() => (0..states.len()).collect(),
                    None if s.labels.len() == 1 => vec![0; states.len()],
                    None => {
                        return Err(Error::InvalidWorld(format!(
                            "sensing {} needs an explicit truth mapping",
                            s.name
                        )))
                    }
                };
                Ok(WorldSensing {
                    name: s.name,
                    labels: s.labels,
                    confusion: s.confusion,
                    truth,
                    grasp_requirement: s.grasp_requirement,
                    accuracy: s.accuracy,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let skills = self
            .skills
            .into_iter()
            .map(|k| {
                let mut success = vec![false; states.len()];
                for s in &k.success_states {
                    success[lookup(&states, s, "state")?] = true;
                }
                Ok(WorldSkill {
                    basic: lookup(&behaviour_names, &k.basic, "behaviour")?,
                    preparatory: k
                        .preparatory
                        .iter()
                        .map(|b| lookup(&behaviour_names, b, "behaviour"))
                        .collect::<Result<_>>()?,
                    name: k.name,
                    success,
                    requires_grasp: k.requires_grasp,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let spec = WorldSpec {
            name: self.name,
            states,
            behaviours,
            sensing,
            skills,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &WorldSpec) -> Self {
        let state = |i: usize| spec.states[i].clone();
        WorldFile {
            name: spec.name.clone(),
            states: spec.states.clone(),
            behaviours: spec
                .behaviours
                .iter()
                .map(|b| BehaviourEntry {
                    name: b.name.clone(),
                    void: b.void,
                    transitions: b
                        .transitions
                        .iter()
                        .map(|t| t.map_or_else(|| SCRAMBLE.to_string(), state))
                        .collect(),
                    success_rate: b.success_rate,
                    grasp: b.grasp,
                })
                .collect(),
            sensing: spec
                .sensing
                .iter()
                .map(|s| SensingEntry {
                    name: s.name.clone(),
                    labels: s.labels.clone(),
                    confusion: s.confusion.clone(),
                    truth: Some(s.truth.iter().map(|&t| s.labels[t].clone()).collect()),
                    grasp_requirement: s.grasp_requirement,
                    accuracy: s.accuracy,
                })
                .collect(),
            skills: spec
                .skills
                .iter()
                .map(|k| SkillEntry {
                    name: k.name.clone(),
                    basic: spec.behaviours[k.basic].name.clone(),
                    success_states: (0..spec.states.len())
                        .filter(|&i| k.success[i])
                        .map(state)
                        .collect(),
                    preparatory: k
                        .preparatory
                        .iter()
                        .map(|&b| spec.behaviours[b].name.clone())
                        .collect(),
                    requires_grasp: k.requires_grasp,
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("world files always serialize")
    }
}
