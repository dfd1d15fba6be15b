//! Ground-truth simulated environments.
//!
//! A [`WorldSpec`] is an immutable description: latent states, behaviour
//! transition tables with a controller failure model, sensing confusion
//! matrices and per-skill success predicates. A [`WorldInstance`] holds the
//! current latent state and the world's own random stream.

mod builtin;
mod file;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builtin::{
    make_book_world, make_book_world_creative, make_book_world_with, make_tower_world,
    make_tower_world_with, Reliability, BOOK_ORIENTATIONS,
};
pub use file::WorldFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grasp {
    Grasped,
    Ungrasped,
    Neutral,
}

impl Grasp {
    /// Whether a behaviour ending in `self` allows re-running a sensing action
    /// with requirement `requirement`.
    pub fn compatible_with(self, requirement: Grasp) -> bool {
        self == Grasp::Neutral || requirement == Grasp::Neutral || self == requirement
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldBehaviour {
    pub name: String,
    pub void: bool,
    /// Next latent state per current latent state; `None` scrambles.
    pub transitions: Vec<Option<usize>>,
    pub success_rate: f64,
    pub grasp: Grasp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSensing {
    pub name: String,
    pub labels: Vec<String>,
    /// Row per latent state: distribution over perceptual labels.
    pub confusion: Vec<Vec<f64>>,
    /// Correct label per latent state.
    pub truth: Vec<usize>,
    pub grasp_requirement: Grasp,
    /// Overrides the calibrated accuracy (used by sensing without states).
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSkill {
    pub name: String,
    pub basic: usize,
    pub success: Vec<bool>,
    pub preparatory: Vec<usize>,
    pub requires_grasp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub name: String,
    pub states: Vec<String>,
    pub behaviours: Vec<WorldBehaviour>,
    pub sensing: Vec<WorldSensing>,
    pub skills: Vec<WorldSkill>,
}

fn unknown(kind: &'static str, id: impl ToString) -> Error {
    Error::Unknown {
        kind,
        id: id.to_string(),
    }
}

impl WorldSpec {
    pub fn behaviour_index(&self, name: &str) -> Result<usize> {
        self.behaviours
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| unknown("behaviour", name))
    }

    pub fn sensing_index(&self, name: &str) -> Result<usize> {
        self.sensing
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| unknown("sensing action", name))
    }

    pub fn skill_index(&self, name: &str) -> Result<usize> {
        self.skills
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| unknown("skill", name))
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| unknown("state", name))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        let bad = |msg: String| Err(Error::InvalidWorld(format!("{}: {msg}", self.name)));
        if n == 0 {
            return bad("no latent states".into());
        }
        for b in &self.behaviours {
            if b.transitions.len() != n {
                return bad(format!(
                    "behaviour {} has {} transitions",
                    b.name,
                    b.transitions.len()
                ));
            }
            if b.transitions.iter().flatten().any(|&t| t >= n) {
                return bad(format!("behaviour {} leaves the state set", b.name));
            }
            if !(0.0..=1.0).contains(&b.success_rate) {
                return bad(format!(
                    "behaviour {} success rate {}",
                    b.name, b.success_rate
                ));
            }
        }
        for s in &self.sensing {
            if s.labels.is_empty() || s.confusion.len() != n || s.truth.len() != n {
                return bad(format!(
                    "sensing {} does not cover every latent state",
                    s.name
                ));
            }
            for row in &s.confusion {
                let sum: f64 = row.iter().sum();
                if row.len() != s.labels.len()
                    || row.iter().any(|&p| p < 0.0)
                    || (sum - 1.0).abs() > 1e-9
                {
                    return bad(format!("sensing {} has an invalid confusion row", s.name));
                }
            }
            if s.truth.iter().any(|&t| t >= s.labels.len()) {
                return bad(format!("sensing {} truth label out of range", s.name));
            }
            if let Some(a) = s.accuracy {
                if !(0.0..=1.0).contains(&a) {
                    return bad(format!("sensing {} accuracy {a}", s.name));
                }
            }
        }
        for k in &self.skills {
            if k.basic >= self.behaviours.len()
                || k.success.len() != n
                || k.preparatory.iter().any(|&b| b >= self.behaviours.len())
            {
                return bad(format!("skill {} references unknown entities", k.name));
            }
            if !k.preparatory.iter().any(|&b| self.behaviours[b].void) {
                return bad(format!("skill {} has no void behaviour", k.name));
            }
        }
        Ok(())
    }
}

/// Expected classification accuracy of a sensing action: the mean
/// probability of reporting the correct label, or the fixed override.
pub fn calibrate_sensing_accuracy(spec: &WorldSpec, sensing: usize) -> Result<f64> {
    let s = spec
        .sensing
        .get(sensing)
        .ok_or_else(|| unknown("sensing action", sensing))?;
    if let Some(a) = s.accuracy {
        return Ok(a);
    }
    let n = s.confusion.len() as f64;
    Ok(s.confusion
        .iter()
        .zip(&s.truth)
        .map(|(row, &t)| row[t])
        .sum::<f64>()
        / n)
}

#[derive(Debug, Clone)]
pub struct WorldInstance {
    spec: Arc<WorldSpec>,
    latent: usize,
    rng: ChaCha8Rng,
}

impl WorldInstance {
    pub fn new(spec: Arc<WorldSpec>, rng: ChaCha8Rng) -> Self {
        Self {
            spec,
            latent: 0,
            rng,
        }
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn latent(&self) -> usize {
        self.latent
    }

    pub fn reset(&mut self, latent: usize) -> Result<()> {
        if latent >= self.spec.states.len() {
            return Err(unknown("state", latent));
        }
        self.latent = latent;
        Ok(())
    }

    pub fn reset_uniform(&mut self) -> usize {
        self.latent = self.rng.gen_range(0..self.spec.states.len());
        self.latent
    }

    /// Executes one atomic behaviour. With its success rate the table is
    /// followed, otherwise the next latent state is uniform.
    pub fn apply_behaviour(&mut self, behaviour: usize) -> Result<()> {
        let b = self
            .spec
            .behaviours
            .get(behaviour)
            .ok_or_else(|| unknown("behaviour", behaviour))?;
        let ok = self.rng.gen::<f64>() < b.success_rate;
        self.latent = match (ok, b.transitions[self.latent]) {
            (true, Some(next)) => next,
            _ => self.rng.gen_range(0..self.spec.states.len()),
        };
        Ok(())
    }

    pub fn apply_sequence(&mut self, behaviours: &[usize]) -> Result<()> {
        behaviours.iter().try_for_each(|&b| self.apply_behaviour(b))
    }

    /// Samples a perceptual label. The latent state is left untouched.
    pub fn sense(&mut self, sensing: usize) -> Result<usize> {
        let s = self
            .spec
            .sensing
            .get(sensing)
            .ok_or_else(|| unknown("sensing action", sensing))?;
        let row = &s.confusion[self.latent];
        let u = self.rng.gen::<f64>();
        let mut acc = 0.0;
        for (label, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(label);
            }
        }
        Ok(row.iter().rposition(|&p| p > 0.0).unwrap_or(0))
    }

    /// Runs the skill's basic behaviour: it must not fail its controller draw
    /// and the predicate must hold in the resulting latent state.
    pub fn evaluate_success(&mut self, skill: usize) -> Result<bool> {
        let spec = Arc::clone(&self.spec);
        let k = spec
            .skills
            .get(skill)
            .ok_or_else(|| unknown("skill", skill))?;
        let b = &spec.behaviours[k.basic];
        if self.rng.gen::<f64>() >= b.success_rate {
            self.latent = self.rng.gen_range(0..spec.states.len());
            return Ok(false);
        }
        if let Some(next) = b.transitions[self.latent] {
            self.latent = next;
        } else {
            self.latent = self.rng.gen_range(0..spec.states.len());
        }
        Ok(k.success[self.latent])
    }
}
