use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::worlds::{
    make_book_world_with, make_tower_world_with, Reliability, WorldFile, WorldSpec,
};
use crate::Params;

/// Behaviours of the plain book world: void, three rotations and flip.
pub const BOOK_MIN_BEHAVIOURS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WorldChoice {
    Book,
    Tower,
    File(PathBuf),
}

impl FromStr for WorldChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "book" => WorldChoice::Book,
            "tower" => WorldChoice::Tower,
            "" => return Err(Error::InvalidConfig("empty world name".into())),
            path => WorldChoice::File(PathBuf::from(path)),
        })
    }
}

impl TryFrom<String> for WorldChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WorldChoice> for String {
    fn from(w: WorldChoice) -> String {
        w.to_string()
    }
}

impl fmt::Display for WorldChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldChoice::Book => f.write_str("book"),
            WorldChoice::Tower => f.write_str("tower"),
            WorldChoice::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Latent state presented at the start of each rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    Uniform,
    RoundRobin,
    Fixed(usize),
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InitialState::Uniform),
            "round-robin" => Ok(InitialState::RoundRobin),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|n| n.parse().ok())
                .map(InitialState::Fixed)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "initial state `{s}`: expected uniform, round-robin or fixed:<index>"
                    ))
                }),
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        match s {
            InitialState::Uniform => "uniform".into(),
            InitialState::RoundRobin => "round-robin".into(),
            InitialState::Fixed(n) => format!("fixed:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: WorldChoice,
    /// Total behaviour count `J` of the book world. In the creative variant
    /// only three of the five core behaviours are seeded, the remaining
    /// `J - 5` are distractors either way.
    pub behaviours: Option<usize>,
    pub active_learning: bool,
    pub creativity: bool,
    pub robots: usize,
    pub rollouts: usize,
    pub seed: u64,
    pub smoothing: usize,
    pub threshold: f64,
    pub initial_state: InitialState,
    /// Controller success rate of the built-in worlds.
    pub controller_success: f64,
    /// Accuracy of the informative sensing action of the built-in worlds.
    pub sensing_accuracy: f64,
    /// Skill to train; the world's first skill by default.
    pub skill: Option<String>,
    pub params: Params,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: WorldChoice::Book,
            behaviours: None,
            active_learning: false,
            creativity: false,
            robots: 1000,
            rollouts: 300,
            seed: 42,
            smoothing: 10,
            threshold: 0.9,
            initial_state: InitialState::Uniform,
            controller_success: 1.0,
            sensing_accuracy: 1.0,
            skill: None,
            params: Params::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let positive = [
            ("robots", self.robots),
            ("rollouts", self.rollouts),
            ("smoothing", self.smoothing),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("controller_success", self.controller_success),
            ("sensing_accuracy", self.sensing_accuracy),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} {v} not in [0, 1]")));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold {} not in (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn variant(&self) -> &'static str {
        match (self.active_learning, self.creativity) {
            (false, false) => "no-ext",
            (true, false) => "active",
            (true, true) => "creative",
            (false, true) => "creative-no-active",
        }
    }

    pub fn build_world(&self) -> Result<WorldSpec> {
        match &self.world {
            WorldChoice::Book => {
                let j = self.behaviours.unwrap_or(BOOK_MIN_BEHAVIOURS);
                if j < BOOK_MIN_BEHAVIOURS {
                    return Err(Error::InvalidConfig(format!(
                        "book world needs at least {BOOK_MIN_BEHAVIOURS} behaviours, got {j}"
                    )));
                }
                let distractors = j - BOOK_MIN_BEHAVIOURS;
                Ok(make_book_world_with(
                    distractors,
                    self.creativity,
                    self.reliability(),
                ))
            }
            WorldChoice::Tower => self.fixed_world(make_tower_world_with(self.reliability())),
            WorldChoice::File(path) => self.fixed_world(WorldFile::load(path)?),
        }
    }

    pub fn reliability(&self) -> Reliability {
        Reliability {
            controller: self.controller_success,
            sensing: self.sensing_accuracy,
        }
    }

    fn fixed_world(&self, spec: WorldSpec) -> Result<WorldSpec> {
        if let Some(j) = self.behaviours {
            let k = self.skill_index(&spec)?;
            if spec.skills[k].preparatory.len() != j {
                return Err(Error::InvalidConfig(format!(
                    "world {} has {} behaviours, {} requested",
                    spec.name,
                    spec.skills[k].preparatory.len(),
                    j
                )));
            }
        }
        Ok(spec)
    }

    pub fn skill_index(&self, spec: &WorldSpec) -> Result<usize> {
        match &self.skill {
            Some(name) => spec.skill_index(name),
            None if spec.skills.is_empty() => {
                Err(Error::InvalidWorld(format!("{} has no skills", spec.name)))
            }
            None => Ok(0),
        }
    }

    /// `J` reported for this run.
    pub fn behaviour_count(&self, spec: &WorldSpec) -> Result<usize> {
        Ok(match (&self.world, self.behaviours) {
            (WorldChoice::Book, j) => j.unwrap_or(BOOK_MIN_BEHAVIOURS),
            _ => spec.skills[self.skill_index(spec)?].preparatory.len(),
        })
    }
}
