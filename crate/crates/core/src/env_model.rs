//! Forward models `p(e' | e, b)` per (skill, sensing action).
//!
//! Each model is a two-layer clip network: percept clips `(e, b)` connect to
//! every target clip `e'` of the same sensing action. Observed transitions
//! are rewarded with `r_env` through the usual update rule.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::ps::{ClipId, ClipNetwork};
use crate::skill_net::{BehaviourId, SensingId, SkillId, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelClip {
    Percept(StateId, BehaviourId),
    Target(StateId),
}

#[derive(Debug, Clone)]
pub struct ForwardModel {
    owner: (SkillId, SensingId),
    network: ClipNetwork<ModelClip>,
    // target clips are created first, so their ids ascend with the state
    targets: Vec<ClipId>,
    percepts: HashMap<(StateId, BehaviourId), ClipId>,
    h_init_env: f64,
    r_env: f64,
    forgetting: f64,
}

impl ForwardModel {
    pub fn new(
        owner: (SkillId, SensingId),
        states: usize,
        behaviours: &[BehaviourId],
        h_init_env: f64,
        r_env: f64,
        forgetting: f64,
    ) -> Self {
        let mut network = ClipNetwork::new();
        let targets = (0..states)
            .map(|e| network.add_clip(ModelClip::Target(StateId(e as u32))))
            .collect();
        let mut model = Self {
            owner,
            network,
            targets,
            percepts: HashMap::new(),
            h_init_env,
            r_env,
            forgetting,
        };
        for &b in behaviours {
            model.ensure_pair_clips(b);
        }
        model
    }

    pub fn owner(&self) -> (SkillId, SensingId) {
        self.owner
    }

    pub fn state_count(&self) -> usize {
        self.targets.len()
    }

    pub fn network(&self) -> &ClipNetwork<ModelClip> {
        &self.network
    }

    pub fn knows(&self, behaviour: BehaviourId) -> bool {
        self.percepts.contains_key(&(StateId(0), behaviour))
    }

    /// Adds `(e, behaviour)` clips for every state with uniform weights.
    /// Existing clips are left alone.
    pub fn ensure_pair_clips(&mut self, behaviour: BehaviourId) {
        for e in 0..self.targets.len() {
            let key = (StateId(e as u32), behaviour);
            if self.percepts.contains_key(&key) {
                continue;
            }
            let clip = self.network.add_clip(ModelClip::Percept(key.0, key.1));
            for &t in &self.targets {
                self.network
                    .connect(clip, t, self.h_init_env)
                    .expect("target clips exist and h_init_env > 0");
            }
            self.percepts.insert(key, clip);
        }
    }

    fn percept(&self, e: StateId, b: BehaviourId) -> Result<ClipId> {
        self.percepts
            .get(&(e, b))
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "percept clip",
                id: format!("({e}, {b})"),
            })
    }

    fn target(&self, e: StateId) -> Result<ClipId> {
        self.targets
            .get(e.index())
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "state",
                id: e.to_string(),
            })
    }

    pub fn observe_transition(&mut self, e: StateId, b: BehaviourId, after: StateId) -> Result<()> {
        let from = self.percept(e, b)?;
        let to = self.target(after)?;
        self.network
            .reinforce_edges(&[(from, to)], self.r_env, self.forgetting)
    }

    /// Predicted distribution over resulting states, indexed by state.
    pub fn predict(&self, e: StateId, b: BehaviourId) -> Result<Vec<f64>> {
        let row = self.network.edges_from(self.percept(e, b)?)?;
        let total: f64 = row.iter().map(|x| x.1).sum();
        Ok(row.iter().map(|x| x.1 / total).collect())
    }

    pub fn weights(&self, e: StateId, b: BehaviourId) -> Result<Vec<f64>> {
        Ok(self
            .network
            .edges_from(self.percept(e, b)?)?
            .iter()
            .map(|x| x.1)
            .collect())
    }

    pub fn weight(&self, e: StateId, b: BehaviourId, after: StateId) -> Result<f64> {
        let from = self.percept(e, b)?;
        let to = self.target(after)?;
        Ok(self
            .network
            .weight(from, to)
            .expect("percepts connect to every target"))
    }

    pub fn set_weight(&mut self, e: StateId, b: BehaviourId, after: StateId, h: f64) -> Result<()> {
        let from = self.percept(e, b)?;
        let to = self.target(after)?;
        self.network.connect(from, to, h)
    }
}

/// All forward models of one agent.
#[derive(Debug, Clone, Default)]
pub struct ModelBank {
    models: BTreeMap<(SkillId, SensingId), ForwardModel>,
}

impl ModelBank {
    pub fn insert(&mut self, model: ForwardModel) {
        self.models.insert(model.owner(), model);
    }

    pub fn get(&self, skill: SkillId, sensing: SensingId) -> Result<&ForwardModel> {
        self.models
            .get(&(skill, sensing))
            .ok_or_else(|| Self::missing(skill, sensing))
    }

    pub fn get_mut(&mut self, skill: SkillId, sensing: SensingId) -> Result<&mut ForwardModel> {
        self.models
            .get_mut(&(skill, sensing))
            .ok_or_else(|| Self::missing(skill, sensing))
    }

    fn missing(skill: SkillId, sensing: SensingId) -> Error {
        Error::Unknown {
            kind: "forward model",
            id: format!("{skill}/{sensing}"),
        }
    }

    pub fn of_skill_mut(&mut self, skill: SkillId) -> impl Iterator<Item = &mut ForwardModel> {
        self.models
            .range_mut((skill, SensingId(0))..=(skill, SensingId(u32::MAX)))
            .map(|(_, m)| m)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}
