//! The layered playing network: skills -> sensing actions -> perceptual
//! states -> preparatory behaviours.
//!
//! Only the skill→sensing and state→behaviour hops are weighted edges. The
//! sensing→state hop is taken by the (emulated) classifier and never stored.

mod agent;

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::ps::{ClipId, ClipNetwork};
use crate::worlds::Grasp;

pub use agent::{Agent, RolloutOptions, RolloutRecord};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(SkillId);
id_type!(SensingId);
id_type!(BehaviourId);
// Index of a perceptual state within one (skill, sensing action) pair.
id_type!(StateId);

fn to_u32(n: usize) -> u32 {
    u32::try_from(n).expect("id overflow")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviourKind {
    Void { world: usize },
    Atomic { world: usize },
    Skill(SkillId),
    Compound(Vec<BehaviourId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behaviour {
    pub id: BehaviourId,
    pub name: String,
    pub kind: BehaviourKind,
    pub grasp: Grasp,
}

#[derive(Debug, Clone)]
pub struct Skill {
    pub id: SkillId,
    pub name: String,
    pub basic_behaviour: BehaviourId,
    /// Index of the skill's success predicate in the world.
    pub world_skill: usize,
    reward_history: VecDeque<f64>,
}

impl Skill {
    pub fn reward_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.reward_history.iter().copied()
    }
}

#[derive(Debug, Clone)]
pub struct SensingAction {
    pub id: SensingId,
    pub name: String,
    pub grasp_requirement: Grasp,
    /// Index of the sensing action in the world.
    pub world: usize,
}

/// What a clip of the playing network stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipRole {
    Skill(SkillId),
    Sensing(SkillId, SensingId),
    State(SkillId, SensingId, StateId),
    Behaviour(BehaviourId),
}

#[derive(Debug, Clone)]
pub struct SensingSetup {
    pub sensing: SensingId,
    pub states: usize,
    /// Cross-validated classifier accuracy `r_s`.
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct SkillRegistration {
    pub name: String,
    pub basic_behaviour: BehaviourId,
    pub world_skill: usize,
    pub requires_grasp: bool,
    pub sensing: Vec<SensingSetup>,
    pub behaviours: Vec<BehaviourId>,
}

#[derive(Debug, Clone)]
struct SensingLayer {
    id: SensingId,
    clip: ClipId,
    states: Vec<ClipId>,
}

#[derive(Debug, Clone)]
struct SkillLayer {
    skill: Skill,
    clip: ClipId,
    sensing: Vec<SensingLayer>,
    // ascending ids
    behaviours: Vec<BehaviourId>,
    void: BehaviourId,
}

/// Discrimination score `exp(alpha * r_s)`, the initial skill→sensing weight.
pub fn discrimination_score(alpha: f64, accuracy: f64) -> f64 {
    (alpha * accuracy).exp()
}

#[derive(Debug, Clone)]
pub struct PlayingNet {
    network: ClipNetwork<ClipRole>,
    behaviours: Vec<Behaviour>,
    behaviour_clips: Vec<ClipId>,
    sensing: Vec<SensingAction>,
    skills: Vec<SkillLayer>,
    h_init: f64,
    alpha: f64,
    t_thresh: usize,
    r_thresh: f64,
}

impl PlayingNet {
    pub fn new(h_init: f64, alpha: f64, t_thresh: usize, r_thresh: f64) -> Self {
        Self {
            network: ClipNetwork::new(),
            behaviours: Vec::new(),
            behaviour_clips: Vec::new(),
            sensing: Vec::new(),
            skills: Vec::new(),
            h_init,
            alpha,
            t_thresh,
            r_thresh,
        }
    }

    pub fn from_params(p: &crate::Params) -> Self {
        Self::new(p.h_init, p.alpha, p.t_thresh, p.r_thresh)
    }

    pub fn network(&self) -> &ClipNetwork<ClipRole> {
        &self.network
    }

    pub fn h_init(&self) -> f64 {
        self.h_init
    }

    pub fn add_behaviour(
        &mut self,
        name: impl Into<String>,
        kind: BehaviourKind,
        grasp: Grasp,
    ) -> BehaviourId {
        let id = BehaviourId(to_u32(self.behaviours.len()));
        self.behaviours.push(Behaviour {
            id,
            name: name.into(),
            kind,
            grasp,
        });
        let clip = self.network.add_clip(ClipRole::Behaviour(id));
        self.behaviour_clips.push(clip);
        id
    }

    pub fn add_sensing(
        &mut self,
        name: impl Into<String>,
        grasp_requirement: Grasp,
        world: usize,
    ) -> SensingId {
        let id = SensingId(to_u32(self.sensing.len()));
        self.sensing.push(SensingAction {
            id,
            name: name.into(),
            grasp_requirement,
            world,
        });
        id
    }

    pub fn behaviour(&self, id: BehaviourId) -> Result<&Behaviour> {
        self.behaviours
            .get(id.index())
            .ok_or_else(|| Error::Unknown {
                kind: "behaviour",
                id: id.to_string(),
            })
    }

    pub fn sensing_action(&self, id: SensingId) -> Result<&SensingAction> {
        self.sensing.get(id.index()).ok_or_else(|| Error::Unknown {
            kind: "sensing action",
            id: id.to_string(),
        })
    }

    fn layer(&self, skill: SkillId) -> Result<&SkillLayer> {
        self.skills
            .get(skill.index())
            .ok_or_else(|| Error::Unknown {
                kind: "skill",
                id: skill.to_string(),
            })
    }

    fn layer_mut(&mut self, skill: SkillId) -> Result<&mut SkillLayer> {
        self.skills
            .get_mut(skill.index())
            .ok_or_else(|| Error::Unknown {
                kind: "skill",
                id: skill.to_string(),
            })
    }

    fn sensing_layer(&self, skill: SkillId, sensing: SensingId) -> Result<&SensingLayer> {
        self.layer(skill)?
            .sensing
            .iter()
            .find(|s| s.id == sensing)
            .ok_or_else(|| Error::Unknown {
                kind: "sensing action of skill",
                id: format!("{skill}/{sensing}"),
            })
    }

    fn state_clip(&self, skill: SkillId, sensing: SensingId, state: StateId) -> Result<ClipId> {
        self.sensing_layer(skill, sensing)?
            .states
            .get(state.index())
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "state",
                id: format!("{skill}/{sensing}/{state}"),
            })
    }

    fn behaviour_of(&self, clip: ClipId) -> BehaviourId {
        match self.network.label(clip) {
            Ok(ClipRole::Behaviour(b)) => *b,
            other => unreachable!("state clip points at {other:?}"),
        }
    }

    pub fn skill_ids(&self) -> impl Iterator<Item = SkillId> + '_ {
        self.skills.iter().map(|l| l.skill.id)
    }

    pub fn skill(&self, skill: SkillId) -> Result<&Skill> {
        self.layer(skill).map(|l| &l.skill)
    }

    pub fn sensing_of(&self, skill: SkillId) -> Result<Vec<SensingId>> {
        Ok(self.layer(skill)?.sensing.iter().map(|s| s.id).collect())
    }

    pub fn state_count(&self, skill: SkillId, sensing: SensingId) -> Result<usize> {
        Ok(self.sensing_layer(skill, sensing)?.states.len())
    }

    pub fn behaviours_of(&self, skill: SkillId) -> Result<&[BehaviourId]> {
        Ok(&self.layer(skill)?.behaviours)
    }

    pub fn void_of(&self, skill: SkillId) -> Result<BehaviourId> {
        Ok(self.layer(skill)?.void)
    }

    /// Builds the skill's layers. Skill→sensing weights start at the
    /// discrimination score, state→behaviour weights at `h_init`. A skill
    /// whose basic behaviour needs a grasped object only keeps sensing
    /// actions that require a grasp.
    pub fn register_skill(&mut self, reg: SkillRegistration) -> Result<SkillId> {
        for s in &reg.sensing {
            check_range("sensing accuracy", s.accuracy, 0.0, 1.0)?;
            self.sensing_action(s.sensing)?;
            if s.states == 0 {
                return Err(Error::InvalidConfig(format!(
                    "sensing {} has no states",
                    s.sensing
                )));
            }
        }
        self.behaviour(reg.basic_behaviour)?;
        let mut behaviours = reg.behaviours.clone();
        behaviours.sort_unstable();
        behaviours.dedup();
        for &b in &behaviours {
            self.behaviour(b)?;
        }
        let void = behaviours
            .iter()
            .copied()
            .find(|&b| matches!(self.behaviours[b.index()].kind, BehaviourKind::Void { .. }))
            .ok_or_else(|| Error::MissingVoid(reg.name.clone()))?;

        let id = SkillId(to_u32(self.skills.len()));
        let clip = self.network.add_clip(ClipRole::Skill(id));
        let mut sensing = Vec::new();
        for setup in &reg.sensing {
            let requirement = self.sensing[setup.sensing.index()].grasp_requirement;
            if reg.requires_grasp && requirement != Grasp::Grasped {
                continue;
            }
            let s_clip = self.network.add_clip(ClipRole::Sensing(id, setup.sensing));
            self.network.connect(
                clip,
                s_clip,
                discrimination_score(self.alpha, setup.accuracy),
            )?;
            let mut states = Vec::with_capacity(setup.states);
            for e in 0..setup.states {
                let e_clip =
                    self.network
                        .add_clip(ClipRole::State(id, setup.sensing, StateId(to_u32(e))));
                for &b in &behaviours {
                    self.network
                        .connect(e_clip, self.behaviour_clips[b.index()], self.h_init)?;
                }
                states.push(e_clip);
            }
            sensing.push(SensingLayer {
                id: setup.sensing,
                clip: s_clip,
                states,
            });
        }
        if sensing.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "skill {} has no usable sensing action",
                reg.name
            )));
        }
        self.skills.push(SkillLayer {
            skill: Skill {
                id,
                name: reg.name,
                basic_behaviour: reg.basic_behaviour,
                world_skill: reg.world_skill,
                reward_history: VecDeque::with_capacity(self.t_thresh),
            },
            clip,
            sensing,
            behaviours,
            void,
        });
        Ok(id)
    }

    pub fn sensing_probabilities(&self, skill: SkillId) -> Result<Vec<(SensingId, f64)>> {
        let layer = self.layer(skill)?;
        let probs = self.network.transition_probabilities(layer.clip)?;
        Ok(probs
            .into_iter()
            .map(|(c, p)| match self.network.label(c) {
                Ok(ClipRole::Sensing(_, s)) => (*s, p),
                other => unreachable!("skill clip points at {other:?}"),
            })
            .collect())
    }

    pub fn sensing_weight(&self, skill: SkillId, sensing: SensingId) -> Result<f64> {
        let layer = self.layer(skill)?;
        let s = self.sensing_layer(skill, sensing)?;
        Ok(self.network.weight(layer.clip, s.clip).unwrap_or(0.0))
    }

    /// Raw state→behaviour weights in ascending behaviour order.
    pub fn behaviour_weights(
        &self,
        skill: SkillId,
        sensing: SensingId,
        state: StateId,
    ) -> Result<Vec<(BehaviourId, f64)>> {
        let clip = self.state_clip(skill, sensing, state)?;
        Ok(self
            .network
            .edges_from(clip)?
            .iter()
            .map(|&(c, h)| (self.behaviour_of(c), h))
            .collect())
    }

    pub fn behaviour_probabilities(
        &self,
        skill: SkillId,
        sensing: SensingId,
        state: StateId,
    ) -> Result<Vec<(BehaviourId, f64)>> {
        let clip = self.state_clip(skill, sensing, state)?;
        Ok(self
            .network
            .transition_probabilities(clip)?
            .into_iter()
            .map(|(c, p)| (self.behaviour_of(c), p))
            .collect())
    }

    pub fn sample_sensing<R: Rng + ?Sized>(
        &self,
        skill: SkillId,
        rng: &mut R,
    ) -> Result<SensingId> {
        let layer = self.layer(skill)?;
        let c = self.network.sample_next(layer.clip, rng)?;
        match self.network.label(c)? {
            ClipRole::Sensing(_, s) => Ok(*s),
            other => unreachable!("skill clip points at {other:?}"),
        }
    }

    pub fn sample_behaviour<R: Rng + ?Sized>(
        &self,
        skill: SkillId,
        sensing: SensingId,
        state: StateId,
        rng: &mut R,
    ) -> Result<BehaviourId> {
        let clip = self.state_clip(skill, sensing, state)?;
        Ok(self.behaviour_of(self.network.sample_next(clip, rng)?))
    }

    /// Rewards the two weighted hops of a walk: skill→sensing and
    /// state→behaviour.
    pub fn reinforce(
        &mut self,
        skill: SkillId,
        sensing: SensingId,
        state: StateId,
        behaviour: BehaviourId,
        reward: f64,
        forgetting: f64,
    ) -> Result<()> {
        let skill_clip = self.layer(skill)?.clip;
        let sensing_clip = self.sensing_layer(skill, sensing)?.clip;
        let state_clip = self.state_clip(skill, sensing, state)?;
        let behaviour_clip =
            *self
                .behaviour_clips
                .get(behaviour.index())
                .ok_or_else(|| Error::Unknown {
                    kind: "behaviour",
                    id: behaviour.to_string(),
                })?;
        self.network.reinforce_edges(
            &[(skill_clip, sensing_clip), (state_clip, behaviour_clip)],
            reward,
            forgetting,
        )
    }

    pub fn record_reward(&mut self, skill: SkillId, reward: f64) -> Result<()> {
        let t_thresh = self.t_thresh;
        let history = &mut self.layer_mut(skill)?.skill.reward_history;
        if history.len() == t_thresh {
            history.pop_front();
        }
        history.push_back(reward);
        Ok(())
    }

    /// The last `t_thresh` rewards are recorded and average at least
    /// `r_thresh`.
    pub fn is_well_trained(&self, skill: SkillId) -> Result<bool> {
        let history = &self.layer(skill)?.skill.reward_history;
        if history.len() < self.t_thresh {
            return Ok(false);
        }
        let mean = history.iter().sum::<f64>() / history.len() as f64;
        Ok(mean >= self.r_thresh)
    }

    pub fn find_compound(&self, sequence: &[BehaviourId]) -> Option<BehaviourId> {
        self.behaviours
            .iter()
            .find(|b| matches!(&b.kind, BehaviourKind::Compound(s) if s == sequence))
            .map(|b| b.id)
    }

    /// Non-compound constituents of `b` in execution order.
    pub fn flatten(&self, b: BehaviourId) -> Result<Vec<BehaviourId>> {
        match &self.behaviour(b)?.kind {
            BehaviourKind::Compound(parts) => {
                let mut out = Vec::new();
                for &p in parts {
                    out.extend(self.flatten(p)?);
                }
                Ok(out)
            }
            _ => Ok(vec![b]),
        }
    }

    /// Adds `behaviour` to the skill's preparatory set, connecting every
    /// state of every sensing action with `weight(sensing, state)`.
    /// Returns false if the skill already had it.
    pub fn attach_behaviour(
        &mut self,
        skill: SkillId,
        behaviour: BehaviourId,
        mut weight: impl FnMut(SensingId, StateId) -> f64,
    ) -> Result<bool> {
        self.behaviour(behaviour)?;
        let b_clip = self.behaviour_clips[behaviour.index()];
        let layer = self.layer(skill)?;
        if layer.behaviours.binary_search(&behaviour).is_ok() {
            return Ok(false);
        }
        let edges: Vec<(ClipId, f64)> = layer
            .sensing
            .iter()
            .flat_map(|s| {
                s.states
                    .iter()
                    .enumerate()
                    .map(move |(e, &c)| (s.id, StateId(to_u32(e)), c))
            })
            .map(|(s, e, c)| (c, weight(s, e)))
            .collect();
        for (c, h) in edges {
            self.network.connect(c, b_clip, h)?;
        }
        let behaviours = &mut self.layer_mut(skill)?.behaviours;
        let pos = behaviours.binary_search(&behaviour).unwrap_err();
        behaviours.insert(pos, behaviour);
        Ok(true)
    }

    /// Skills reachable through skill-as-behaviour entries of `skill`,
    /// including itself.
    fn skill_closure(&self, skill: SkillId) -> Vec<SkillId> {
        let mut seen = vec![skill];
        let mut stack = vec![skill];
        while let Some(s) = stack.pop() {
            let Ok(layer) = self.layer(s) else { continue };
            for &b in &layer.behaviours {
                let mut inner = Vec::new();
                self.collect_skills(b, &mut inner);
                for k in inner {
                    if !seen.contains(&k) {
                        seen.push(k);
                        stack.push(k);
                    }
                }
            }
        }
        seen
    }

    fn collect_skills(&self, b: BehaviourId, out: &mut Vec<SkillId>) {
        match &self.behaviours[b.index()].kind {
            BehaviourKind::Skill(s) => out.push(*s),
            BehaviourKind::Compound(seq) => seq.iter().for_each(|&c| self.collect_skills(c, out)),
            _ => {}
        }
    }

    /// Adds a well-trained skill as a preparatory behaviour of `targets`
    /// with weight `h_init` from every state. Returns the behaviour id.
    /// Forward models are extended by the caller.
    pub fn promote_to_behaviour(
        &mut self,
        skill: SkillId,
        targets: &[SkillId],
    ) -> Result<BehaviourId> {
        let name = self.skill(skill)?.name.clone();
        for &t in targets {
            self.layer(t)?;
            if self.skill_closure(skill).contains(&t) {
                return Err(Error::SelfReference(name));
            }
        }
        if !self.is_well_trained(skill)? {
            return Err(Error::NotWellTrained(name));
        }
        let existing = self
            .behaviours
            .iter()
            .find(|b| b.kind == BehaviourKind::Skill(skill))
            .map(|b| b.id);
        let id = match existing {
            Some(id) => id,
            None => {
                let basic = self.skill(skill)?.basic_behaviour;
                let grasp = self.behaviours[basic.index()].grasp;
                self.add_behaviour(name, BehaviourKind::Skill(skill), grasp)
            }
        };
        let h_init = self.h_init;
        for &t in targets {
            self.attach_behaviour(t, id, |_, _| h_init)?;
        }
        Ok(id)
    }

    /// Grasp outcome of a behaviour; compounds end in their last
    /// non-neutral constituent.
    pub fn grasp_outcome(&self, b: BehaviourId) -> Grasp {
        let behaviour = &self.behaviours[b.index()];
        match &behaviour.kind {
            BehaviourKind::Compound(seq) => seq
                .iter()
                .rev()
                .map(|&c| self.grasp_outcome(c))
                .find(|&g| g != Grasp::Neutral)
                .unwrap_or(Grasp::Neutral),
            _ => behaviour.grasp,
        }
    }
}
