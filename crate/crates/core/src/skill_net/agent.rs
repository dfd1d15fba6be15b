use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    BehaviourId, BehaviourKind, PlayingNet, SensingId, SensingSetup, SkillId, SkillRegistration,
    StateId,
};
use crate::creativity::{self, CreativityParams, InsertOutcome};
use crate::env_model::{ForwardModel, ModelBank};
use crate::error::{Error, Result};
use crate::introspect::{self, IntrospectParams};
use crate::worlds::{calibrate_sensing_accuracy, WorldInstance, WorldSpec};
use crate::Params;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RolloutOptions {
    pub boredom: bool,
    pub creativity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutRecord {
    pub skill: SkillId,
    pub sensing: SensingId,
    pub estimated_state: StateId,
    /// Re-sensed state after the preparatory behaviour, when the grasp
    /// outcome allowed re-sensing.
    pub prepared_state: Option<StateId>,
    pub behaviour: BehaviourId,
    pub success: bool,
    pub reward: f64,
    pub bored: bool,
    pub creative_addition: bool,
    /// Latent world state when the rollout started.
    pub initial_latent: usize,
}

/// One robot: playing network, forward models and its own world.
#[derive(Debug, Clone)]
pub struct Agent {
    params: Params,
    net: PlayingNet,
    models: ModelBank,
    world: WorldInstance,
    rng: ChaCha8Rng,
    promoted: Vec<bool>,
}

fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl Agent {
    /// Builds a fresh agent for `spec`. The agent's decisions and the world's
    /// dynamics draw from two separate streams derived from `seed`.
    pub fn from_world(spec: Arc<WorldSpec>, params: &Params, seed: u64) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        let mut net = PlayingNet::from_params(params);
        let behaviours: Vec<BehaviourId> = spec
            .behaviours
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let kind = if b.void {
                    BehaviourKind::Void { world: i }
                } else {
                    BehaviourKind::Atomic { world: i }
                };
                net.add_behaviour(b.name.clone(), kind, b.grasp)
            })
            .collect();
        let mut setups = Vec::with_capacity(spec.sensing.len());
        for (i, s) in spec.sensing.iter().enumerate() {
            let id = net.add_sensing(s.name.clone(), s.grasp_requirement, i);
            setups.push(SensingSetup {
                sensing: id,
                states: s.labels.len(),
                accuracy: calibrate_sensing_accuracy(&spec, i)?,
            });
        }
        let mut models = ModelBank::default();
        for (i, k) in spec.skills.iter().enumerate() {
            let skill = net.register_skill(SkillRegistration {
                name: k.name.clone(),
                basic_behaviour: behaviours[k.basic],
                world_skill: i,
                requires_grasp: k.requires_grasp,
                sensing: setups.clone(),
                behaviours: k.preparatory.iter().map(|&b| behaviours[b]).collect(),
            })?;
            for s in net.sensing_of(skill)? {
                models.insert(ForwardModel::new(
                    (skill, s),
                    net.state_count(skill, s)?,
                    net.behaviours_of(skill)?,
                    params.h_init_env,
                    params.r_env,
                    params.zeta_env,
                ));
            }
        }
        let promoted = vec![false; spec.skills.len()];
        Ok(Self {
            params: *params,
            net,
            models,
            world: WorldInstance::new(spec, sub_rng(seed, 1)),
            rng: sub_rng(seed, 0),
            promoted,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn net(&self) -> &PlayingNet {
        &self.net
    }

    pub fn models(&self) -> &ModelBank {
        &self.models
    }

    pub fn world(&self) -> &WorldInstance {
        &self.world
    }

    pub fn world_mut(&mut self) -> &mut WorldInstance {
        &mut self.world
    }

    pub fn skill_by_name(&self, name: &str) -> Result<SkillId> {
        self.net
            .skill_ids()
            .find(|&k| self.net.skill(k).map(|s| s.name == name).unwrap_or(false))
            .ok_or_else(|| Error::Unknown {
                kind: "skill",
                id: name.to_string(),
            })
    }

    fn sense(&mut self, sensing: SensingId) -> Result<StateId> {
        let world = self.net.sensing_action(sensing)?.world;
        Ok(StateId(self.world.sense(world)? as u32))
    }

    /// Runs a behaviour in the world. Compounds run their constituents in
    /// order; a skill used as a behaviour runs its own current policy and
    /// basic behaviour without learning.
    pub fn execute_behaviour(&mut self, b: BehaviourId) -> Result<()> {
        execute(&self.net, &mut self.world, &mut self.rng, b)
    }

    /// Whether boredom and creativity can reason in this pair's state space.
    fn introspectable(&self, skill: SkillId, sensing: SensingId) -> Result<bool> {
        Ok(self.models.get(skill, sensing)?.state_count() >= 2
            && self.net.behaviours_of(skill)?.len() >= 2)
    }

    /// One pass of the training loop for `skill`, starting from the world's
    /// current latent state.
    pub fn execute_rollout(
        &mut self,
        skill: SkillId,
        options: RolloutOptions,
    ) -> Result<RolloutRecord> {
        let world_skill = self.net.skill(skill)?.world_skill;
        let initial_latent = self.world.latent();
        let mut boredom = options.boredom;
        let mut bored = false;

        let (sensing, state) = loop {
            let sensing = self.net.sample_sensing(skill, &mut self.rng)?;
            let state = self.sense(sensing)?;
            if !boredom || !self.introspectable(skill, sensing)? {
                break (sensing, state);
            }
            // boredom may fire once per rollout
            boredom = false;
            let entropy = introspect::normalized_policy_entropy(&self.net, skill, sensing, state)?;
            let p = introspect::boredom_probability(entropy, self.params.beta)?;
            if self.rng.gen::<f64>() >= p {
                break (sensing, state);
            }
            let plan = introspect::plan_desirable_transition(
                &self.net,
                self.models.get(skill, sensing)?,
                skill,
                sensing,
                state,
                &IntrospectParams::from(&self.params),
            )?;
            match plan {
                Some(plan) => {
                    bored = true;
                    for b in plan.path {
                        self.execute_behaviour(b)?;
                    }
                }
                None => break (sensing, state),
            }
        };

        // a bored rollout explores; only an unbored one counts as unsolved
        let mut creative_addition = false;
        if options.creativity && !bored && self.introspectable(skill, sensing)? {
            creative_addition = self.try_create(skill, sensing, state)?;
        }

        let behaviour = self
            .net
            .sample_behaviour(skill, sensing, state, &mut self.rng)?;
        self.execute_behaviour(behaviour)?;

        let requirement = self.net.sensing_action(sensing)?.grasp_requirement;
        let prepared_state = if self
            .net
            .grasp_outcome(behaviour)
            .compatible_with(requirement)
        {
            let after = self.sense(sensing)?;
            self.models
                .get_mut(skill, sensing)?
                .observe_transition(state, behaviour, after)?;
            Some(after)
        } else {
            None
        };

        let success = self.world.evaluate_success(world_skill)?;
        let reward = if success {
            self.params.r_success
        } else {
            self.params.r_failure
        };
        self.net
            .reinforce(skill, sensing, state, behaviour, reward, self.params.zeta)?;
        self.net.record_reward(skill, reward)?;
        self.maybe_promote(skill)?;

        Ok(RolloutRecord {
            skill,
            sensing,
            estimated_state: state,
            prepared_state,
            behaviour,
            success,
            reward,
            bored,
            creative_addition,
            initial_latent,
        })
    }

    fn try_create(&mut self, skill: SkillId, sensing: SensingId, state: StateId) -> Result<bool> {
        let cp = CreativityParams::from(&self.params);
        let Some(proposal) =
            creativity::propose_compound(&self.net, &self.models, skill, sensing, state, &cp)?
        else {
            return Ok(false);
        };
        let p = creativity::acceptance_probability(proposal.curiosity, cp.gamma, cp.delta);
        if self.rng.gen::<f64>() >= p {
            return Ok(false);
        }
        match creativity::insert_compound_playing(&mut self.net, &proposal, self.params.h_init)? {
            InsertOutcome::Inserted(id) => {
                creativity::insert_compound_env(&mut self.models, &proposal, id)?;
                Ok(true)
            }
            InsertOutcome::Duplicate(_) => Ok(false),
        }
    }

    /// Offers a freshly well-trained skill to every other skill as a
    /// preparatory behaviour. Targets that would create a cycle are skipped.
    fn maybe_promote(&mut self, skill: SkillId) -> Result<()> {
        if self.promoted[skill.index()] || !self.net.is_well_trained(skill)? {
            return Ok(());
        }
        self.promoted[skill.index()] = true;
        let targets: Vec<SkillId> = self.net.skill_ids().filter(|&k| k != skill).collect();
        for target in targets {
            match self.net.promote_to_behaviour(skill, &[target]) {
                Ok(id) => {
                    for model in self.models.of_skill_mut(target) {
                        model.ensure_pair_clips(id);
                    }
                }
                Err(Error::SelfReference(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

fn execute(
    net: &PlayingNet,
    world: &mut WorldInstance,
    rng: &mut ChaCha8Rng,
    b: BehaviourId,
) -> Result<()> {
    match &net.behaviour(b)?.kind {
        BehaviourKind::Void { world: w } | BehaviourKind::Atomic { world: w } => {
            world.apply_behaviour(*w)
        }
        BehaviourKind::Compound(seq) => seq.iter().try_for_each(|&c| execute(net, world, rng, c)),
        BehaviourKind::Skill(k) => {
            let sensing = net.sample_sensing(*k, rng)?;
            let state = StateId(world.sense(net.sensing_action(sensing)?.world)? as u32);
            let inner = net.sample_behaviour(*k, sensing, state, rng)?;
            execute(net, world, rng, inner)?;
            execute(net, world, rng, net.skill(*k)?.basic_behaviour)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::make_book_world;

    fn perfect_book() -> Arc<WorldSpec> {
        let mut spec = make_book_world(0);
        for b in &mut spec.behaviours {
            b.success_rate = 1.0;
        }
        let slide = &mut spec.sensing[0];
        for (i, row) in slide.confusion.iter_mut().enumerate() {
            row.iter_mut()
                .enumerate()
                .for_each(|(j, p)| *p = if i == j { 1.0 } else { 0.0 });
        }
        Arc::new(spec)
    }

    #[test]
    fn registration_from_world() {
        let agent = Agent::from_world(Arc::new(make_book_world(2)), &Params::default(), 1).unwrap();
        let skill = agent.skill_by_name("grasp_book").unwrap();
        assert_eq!(agent.net().behaviours_of(skill).unwrap().len(), 7);
        assert_eq!(agent.net().sensing_of(skill).unwrap().len(), 4);
        assert_eq!(agent.models().len(), 4);
    }

    #[test]
    fn void_at_home_succeeds() {
        let mut agent = Agent::from_world(perfect_book(), &Params::default(), 3).unwrap();
        let skill = SkillId(0);
        let void = agent.net().void_of(skill).unwrap();
        let mut seen = false;
        for _ in 0..200 {
            agent.world_mut().reset(0).unwrap();
            let r = agent
                .execute_rollout(skill, RolloutOptions::default())
                .unwrap();
            if r.behaviour == void {
                assert!(r.success);
                assert_eq!(r.reward, 1000.0);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn rotation_prepares_state() {
        let mut agent = Agent::from_world(perfect_book(), &Params::default(), 5).unwrap();
        let r90 = BehaviourId(1);
        for _ in 0..200 {
            agent.world_mut().reset(1).unwrap();
            let r = agent
                .execute_rollout(SkillId(0), RolloutOptions::default())
                .unwrap();
            if r.behaviour == r90 && r.sensing == SensingId(0) {
                assert!(r.success);
                assert_eq!(r.prepared_state, Some(StateId(0)));
            }
        }
    }

    #[test]
    fn rollouts_are_deterministic() {
        let run = || {
            let mut agent =
                Agent::from_world(Arc::new(make_book_world(1)), &Params::default(), 11).unwrap();
            let options = RolloutOptions {
                boredom: true,
                creativity: true,
            };
            (0..100)
                .map(|_| {
                    agent.world_mut().reset_uniform();
                    agent.execute_rollout(SkillId(0), options).unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn compound_equals_constituents() {
        let mut agent =
            Agent::from_world(Arc::new(make_book_world(0)), &Params::default(), 9).unwrap();
        let twice = agent.net.add_behaviour(
            "r90+r90",
            BehaviourKind::Compound(vec![BehaviourId(1), BehaviourId(1)]),
            crate::worlds::Grasp::Neutral,
        );
        let mut a = agent.world().clone();
        let mut b = agent.world().clone();
        a.reset(0).unwrap();
        b.reset(0).unwrap();
        for _ in 0..50 {
            execute(&agent.net, &mut a, &mut agent.rng.clone(), twice).unwrap();
            b.apply_sequence(&[1, 1]).unwrap();
            assert_eq!(a.latent(), b.latent());
        }
    }
}
