//! Creative generation of compound behaviours.
//!
//! A target state is one whose strongest learned behaviour is void. The
//! proposer also accepts states whose strongest behaviour is a learned no-op,
//! since identity behaviours compete with void for the same reward. From a
//! state that is not settled, behaviour sequences whose greedy chain through
//! the forward model ends in such a state are candidate compounds, scored by
//! curiosity = chain confidence x winning probability at the target.

use crate::env_model::{ForwardModel, ModelBank};
use crate::error::Result;
use crate::introspect::{path_successor, Best, TransitionTable};
use crate::skill_net::{BehaviourId, BehaviourKind, PlayingNet, SensingId, SkillId, StateId};
use crate::worlds::Grasp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreativityParams {
    pub gamma: f64,
    pub delta: f64,
    pub l_max: usize,
}

impl From<&crate::Params> for CreativityParams {
    fn from(p: &crate::Params) -> Self {
        Self {
            gamma: p.gamma,
            delta: p.delta,
            l_max: p.l_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompoundProposal {
    pub skill: SkillId,
    pub sensing: SensingId,
    pub origin: StateId,
    pub path: Vec<BehaviourId>,
    pub target: StateId,
    pub curiosity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted(BehaviourId),
    Duplicate(BehaviourId),
}

/// States whose most probable behaviour is void (ties included), with the
/// void probability.
pub fn find_target_states(
    net: &PlayingNet,
    skill: SkillId,
    sensing: SensingId,
) -> Result<Vec<(StateId, f64)>> {
    let void = net.void_of(skill)?;
    let mut targets = Vec::new();
    for e in 0..net.state_count(skill, sensing)? {
        let e = StateId(e as u32);
        let row = net.behaviour_probabilities(skill, sensing, e)?;
        let max = row.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        if let Some(&(_, p)) = row.iter().find(|x| x.0 == void) {
            if p >= max {
                targets.push((e, p));
            }
        }
    }
    Ok(targets)
}

/// States that need no preparation: the most probable behaviour is void, or
/// is one the forward model predicts to leave the state unchanged (a learned
/// stand-in for void). Paired with that behaviour's probability. `strict`
/// drops states where the winning behaviour is only tied.
pub fn find_settled_states(
    net: &PlayingNet,
    model: &ForwardModel,
    skill: SkillId,
    sensing: SensingId,
    strict: bool,
) -> Result<Vec<(StateId, f64)>> {
    let void = net.void_of(skill)?;
    let mut settled = Vec::new();
    for e in 0..net.state_count(skill, sensing)? {
        let e = StateId(e as u32);
        let row = net.behaviour_probabilities(skill, sensing, e)?;
        let max = row.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<BehaviourId> = row.iter().filter(|x| x.1 >= max).map(|x| x.0).collect();
        if strict && winners.len() > 1 {
            continue;
        }
        let stays = |b: BehaviourId| -> Result<bool> {
            Ok(b == void || (model.knows(b) && model.predict(e, b)?[e.index()] > 0.5))
        };
        for b in winners {
            if stays(b)? {
                settled.push((e, max));
                break;
            }
        }
    }
    Ok(settled)
}

/// Highest-curiosity sequence of length `2..l_max` from `origin` to a settled
/// state. Chains with zero curiosity or a repeated state are skipped. Single
/// behaviours compete too: when one of them is the best route, or when
/// `origin` is settled without a tie, there is no proposal. An origin whose
/// behaviours were all punished alike still gets proposals.
pub fn propose_compound(
    net: &PlayingNet,
    models: &ModelBank,
    skill: SkillId,
    sensing: SensingId,
    origin: StateId,
    params: &CreativityParams,
) -> Result<Option<CompoundProposal>> {
    let model = models.get(skill, sensing)?;
    if params.l_max < 3
        || find_settled_states(net, model, skill, sensing, true)?
            .iter()
            .any(|t| t.0 == origin)
    {
        return Ok(None);
    }
    let targets = find_settled_states(net, model, skill, sensing, false)?;
    if targets.is_empty() {
        return Ok(None);
    }
    let table = TransitionTable::build(model, net.behaviours_of(skill)?)?;
    let mut p_settled = vec![None; table.states()];
    for &(e, p) in &targets {
        p_settled[e.index()] = Some(p);
    }
    let mut best = Best::new();
    // a chain that revisits a state contains a predicted no-op and reduces to
    // a shorter sequence
    table.enumerate(
        origin.index(),
        1,
        params.l_max - 1,
        true,
        |seq, end, conf| {
            let Some(p) = p_settled[end] else { return };
            let curiosity = conf * p;
            if curiosity > 0.0 {
                best.offer(curiosity, seq.len(), || (seq.to_vec(), end));
            }
        },
    );
    // an existing behaviour that is already the best route needs no compound
    Ok(best
        .item
        .filter(|(seq, _)| seq.len() >= 2)
        .map(|(seq, end)| CompoundProposal {
            skill,
            sensing,
            origin,
            path: seq.iter().map(|&k| table.behaviours[k]).collect(),
            target: StateId(end as u32),
            curiosity: best.score,
        }))
}

/// `sig(gamma * cu + delta)`.
pub fn acceptance_probability(curiosity: f64, gamma: f64, delta: f64) -> f64 {
    1.0 / (1.0 + (-(gamma * curiosity + delta)).exp())
}

fn compound_name(net: &PlayingNet, path: &[BehaviourId]) -> String {
    path.iter()
        .map(|&b| net.behaviour(b).map(|x| x.name.as_str()).unwrap_or("?"))
        .collect::<Vec<_>>()
        .join("+")
}

/// Adds the compound to the skill: weight `h_init * (1 + cu)` from the origin
/// state of the proposing sensing action, `h_init` from every other state of
/// every sensing action of the skill.
pub fn insert_compound_playing(
    net: &mut PlayingNet,
    proposal: &CompoundProposal,
    h_init: f64,
) -> Result<InsertOutcome> {
    let id = match net.find_compound(&proposal.path) {
        Some(id) if net.behaviours_of(proposal.skill)?.contains(&id) => {
            return Ok(InsertOutcome::Duplicate(id));
        }
        Some(id) => id,
        None => {
            let name = compound_name(net, &proposal.path);
            net.add_behaviour(
                name,
                BehaviourKind::Compound(proposal.path.clone()),
                Grasp::Neutral,
            )
        }
    };
    let boosted = h_init * (1.0 + proposal.curiosity);
    net.attach_behaviour(proposal.skill, id, |s, e| {
        if s == proposal.sensing && e == proposal.origin {
            boosted
        } else {
            h_init
        }
    })?;
    Ok(InsertOutcome::Inserted(id))
}

/// Adds `(e, compound)` clips with uniform weights to every forward model of
/// the skill. In the proposing sensing action's model the edge from the
/// origin to the chain's end gets the weakest weight along the chain.
pub fn insert_compound_env(
    models: &mut ModelBank,
    proposal: &CompoundProposal,
    compound: BehaviourId,
) -> Result<()> {
    let current = models.get(proposal.skill, proposal.sensing)?;
    let mut state = proposal.origin;
    let mut h_min = f64::INFINITY;
    for &b in &proposal.path {
        let next = path_successor(current, state, &[b])?;
        h_min = h_min.min(current.weight(state, b, next)?);
        state = next;
    }
    for model in models.of_skill_mut(proposal.skill) {
        model.ensure_pair_clips(compound);
    }
    models
        .get_mut(proposal.skill, proposal.sensing)?
        .set_weight(proposal.origin, compound, state, h_min)
}
