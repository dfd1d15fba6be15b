//! Boredom and active learning.
//!
//! The agent is bored in a perceptual state when its behaviour policy there is
//! concentrated (low normalised entropy). A bored agent plans a behaviour
//! sequence through the forward model towards a state that is both
//! interesting and reliably reachable.

use crate::env_model::ForwardModel;
use crate::error::{check_range, Error, Result};
use crate::skill_net::{BehaviourId, PlayingNet, SensingId, SkillId, StateId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrospectParams {
    pub beta: f64,
    pub epsilon: f64,
    pub l_max: usize,
}

impl From<&crate::Params> for IntrospectParams {
    fn from(p: &crate::Params) -> Self {
        Self {
            beta: p.beta,
            epsilon: p.epsilon,
            l_max: p.l_max,
        }
    }
}

/// Shannon entropy in bits divided by `log2(len)`, with `0 log 0 = 0`.
pub fn normalized_entropy(probs: &[f64]) -> f64 {
    if probs.len() < 2 {
        return 0.0;
    }
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    (h / (probs.len() as f64).log2()).clamp(0.0, 1.0)
}

pub fn normalized_policy_entropy(
    net: &PlayingNet,
    skill: SkillId,
    sensing: SensingId,
    state: StateId,
) -> Result<f64> {
    let row: Vec<f64> = net
        .behaviour_probabilities(skill, sensing, state)?
        .into_iter()
        .map(|x| x.1)
        .collect();
    if row.len() < 2 {
        return Err(Error::DegenerateBehaviourSet(row.len()));
    }
    Ok(normalized_entropy(&row))
}

/// `1 - beta * entropy`.
pub fn boredom_probability(entropy: f64, beta: f64) -> Result<f64> {
    check_range("entropy", entropy, 0.0, 1.0)?;
    check_range("beta", beta, 0.0, 1.0)?;
    Ok(1.0 - beta * entropy)
}

pub fn single_transition_confidence(
    model: &ForwardModel,
    e: StateId,
    b: BehaviourId,
) -> Result<f64> {
    if model.state_count() < 2 {
        return Err(Error::DegenerateStateSet(model.state_count()));
    }
    Ok(1.0 - normalized_entropy(&model.predict(e, b)?))
}

fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = i;
        }
    }
    best
}

/// Most likely resulting state; ties go to the lowest state.
pub fn successor(model: &ForwardModel, e: StateId, b: BehaviourId) -> Result<StateId> {
    Ok(StateId(argmax_lowest(&model.predict(e, b)?) as u32))
}

/// Product of single-step confidences along the greedy successor chain.
pub fn path_confidence(model: &ForwardModel, e: StateId, path: &[BehaviourId]) -> Result<f64> {
    let mut state = e;
    let mut conf = 1.0;
    for &b in path {
        conf *= single_transition_confidence(model, state, b)?;
        state = successor(model, state, b)?;
    }
    Ok(conf)
}

/// Final state of the greedy chain.
pub fn path_successor(model: &ForwardModel, e: StateId, path: &[BehaviourId]) -> Result<StateId> {
    path.iter()
        .try_fold(e, |state, &b| successor(model, state, b))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub next: usize,
    pub confidence: f64,
}

/// Successor and confidence for every
/// (state, behaviour) pair of one forward model, precomputed for
/// enumeration.
#[derive(Debug, Clone)]
pub(crate) struct TransitionTable {
    pub behaviours: Vec<BehaviourId>,
    states: usize,
    steps: Vec<Step>,
}

impl TransitionTable {
    pub fn build(model: &ForwardModel, behaviours: &[BehaviourId]) -> Result<Self> {
        let states = model.state_count();
        if states < 2 {
            return Err(Error::DegenerateStateSet(states));
        }
        let mut steps = Vec::with_capacity(states * behaviours.len());
        for e in 0..states {
            for &b in behaviours {
                let w = model.weights(StateId(e as u32), b)?;
                let total: f64 = w.iter().sum();
                let probs: Vec<f64> = w.iter().map(|h| h / total).collect();
                let next = argmax_lowest(&probs);
                steps.push(Step {
                    next,
                    confidence: 1.0 - normalized_entropy(&probs),
                });
            }
        }
        Ok(Self {
            behaviours: behaviours.to_vec(),
            states,
            steps,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn step(&self, state: usize, behaviour: usize) -> Step {
        self.steps[state * self.behaviours.len() + behaviour]
    }

    /// Depth-first enumeration of behaviour sequences with lengths in
    /// `min_len..=max_len`, in lexicographic order of behaviour ids.
    /// `visit` receives the sequence (as table indices), the end state of the
    /// greedy chain and the chain confidence. With `simple`, chains that
    /// revisit a state (including the start) are pruned.
    pub fn enumerate(
        &self,
        start: usize,
        min_len: usize,
        max_len: usize,
        simple: bool,
        mut visit: impl FnMut(&[usize], usize, f64),
    ) {
        let mut walk = Walk {
            seq: Vec::with_capacity(max_len),
            visited: vec![false; self.states],
            min_len,
            max_len,
            simple,
        };
        walk.visited[start] = true;
        self.dfs(start, 1.0, &mut walk, &mut visit);
    }

    fn dfs(
        &self,
        state: usize,
        conf: f64,
        walk: &mut Walk,
        visit: &mut impl FnMut(&[usize], usize, f64),
    ) {
        if walk.seq.len() == walk.max_len {
            return;
        }
        for k in 0..self.behaviours.len() {
            let step = self.step(state, k);
            if walk.simple && walk.visited[step.next] {
                continue;
            }
            let c = conf * step.confidence;
            walk.seq.push(k);
            walk.visited[step.next] = true;
            if walk.seq.len() >= walk.min_len {
                visit(&walk.seq, step.next, c);
            }
            self.dfs(step.next, c, walk, visit);
            walk.visited[step.next] = false;
            walk.seq.pop();
        }
    }
}

struct Walk {
    seq: Vec<usize>,
    visited: Vec<bool>,
    min_len: usize,
    max_len: usize,
    simple: bool,
}

/// Keeps the best candidate under the total order: higher score, then
/// shorter, then first seen (lexicographic under [`TransitionTable::enumerate`]).
#[derive(Debug)]
pub(crate) struct Best<T> {
    pub score: f64,
    pub len: usize,
    pub item: Option<T>,
}

impl<T> Best<T> {
    pub fn new() -> Self {
        Self {
            score: f64::NEG_INFINITY,
            len: usize::MAX,
            item: None,
        }
    }

    pub fn offer(&mut self, score: f64, len: usize, item: impl FnOnce() -> T) {
        if score > self.score || (score == self.score && len < self.len) {
            self.score = score;
            self.len = len;
            self.item = Some(item());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionPlan {
    pub path: Vec<BehaviourId>,
    pub target: StateId,
    pub desirability: f64,
    /// Number of sequences scored.
    pub candidates: usize,
}

/// Maximises `entropy(su(e, b)) * confidence(e, b) + epsilon / len(b)` over all
/// sequences of length `1..l_max`. The maximiser is returned even when its
/// desirability is low.
pub fn plan_desirable_transition(
    net: &PlayingNet,
    model: &ForwardModel,
    skill: SkillId,
    sensing: SensingId,
    e: StateId,
    params: &IntrospectParams,
) -> Result<Option<TransitionPlan>> {
    let behaviours = net.behaviours_of(skill)?;
    if behaviours.is_empty() || params.l_max < 2 {
        return Ok(None);
    }
    let table = TransitionTable::build(model, behaviours)?;
    let interest: Vec<f64> = (0..table.states())
        .map(
            |s| match normalized_policy_entropy(net, skill, sensing, StateId(s as u32)) {
                Ok(h) => Ok(h),
                Err(Error::DegenerateBehaviourSet(_)) => Ok(0.0),
                Err(err) => Err(err),
            },
        )
        .collect::<Result<_>>()?;

    let mut best = Best::new();
    let mut candidates = 0;
    table.enumerate(e.index(), 1, params.l_max - 1, false, |seq, end, conf| {
        candidates += 1;
        let score = interest[end] * conf + params.epsilon / seq.len() as f64;
        best.offer(score, seq.len(), || (seq.to_vec(), end));
    });
    Ok(best.item.map(|(seq, end)| TransitionPlan {
        path: seq.iter().map(|&k| table.behaviours[k]).collect(),
        target: StateId(end as u32),
        desirability: best.score,
        candidates,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill_net::{BehaviourKind, SensingSetup, SkillRegistration};
    use crate::worlds::Grasp;

    fn entropy_oracle(weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        let h: f64 = weights
            .iter()
            .map(|w| w / total)
            .map(|p| {
                if p == 0.0 {
                    0.0
                } else {
                    -p * p.ln() / 2f64.ln()
                }
            })
            .sum();
        h / (weights.len() as f64).ln() * 2f64.ln()
    }

    #[test]
    fn entropy_values() {
        assert!((normalized_entropy(&[0.2; 5]) - 1.0).abs() < 1e-12);
        assert_eq!(normalized_entropy(&[1.0, 0.0, 0.0]), 0.0);
        let w = [1200.0, 200.0, 200.0, 200.0, 200.0];
        let p: Vec<f64> = w.iter().map(|x| x / 2000.0).collect();
        let oracle = entropy_oracle(&w);
        // hand value: (0.6 * 0.737 + 0.4 * 3.322) / 2.322
        assert!((oracle - 0.7627).abs() < 1e-4, "{oracle}");
        assert!((normalized_entropy(&p) - oracle).abs() < 1e-12);
    }

    #[test]
    fn boredom_values() {
        assert!((boredom_probability(1.0, 0.8).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(boredom_probability(0.0, 0.3).unwrap(), 1.0);
        assert_eq!(boredom_probability(0.7, 0.0).unwrap(), 1.0);
        assert!(boredom_probability(1.2, 0.5).is_err());
        assert!(boredom_probability(0.5, -0.1).is_err());
    }

    fn model(states: usize, behaviours: u32) -> ForwardModel {
        let bs: Vec<_> = (0..behaviours).map(BehaviourId).collect();
        ForwardModel::new((SkillId(0), SensingId(0)), states, &bs, 1.0, 10.0, 0.0)
    }

    #[test]
    fn confidences() {
        let mut m = model(4, 1);
        let (e, b) = (StateId(0), BehaviourId(0));
        assert!(single_transition_confidence(&m, e, b).unwrap().abs() < 1e-12);
        assert_eq!(successor(&m, e, b).unwrap(), StateId(0));
        m.observe_transition(e, b, StateId(0)).unwrap();
        let w = [11.0, 1.0, 1.0, 1.0];
        let nu = 1.0 - entropy_oracle(&w);
        assert!((nu - 0.4554).abs() < 1e-4, "{nu}");
        assert!((single_transition_confidence(&m, e, b).unwrap() - nu).abs() < 1e-12);
        // (e0,b0) -> e0 twice
        let two = path_confidence(&m, e, &[b, b]).unwrap();
        assert!((two - nu * nu).abs() < 1e-12);
        assert!((two - 0.2074).abs() < 1e-4);
        assert_eq!(path_confidence(&m, StateId(1), &[b]).unwrap(), 0.0);

        m.set_weight(StateId(1), b, StateId(3), 1e300).unwrap();
        assert!(single_transition_confidence(&m, StateId(1), b).unwrap() > 0.999);
        assert_eq!(successor(&m, StateId(1), b).unwrap(), StateId(3));

        let one = model(1, 1);
        assert!(matches!(
            single_transition_confidence(&one, StateId(0), BehaviourId(0)),
            Err(Error::DegenerateStateSet(1))
        ));
    }

    fn two_state_setup() -> (PlayingNet, SkillId, SensingId, ForwardModel) {
        let mut net = PlayingNet::from_params(&crate::Params::default());
        let void = net.add_behaviour("void", BehaviourKind::Void { world: 0 }, Grasp::Neutral);
        let go = net.add_behaviour("go", BehaviourKind::Atomic { world: 1 }, Grasp::Neutral);
        let s = net.add_sensing("look", Grasp::Neutral, 0);
        let skill = net
            .register_skill(SkillRegistration {
                name: "k".into(),
                basic_behaviour: void,
                world_skill: 0,
                requires_grasp: false,
                sensing: vec![SensingSetup {
                    sensing: s,
                    states: 2,
                    accuracy: 1.0,
                }],
                behaviours: vec![void, go],
            })
            .unwrap();
        let m = ForwardModel::new((skill, s), 2, &[void, go], 1.0, 10.0, 0.0);
        (net, skill, s, m)
    }

    #[test]
    fn plan_to_interesting_state() {
        let (mut net, skill, s, mut m) = two_state_setup();
        let (void, go) = (BehaviourId(0), BehaviourId(1));
        // state 0 is boring: void dominates completely
        for _ in 0..2000 {
            net.reinforce(skill, s, StateId(0), void, 1e6, 0.0).unwrap();
        }
        // deterministic transitions: go swaps, void stays
        m.set_weight(StateId(0), go, StateId(1), 1e300).unwrap();
        m.set_weight(StateId(1), go, StateId(0), 1e300).unwrap();
        m.set_weight(StateId(0), void, StateId(0), 1e300).unwrap();
        m.set_weight(StateId(1), void, StateId(1), 1e300).unwrap();
        let params = IntrospectParams::from(&crate::Params::default());
        let plan = plan_desirable_transition(&net, &m, skill, s, StateId(0), &params)
            .unwrap()
            .unwrap();
        assert_eq!(plan.path, vec![go]);
        assert_eq!(plan.target, StateId(1));
        assert!(
            (plan.desirability - 1.1).abs() < 1e-6,
            "{}",
            plan.desirability
        );
        assert_eq!(plan.candidates, 2 + 4 + 8);
    }

    #[test]
    fn uninformed_plan_prefers_short() {
        let (net, skill, s, m) = two_state_setup();
        let params = IntrospectParams::from(&crate::Params::default());
        let plan = plan_desirable_transition(&net, &m, skill, s, StateId(1), &params)
            .unwrap()
            .unwrap();
        assert_eq!(plan.path, vec![BehaviourId(0)]);
        assert!((plan.desirability - 0.1).abs() < 1e-12);
    }

    #[test]
    fn enumeration_counts() {
        let m = model(4, 20);
        let bs: Vec<_> = (0..20).map(BehaviourId).collect();
        let table = TransitionTable::build(&m, &bs).unwrap();
        let mut n = 0;
        table.enumerate(0, 1, 3, false, |_, _, _| n += 1);
        assert_eq!(n, 20 + 400 + 8000);
        let mut seen = Vec::new();
        let small = TransitionTable::build(&m, &bs[..2]).unwrap();
        small.enumerate(0, 2, 2, false, |seq, _, _| seen.push(seq.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
