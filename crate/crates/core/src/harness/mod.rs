//! Experiment runner: many independent robots per configuration, success
//! curves, convergence detection and result files.

mod config;
mod output;
mod stats;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::skill_net::{Agent, RolloutOptions, RolloutRecord, SkillId};
use crate::worlds::WorldSpec;

pub use config::{ExperimentConfig, InitialState, WorldChoice, BOOK_MIN_BEHAVIOURS};
pub use output::{emit_results, summary_path, Format, RunSummary, SpeedupSummary, Summary};
pub use stats::{
    asymptotic_speedup, baseline_rollouts, convergence_rollout, linear_fit, smooth, LinearFit,
};

/// Seed of replica `index`, independent of scheduling (splitmix64 mix).
pub fn replica_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    /// Fraction of replicas that succeeded at each rollout index.
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub replicas: usize,
    pub window: usize,
}

impl SuccessCurve {
    pub fn from_counts(counts: &[usize], replicas: usize, window: usize) -> Self {
        let raw: Vec<f64> = counts.iter().map(|&c| c as f64 / replicas as f64).collect();
        Self {
            smoothed: smooth(&raw, window),
            raw,
            replicas,
            window,
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn convergence(&self, threshold: f64) -> Option<usize> {
        convergence_rollout(&self.smoothed, threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub variant: String,
    pub world: String,
    pub j: usize,
    pub curve: SuccessCurve,
    pub threshold: f64,
    pub convergence: Option<usize>,
}

/// A validated configuration with its world built once.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    spec: Arc<WorldSpec>,
    skill: SkillId,
    j: usize,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.build_world()?;
        spec.validate()?;
        let skill = SkillId(config.skill_index(&spec)? as u32);
        if let InitialState::Fixed(s) = config.initial_state {
            if s >= spec.states.len() {
                return Err(crate::Error::InvalidConfig(format!(
                    "initial state {s} outside the {} states of {}",
                    spec.states.len(),
                    spec.name
                )));
            }
        }
        let j = config.behaviour_count(&spec)?;
        Ok(Self {
            config,
            spec: Arc::new(spec),
            skill,
            j,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn behaviour_count(&self) -> usize {
        self.j
    }

    /// One robot's lifetime. A bored restart stays inside its rollout.
    pub fn replica(&self, index: usize) -> Result<Vec<RolloutRecord>> {
        self.replica_with_agent(index).map(|x| x.0)
    }

    /// Like [`Experiment::replica`], also returning the trained agent.
    pub fn replica_with_agent(&self, index: usize) -> Result<(Vec<RolloutRecord>, Agent)> {
        let c = &self.config;
        let mut agent = Agent::from_world(
            Arc::clone(&self.spec),
            &c.params,
            replica_seed(c.seed, index as u64),
        )?;
        let options = RolloutOptions {
            boredom: c.active_learning,
            creativity: c.creativity,
        };
        let states = self.spec.states.len();
        (0..c.rollouts)
            .map(|t| {
                match c.initial_state {
                    InitialState::Uniform => {
                        agent.world_mut().reset_uniform();
                    }
                    InitialState::RoundRobin => agent.world_mut().reset(t % states)?,
                    InitialState::Fixed(s) => agent.world_mut().reset(s)?,
                }
                agent.execute_rollout(self.skill, options)
            })
            .collect::<Result<Vec<_>>>()
            .map(|records| (records, agent))
    }

    /// All replicas, in replica order, computed in parallel.
    pub fn records(&self) -> Result<Vec<Vec<RolloutRecord>>> {
        (0..self.config.robots)
            .into_par_iter()
            .map(|i| self.replica(i))
            .collect()
    }

    pub fn run(&self) -> Result<ExperimentResult> {
        let c = &self.config;
        let counts = (0..c.robots)
            .into_par_iter()
            .map(|i| {
                self.replica(i)
                    .map(|r| r.iter().map(|x| usize::from(x.success)).collect::<Vec<_>>())
            })
            .try_reduce(
                || vec![0; c.rollouts],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
        let curve = SuccessCurve::from_counts(&counts, c.robots, c.smoothing);
        Ok(ExperimentResult {
            variant: c.variant().to_string(),
            world: self.spec.name.clone(),
            j: self.j,
            convergence: curve.convergence(c.threshold),
            threshold: c.threshold,
            curve,
        })
    }
}

pub fn run_replica(config: &ExperimentConfig, index: usize) -> Result<Vec<RolloutRecord>> {
    Experiment::new(config.clone())?.replica(index)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    Experiment::new(config.clone())?.run()
}
