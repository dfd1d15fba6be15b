//! Property families shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;

use skillplay::creativity::{
    insert_compound_env, insert_compound_playing, CompoundProposal, InsertOutcome,
};
use skillplay::env_model::ForwardModel;
use skillplay::harness::{emit_results, Experiment, ExperimentConfig, Format};
use skillplay::introspect::{
    boredom_probability, normalized_entropy, path_confidence, single_transition_confidence,
    successor,
};
use skillplay::ps::ClipNetwork;
use skillplay::skill_net::{Agent, BehaviourId, SensingId, SkillId, StateId};
use skillplay::worlds::{make_book_world_with, make_tower_world_with, Reliability, WorldInstance};
use skillplay::Params;

pub type Family = (&'static str, fn(u32) -> Result<(), String>);

pub const FAMILIES: &[Family] = &[
    ("update rule floor and exact value", ps_update_rule),
    ("update rule leaves off-path edges alone", ps_off_path),
    ("full forgetting collapses to h=1", ps_full_forgetting),
    ("entropy and boredom ranges", entropy_ranges),
    ("boredom decreases with entropy", boredom_monotone),
    (
        "confidence grows with repeated evidence",
        confidence_monotone,
    ),
    (
        "path confidence bounded by prefixes",
        path_confidence_prefix,
    ),
    ("forward model rows normalize", model_normalization),
    (
        "forward model converges to the mode",
        model_mode_convergence,
    ),
    ("compound playing weights", creativity_playing_weights),
    ("compound env weakest link", creativity_env_weights),
    ("sensing leaves the world untouched", world_sense_purity),
    (
        "distractors keep the orientation",
        world_distractor_identity,
    ),
    ("reruns are byte-identical", byte_identical_reruns),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Two outgoing edges from one clip; the first one is rewarded.
fn fork(h_on: f64, h_off: f64, r: f64, zeta: f64) -> (f64, f64) {
    let mut net = ClipNetwork::new();
    let a = net.add_clip(0);
    let b = net.add_clip(1);
    let c = net.add_clip(2);
    net.connect(a, b, h_on).unwrap();
    net.connect(a, c, h_off).unwrap();
    net.reinforce_edges(&[(a, b)], r, zeta).unwrap();
    (net.weight(a, b).unwrap(), net.weight(a, c).unwrap())
}

fn ps_update_rule(cases: u32) -> Result<(), String> {
    run(
        cases,
        (1.0..5000.0f64, -2000.0..2000.0f64, 0.0..=1.0f64),
        |(h, r, zeta)| {
            let (on, _) = fork(h, 1.0, r, zeta);
            let oracle = f64::max(1.0, h - zeta * (h - 1.0) + r);
            prop_assert!(on >= 1.0);
            prop_assert!(close(on, oracle), "{on} vs {oracle}");
            Ok(())
        },
    )
}

fn ps_off_path(cases: u32) -> Result<(), String> {
    run(
        cases,
        (
            1.0..5000.0f64,
            1.0..5000.0f64,
            -2000.0..2000.0f64,
            0.0..=1.0f64,
        ),
        |(h_on, h_off, r, zeta)| {
            let (_, off) = fork(h_on, h_off, r, zeta);
            prop_assert!(close(off, h_off - zeta * (h_off - 1.0)));
            if zeta == 0.0 {
                prop_assert_eq!(off, h_off);
            }
            Ok(())
        },
    )
}

fn ps_full_forgetting(cases: u32) -> Result<(), String> {
    run(
        cases,
        (1.0..5000.0f64, 1.0..5000.0f64, -2000.0..2000.0f64),
        |(h_on, h_off, r)| {
            let (on, off) = fork(h_on, h_off, r, 1.0);
            prop_assert!(close(off, 1.0));
            prop_assert!(close(on, f64::max(1.0, 1.0 + r)));
            Ok(())
        },
    )
}

fn distribution(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..100.0f64, 2..max_len).prop_filter_map("zero mass", |w| {
        let total: f64 = w.iter().sum();
        (total > 0.0).then(|| w.iter().map(|x| x / total).collect())
    })
}

fn entropy_ranges(cases: u32) -> Result<(), String> {
    run(cases, (distribution(12), 0.0..=1.0f64), |(p, beta)| {
        let h = normalized_entropy(&p);
        prop_assert!((0.0..=1.0).contains(&h));
        let b = boredom_probability(h, beta).unwrap();
        prop_assert!((1.0 - beta - 1e-12..=1.0).contains(&b));
        let n = p.len();
        prop_assert!(close(normalized_entropy(&vec![1.0 / n as f64; n]), 1.0));
        let mut one_hot = vec![0.0; n];
        one_hot[0] = 1.0;
        prop_assert_eq!(normalized_entropy(&one_hot), 0.0);
        Ok(())
    })
}

fn boredom_monotone(cases: u32) -> Result<(), String> {
    run(
        cases,
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64),
        |(a, b, beta)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(
                boredom_probability(lo, beta).unwrap() >= boredom_probability(hi, beta).unwrap()
            );
            Ok(())
        },
    )
}

fn model(states: usize) -> ForwardModel {
    ForwardModel::new(
        (SkillId(0), SensingId(0)),
        states,
        &[BehaviourId(0), BehaviourId(1)],
        1.0,
        10.0,
        0.0,
    )
}

fn confidence_monotone(cases: u32) -> Result<(), String> {
    run(
        cases,
        (2usize..8, 0usize..8, 0usize..8, 1usize..30),
        |(n, e, to, k)| {
            let (e, to) = (StateId((e % n) as u32), StateId((to % n) as u32));
            let mut m = model(n);
            let mut last = single_transition_confidence(&m, e, BehaviourId(0)).unwrap();
            prop_assert!(close(last, 0.0));
            for _ in 0..k {
                m.observe_transition(e, BehaviourId(0), to).unwrap();
                let now = single_transition_confidence(&m, e, BehaviourId(0)).unwrap();
                prop_assert!((0.0..=1.0).contains(&now));
                prop_assert!(now >= last - 1e-12);
                last = now;
            }
            Ok(())
        },
    )
}

fn observations() -> impl Strategy<Value = (usize, Vec<(usize, usize, usize)>)> {
    (2usize..7).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0usize..2, 0..n), 0..60),
        )
    })
}

fn trained(n: usize, obs: &[(usize, usize, usize)]) -> ForwardModel {
    let mut m = model(n);
    for &(e, b, to) in obs {
        m.observe_transition(StateId(e as u32), BehaviourId(b as u32), StateId(to as u32))
            .unwrap();
    }
    m
}

fn path_confidence_prefix(cases: u32) -> Result<(), String> {
    let strategy = observations().prop_flat_map(|(n, obs)| {
        (
            Just(n),
            Just(obs),
            0..n,
            prop::collection::vec(0u32..2, 1..5),
        )
    });
    run(cases, strategy, |(n, obs, e, path)| {
        let m = trained(n, &obs);
        let path: Vec<BehaviourId> = path.into_iter().map(BehaviourId).collect();
        let e = StateId(e as u32);
        let mut prev = 1.0;
        for len in 1..=path.len() {
            let c = path_confidence(&m, e, &path[..len]).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(c <= prev + 1e-12);
            prev = c;
        }
        Ok(())
    })
}

fn model_normalization(cases: u32) -> Result<(), String> {
    run(cases, observations(), |(n, obs)| {
        let m = trained(n, &obs);
        for e in 0..n {
            for b in 0..2 {
                let row = m.predict(StateId(e as u32), BehaviourId(b)).unwrap();
                prop_assert_eq!(row.len(), n);
                prop_assert!(row.iter().all(|&p| p > 0.0));
                prop_assert!(close(row.iter().sum::<f64>(), 1.0));
            }
        }
        Ok(())
    })
}

fn model_mode_convergence(cases: u32) -> Result<(), String> {
    let strategy =
        (2usize..7).prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, n), 1usize..20));
    run(cases, strategy, |(n, map, k)| {
        let mut m = model(n);
        for _ in 0..k {
            for (e, &to) in map.iter().enumerate() {
                m.observe_transition(StateId(e as u32), BehaviourId(0), StateId(to as u32))
                    .unwrap();
            }
        }
        for (e, &to) in map.iter().enumerate() {
            let e = StateId(e as u32);
            prop_assert_eq!(
                successor(&m, e, BehaviourId(0)).unwrap(),
                StateId(to as u32)
            );
            let p = m.predict(e, BehaviourId(0)).unwrap()[to];
            let oracle = (1.0 + 10.0 * k as f64) / (n as f64 + 10.0 * k as f64);
            prop_assert!(close(p, oracle));
        }
        Ok(())
    })
}

struct BookAgent {
    agent: Agent,
    skill: SkillId,
    slide: SensingId,
    r90: BehaviourId,
}

fn book_agent() -> BookAgent {
    let spec = Arc::new(make_book_world_with(0, true, Reliability::PERFECT));
    let agent = Agent::from_world(spec, &Params::default(), 1).unwrap();
    let skill = SkillId(0);
    let r90 = *agent
        .net()
        .behaviours_of(skill)
        .unwrap()
        .iter()
        .find(|&&b| agent.net().behaviour(b).unwrap().name == "rotate90")
        .unwrap();
    BookAgent {
        agent,
        skill,
        slide: SensingId(0),
        r90,
    }
}

fn creativity_playing_weights(cases: u32) -> Result<(), String> {
    let base = book_agent();
    run(
        cases,
        (0.0..=1.0f64, 1.0..1000.0f64, 0u32..4),
        |(cu, h_init, origin)| {
            let mut net = base.agent.net().clone();
            let proposal = CompoundProposal {
                skill: base.skill,
                sensing: base.slide,
                origin: StateId(origin),
                path: vec![base.r90, base.r90],
                target: StateId((origin + 2) % 4),
                curiosity: cu,
            };
            let InsertOutcome::Inserted(id) =
                insert_compound_playing(&mut net, &proposal, h_init).unwrap()
            else {
                return Err(TestCaseError::fail("not inserted"));
            };
            for s in net.sensing_of(base.skill).unwrap() {
                for e in 0..net.state_count(base.skill, s).unwrap() {
                    let row = net
                        .behaviour_weights(base.skill, s, StateId(e as u32))
                        .unwrap();
                    let h = row.iter().find(|x| x.0 == id).unwrap().1;
                    let oracle = if s == base.slide && e as u32 == origin {
                        h_init * (1.0 + cu)
                    } else {
                        h_init
                    };
                    prop_assert!(close(h, oracle));
                }
            }
            prop_assert_eq!(
                insert_compound_playing(&mut net, &proposal, h_init).unwrap(),
                InsertOutcome::Duplicate(id)
            );
            Ok(())
        },
    )
}

fn creativity_env_weights(cases: u32) -> Result<(), String> {
    let base = book_agent();
    run(
        cases,
        (1usize..20, 1usize..20, 0.0..=1.0f64),
        |(c1, c2, cu)| {
            let mut net = base.agent.net().clone();
            let mut models = base.agent.models().clone();
            let slide = models.get_mut(base.skill, base.slide).unwrap();
            for _ in 0..c1 {
                slide
                    .observe_transition(StateId(2), base.r90, StateId(1))
                    .unwrap();
            }
            for _ in 0..c2 {
                slide
                    .observe_transition(StateId(1), base.r90, StateId(0))
                    .unwrap();
            }
            let proposal = CompoundProposal {
                skill: base.skill,
                sensing: base.slide,
                origin: StateId(2),
                path: vec![base.r90, base.r90],
                target: StateId(0),
                curiosity: cu,
            };
            let InsertOutcome::Inserted(id) =
                insert_compound_playing(&mut net, &proposal, 200.0).unwrap()
            else {
                return Err(TestCaseError::fail("not inserted"));
            };
            insert_compound_env(&mut models, &proposal, id).unwrap();
            let h_min = 1.0 + 10.0 * c1.min(c2) as f64;
            for s in net.sensing_of(base.skill).unwrap() {
                let m = models.get(base.skill, s).unwrap();
                for e in 0..m.state_count() {
                    let w = m.weights(StateId(e as u32), id).unwrap();
                    let mut oracle = vec![1.0; m.state_count()];
                    if s == base.slide && e == 2 {
                        oracle[0] = h_min;
                    }
                    prop_assert_eq!(w, oracle);
                }
            }
            Ok(())
        },
    )
}

fn world_sense_purity(cases: u32) -> Result<(), String> {
    run(
        cases,
        (
            any::<u64>(),
            0usize..4,
            0usize..4,
            0usize..20,
            any::<bool>(),
        ),
        |(seed, latent, sensing, extra, tower)| {
            let spec = if tower {
                make_tower_world_with(Reliability::default())
            } else {
                make_book_world_with(extra, false, Reliability::default())
            };
            let sensing = sensing % spec.sensing.len();
            let labels = spec.sensing[sensing].labels.len();
            let mut w =
                WorldInstance::new(Arc::new(spec), rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            w.reset(latent).unwrap();
            for _ in 0..10 {
                let label = w.sense(sensing).unwrap();
                prop_assert!(label < labels);
                prop_assert_eq!(w.latent(), latent);
            }
            Ok(())
        },
    )
}

fn world_distractor_identity(cases: u32) -> Result<(), String> {
    run(
        cases,
        (any::<u64>(), 0usize..4, 1usize..16),
        |(seed, latent, extra)| {
            let spec = make_book_world_with(extra, false, Reliability::PERFECT);
            let distractors: Vec<usize> = (0..spec.behaviours.len())
                .filter(|&b| spec.behaviours[b].name.starts_with("distractor"))
                .collect();
            prop_assert_eq!(distractors.len(), extra);
            let mut w =
                WorldInstance::new(Arc::new(spec), rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            w.reset(latent).unwrap();
            for b in distractors {
                w.apply_behaviour(b).unwrap();
                prop_assert_eq!(w.latent(), latent);
            }
            Ok(())
        },
    )
}

fn emit_run(config: &ExperimentConfig, threads: usize, path: &Path) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let result = pool.install(|| Experiment::new(config.clone()).unwrap().run().unwrap());
    emit_results(&[result], Format::Csv, path).unwrap();
    std::fs::read(path).unwrap()
}

fn byte_identical_reruns(cases: u32) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    // each case is a small simulation, so the case count is capped
    run(
        cases.min(6),
        (any::<u64>(), any::<bool>(), any::<bool>()),
        |(seed, active, creative)| {
            let config = ExperimentConfig {
                robots: 6,
                rollouts: 40,
                seed,
                active_learning: active,
                creativity: creative,
                ..Default::default()
            };
            let a = emit_run(&config, 1, &dir.path().join("a.csv"));
            let b = emit_run(&config, 3, &dir.path().join("b.csv"));
            prop_assert!(!a.is_empty());
            prop_assert_eq!(a, b);
            Ok(())
        },
    )
}
