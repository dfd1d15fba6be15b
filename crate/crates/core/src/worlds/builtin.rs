use super::{Grasp, WorldBehaviour, WorldSensing, WorldSkill, WorldSpec};

/// Book orientations in degrees, in latent-state order.
pub const BOOK_ORIENTATIONS: [u32; 4] = [0, 90, 180, 270];

const NO_SENSING_ACCURACY: f64 = 0.5;

/// Reliability of the built-in worlds: success rate of every controller
/// (behaviours and basic behaviours) and accuracy of the informative
/// sensing action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reliability {
    pub controller: f64,
    pub sensing: f64,
}

impl Default for Reliability {
    fn default() -> Self {
        Self {
            controller: 0.95,
            sensing: 0.95,
        }
    }
}

impl Reliability {
    pub const PERFECT: Reliability = Reliability {
        controller: 1.0,
        sensing: 1.0,
    };

    fn behaviour(&self, name: &str, transitions: Vec<Option<usize>>) -> WorldBehaviour {
        WorldBehaviour {
            name: name.to_string(),
            void: false,
            transitions,
            success_rate: self.controller,
            grasp: Grasp::Neutral,
        }
    }
}

fn identity(n: usize) -> Vec<Option<usize>> {
    (0..n).map(Some).collect()
}

fn diagonal_sensing(name: &str, prefix: &str, n: usize, accuracy: f64) -> WorldSensing {
    let off = (1.0 - accuracy) / (n - 1) as f64;
    WorldSensing {
        name: name.to_string(),
        labels: (0..n).map(|i| format!("{prefix}{i}")).collect(),
        confusion: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { accuracy } else { off })
                    .collect()
            })
            .collect(),
        truth: (0..n).collect(),
        grasp_requirement: Grasp::Ungrasped,
        accuracy: None,
    }
}

fn no_sensing(n: usize) -> WorldSensing {
    WorldSensing {
        name: "none".into(),
        labels: vec!["any".into()],
        confusion: vec![vec![1.0]; n],
        truth: vec![0; n],
        grasp_requirement: Grasp::Neutral,
        accuracy: Some(NO_SENSING_ACCURACY),
    }
}

fn book_world(num_distractors: usize, creative: bool, rel: Reliability) -> WorldSpec {
    let behaviour = |name: &str, t| rel.behaviour(name, t);
    let n = BOOK_ORIENTATIONS.len();
    let rotate =
        |k: usize| -> Vec<Option<usize>> { (0..n).map(|s| Some((s + n - k) % n)).collect() };

    let mut behaviours = vec![
        WorldBehaviour {
            void: true,
            ..behaviour("void", identity(n))
        },
        behaviour("rotate90", rotate(1)),
        behaviour("rotate180", rotate(2)),
        behaviour("rotate270", rotate(3)),
        behaviour("flip", identity(n)),
    ];
    behaviours
        .extend((1..=num_distractors).map(|i| behaviour(&format!("distractor{i}"), identity(n))));
    let grasp = behaviours.len();
    behaviours.push(behaviour("grasp", identity(n)));

    let mut preparatory: Vec<usize> = (0..grasp).collect();
    if creative {
        // only void, rotate90 and flip (plus distractors) are seeded
        preparatory.retain(|&b| b != 2 && b != 3);
    }

    WorldSpec {
        name: if creative { "book-creative" } else { "book" }.into(),
        states: BOOK_ORIENTATIONS.iter().map(|d| d.to_string()).collect(),
        behaviours,
        sensing: vec![
            diagonal_sensing("slide", "slide", n, rel.sensing),
            diagonal_sensing("press", "press", n, 1.0 / n as f64),
            diagonal_sensing("poke", "poke", n, 1.0 / n as f64),
            no_sensing(n),
        ],
        skills: vec![WorldSkill {
            name: "grasp_book".into(),
            basic: grasp,
            success: (0..n).map(|s| s == 0).collect(),
            preparatory,
            requires_grasp: false,
        }],
    }
}

/// Book grasping: four orientations, grasping works at 0 degrees only.
/// Behaviours are void, three rotations, flip and `num_distractors` useless
/// behaviours, so `J = 5 + num_distractors`.
pub fn make_book_world(num_distractors: usize) -> WorldSpec {
    book_world(num_distractors, false, Reliability::default())
}

/// Book world whose skill is seeded without rotate180 and rotate270, which
/// have to be composed from rotate90.
pub fn make_book_world_creative(num_distractors: usize) -> WorldSpec {
    book_world(num_distractors, true, Reliability::default())
}

/// Book world with explicit reliability; `creative` seeds only void,
/// rotate90 and flip.
pub fn make_book_world_with(num_distractors: usize, creative: bool, rel: Reliability) -> WorldSpec {
    book_world(num_distractors, creative, rel)
}

/// Tower disassembly with heights 0 to 3. Each placement removes one box;
/// the shelf behaviours only work on the last box and topple higher towers.
/// The skill succeeds when the tower is gone, so height 3 needs a
/// composition of three removals.
pub fn make_tower_world() -> WorldSpec {
    make_tower_world_with(Reliability::default())
}

pub fn make_tower_world_with(rel: Reliability) -> WorldSpec {
    let behaviour = |name: &str, t| rel.behaviour(name, t);
    let n = 4;
    let remove_one: Vec<Option<usize>> = (0..n).map(|h: usize| Some(h.saturating_sub(1))).collect();
    let last_box_only: Vec<Option<usize>> = (0..n)
        .map(|h| if h <= 1 { Some(0) } else { None })
        .collect();
    let behaviours = vec![
        WorldBehaviour {
            void: true,
            ..behaviour("void", identity(n))
        },
        behaviour("simple_placement", remove_one),
        behaviour("shelf_placement", last_box_only.clone()),
        behaviour("shelf_alignment", last_box_only),
    ];
    WorldSpec {
        name: "tower".into(),
        states: (0..n).map(|h| format!("h{h}")).collect(),
        behaviours,
        sensing: vec![
            diagonal_sensing("poke", "height", n, rel.sensing),
            no_sensing(n),
        ],
        skills: vec![WorldSkill {
            name: "disassemble".into(),
            basic: 0,
            success: (0..n).map(|h| h == 0).collect(),
            preparatory: vec![0, 1, 2, 3],
            requires_grasp: false,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn behaviour_counts() {
        assert_eq!(make_book_world(0).skills[0].preparatory.len(), 5);
        assert_eq!(make_book_world(15).skills[0].preparatory.len(), 20);
        let c = make_book_world_creative(0);
        let names: Vec<_> = c.skills[0]
            .preparatory
            .iter()
            .map(|&b| c.behaviours[b].name.as_str())
            .collect();
        assert_eq!(names, ["void", "rotate90", "flip"]);
        for spec in [
            make_book_world(3),
            make_book_world_creative(2),
            make_tower_world(),
        ] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn tower_height_three_needs_composition() {
        let spec = make_tower_world();
        for b in &spec.behaviours {
            assert_ne!(b.transitions[3], Some(0), "{} clears h3 directly", b.name);
        }
    }
}
