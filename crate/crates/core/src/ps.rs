//! Projective-simulation clip network.
//!
//! A [`ClipNetwork`] is a weighted directed graph of clips. Hopping from a clip
//! picks a child with probability proportional to the edge weight `h`, and a
//! rewarded walk updates every weight with
//!
//! ```text
//! h' = max(1, h - zeta * (h - 1) + rho * r)
//! ```
//!
//! where `rho` is 1 for edges on the walk and 0 otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClipId(pub u32);

impl ClipId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered clip sequence of a random walk, percept first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WalkPath(pub Vec<ClipId>);

impl WalkPath {
    pub fn edges(&self) -> impl Iterator<Item = (ClipId, ClipId)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

#[derive(Debug, Clone)]
struct Clip<L> {
    label: L,
    // sorted by target id; sampling walks this order
    out: Vec<(ClipId, f64)>,
}

#[derive(Debug, Clone)]
pub struct ClipNetwork<L> {
    clips: Vec<Clip<L>>,
    // set when an edge below 1 was stored; a forgetting-free update then has
    // to sweep the whole network for the floor to apply
    has_sub_unit: bool,
}

impl<L> Default for ClipNetwork<L> {
    fn default() -> Self {
        Self {
            clips: Vec::new(),
            has_sub_unit: false,
        }
    }
}

impl<L> ClipNetwork<L> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_clip(&mut self, label: L) -> ClipId {
        let id = ClipId(u32::try_from(self.clips.len()).expect("clip id overflow"));
        self.clips.push(Clip {
            label,
            out: Vec::new(),
        });
        id
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    pub fn contains(&self, id: ClipId) -> bool {
        id.index() < self.clips.len()
    }

    pub fn label(&self, id: ClipId) -> Result<&L> {
        self.clip(id).map(|c| &c.label)
    }

    fn clip(&self, id: ClipId) -> Result<&Clip<L>> {
        self.clips.get(id.index()).ok_or(Error::MissingClip(id))
    }

    /// Sets the weight of `from -> to`. An existing edge is overwritten.
    pub fn connect(&mut self, from: ClipId, to: ClipId, h: f64) -> Result<()> {
        if !self.contains(to) {
            return Err(Error::MissingClip(to));
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::NonpositiveWeight(h));
        }
        let out = &mut self
            .clips
            .get_mut(from.index())
            .ok_or(Error::MissingClip(from))?
            .out;
        match out.binary_search_by_key(&to, |e| e.0) {
            Ok(i) => out[i].1 = h,
            Err(i) => out.insert(i, (to, h)),
        }
        if h < 1.0 {
            self.has_sub_unit = true;
        }
        Ok(())
    }

    pub fn weight(&self, from: ClipId, to: ClipId) -> Option<f64> {
        let out = &self.clips.get(from.index())?.out;
        out.binary_search_by_key(&to, |e| e.0)
            .ok()
            .map(|i| out[i].1)
    }

    /// Outgoing edges in ascending target order.
    pub fn edges_from(&self, from: ClipId) -> Result<&[(ClipId, f64)]> {
        self.clip(from).map(|c| c.out.as_slice())
    }

    pub fn edge_count(&self) -> usize {
        self.clips.iter().map(|c| c.out.len()).sum()
    }

    pub fn transition_probabilities(&self, from: ClipId) -> Result<Vec<(ClipId, f64)>> {
        let out = &self.clip(from)?.out;
        if out.is_empty() {
            return Err(Error::TerminalClip(from));
        }
        let total: f64 = out.iter().map(|e| e.1).sum();
        Ok(out.iter().map(|&(to, h)| (to, h / total)).collect())
    }

    /// One random-walk hop. The unit interval is split into half-open
    /// segments in ascending target order.
    pub fn sample_next<R: Rng + ?Sized>(&self, from: ClipId, rng: &mut R) -> Result<ClipId> {
        let out = &self.clip(from)?.out;
        let (last, _) = *out.last().ok_or(Error::TerminalClip(from))?;
        let total: f64 = out.iter().map(|e| e.1).sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for &(to, h) in out {
            acc += h;
            if u < acc {
                return Ok(to);
            }
        }
        Ok(last)
    }

    /// Walks from `start` until a clip without outgoing edges is reached.
    pub fn walk<R: Rng + ?Sized>(&self, start: ClipId, rng: &mut R) -> Result<WalkPath> {
        let mut path = vec![start];
        let mut cur = start;
        while !self.clip(cur)?.out.is_empty() {
            cur = self.sample_next(cur, rng)?;
            path.push(cur);
            if path.len() > self.clips.len() + 1 {
                // cyclic graph; every clip has been visited at least once
                break;
            }
        }
        Ok(WalkPath(path))
    }

    pub fn reinforce_path(&mut self, path: &WalkPath, reward: f64, forgetting: f64) -> Result<()> {
        let edges: Vec<_> = path.edges().collect();
        self.reinforce_edges(&edges, reward, forgetting)
    }

    /// Applies the update rule to every edge, with `rho = 1` exactly for the
    /// listed edges. Fails without modifying anything if an edge is missing.
    pub fn reinforce_edges(
        &mut self,
        rewarded: &[(ClipId, ClipId)],
        reward: f64,
        forgetting: f64,
    ) -> Result<()> {
        crate::error::check_range("forgetting", forgetting, 0.0, 1.0)?;
        let mut slots = Vec::with_capacity(rewarded.len());
        for &(from, to) in rewarded {
            let out = &self
                .clips
                .get(from.index())
                .ok_or(Error::BrokenPath(from, to))?
                .out;
            let i = out
                .binary_search_by_key(&to, |e| e.0)
                .map_err(|_| Error::BrokenPath(from, to))?;
            slots.push((from.index(), i));
        }
        slots.sort_unstable();
        slots.dedup();

        if forgetting == 0.0 && !self.has_sub_unit {
            // off-path edges are fixed points of the rule
            for (c, i) in slots {
                let h = &mut self.clips[c].out[i].1;
                *h = (*h + reward).max(1.0);
            }
            return Ok(());
        }

        let mut next = slots.iter().peekable();
        for (c, clip) in self.clips.iter_mut().enumerate() {
            for (i, edge) in clip.out.iter_mut().enumerate() {
                let on_path = next.peek() == Some(&&(c, i));
                if on_path {
                    next.next();
                }
                let h = edge.1;
                let rho = if on_path { 1.0 } else { 0.0 };
                edge.1 = (h - forgetting * (h - 1.0) + rho * reward).max(1.0);
            }
        }
        self.has_sub_unit = false;
        Ok(())
    }
}
