//! Sequential step phase.
//!
//! Agents walk toward their destinations one Moore step at a time, in a
//! random interleaving. Every cell that is stood on during the round stays
//! blocked for everyone else until the round ends.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::decision::Agent;
use crate::occupancy::Occupancy;
use crate::scenario::{moore_neighbors, Grid, Pos};

/// Destination per agent id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundPlan {
    pub entries: BTreeMap<usize, Pos>,
}

impl RoundPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, agent: usize, dest: Pos) {
        self.entries.insert(agent, dest);
    }

    pub fn destination(&self, agent: usize) -> Option<Pos> {
        self.entries.get(&agent).copied()
    }
}

/// Cells that have been occupied at some point of the current round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSet {
    width: usize,
    blocked: Vec<bool>,
}

impl BlockSet {
    pub fn new(g: &Grid) -> Self {
        Self {
            width: g.width(),
            blocked: vec![false; g.len()],
        }
    }

    fn index(&self, p: Pos) -> usize {
        p.y as usize * self.width + p.x as usize
    }

    pub fn block(&mut self, p: Pos) {
        let i = self.index(p);
        self.blocked[i] = true;
    }

    pub fn is_blocked(&self, p: Pos) -> bool {
        self.blocked[self.index(p)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved(Pos),
    Finished,
}

/// One executed step, for logs and replay checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub agent: usize,
    pub from: Pos,
    pub to: Pos,
}

/// Start and end of one agent's round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetMove {
    pub agent: usize,
    pub from: Pos,
    pub to: Pos,
}

/// Shuffled step tokens: each planned agent appears once per Moore step
/// separating it from its destination.
pub fn build_step_sequence<R: Rng + ?Sized>(
    plan: &RoundPlan,
    agents: &[Agent],
    rng: &mut R,
) -> Vec<usize> {
    let mut tokens = Vec::new();
    for (&id, &dest) in &plan.entries {
        let n = agents[id].pos.chebyshev(dest);
        tokens.extend(std::iter::repeat_n(id, n as usize));
    }
    tokens.shuffle(rng);
    tokens
}

/// Greedy step toward `dest`: the unblocked, non-wall Moore neighbor closest
/// to `dest`, provided it is strictly closer than the current cell and still
/// inside the agent's speed disc around `round_start`. Diagonal squeezes
/// between two walls are not taken. Ties are broken uniformly.
pub fn execute_step<R: Rng + ?Sized>(
    a: &Agent,
    round_start: Pos,
    dest: Pos,
    blocks: &mut BlockSet,
    g: &Grid,
    rng: &mut R,
) -> StepOutcome {
    let reach2 = a.v_max as i64 * a.v_max as i64;
    let mut best = a.pos.dist2(dest);
    let mut ties: Vec<Pos> = Vec::with_capacity(8);
    for q in moore_neighbors(a.pos, g) {
        if g.kind(q).is_wall()
            || blocks.is_blocked(q)
            || g.cuts_corner(a.pos, q)
            || round_start.dist2(q) > reach2
        {
            continue;
        }
        let d = q.dist2(dest);
        if d < best {
            best = d;
            ties.clear();
            ties.push(q);
        } else if d == best && !ties.is_empty() {
            ties.push(q);
        }
    }
    let target = match ties.len() {
        0 => return StepOutcome::Finished,
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    };
    blocks.block(target);
    StepOutcome::Moved(target)
}

/// Runs the step phase of one round.
///
/// Agents in `plan` move in the order given by [`build_step_sequence`];
/// `occupancy` is kept in sync after every step and panics if two agents
/// would share a cell. Returns the net move of each planned agent, in agent
/// id order.
pub fn execute_round<R: Rng + ?Sized>(
    plan: &RoundPlan,
    agents: &mut [Agent],
    occupancy: &mut Occupancy,
    g: &Grid,
    rng: &mut R,
    mut log: Option<&mut Vec<StepRecord>>,
) -> Vec<NetMove> {
    let mut blocks = BlockSet::new(g);
    for a in agents.iter().filter(|a| a.alive) {
        blocks.block(a.pos);
    }
    let starts: BTreeMap<usize, Pos> = plan
        .entries
        .keys()
        .map(|&id| (id, agents[id].pos))
        .collect();
    let mut finished = vec![false; agents.len()];
    let sequence = build_step_sequence(plan, agents, rng);

    for (step, id) in sequence.into_iter().enumerate() {
        let dest = plan.entries[&id];
        let a = &agents[id];
        if finished[id] || a.pos == dest {
            continue;
        }
        match execute_step(a, starts[&id], dest, &mut blocks, g, rng) {
            StepOutcome::Finished => finished[id] = true,
            StepOutcome::Moved(to) => {
                let from = a.pos;
                assert_eq!(
                    occupancy.clear(from),
                    Some(id),
                    "occupancy out of sync at {from}"
                );
                occupancy.place(to, id);
                agents[id].pos = to;
                if let Some(log) = log.as_deref_mut() {
                    log.push(StepRecord {
                        step,
                        agent: id,
                        from,
                        to,
                    });
                }
            }
        }
    }

    starts
        .into_iter()
        .map(|(id, from)| NetMove {
            agent: id,
            from,
            to: agents[id].pos,
        })
        .collect()
}
