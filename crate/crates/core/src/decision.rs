//! Exit choice and destination-cell choice.
//!
//! Destination probabilities are the normalized product of five factors
//! (static field, dynamic field, inertia, wall distance, crowd politeness).
//! All factors are handled as log-weights and normalized with max
//! subtraction, so large couplings never overflow.

use rand::Rng;
use thiserror::Error;

use crate::dynamic_field::DynamicField;
use crate::occupancy::Occupancy;
use crate::scenario::{moore_neighbors, neighborhood, Grid, Pos, Profile, Spawn};
use crate::static_field::{StaticField, WallDistanceField};

/// Integer displacement vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Displacement {
    pub dx: i32,
    pub dy: i32,
}

impl Displacement {
    pub const ZERO: Self = Self { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    pub fn between(from: Pos, to: Pos) -> Self {
        Self::new(to.x - from.x, to.y - from.y)
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    pub fn length(self) -> f64 {
        ((self.dx as f64).powi(2) + (self.dy as f64).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub pos: Pos,
    pub v_max: u32,
    pub k_s: f64,
    pub k_d: f64,
    pub k_i: f64,
    pub k_w: f64,
    pub k_p: f64,
    pub k_e: f64,
    pub allowed_exits: Vec<usize>,
    pub chosen_exit: Option<usize>,
    /// Net displacement of the previous round.
    pub last_disp: Displacement,
    pub alive: bool,
}

impl Agent {
    pub fn from_profile(id: usize, pos: Pos, profile: &Profile, exit_count: usize) -> Self {
        Self {
            id,
            pos,
            v_max: profile.v_max,
            k_s: profile.k_s,
            k_d: profile.k_d,
            k_i: profile.k_i,
            k_w: profile.k_w,
            k_p: profile.k_p,
            k_e: profile.k_e,
            allowed_exits: profile.exits.resolve(exit_count),
            chosen_exit: None,
            last_disp: Displacement::ZERO,
            alive: true,
        }
    }

    pub fn from_spawn(id: usize, spawn: &Spawn, profile: &Profile, exit_count: usize) -> Self {
        Self::from_profile(id, spawn.pos, profile, exit_count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("agent {agent} at {pos} cannot reach any allowed exit")]
    NoReachableExit { agent: usize, pos: Pos },
}

/// Number of occupied Moore neighbors per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdCountGrid {
    width: usize,
    counts: Vec<u8>,
}

impl CrowdCountGrid {
    pub fn count_at(&self, p: Pos) -> u8 {
        self.counts[p.y as usize * self.width + p.x as usize]
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }
}

pub fn crowd_counts(occupancy: &Occupancy, g: &Grid) -> CrowdCountGrid {
    let mut counts = vec![0u8; g.len()];
    for (i, cell) in occupancy.cells().iter().enumerate() {
        if cell.is_some() {
            for q in moore_neighbors(g.pos(i), g) {
                counts[g.index(q)] += 1;
            }
        }
    }
    CrowdCountGrid {
        width: g.width(),
        counts,
    }
}

/// Unnormalized exit weights `(1 + [E was last chosen]·k_E) / max(S, 1)²`,
/// one per allowed exit; unreachable exits weigh 0.
pub fn exit_weights(a: &Agent, fields: &[StaticField]) -> Vec<(usize, f64)> {
    a.allowed_exits
        .iter()
        .map(|&e| {
            let s = fields[e].distance_at(a.pos);
            if !s.is_finite() {
                return (e, 0.0);
            }
            let persistence = if a.chosen_exit == Some(e) { a.k_e } else { 0.0 };
            let s = s.max(1.0);
            (e, (1.0 + persistence) / (s * s))
        })
        .collect()
}

pub fn exit_probabilities(a: &Agent, fields: &[StaticField]) -> Vec<(usize, f64)> {
    let w = exit_weights(a, fields);
    let total: f64 = w.iter().map(|(_, w)| w).sum();
    w.into_iter().map(|(e, w)| (e, w / total)).collect()
}

/// Samples an exit for `a` and stores it as the agent's choice.
pub fn choose_exit<R: Rng + ?Sized>(
    a: &mut Agent,
    fields: &[StaticField],
    rng: &mut R,
) -> Result<usize, DecisionError> {
    let weights = exit_weights(a, fields);
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(DecisionError::NoReachableExit {
            agent: a.id,
            pos: a.pos,
        });
    }
    let exit = sample_weighted(&weights, total, rng);
    a.chosen_exit = Some(exit);
    Ok(exit)
}

fn sample_weighted<T: Copy, R: Rng + ?Sized>(items: &[(T, f64)], total: f64, rng: &mut R) -> T {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for &(item, w) in items {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(item);
        if u < acc {
            return item;
        }
    }
    // u landed in the rounding gap above the accumulated sum
    last.expect("at least one positive weight")
}

/// The agent's disc neighborhood minus cells held by other agents. The
/// agent's own cell is always included.
pub fn candidate_cells(a: &Agent, g: &Grid, occupancy: &Occupancy) -> Vec<Pos> {
    neighborhood(a.pos, a.v_max, g)
        .into_iter()
        .filter(|&c| c == a.pos || occupancy.get(c).is_none_or(|id| id == a.id))
        .collect()
}

pub fn logw_static(k_s: f64, distance: f64) -> f64 {
    if !distance.is_finite() {
        f64::NEG_INFINITY
    } else {
        -k_s * distance
    }
}

/// `field` is read at the candidate; `offset` is candidate minus current cell.
pub fn logw_dynamic(k_d: f64, offset: Displacement, field: (i64, i64)) -> f64 {
    k_d * (field.0 as f64 * offset.dx as f64 + field.1 as f64 * offset.dy as f64)
}

/// Centrifugal penalty `-k_I (|offset| + |last|) sin(|φ|/2)`, with φ the
/// angle between the previous displacement and the candidate offset.
pub fn logw_inertia(k_i: f64, last: Displacement, offset: Displacement) -> f64 {
    if last.is_zero() || offset.is_zero() || k_i == 0.0 {
        return 0.0;
    }
    let (v_t, v_next) = (last.length(), offset.length());
    let (ax, ay) = (last.dx as f64, last.dy as f64);
    let (bx, by) = (offset.dx as f64, offset.dy as f64);
    // |φ| from cross and dot products; exact for parallel vectors
    let phi = (ax * by - ay * bx).abs().atan2(ax * bx + ay * by);
    let half_sin = (phi / 2.0).sin();
    -k_i * (v_next + v_t) * half_sin
}

/// `-k_W (w_max - W)` inside the wall band, 0 at or beyond `w_max`.
pub fn logw_wall(k_w: f64, wall_distance: f64, w_max: f64) -> f64 {
    if k_w == 0.0 || wall_distance >= w_max {
        0.0
    } else {
        -k_w * (w_max - wall_distance)
    }
}

pub fn logw_polite(k_p: f64, neighbors: u8) -> f64 {
    -k_p * neighbors as f64
}

/// Frozen world view used by the decision phase.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub grid: &'a Grid,
    pub statics: &'a [StaticField],
    pub walls: &'a WallDistanceField,
    pub dynamic: &'a DynamicField,
    pub occupancy: &'a Occupancy,
    pub counts: &'a CrowdCountGrid,
}

impl DecisionContext<'_> {
    /// Sum of the five log-weights for moving `a` to `c`.
    pub fn log_weight(&self, a: &Agent, c: Pos) -> f64 {
        let exit = a
            .chosen_exit
            .expect("exit must be chosen before the destination");
        let offset = Displacement::between(a.pos, c);
        let ls = logw_static(a.k_s, self.statics[exit].distance_at(c));
        if ls == f64::NEG_INFINITY {
            return ls;
        }
        ls + logw_dynamic(a.k_d, offset, self.dynamic.field_at(c))
            + logw_inertia(a.k_i, a.last_disp, offset)
            + logw_wall(a.k_w, self.walls.distance_at(c), self.walls.w_max())
            + logw_polite(a.k_p, self.counts.count_at(c))
    }
}

/// Normalized destination probabilities over the candidate cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationDistribution {
    pub candidates: Vec<(Pos, f64)>,
}

impl DestinationDistribution {
    /// Normalizes log-weights with max subtraction. If every weight is
    /// `-inf` the mass goes to `fallback`.
    pub fn from_log_weights(log_weights: Vec<(Pos, f64)>, fallback: Pos) -> Self {
        let max = log_weights
            .iter()
            .map(|&(_, l)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            let candidates = log_weights
                .into_iter()
                .map(|(c, _)| (c, if c == fallback { 1.0 } else { 0.0 }))
                .collect();
            return Self { candidates };
        }
        let mut candidates: Vec<(Pos, f64)> = log_weights
            .into_iter()
            .map(|(c, l)| (c, (l - max).exp()))
            .collect();
        let total: f64 = candidates.iter().map(|(_, w)| w).sum();
        for (_, w) in &mut candidates {
            *w /= total;
        }
        Self { candidates }
    }

    pub fn probability_of(&self, p: Pos) -> f64 {
        self.candidates
            .iter()
            .find(|(c, _)| *c == p)
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pos {
        let total: f64 = self.candidates.iter().map(|(_, w)| w).sum();
        sample_weighted(&self.candidates, total, rng)
    }
}

pub fn destination_distribution(a: &Agent, ctx: &DecisionContext<'_>) -> DestinationDistribution {
    let log_weights = candidate_cells(a, ctx.grid, ctx.occupancy)
        .into_iter()
        .map(|c| (c, ctx.log_weight(a, c)))
        .collect();
    DestinationDistribution::from_log_weights(log_weights, a.pos)
}

pub fn choose_destination<R: Rng + ?Sized>(
    a: &Agent,
    ctx: &DecisionContext<'_>,
    rng: &mut R,
) -> Pos {
    destination_distribution(a, ctx).sample(rng)
}
