//! Round orchestration, agent lifecycle and run observables.

use thiserror::Error;

use crate::decision::{
    choose_destination, choose_exit, crowd_counts, Agent, CrowdCountGrid, DecisionContext,
    DecisionError, Displacement,
};
use crate::dynamic_field::DynamicField;
use crate::movement::{execute_round, NetMove, RoundPlan, StepRecord};
use crate::occupancy::Occupancy;
use crate::rng::{Purpose, RoundStreams};
use crate::scenario::{CellKind, Grid, Pos, ScenarioSpec, SimConfig};
use crate::static_field::{
    compute_static_field, compute_wall_distance, StaticField, WallDistanceField,
};

/// Edge length of one cell in meters.
pub const CELL_SIZE_M: f64 = 0.4;
/// Duration of one round in seconds.
pub const ROUND_SECONDS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("profile `{0}` is not defined")]
    MissingProfile(String),
    #[error(transparent)]
    Decision(#[from] DecisionError),
}

/// Everything that changed in one round.
#[derive(Debug, Clone, Default)]
pub struct RoundReport {
    /// Round number that just completed (1-based).
    pub round: u32,
    pub moves: Vec<NetMove>,
    pub steps: Vec<StepRecord>,
    /// Agents removed because they ended the round on an exit cell.
    pub exited: Vec<usize>,
}

/// Complete state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Number of completed rounds.
    pub round: u32,
    pub grid: Grid,
    pub agents: Vec<Agent>,
    pub occupancy: Occupancy,
    pub statics: Vec<StaticField>,
    pub walls: WallDistanceField,
    pub dynamic: DynamicField,
    pub counts: CrowdCountGrid,
    pub config: SimConfig,
}

impl SimState {
    /// Precomputes the fields and spawns one agent per spawn point.
    pub fn new(spec: &ScenarioSpec, config: &SimConfig) -> Result<Self, SimError> {
        config.validate().map_err(SimError::Config)?;
        let grid = spec.grid.clone();
        let statics: Vec<StaticField> = (0..grid.exit_count())
            .map(|e| compute_static_field(&grid, e))
            .collect();
        let walls = compute_wall_distance(&grid, config.w_max);
        let mut occupancy = Occupancy::new(&grid);
        let mut agents = Vec::with_capacity(spec.spawns.len());
        for (id, spawn) in spec.spawns.iter().enumerate() {
            let profile = spec
                .profiles
                .get(&spawn.profile)
                .ok_or_else(|| SimError::MissingProfile(spawn.profile.clone()))?;
            let agent = Agent::from_spawn(id, spawn, profile, grid.exit_count());
            let reachable = agent
                .allowed_exits
                .iter()
                .any(|&e| statics[e].distance_at(agent.pos).is_finite());
            if !reachable {
                return Err(DecisionError::NoReachableExit {
                    agent: id,
                    pos: agent.pos,
                }
                .into());
            }
            occupancy.place(agent.pos, id);
            agents.push(agent);
        }
        let counts = crowd_counts(&occupancy, &grid);
        let dynamic = DynamicField::new(&grid);
        Ok(Self {
            round: 0,
            grid,
            agents,
            occupancy,
            statics,
            walls,
            dynamic,
            counts,
            config: config.clone(),
        })
    }

    pub fn alive_count(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    /// Decides every alive agent's exit and destination against the state at
    /// the start of the round.
    pub fn plan_round(&mut self, streams: &RoundStreams) -> Result<RoundPlan, SimError> {
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            let mut rng = streams.stream(a.id as u64, Purpose::Exit);
            choose_exit(a, &self.statics, &mut rng)?;
        }
        let ctx = DecisionContext {
            grid: &self.grid,
            statics: &self.statics,
            walls: &self.walls,
            dynamic: &self.dynamic,
            occupancy: &self.occupancy,
            counts: &self.counts,
        };
        let mut plan = RoundPlan::new();
        for a in self.agents.iter().filter(|a| a.alive) {
            let mut rng = streams.stream(a.id as u64, Purpose::Destination);
            plan.insert(a.id, choose_destination(a, &ctx, &mut rng));
        }
        Ok(plan)
    }

    /// Runs the step phase for `plan` and the end-of-round bookkeeping.
    pub fn finish_round(&mut self, plan: &RoundPlan, streams: &RoundStreams) -> RoundReport {
        let mut steps = Vec::new();
        let mut rng = streams.stream(0, Purpose::Movement);
        let moves = execute_round(
            plan,
            &mut self.agents,
            &mut self.occupancy,
            &self.grid,
            &mut rng,
            Some(&mut steps),
        );

        self.dynamic
            .record_moves(moves.iter().map(|m| (m.from, m.to)));
        self.dynamic
            .decay_and_diffuse(&self.grid, self.config.delta, self.config.alpha, streams);
        for m in &moves {
            self.agents[m.agent].last_disp = Displacement::between(m.from, m.to);
        }

        let mut exited = Vec::new();
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            if matches!(self.grid.kind(a.pos), CellKind::Exit(_)) {
                a.alive = false;
                self.occupancy.clear(a.pos);
                exited.push(a.id);
            }
        }
        self.counts = crowd_counts(&self.occupancy, &self.grid);
        self.round += 1;
        debug_assert_eq!(self.occupancy.count(), self.alive_count());

        RoundReport {
            round: self.round,
            moves,
            steps,
            exited,
        }
    }

    /// One full round: exit choice, destination choice, steps, field update,
    /// exit removal, crowd recount.
    pub fn run_round(&mut self) -> Result<RoundReport, SimError> {
        let streams = RoundStreams::new(self.config.seed, self.round as u64);
        let plan = self.plan_round(&streams)?;
        Ok(self.finish_round(&plan, &streams))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryRow {
    pub round: u32,
    pub agent: usize,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Rounds until the last agent left, `None` if `max_rounds` ran out.
    pub evacuation_rounds: Option<u32>,
    pub rounds_run: u32,
    /// Alive agents after each round; index 0 is the initial population.
    pub alive_counts: Vec<usize>,
    /// Round in which each agent left, by agent id.
    pub exit_rounds: Vec<Option<u32>>,
    /// Spawn positions (round 0) and end-of-round positions, ordered by
    /// round then agent id.
    pub trajectory: Vec<TrajectoryRow>,
    /// Per-cell count of trajectory rows at that cell.
    pub density: Vec<u64>,
    /// Executed steps tagged with their round.
    pub step_log: Vec<(u32, StepRecord)>,
    pub final_dynamic: DynamicField,
}

impl SimResult {
    pub fn agents_total(&self) -> usize {
        self.exit_rounds.len()
    }

    pub fn evacuated(&self) -> usize {
        self.exit_rounds.iter().filter(|r| r.is_some()).count()
    }

    pub fn evacuation_seconds(&self) -> Option<f64> {
        self.evacuation_rounds.map(|r| r as f64 * ROUND_SECONDS)
    }
}

pub fn run_simulation(spec: &ScenarioSpec, config: &SimConfig) -> Result<SimResult, SimError> {
    let mut state = SimState::new(spec, config)?;
    let n = state.agents.len();
    let mut result = SimResult {
        seed: config.seed,
        width: state.grid.width(),
        height: state.grid.height(),
        evacuation_rounds: None,
        rounds_run: 0,
        alive_counts: vec![n],
        exit_rounds: vec![None; n],
        trajectory: Vec::new(),
        density: vec![0; state.grid.len()],
        step_log: Vec::new(),
        final_dynamic: state.dynamic.clone(),
    };
    let record = |result: &mut SimResult, round: u32, agent: usize, pos: Pos, grid: &Grid| {
        result.trajectory.push(TrajectoryRow { round, agent, pos });
        result.density[grid.index(pos)] += 1;
    };
    for a in &state.agents {
        record(&mut result, 0, a.id, a.pos, &state.grid);
    }

    while state.alive_count() > 0 && state.round < config.max_rounds {
        let alive_before: Vec<usize> = state
            .agents
            .iter()
            .filter(|a| a.alive)
            .map(|a| a.id)
            .collect();
        let report = state.run_round()?;
        for id in alive_before {
            record(
                &mut result,
                report.round,
                id,
                state.agents[id].pos,
                &state.grid,
            );
        }
        for &id in &report.exited {
            result.exit_rounds[id] = Some(report.round);
        }
        result
            .step_log
            .extend(report.steps.into_iter().map(|s| (report.round, s)));
        result.alive_counts.push(state.alive_count());
    }

    result.rounds_run = state.round;
    if state.alive_count() == 0 {
        result.evacuation_rounds = Some(state.round);
    }
    result.final_dynamic = state.dynamic;
    Ok(result)
}
