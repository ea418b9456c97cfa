//! Floor-field and agent-based pedestrian evacuation simulator.
//!
//! Agents live on an orthogonal lattice of 0.4 m cells and act in rounds of
//! one second. Each round every agent picks an exit, then a destination
//! cell within its speed disc, sampled from five weighted influences (static
//! distance field, dynamic trace field, inertia, wall distance, crowd
//! politeness). Agents then walk toward their destinations in a random
//! interleaving of single steps, with every visited cell blocked for others
//! until the round ends.
//!
//! Runs are reproducible: all randomness comes from counter-based streams
//! keyed by seed, round, entity and purpose (see [`rng`]).

pub mod cli;
pub mod decision;
pub mod dynamic_field;
pub mod engine;
pub mod movement;
pub mod occupancy;
pub mod output;
pub mod rng;
pub mod scenario;
pub mod static_field;

pub use decision::{Agent, Displacement};
pub use engine::{run_simulation, SimError, SimResult, SimState};
pub use scenario::{parse_scenario, CellKind, Grid, Pos, ScenarioSpec, SimConfig};
