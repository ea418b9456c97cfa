//! Plain-text renderings of run results: CSV trajectories, key=value
//! summaries, PGM images and ASCII snapshots.

use std::fmt::Write as _;

use crate::dynamic_field::DynamicField;
use crate::engine::{SimResult, CELL_SIZE_M, ROUND_SECONDS};
use crate::scenario::{CellKind, Grid, Pos};

pub fn trajectories_csv(result: &SimResult) -> String {
    let mut out = String::from("round,agent_id,x,y\n");
    for row in &result.trajectory {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.round, row.agent, row.pos.x, row.pos.y
        );
    }
    out
}

pub fn summary(result: &SimResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed={}", result.seed);
    let _ = writeln!(out, "agents_total={}", result.agents_total());
    let _ = writeln!(out, "evacuated={}", result.evacuated());
    match result.evacuation_rounds {
        Some(r) => {
            let _ = writeln!(out, "evacuation_rounds={r}");
            let _ = writeln!(out, "evacuation_seconds={:.1}", r as f64 * ROUND_SECONDS);
        }
        None => {
            let _ = writeln!(out, "evacuation_rounds=none");
            let _ = writeln!(out, "evacuation_seconds=none");
        }
    }
    let _ = writeln!(out, "rounds_run={}", result.rounds_run);
    let exits: Vec<u32> = result.exit_rounds.iter().flatten().copied().collect();
    if !exits.is_empty() {
        let mean = exits.iter().map(|&r| r as f64).sum::<f64>() / exits.len() as f64;
        let _ = writeln!(out, "mean_exit_seconds={:.3}", mean * ROUND_SECONDS);
    }
    let _ = writeln!(out, "cell_size_m={CELL_SIZE_M}");
    let _ = writeln!(out, "round_seconds={ROUND_SECONDS:.1}");
    out
}

fn pgm(width: usize, height: usize, max: u32, values: impl Iterator<Item = u32>) -> String {
    let mut out = format!("P2\n{width} {height}\n{max}\n");
    let values: Vec<u32> = values.collect();
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Visit counts rescaled to 0–255.
pub fn heatmap_pgm(result: &SimResult) -> String {
    let max = result.density.iter().copied().max().unwrap_or(0);
    let scaled = result.density.iter().map(|&c| {
        if max == 0 {
            0
        } else {
            ((c as f64 * 255.0 / max as f64).round()) as u32
        }
    });
    pgm(result.width, result.height, 255, scaled)
}

/// Distance field rescaled to 0–65535; unreachable cells map to 65535.
pub fn distance_pgm(width: usize, height: usize, values: &[f64]) -> String {
    let max = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let scaled = values.iter().map(|&v| {
        if !v.is_finite() {
            65535
        } else if max == 0.0 {
            0
        } else {
            (v / max * 65535.0).round() as u32
        }
    });
    pgm(width, height, 65535, scaled)
}

/// Signed field component offset-encoded around the mid grey value:
/// `value + m` with `m = max |value|`, image maximum `2m`.
pub fn signed_pgm(width: usize, height: usize, values: &[i64]) -> String {
    let m = values
        .iter()
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0)
        .max(1);
    pgm(
        width,
        height,
        (2 * m) as u32,
        values.iter().map(|&v| (v + m as i64) as u32),
    )
}

pub fn dynamic_pgms(f: &DynamicField) -> (String, String) {
    (
        signed_pgm(f.width(), f.height(), f.dx()),
        signed_pgm(f.width(), f.height(), f.dy()),
    )
}

pub fn render_map(grid: &Grid, agents: impl IntoIterator<Item = Pos>) -> String {
    let mut chars: Vec<char> = grid
        .cells()
        .iter()
        .map(|c| match c {
            CellKind::Wall => 'W',
            CellKind::Floor => '.',
            CellKind::Exit(_) => 'E',
        })
        .collect();
    for p in agents {
        chars[grid.index(p)] = 'o';
    }
    let mut out = String::with_capacity(chars.len() + grid.height());
    for row in chars.chunks(grid.width()) {
        out.extend(row);
        out.push('\n');
    }
    out
}

/// One ASCII map per round, each preceded by a `% round N` line.
pub fn snapshots(result: &SimResult, grid: &Grid) -> String {
    let mut out = String::new();
    let mut rows = result.trajectory.iter().peekable();
    for round in 0..=result.rounds_run {
        let mut positions = Vec::new();
        while let Some(row) = rows.peek() {
            if row.round != round {
                break;
            }
            // an agent drawn on its exit cell is leaving this round
            positions.push(row.pos);
            rows.next();
        }
        let _ = writeln!(out, "% round {round}");
        out.push_str(&render_map(grid, positions));
    }
    out
}

pub fn step_log(result: &SimResult) -> String {
    let mut out = String::new();
    for (round, s) in &result.step_log {
        let _ = writeln!(
            out,
            "{round} {} {} {} {} {} {}",
            s.step, s.agent, s.from.x, s.from.y, s.to.x, s.to.y
        );
    }
    out
}
